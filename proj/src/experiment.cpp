#include "bsg/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace bsg {

std::string to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::TotalSpace: return "total_space";
    case ExperimentMode::UnitBundle: return "unit_bundle";
    case ExperimentMode::HorizontalLift: return "horizontal_lift";
    case ExperimentMode::ResidualCheck: return "residual_check";
    case ExperimentMode::OracleCheck: return "oracle_check";
  }
  return "unknown";
}

std::optional<ExperimentMode> parse_mode(const std::string& text) {
  for (auto m : {ExperimentMode::TotalSpace, ExperimentMode::UnitBundle,
                 ExperimentMode::HorizontalLift, ExperimentMode::ResidualCheck,
                 ExperimentMode::OracleCheck}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

namespace {

// Collects field-level problems while reading a JSON object.
class FieldReader {
 public:
  FieldReader(const Json& obj, std::string prefix, std::vector<std::string>& errors)
      : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {}

  bool has(const char* key) const { return obj_.contains(key); }

  void only(std::initializer_list<const char*> keys) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!allowed.count(it.key())) fail(it.key(), "unknown field");
    }
  }

  void number(const char* key, double& out) {
    if (!has(key)) return;
    if (!obj_[key].is_number()) return fail(key, "expected a number");
    out = obj_[key].get<double>();
    if (!std::isfinite(out)) fail(key, "must be finite");
  }

  void positive(const char* key, double& out) {
    if (!has(key)) return;
    number(key, out);
    if (!(out > 0.0)) fail(key, "must be positive");
  }

  void integer(const char* key, int& out, int min) {
    if (!has(key)) return;
    if (!obj_[key].is_number_integer()) return fail(key, "expected an integer");
    out = obj_[key].get<int>();
    if (out < min) fail(key, "must be at least " + std::to_string(min));
  }

  void unsigned_integer(const char* key, unsigned long long& out) {
    if (!has(key)) return;
    if (!obj_[key].is_number_unsigned()) return fail(key, "expected a non-negative integer");
    out = obj_[key].get<unsigned long long>();
  }

  void boolean(const char* key, bool& out) {
    if (!has(key)) return;
    if (!obj_[key].is_boolean()) return fail(key, "expected true or false");
    out = obj_[key].get<bool>();
  }

  void string(const char* key, std::string& out) {
    if (!has(key)) return;
    if (!obj_[key].is_string()) return fail(key, "expected a string");
    out = obj_[key].get<std::string>();
  }

  void vector(const char* key, Vector& out, bool required) {
    if (!has(key)) {
      if (required) fail(key, "missing");
      return;
    }
    const Json& a = obj_[key];
    if (!a.is_array() || a.empty()) return fail(key, "expected a non-empty array of numbers");
    out.resize(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) return fail(key, "expected a non-empty array of numbers");
      out[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    }
  }

  const Json* object(const char* key) {
    if (!has(key)) return nullptr;
    if (!obj_[key].is_object()) {
      fail(key, "expected an object");
      return nullptr;
    }
    return &obj_[key];
  }

  std::string path(const std::string& key) const { return prefix_ + key; }
  void fail(const std::string& key, const std::string& msg) {
    errors_.push_back(path(key) + ": " + msg);
  }

 private:
  const Json& obj_;
  std::string prefix_;
  std::vector<std::string>& errors_;
};

[[noreturn]] void config_error(const std::vector<std::string>& errors) {
  std::ostringstream os;
  for (std::size_t i = 0; i < errors.size(); ++i) os << (i ? "; " : "") << errors[i];
  throw Error(ErrorCode::ConfigInvalid, os.str());
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json series_json(const std::vector<double>& v) { return Json(v); }

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  j["manifold"] = c.manifold;
  j["delta"] = c.delta;
  j["mode"] = to_string(c.mode);
  if (!c.curve.empty()) {
    j["curve"] = c.curve;
    j["example"] = {{"a", c.example.a},         {"b", c.example.b},   {"alpha", c.example.alpha},
                    {"beta", c.example.beta},   {"k1", c.example.k1}, {"k2", c.example.k2}};
  }
  if (c.initial) {
    Json i{{"x", vector_json(c.initial->x)},
           {"p", vector_json(c.initial->p)},
           {"u", vector_json(c.initial->u)},
           {"v", vector_json(c.initial->v)}};
    if (c.initial->K) i["K"] = *c.initial->K;
    j["initial"] = i;
  }
  j["t_span"] = {c.t0, c.t1};
  j["samples"] = c.samples;
  j["integrator"] = {{"method", c.policy.method == Method::RK4 ? "rk4" : "rk45"},
                     {"step", c.policy.step},
                     {"abs_tol", c.policy.abs_tol},
                     {"rel_tol", c.policy.rel_tol},
                     {"min_step", c.policy.min_step},
                     {"max_step", c.policy.max_step}};
  j["renormalize"] = c.renormalize;
  j["frenet"] = c.frenet;
  j["seed"] = c.seed;
  j["oracle_points"] = c.oracle_points;
  j["tolerances"] = {{"residual", c.tolerances.residual}, {"drift", c.tolerances.drift},
                     {"speed", c.tolerances.speed},       {"oracle", c.tolerances.oracle},
                     {"closed_form", c.tolerances.closed_form}};
  return j;
}

GeodesicSystem system_for(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::UnitBundle: return GeodesicSystem::UnitBundle;
    case ExperimentMode::HorizontalLift: return GeodesicSystem::HorizontalLift;
    default: return GeodesicSystem::TotalSpace;
  }
}

GeodesicState initial_state(const ExperimentConfig& c, const BergerSasakiConfig& bs) {
  if (c.initial) {
    const InitialData& d = *c.initial;
    if (d.K) return unit_initial_state(bs, d.x, d.p, d.u, d.v, *d.K);
    return {d.x, d.p, d.u, d.v};
  }
  if (c.curve == "paper-c2") {
    return {c.example.gamma(c.t0), c.example.velocity_covector(c.t0), c.example.gamma_dot(c.t0),
            Vector::Zero(2)};
  }
  return {c.example.gamma(c.t0), c.example.parallel_covector(c.t0), c.example.gamma_dot(c.t0),
          Vector::Zero(2)};
}

std::string file_for(const ExperimentConfig& c, const char* suffix) { return c.name + suffix; }

// Deterministic generic unit-bundle data for the verification suite.
GeodesicState verify_initial_state(const ManifoldRegistryEntry& e, const BergerSasakiConfig& bs) {
  const int n = bs.dim();
  const Vector x = 0.5 * (e.sample_box.lo + e.sample_box.hi) +
                   0.1 * (e.sample_box.hi - e.sample_box.lo).cwiseProduct(
                             Vector::LinSpaced(n, 0.3, 1.0));
  Vector p(n), u(n), v(n);
  for (int i = 0; i < n; ++i) {
    p[i] = 1.0 + 0.5 * i;
    u[i] = (i % 2 ? -0.3 : 1.0) + 0.1 * i;
    v[i] = 0.2 + 0.5 * ((i + 1) % 2) - 0.1 * i;
  }
  return unit_initial_state(bs, x, p, u, v, 0.5);
}

}  // namespace

ExperimentConfig parse_config(const Json& doc) {
  std::vector<std::string> errors;
  if (!doc.is_object()) config_error({"<root>: expected a JSON object"});
  ExperimentConfig c;
  FieldReader r(doc, "", errors);
  r.only({"name", "manifold", "delta", "mode", "initial", "curve", "example", "t_span", "samples",
          "integrator", "renormalize", "frenet", "out_dir", "seed", "oracle_points",
          "tolerances"});
  r.string("name", c.name);
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) {
    r.fail("name", "must be a non-empty file name component");
  }
  if (!r.has("manifold")) r.fail("manifold", "missing");
  r.string("manifold", c.manifold);
  r.number("delta", c.delta);
  std::string mode = "total_space";
  r.string("mode", mode);
  if (auto m = parse_mode(mode)) {
    c.mode = *m;
  } else {
    r.fail("mode", "unknown mode '" + mode + "'");
  }
  r.string("curve", c.curve);
  if (!c.curve.empty() && c.curve != "paper-c1" && c.curve != "paper-c2") {
    r.fail("curve", "unknown curve '" + c.curve + "' (expected paper-c1 or paper-c2)");
  }
  if (const Json* ex = r.object("example")) {
    FieldReader e(*ex, "example.", errors);
    e.only({"a", "b", "alpha", "beta", "k1", "k2"});
    e.positive("a", c.example.a);
    e.positive("b", c.example.b);
    e.number("alpha", c.example.alpha);
    e.number("beta", c.example.beta);
    e.number("k1", c.example.k1);
    e.number("k2", c.example.k2);
  }
  if (const Json* init = r.object("initial")) {
    FieldReader i(*init, "initial.", errors);
    i.only({"x", "p", "u", "v", "K"});
    InitialData d;
    i.vector("x", d.x, true);
    i.vector("p", d.p, true);
    i.vector("u", d.u, true);
    i.vector("v", d.v, true);
    if (i.has("K")) {
      double K = 0.0;
      i.number("K", K);
      if (!(K >= 0.0 && K < 1.0)) i.fail("K", "must lie in [0, 1)");
      d.K = K;
    }
    c.initial = d;
  }
  if (r.has("t_span")) {
    const Json& t = doc["t_span"];
    if (!t.is_array() || t.size() != 2 || !t[0].is_number() || !t[1].is_number()) {
      r.fail("t_span", "expected [t0, t1]");
    } else {
      c.t0 = t[0].get<double>();
      c.t1 = t[1].get<double>();
      if (!(c.t1 > c.t0)) r.fail("t_span", "t1 must exceed t0");
    }
  }
  r.integer("samples", c.samples, 2);
  if (const Json* integ = r.object("integrator")) {
    FieldReader i(*integ, "integrator.", errors);
    i.only({"method", "step", "abs_tol", "rel_tol", "min_step", "max_step"});
    std::string method = "rk4";
    i.string("method", method);
    if (method == "rk4") {
      c.policy.method = Method::RK4;
    } else if (method == "rk45") {
      c.policy.method = Method::RK45;
    } else {
      i.fail("method", "expected rk4 or rk45");
    }
    i.positive("step", c.policy.step);
    i.positive("abs_tol", c.policy.abs_tol);
    i.positive("rel_tol", c.policy.rel_tol);
    i.positive("min_step", c.policy.min_step);
    i.positive("max_step", c.policy.max_step);
  }
  r.boolean("renormalize", c.renormalize);
  r.boolean("frenet", c.frenet);
  r.string("out_dir", c.out_dir);
  r.unsigned_integer("seed", c.seed);
  r.integer("oracle_points", c.oracle_points, 1);
  if (const Json* tol = r.object("tolerances")) {
    FieldReader t(*tol, "tolerances.", errors);
    t.only({"residual", "drift", "speed", "oracle", "closed_form"});
    t.positive("residual", c.tolerances.residual);
    t.positive("drift", c.tolerances.drift);
    t.positive("speed", c.tolerances.speed);
    t.positive("oracle", c.tolerances.oracle);
    t.positive("closed_form", c.tolerances.closed_form);
  }

  const bool geodesic_mode = c.mode == ExperimentMode::TotalSpace ||
                             c.mode == ExperimentMode::UnitBundle ||
                             c.mode == ExperimentMode::HorizontalLift;
  if (geodesic_mode && !c.initial && c.curve.empty()) {
    r.fail("initial", "geodesic modes need initial data or a curve");
  }
  if (c.mode == ExperimentMode::ResidualCheck && c.curve.empty()) {
    r.fail("curve", "residual_check needs a curve");
  }
  if (!errors.empty()) config_error(errors);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

void validate(const ExperimentConfig& c, const ManifoldRegistry& registry) {
  std::vector<std::string> errors;
  const ManifoldRegistryEntry* entry = nullptr;
  try {
    entry = &registry.find(c.manifold);
  } catch (const Error&) {
    errors.push_back("manifold: unknown manifold '" + c.manifold + "'");
  }
  if (entry && !c.curve.empty() && !entry->closed_form_geodesics) {
    errors.push_back("curve: manifold '" + c.manifold + "' has no closed-form geodesics");
  }
  if (entry && c.initial) {
    const ManifoldChart chart = entry->make_chart();
    const auto n = static_cast<Eigen::Index>(chart.dim());
    const InitialData& d = *c.initial;
    bool sizes_ok = true;
    const std::pair<const char*, const Vector*> fields[] = {
        {"x", &d.x}, {"p", &d.p}, {"u", &d.u}, {"v", &d.v}};
    for (const auto& [name, vec] : fields) {
      if (vec->size() != n) {
        errors.push_back(std::string("initial.") + name + ": expected " + std::to_string(n) +
                         " components");
        sizes_ok = false;
      }
    }
    if (sizes_ok && !chart.contains(d.x)) {
      errors.push_back("initial.x: outside the chart domain (" + entry->chart_domain + ")");
    } else if (sizes_ok && c.mode == ExperimentMode::UnitBundle && !d.K) {
      const double r2 = inner_inv(chart, d.x, d.p, d.p);
      const double orth = inner_inv(chart, d.x, d.v, d.p);
      if (!(std::abs(r2 - 1.0) < kUnitBundleTolerance)) {
        errors.push_back("initial.p: g^-1(p,p) = " + format_double(r2) +
                         " is not 1 within 1e-9");
      }
      if (!(std::abs(orth) < kUnitBundleTolerance)) {
        errors.push_back("initial.v: g^-1(v,p) = " + format_double(orth) +
                         " is not 0 within 1e-9");
      }
    }
  }
  if (!errors.empty()) config_error(errors);
}

void apply_overrides(ExperimentConfig& c, const Overrides& o) {
  if (o.delta) c.delta = *o.delta;
  if (o.mode) {
    auto m = parse_mode(*o.mode);
    if (!m) throw Error(ErrorCode::ConfigInvalid, "--mode: unknown mode '" + *o.mode + "'");
    c.mode = *m;
  }
  if (o.t_end) {
    if (!(*o.t_end > c.t0)) throw Error(ErrorCode::ConfigInvalid, "--t-end: must exceed t0");
    c.t1 = *o.t_end;
  }
  if (o.step) {
    if (!(*o.step > 0.0)) throw Error(ErrorCode::ConfigInvalid, "--step: must be positive");
    c.policy.step = *o.step;
  }
  if (o.seed) c.seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.renormalize) c.renormalize = true;
}

bool RunResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
}

std::filesystem::path output_root(const ExperimentConfig& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv("BSG_OUT_DIR"); env && *env) return env;
  return std::filesystem::current_path();
}

RunResult run_experiment(const ExperimentConfig& c, const ManifoldRegistry& registry) {
  validate(c, registry);
  const ManifoldRegistryEntry& entry = registry.find(c.manifold);
  const BergerSasakiConfig bs = registry.config(c.manifold, c.delta);
  const std::filesystem::path root = output_root(c);
  std::filesystem::create_directories(root);

  RunResult res;
  res.name = c.name;
  auto emit = [&](const char* suffix, const std::string& text) {
    const auto path = root / file_for(c, suffix);
    write_atomically(path, text);
    res.files.push_back(path);
  };
  const Tolerances& tol = c.tolerances;
  const std::vector<double> times = sample_times(c.t0, c.t1, c.samples);

  switch (c.mode) {
    case ExperimentMode::TotalSpace:
    case ExperimentMode::UnitBundle:
    case ExperimentMode::HorizontalLift: {
      const GeodesicSystem system = system_for(c.mode);
      const Trajectory traj =
          integrate_geodesic(bs, system, initial_state(c, bs), times, c.policy, c.renormalize);
      const InvariantReport inv = invariant_report(bs, traj);
      emit(".trajectory.csv", trajectory_csv(bs, traj));
      if (system == GeodesicSystem::UnitBundle) {
        for (const Series* s : {&inv.kappa, &inv.mu, &inv.r2, &inv.orth}) {
          res.checks.push_back({s->name + "_drift", s->drift(), tol.drift});
        }
        double defect = 0.0;
        for (double d : inv.speed_defect.values) defect = std::max(defect, d);
        res.checks.push_back({"speed_defect", defect, tol.speed});
      } else if (system == GeodesicSystem::TotalSpace) {
        res.checks.push_back({"energy_drift", inv.energy.drift(), tol.drift});
      } else {
        res.checks.push_back({"r2_drift", inv.r2.drift(), tol.drift});
        res.checks.push_back({"speed_drift", inv.speed.drift(), tol.drift});
      }
      if (!c.curve.empty()) {
        const bool c1 = c.curve == "paper-c1";
        double ex = 0.0, ep = 0.0;
        for (std::size_t k = 0; k < traj.size(); ++k) {
          const double t = traj.t[k];
          ex = std::max(ex, (traj.states[k].x - c.example.gamma(t)).cwiseAbs().maxCoeff());
          const Vector p_ref =
              c1 ? c.example.parallel_covector(t) : c.example.velocity_covector(t);
          ep = std::max(ep, (traj.states[k].p - p_ref).cwiseAbs().maxCoeff());
        }
        res.checks.push_back({"closed_form_base_error", ex, tol.closed_form});
        res.checks.push_back({"closed_form_fiber_error", ep, tol.closed_form});
        if (traj.size() >= 7) {
          const ResidualSeries rs = geodesic_residual(bs, to_sampled_lift(traj));
          res.checks.push_back({"geodesic_residual", rs.max(), tol.residual});
          emit(".residual.json", residual_json(rs).dump(2) + "\n");
        }
      }
      Json inv_doc = invariants_json(inv, tol);
      inv_doc["system"] = to_string(system);
      inv_doc["renormalized"] = traj.renormalized;
      inv_doc["steps"] = traj.steps;
      emit(".invariants.json", inv_doc.dump(2) + "\n");
      if (c.frenet) emit(".frenet.json", frenet_json(frenet_curvatures(bs, traj)).dump(2) + "\n");
      break;
    }
    case ExperimentMode::ResidualCheck: {
      const SampledLift lift = c.curve == "paper-c1" ? c.example.horizontal_lift_curve(times)
                                                     : c.example.velocity_lift_curve(times);
      const ResidualSeries rs = geodesic_residual(bs, lift);
      res.checks.push_back({"geodesic_residual", rs.max(), tol.residual});
      emit(".residual.json", residual_json(rs).dump(2) + "\n");
      break;
    }
    case ExperimentMode::OracleCheck: {
      OracleReport rep = run_oracle_suite(bs, entry.sample_box, c.oracle_points, c.seed);
      rep.manifold = c.manifold;
      res.checks.push_back({"oracle_max_relative_deviation", rep.max_deviation(), tol.oracle});
      emit(".oracle.json", oracle_json(rep).dump(2) + "\n");
      break;
    }
  }

  Json summary;
  summary["config"] = config_json(c);
  summary["result"] = checks_json(res);
  emit(".summary.json", summary.dump(2) + "\n");
  return res;
}

RunResult verify_manifold(const std::string& id, const std::filesystem::path& out_dir,
                          const ManifoldRegistry& registry) {
  const ManifoldRegistryEntry& entry = registry.find(id);
  RunResult res;
  res.name = id;
  const FlagEvidence& ev = entry.evidence;
  auto flag_check = [&](const char* name, bool flag, double value, double tol) {
    res.checks.push_back({std::string(name) + (flag ? "_holds" : "_refuted"), value,
                          flag ? tol : kFlagRefutationThreshold, flag ? "below" : "above"});
  };
  flag_check("kahler", entry.flags.kahler, ev.kahler, kKahlerFlagTolerance);
  flag_check("flat", entry.flags.flat, ev.curvature, kFlatFlagTolerance);
  flag_check("locally_symmetric", entry.flags.locally_symmetric, ev.curvature_derivative,
             kSymmetricFlagTolerance);

  const BergerSasakiConfig base = registry.config(id, 0.0);
  const int n = base.dim();
  if (entry.flags.kahler) {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
      const Vector x = entry.sample_box.draw(rng);
      worst = std::max(worst, check_curvature_identities(base.kahler(), x, random_vector(rng, n),
                                                         random_vector(rng, n))
                                  .max());
    }
    res.checks.push_back({"curvature_identities", worst, 1e-6});

    for (double delta : {0.0, 0.5, 1.0}) {
      const OracleReport rep = run_oracle_suite(registry.config(id, delta), entry.sample_box, 20, 7);
      res.checks.push_back({"oracle_delta_" + format_double(delta), rep.max_deviation(), 1e-5});
    }

    const BergerSasakiConfig bs = registry.config(id, 0.7);
    const Trajectory traj =
        integrate_geodesic(bs, GeodesicSystem::UnitBundle, verify_initial_state(entry, bs),
                           sample_times(0.0, 10.0, 2001), StepPolicy{Method::RK4, 1e-3});
    const InvariantReport inv = invariant_report(bs, traj);
    for (const Series* s : {&inv.kappa, &inv.mu, &inv.r2, &inv.orth}) {
      res.checks.push_back({"unit_bundle_" + s->name + "_drift", s->drift(), 1e-7});
    }
    double defect = 0.0;
    for (double d : inv.speed_defect.values) defect = std::max(defect, d);
    res.checks.push_back({"unit_bundle_speed_defect", defect, 1e-6});
    if (entry.flags.locally_symmetric) {
      const ParallelismReport par = parallelism_residual(bs, traj);
      res.checks.push_back({"parallelism_relative", par.max_residual() / std::max(par.max_norm(), 1e-300), 1e-5});
      const FrenetReport fr = frenet_curvatures(bs, traj);
      res.checks.push_back({"frenet_k1_spread", fr.relative_spread.front(), 1e-4});
    }
  }

  if (entry.closed_form_geodesics) {
    const ClosedFormExample ex;
    const BergerSasakiConfig bs = registry.config(id, 0.5);
    const Trajectory traj =
        integrate_geodesic(bs, GeodesicSystem::TotalSpace, ex.horizontal_lift_initial_state(),
                           sample_times(0.0, 4.0, 401), StepPolicy{Method::RK4, 1e-3});
    double err = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      err = std::max(err, (traj.states[k].x - ex.gamma(traj.t[k])).cwiseAbs().maxCoeff());
    }
    res.checks.push_back({"closed_form_geodesic", err, 1e-8});
    const auto times = sample_times(0.0, 4.0, 1000);
    res.checks.push_back(
        {"residual_c1", geodesic_residual(bs, ex.horizontal_lift_curve(times)).max(), 1e-6});
    res.checks.push_back(
        {"residual_c2", geodesic_residual(bs, ex.velocity_lift_curve(times)).max(), 1e-6});
  }

  std::filesystem::create_directories(out_dir);
  Json doc;
  doc["manifold"] = describe_entry(entry);
  doc["result"] = checks_json(res);
  const auto path = out_dir / (id + ".verify.json");
  write_atomically(path, doc.dump(2) + "\n");
  res.files.push_back(path);
  return res;
}

Json describe_entry(const ManifoldRegistryEntry& e) {
  Json j;
  j["id"] = e.id;
  j["description"] = e.description;
  j["dimension"] = e.dimension();
  j["chart_domain"] = e.chart_domain;
  j["sample_box"] = {{"lo", vector_json(e.sample_box.lo)}, {"hi", vector_json(e.sample_box.hi)}};
  j["flags"] = {{"kahler", e.flags.kahler},
                {"locally_symmetric", e.flags.locally_symmetric},
                {"flat", e.flags.flat}};
  j["closed_form_geodesics"] = e.closed_form_geodesics;
  j["evidence"] = {{"points", e.evidence.points},
                   {"kahler_residual", e.evidence.kahler},
                   {"max_curvature", e.evidence.curvature},
                   {"max_curvature_derivative", e.evidence.curvature_derivative}};
  return j;
}

Json list_entries(const ManifoldRegistry& registry) {
  Json a = Json::array();
  for (const auto& e : registry.entries()) a.push_back(describe_entry(e));
  return a;
}

std::string format_double(double value) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, r.ptr);
}

std::string trajectory_csv(const BergerSasakiConfig& cfg, const Trajectory& traj) {
  const int n = cfg.dim();
  std::string out = "t";
  for (const char* block : {"x", "p", "u", "v"})
    for (int i = 1; i <= n; ++i) out += std::string(",") + block + std::to_string(i);
  out += ",kappa,mu,K,speed,r2,orth\n";
  const InvariantReport inv = invariant_report(cfg, traj);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out += format_double(traj.t[k]);
    const GeodesicState& s = traj.states[k];
    for (const Vector* v : {&s.x, &s.p, &s.u, &s.v})
      for (Eigen::Index i = 0; i < v->size(); ++i) out += "," + format_double((*v)[i]);
    for (const Series* series : {&inv.kappa, &inv.mu, &inv.K, &inv.speed, &inv.r2, &inv.orth}) {
      out += "," + format_double(series->values[k]);
    }
    out += "\n";
  }
  return out;
}

Json invariants_json(const InvariantReport& r, const Tolerances& tol) {
  Json j;
  j["t"] = series_json(r.t);
  Json series, drift;
  for (const Series* s : r.all()) {
    series[s->name] = series_json(s->values);
    drift[s->name] = s->drift();
  }
  j["series"] = series;
  j["drift"] = drift;
  j["tolerances"] = {{"drift", tol.drift}, {"speed", tol.speed}};
  return j;
}

Json residual_json(const ResidualSeries& r) {
  return {{"t", series_json(r.t)},
          {"horizontal", series_json(r.horizontal)},
          {"vertical", series_json(r.vertical)},
          {"max", r.max()}};
}

Json oracle_json(const OracleReport& r) {
  Json cases = Json::array();
  for (const auto& c : r.cases) {
    cases.push_back({{"case", c.name}, {"max", c.max}, {"mean", c.mean}, {"count", c.count}});
  }
  return {{"manifold", r.manifold},
          {"delta", r.delta},
          {"configurations", r.configurations},
          {"seed", r.seed},
          {"max_relative_deviation", r.max_deviation()},
          {"cases", cases}};
}

Json frenet_json(const FrenetReport& r) {
  Json k = Json::array();
  for (std::size_t i = 0; i < r.k.size(); ++i) {
    k.push_back({{"index", i + 1},
                 {"values", series_json(r.k[i])},
                 {"mean", r.mean[i]},
                 {"relative_spread", r.relative_spread[i]}});
  }
  return {{"s", series_json(r.s)},
          {"curvatures", k},
          {"rank", r.rank},
          {"rank_deficient", r.rank_deficient},
          {"max_orthonormality_error", r.max_orthonormality_error}};
}

Json checks_json(const RunResult& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"tolerance", c.tolerance},
                      {"sense", c.sense},
                      {"pass", c.pass()}});
  }
  return {{"name", r.name}, {"pass", r.pass()}, {"checks", checks}};
}

void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace bsg
