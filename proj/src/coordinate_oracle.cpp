#include "bsg/coordinate_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace bsg {

Matrix induced_metric_at(const BergerSasakiConfig& cfg, const Vector& x, const Vector& p) {
  cfg.chart().require_contains(x);
  const LiftFrame f(cfg, {x, p}, false);
  const int n = f.dim();
  Matrix T = Matrix::Identity(2 * n, 2 * n);
  T.block(n, 0, n, n) = -f.horizontal_shift();

  const Vector q = f.sharp(f.pJ());
  Matrix D = Matrix::Zero(2 * n, 2 * n);
  D.topLeftCorner(n, n) = f.geometry().g;
  D.bottomRightCorner(n, n) = f.geometry().g_inv + f.delta() * f.delta() * q * q.transpose();

  const Matrix G = T.transpose() * D * T;
  return 0.5 * (G + G.transpose());
}

Christoffel induced_christoffel_at(const BergerSasakiConfig& cfg, const Vector& x, const Vector& p,
                                  double step) {
  const int n = cfg.dim();
  const int N = 2 * n;
  Vector z(N);
  z << x, p;
  auto metric = [&](const Vector& w) { return induced_metric_at(cfg, w.head(n), w.tail(n)); };

  MetricJacobian dG(N);
  for (int a = 0; a < N; ++a) {
    Vector zp = z, zm = z;
    zp[a] += step;
    zm[a] -= step;
    const Matrix d = (metric(zp) - metric(zm)) / (2.0 * step);
    for (int b = 0; b < N; ++b)
      for (int c = 0; c < N; ++c) dG(a, b, c) = d(b, c);
  }
  return christoffel_from(inverse_metric(metric(z)), dG);
}

namespace {

bool exactly_zero(const Vector& v) { return (v.array() == 0.0).all(); }

// Coordinates of the germ V at cp + eps * U.
Vector field_coordinates(const BergerSasakiConfig& cfg, const CotangentPoint& cp, const Vector& U,
                         const LiftedFieldGerm& V, double eps) {
  const int n = cfg.dim();
  const Vector dx = eps * U.head(n);
  const Vector dp = eps * U.tail(n);
  Vector c = V.value.stacked();
  if (!exactly_zero(dx)) {
    if (!V.d_dx) throw Error(ErrorCode::MissingDerivative, "field germ has no x-derivative");
    c += *V.d_dx * dx;
  }
  if (!exactly_zero(dp)) {
    if (!V.d_dp) throw Error(ErrorCode::MissingDerivative, "field germ has no p-derivative");
    c += *V.d_dp * dp;
  }
  const LiftFrame f(cfg, {cp.x + dx, cp.p + dp}, false);
  return f.to_coordinates(LiftedVector::from_stacked(c));
}

}  // namespace

Vector oracle_connection(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                         const Christoffel& gamma_hat, const Vector& U, const LiftedFieldGerm& V) {
  const double h = kOracleStep / std::max(1.0, U.cwiseAbs().maxCoeff());
  const Vector derivative = (field_coordinates(cfg, cp, U, V, h) -
                             field_coordinates(cfg, cp, U, V, -h)) / (2.0 * h);
  return derivative + christoffel_contract(gamma_hat, U, field_coordinates(cfg, cp, U, V, 0.0));
}

Vector oracle_connection(const BergerSasakiConfig& cfg, const CotangentPoint& cp, const Vector& U,
                         const LiftedFieldGerm& V) {
  return oracle_connection(cfg, cp, induced_christoffel_at(cfg, cp.x, cp.p), U, V);
}

Vector oracle_geodesic_rhs(const BergerSasakiConfig& cfg, const Vector& z, const Vector& zdot) {
  const int n = cfg.dim();
  const Christoffel gh = induced_christoffel_at(cfg, z.head(n), z.tail(n));
  return -christoffel_contract(gh, zdot, zdot);
}

double relative_deviation(const Vector& value, const Vector& reference) {
  const double scale = std::max(1.0, reference.cwiseAbs().maxCoeff());
  return (value - reference).cwiseAbs().maxCoeff() / scale;
}

double sasaki_metric(const ManifoldChart& chart, const CotangentPoint& cp, const LiftedVector& U,
                     const LiftedVector& V) {
  const Matrix g = chart.metric_at(cp.x);
  const Matrix g_inv = inverse_metric(g);
  return U.horizontal.dot(g * V.horizontal) + U.vertical.dot(g_inv * V.vertical);
}

LiftedVector sasaki_connection(const ManifoldChart& chart, const CotangentPoint& cp,
                               const LiftedVector& U, const LiftedFieldGerm& V) {
  const int n = chart.dim();
  const Matrix g_inv = inverse_metric(chart.metric_at(cp.x));
  const Christoffel gamma = christoffel_at(chart, cp.x);
  const Riemann R = riemann_at(chart, cp.x);
  const Vector& X = U.horizontal;
  const Vector& w = U.vertical;
  const Vector& Y = V.value.horizontal;
  const Vector& th = V.value.vertical;
  const Vector& p = cp.p;

  // Coordinate velocity of the fiber part: ω_k + p_h Γ^h_kj X^j.
  Vector dp = w;
  for (int k = 0; k < n; ++k)
    for (int h = 0; h < n; ++h)
      for (int j = 0; j < n; ++j) dp[k] += p[h] * gamma(h, k, j) * X[j];

  Vector h_out = Vector::Zero(n);
  Vector v_out = Vector::Zero(n);
  if (V.d_dx && V.d_dp) {
    const Vector dc = *V.d_dx * X + *V.d_dp * dp;
    h_out += dc.head(n);
    v_out += dc.tail(n);
  } else if (!exactly_zero(X) || !exactly_zero(dp)) {
    throw Error(ErrorCode::MissingDerivative, "field germ lacks derivatives");
  }

  const Vector ps = g_inv * p;
  const Vector ts = g_inv * th;
  const Vector ws = g_inv * w;
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        // ∇_X Y and ∇_X θ
        h_out[a] += gamma(a, i, j) * X[i] * Y[j];
        v_out[a] -= gamma(i, j, a) * th[i] * X[j];
        for (int k = 0; k < n; ++k) {
          // ½ pR(X, Y)
          v_out[k] += 0.5 * p[a] * R(a, i, j, k) * X[i] * Y[j];
          // ½ R(p̃, θ̃)X + ½ R(p̃, ω̃)Y
          h_out[a] += 0.5 * R(a, i, j, k) * ps[i] * (ts[j] * X[k] + ws[j] * Y[k]);
        }
      }
  return {h_out, v_out};
}

void CaseDeviation::add(double d) {
  max = std::max(max, d);
  mean = (mean * count + d) / (count + 1);
  ++count;
}

double OracleReport::max_deviation() const {
  double m = 0.0;
  for (const auto& c : cases) m = std::max(m, c.max);
  return m;
}

namespace {

BaseFieldGerm random_germ(std::mt19937_64& rng, int n) {
  Matrix jac(n, n);
  for (int j = 0; j < n; ++j) jac.col(j) = random_vector(rng, n);
  return {random_vector(rng, n), jac};
}

}  // namespace

OracleReport run_oracle_suite(const BergerSasakiConfig& cfg, const SampleBox& box, int count,
                              unsigned long long seed) {
  const int n = cfg.dim();
  const double d2 = cfg.delta() * cfg.delta();
  OracleReport report;
  report.delta = cfg.delta();
  report.configurations = count;
  report.seed = seed;
  const char* names[] = {"hh",        "hv",        "vh",        "vv",       "mixed",
                         "liouville-h-left", "liouville-h-right", "liouville-v-left",
                         "liouville-v-right", "liouville-self", "unit-hh", "unit-hv",
                         "unit-vh", "unit-vv"};
  for (const char* name : names) report.cases.push_back({name});
  auto at = [&](const char* name) -> CaseDeviation& {
    return *std::find_if(report.cases.begin(), report.cases.end(),
                         [&](const CaseDeviation& c) { return c.name == name; });
  };

  std::mt19937_64 rng(seed);
  for (int s = 0; s < count; ++s) {
    const Vector x = box.draw(rng);
    const Vector p = random_vector(rng, n);
    const CotangentPoint cp{x, p};
    const LiftFrame f(cfg, cp);
    const Christoffel gh = induced_christoffel_at(cfg, x, p);

    const Vector X = random_vector(rng, n);
    const Vector w = random_vector(rng, n);
    const BaseFieldGerm Y = random_germ(rng, n);
    const BaseFieldGerm th = random_germ(rng, n);
    const LiftedVector HX = LiftedVector::horizontal_lift(X);
    const LiftedVector Vw = LiftedVector::vertical_lift(w);
    const auto HY = LiftedFieldGerm::horizontal_lift(Y);
    const auto Vth = LiftedFieldGerm::vertical_lift(th);

    auto compare = [&](const char* name, const LiftedVector& U, const LiftedVector& closed,
                       const LiftedFieldGerm& V) {
      const Vector oracle = oracle_connection(cfg, cp, gh, f.to_coordinates(U), V);
      at(name).add(relative_deviation(f.to_coordinates(closed), oracle));
    };
    compare("hh", HX, bs_connection(f, HX, HY), HY);
    compare("hv", HX, bs_connection(f, HX, Vth), Vth);
    compare("vh", Vw, bs_connection(f, Vw, HY), HY);
    compare("vv", Vw, bs_connection(f, Vw, Vth), Vth);
    compare("mixed", HX + Vw, bs_connection(f, HX + Vw, HY + Vth), HY + Vth);

    // Explicit Liouville-field formulas.
    const auto P = LiftedFieldGerm::liouville(p);
    const LiftedVector VP = LiftedVector::vertical_lift(p);
    const LiftedVector zero = LiftedVector::zero(n);
    const LiftedVector twist_pJ = LiftedVector::vertical_lift((d2 / f.lambda()) * f.twist(w) * f.pJ());
    compare("liouville-h-left", HX, zero, P);
    compare("liouville-h-right", VP, zero,
            LiftedFieldGerm::horizontal_lift(BaseFieldGerm::constant(X)));
    compare("liouville-v-left", Vw, Vw + twist_pJ, P);
    compare("liouville-v-right", VP, twist_pJ,
            LiftedFieldGerm::vertical_lift(BaseFieldGerm::constant(w)));
    compare("liouville-self", VP, VP, P);

    // Unit cotangent bundle: normalize p, make ω tangent, project the oracle.
    const Vector pu = p / std::sqrt(f.r2());
    const CotangentPoint cu{x, pu};
    const LiftFrame fu(cfg, cu);
    const Christoffel ghu = induced_christoffel_at(cfg, x, pu);
    const Vector wt = w - fu.inv(w, pu) * pu;
    const LiftedVector HXu = LiftedVector::horizontal_lift(X);
    const LiftedVector Twt = LiftedVector::vertical_lift(wt);
    const TangentialFieldGerm Yt{Y, BaseFieldGerm{Vector::Zero(n), Matrix::Zero(n, n)}};
    const TangentialFieldGerm Tt{BaseFieldGerm{Vector::Zero(n), Matrix::Zero(n, n)}, th};

    auto compare_unit = [&](const char* name, const LiftedVector& U,
                            const TangentialFieldGerm& V) {
      const LiftedVector closed = unit_bundle_connection(cfg, cu, U, V);
      const Vector ambient =
          oracle_connection(cfg, cu, ghu, fu.to_coordinates(U), to_lifted_germ(cfg, cu, V));
      const LiftedVector projected = project_to_unit_bundle(fu, fu.from_coordinates(ambient));
      at(name).add(relative_deviation(fu.to_coordinates(closed), fu.to_coordinates(projected)));
    };
    compare_unit("unit-hh", HXu, Yt);
    compare_unit("unit-hv", HXu, Tt);
    compare_unit("unit-vh", Twt, Yt);
    compare_unit("unit-vv", Twt, Tt);
  }
  return report;
}

}  // namespace bsg
