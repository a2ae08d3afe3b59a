// bsg: experiments with the Berger-type deformed Sasaki metric on T*M.
//
//   bsg list
//   bsg describe <id>
//   bsg verify <id> [--out-dir DIR]
//   bsg run <config.json>... [--delta D] [--mode M] [--t-end T] [--step H]
//                            [--seed S] [--out-dir DIR] [--renormalize]
//
// Exit codes: 0 pass, 1 tolerance failure, 2 config error, 3 runtime error.

#include "bsg/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <future>
#include <iostream>
#include <thread>

namespace {

enum Exit { kPass = 0, kToleranceFailure = 1, kConfigError = 2, kRuntimeError = 3 };

struct Outcome {
  int code = kPass;
  std::string text;
};

void print_checks(std::ostream& os, const bsg::RunResult& r) {
  os << r.name << ": " << (r.pass() ? "PASS" : "FAIL") << "\n";
  for (const auto& c : r.checks) {
    os << "  " << (c.pass() ? "ok  " : "FAIL") << " " << c.name << " = "
       << bsg::format_double(c.value) << (c.sense == "above" ? " (> " : " (< ")
       << bsg::format_double(c.tolerance) << ")\n";
  }
  for (const auto& f : r.files) os << "  wrote " << f.string() << "\n";
}

int classify(const bsg::Error& e) {
  switch (e.code()) {
    case bsg::ErrorCode::ConfigInvalid:
    case bsg::ErrorCode::UnknownManifold: return kConfigError;
    default: return kRuntimeError;
  }
}

Outcome run_one(const std::string& path, const bsg::Overrides& overrides) {
  Outcome out;
  std::ostringstream os;
  try {
    bsg::ExperimentConfig cfg = bsg::load_config(path);
    bsg::apply_overrides(cfg, overrides);
    const bsg::RunResult r = bsg::run_experiment(cfg);
    print_checks(os, r);
    out.code = r.pass() ? kPass : kToleranceFailure;
  } catch (const bsg::Error& e) {
    os << path << ": " << e.what() << "\n";
    out.code = classify(e);
  } catch (const std::exception& e) {
    os << path << ": " << e.what() << "\n";
    out.code = kRuntimeError;
  }
  out.text = os.str();
  return out;
}

int worst(int a, int b) {
  // Config and runtime errors dominate tolerance failures.
  auto rank = [](int c) { return c == kPass ? 0 : c == kToleranceFailure ? 1 : c; };
  return rank(a) >= rank(b) ? a : b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesics and connection checks for the Berger-type deformed Sasaki metric"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List registered base manifolds (JSON)");

  std::string describe_id;
  auto* describe = app.add_subcommand("describe", "Describe one base manifold (JSON)");
  describe->add_option("id", describe_id, "Manifold id")->required();

  std::string verify_id;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Run the invariant suite for one manifold");
  verify->add_option("id", verify_id, "Manifold id")->required();
  verify->add_option("--out-dir", verify_out, "Output directory");

  std::vector<std::string> configs;
  bsg::Overrides ov;
  double delta = 0, t_end = 0, step = 0;
  unsigned long long seed = 0;
  std::string mode, out_dir;
  auto* run = app.add_subcommand("run", "Run experiments from JSON configs");
  run->add_option("configs", configs, "Config files")->required()->check(CLI::ExistingFile);
  auto* o_delta = run->add_option("--delta", delta, "Deformation parameter");
  auto* o_mode = run->add_option("--mode", mode, "Experiment mode");
  auto* o_tend = run->add_option("--t-end", t_end, "End of the time span");
  auto* o_step = run->add_option("--step", step, "Integrator step");
  auto* o_seed = run->add_option("--seed", seed, "Random seed");
  auto* o_out = run->add_option("--out-dir", out_dir, "Output directory");
  run->add_flag("--renormalize", ov.renormalize, "Project back to the unit bundle each step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*list) {
      std::cout << bsg::list_entries(bsg::ManifoldRegistry::builtin()).dump(2) << "\n";
      return kPass;
    }
    if (*describe) {
      const auto& reg = bsg::ManifoldRegistry::builtin();
      std::cout << bsg::describe_entry(reg.find(describe_id)).dump(2) << "\n";
      return kPass;
    }
    if (*verify) {
      std::filesystem::path dir = verify_out;
      if (dir.empty()) {
        const char* env = std::getenv("BSG_OUT_DIR");
        dir = env && *env ? std::filesystem::path(env) : std::filesystem::current_path();
      }
      const bsg::RunResult r = bsg::verify_manifold(verify_id, dir);
      print_checks(std::cout, r);
      return r.pass() ? kPass : kToleranceFailure;
    }
    if (*o_delta) ov.delta = delta;
    if (*o_mode) ov.mode = mode;
    if (*o_tend) ov.t_end = t_end;
    if (*o_step) ov.step = step;
    if (*o_seed) ov.seed = seed;
    if (*o_out) ov.out_dir = out_dir;

    // Build the registry once before fanning out.
    (void)bsg::ManifoldRegistry::builtin();
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<Outcome> outcomes(configs.size());
    for (std::size_t begin = 0; begin < configs.size(); begin += workers) {
      const std::size_t end = std::min(configs.size(), begin + workers);
      std::vector<std::future<Outcome>> jobs;
      for (std::size_t i = begin; i < end; ++i) {
        jobs.push_back(std::async(std::launch::async, run_one, configs[i], ov));
      }
      for (std::size_t i = begin; i < end; ++i) outcomes[i] = jobs[i - begin].get();
    }
    int code = kPass;
    for (const auto& o : outcomes) {
      std::cout << o.text;
      code = worst(code, o.code);
    }
    return code;
  } catch (const bsg::Error& e) {
    std::cerr << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kRuntimeError;
  }
}
