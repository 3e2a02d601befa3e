// qwq: command-line front end for the quantum-walk experiments.
//
//   qwq <experiment> [options] [--out FILE] [--format csv|json]
//
// Exit codes: 0 success, 1 a validation check failed, 2 invalid configuration.

#include "qwq/experiments.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

namespace {

using qwq::experiments::Experiment;
using qwq::experiments::ExperimentConfig;

struct Output {
  std::string path;
  std::string format = "csv";
  bool timing = false;
};

enum Flag : unsigned {
  kSigma0 = 1u << 0,
  kAlpha = 1u << 1,
  kEpsilon = 1u << 2,
  kSigma0List = 1u << 3,
  kTList = 1u << 4,
  kEpsilonList = 1u << 5,
  kTMax = 1u << 6,
  kTStep = 1u << 7,
  kOptimizer = 1u << 8,
  kMapGrid = 1u << 9,
  kSeed = 1u << 10,
  kExact = 1u << 11,
};

struct Command {
  Experiment experiment;
  const char* help;
  unsigned flags;
};

const Command kCommands[] = {
    {Experiment::fidelity_table, "Two-walker fidelity of the Gaussian model against exact dynamics",
     kSigma0List | kTList},
    {Experiment::walk_profile, "Single-walker position distribution after t-max steps",
     kSigma0 | kAlpha | kTMax},
    {Experiment::joint_dist, "Joint position distribution of two walkers (singlet and product starts)",
     kSigma0 | kTMax},
    {Experiment::conditional_dist, "Spin-resolved position distribution of walker 1", kSigma0 | kTList},
    {Experiment::quantifier_sweep, "Closed-form quantifiers of the noisy two-spin state over time",
     kSigma0 | kEpsilonList | kTMax | kTStep | kOptimizer | kExact},
    {Experiment::irreality_map, "Asymptotic irreality over the Bloch sphere", kMapGrid},
    {Experiment::rbn_contexts, "Contextual realism-based nonlocality for seven fixed contexts",
     kSigma0 | kEpsilon | kTMax | kTStep},
    {Experiment::validate, "Run the invariant and cross-check suite", kSigma0 | kAlpha | kEpsilon | kOptimizer | kSeed},
};

void bind(CLI::App& sub, ExperimentConfig& c, unsigned flags) {
  if (flags & kSigma0) sub.add_option("--sigma0", c.sigma0, "Initial dispersion")->capture_default_str();
  if (flags & kAlpha) sub.add_option("--alpha", c.alpha, "Initial spin angle in [0, pi]")->capture_default_str();
  if (flags & kEpsilon) sub.add_option("--epsilon", c.epsilon, "Singlet weight in [0, 1]")->capture_default_str();
  if (flags & kSigma0List) sub.add_option("--sigma0-list", c.sigma0_list, "Dispersions")->capture_default_str();
  if (flags & kTList) sub.add_option("--t-list", c.t_list, "Time steps")->capture_default_str();
  if (flags & kEpsilonList) sub.add_option("--epsilon-list", c.epsilon_list, "Singlet weights")->capture_default_str();
  if (flags & kTMax) sub.add_option("--t-max", c.t_max, "Final time step")->capture_default_str();
  if (flags & kTStep) sub.add_option("--t-step", c.t_step, "Time stride")->capture_default_str();
  if (flags & kOptimizer) {
    sub.add_option("--theta-points", c.theta_points, "Optimizer grid points in theta")->capture_default_str();
    sub.add_option("--phi-points", c.phi_points, "Optimizer grid points in phi")->capture_default_str();
  }
  if (flags & kMapGrid) {
    sub.add_option("--theta-points", c.map_theta_points, "Map grid points in theta")->capture_default_str();
    sub.add_option("--phi-points", c.map_phi_points, "Map grid points in phi")->capture_default_str();
  }
  if (flags & kSeed) {
    sub.add_option("--seed", c.seed, "Seed for random directions and states")->capture_default_str();
    sub.add_option("--directions", c.directions, "Random directions for the irreality check")
        ->capture_default_str();
  }
  if (flags & kExact) sub.add_flag("--exact", c.exact, "Add columns computed from the exact walk");
}

void bind_output(CLI::App& sub, Output& out) {
  sub.add_option("--out", out.path, "Output file (default: stdout)");
  sub.add_option("--format", out.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub.add_flag("--timing", out.timing, "Record wall time in the metadata (breaks byte-identical reruns)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-walk quantumness experiments"};
  app.require_subcommand(1);

  std::vector<ExperimentConfig> configs;
  std::vector<Output> outputs(std::size(kCommands));
  configs.reserve(std::size(kCommands));
  for (const auto& cmd : kCommands) configs.push_back(ExperimentConfig::defaults(cmd.experiment));
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(kCommands); ++i) {
    auto* sub = app.add_subcommand(qwq::experiments::to_string(kCommands[i].experiment), kCommands[i].help);
    bind(*sub, configs[i], kCommands[i].flags);
    bind_output(*sub, outputs[i]);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::size_t chosen = 0;
  while (!subs[chosen]->parsed()) ++chosen;
  const ExperimentConfig& cfg = configs[chosen];
  const Output& out = outputs[chosen];

  qwq::experiments::ResultTable table;
  const auto start = std::chrono::steady_clock::now();
  try {
    cfg.validate();
    if (cfg.experiment == Experiment::validate && cfg.sigma0 < 1.0) {
      std::cerr << "qwq: warning: sigma0 < 1 is outside the Gaussian model's domain\n";
    }
    table = qwq::experiments::run_experiment(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "qwq: invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qwq: error: " << e.what() << '\n';
    return 2;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out.timing) table.meta["wall_time_s"] = seconds;
  std::cerr << "qwq: " << qwq::experiments::to_string(cfg.experiment) << " finished in " << seconds << " s\n";

  auto write = [&](std::ostream& os) {
    if (out.format == "json") {
      table.write_json(os);
    } else {
      table.write_csv(os);
    }
  };
  if (out.path.empty()) {
    write(std::cout);
  } else {
    std::ofstream file(out.path, std::ios::binary);
    if (!file) {
      std::cerr << "qwq: cannot open " << out.path << " for writing\n";
      return 2;
    }
    write(file);
  }

  if (cfg.experiment == Experiment::validate) {
    const int failed = table.meta.value("failed", 0);
    if (failed > 0) {
      std::cerr << "qwq: " << failed << " validation check(s) failed\n";
      return 1;
    }
  }
  return 0;
}
