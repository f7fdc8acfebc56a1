#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cpks/acceptance.hpp"
#include "cpks/config.hpp"
#include "cpks/experiment.hpp"
#include "cpks/inequalities.hpp"
#include "cpks/parallel.hpp"

namespace {

cpks::RunConfig load_with_overrides(const std::string& path, const std::vector<std::string>& overrides) {
  cpks::RunConfig config = cpks::load_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    cpks::set_key(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

int simulate(const std::string& path, const std::vector<std::string>& overrides, bool print_config) {
  const cpks::RunConfig config = load_with_overrides(path, overrides);
  if (print_config) std::cout << cpks::to_text(config);

  const auto result = cpks::run_experiment(config);
  const auto& s = result.summary;
  std::printf("status %s  t=%.6g  steps=%d  dt=%.4g\n", cpks::to_string(s.status).c_str(), s.t_final, s.steps,
              s.dt);
  if (s.failure)
    std::printf("failure at t=%.6g: %s (%.4g)\n", s.failure->t, s.failure->reason.c_str(), s.failure->value);
  std::printf("mass %.10g -> %.10g  |n|inf %.6g (sup %.6g)  E sup %.6g\n", s.initial_mass, s.final_mass,
              s.initial_linf, s.sup_linf, s.e_sup);
  if (!config.output.dir.empty()) std::printf("output in %s\n", config.output.dir.c_str());
  return s.status == cpks::RunStatus::Completed ? 0 : 2;
}

int sweep(const std::string& path, const std::vector<std::string>& overrides, const std::vector<std::string>& axes,
          int workers) {
  const cpks::RunConfig base = load_with_overrides(path, overrides);
  cpks::SweepAxis axis;
  for (const auto& a : axes) cpks::parse_axis(a, axis);
  const auto rows = cpks::sweep(base, axis, workers > 0 ? workers : cpks::worker_count());
  cpks::write_sweep_csv(std::cout, rows);
  for (const auto& r : rows)
    if (r.failed) return 2;
  return 0;
}

int inequalities(const std::string& suite, int trials, std::uint64_t seed, int ny, int nz, const std::string& out) {
  const auto rows = cpks::inequalities::run_suite(suite, trials, seed, ny, nz);
  if (out.empty()) {
    cpks::inequalities::write_csv(std::cout, rows);
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    cpks::inequalities::write_csv(f, rows);
  }
  // per-operation max on stderr
  std::vector<std::pair<std::string, double>> maxima;
  for (const auto& r : rows) {
    auto it = std::find_if(maxima.begin(), maxima.end(), [&](auto& p) { return p.first == r.operation; });
    if (it == maxima.end())
      maxima.emplace_back(r.operation, r.ratio);
    else
      it->second = std::max(it->second, r.ratio);
  }
  for (const auto& [op, m] : maxima) std::fprintf(stderr, "%-22s max ratio %.6f\n", op.c_str(), m);
  return 0;
}

int check(const std::vector<int>& only, const std::string& scratch) {
  cpks::acceptance::Options options;
  options.only = only;
  if (!scratch.empty()) options.scratch_dir = scratch;
  int failed = 0;
  cpks::acceptance::run(options, [&](const cpks::acceptance::CriterionResult& r) {
    std::cout << cpks::acceptance::format(r) << std::endl;
    if (!r.passed) ++failed;
  });
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chemotaxis-Couette channel solver and inequality lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool print_config = false;
  auto* sim = app.add_subcommand("simulate", "Run one experiment from a config file");
  sim->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sim->add_option("--set", overrides, "Override a config key (key=value), repeatable");
  sim->add_flag("--print-config", print_config, "Print the resolved config first");

  std::vector<std::string> axes;
  int workers = 0;
  auto* sw = app.add_subcommand("sweep", "Run a grid of (A, M) experiments");
  sw->add_option("config", config_path, "Base config file")->required()->check(CLI::ExistingFile);
  sw->add_option("--axis", axes, "Axis values, e.g. A=1e3,1e4 or M=0.3,8")->required();
  sw->add_option("--set", overrides, "Override a base config key (key=value), repeatable");
  sw->add_option("--workers", workers, "Parallel runs (default: CPKS_THREADS or core count)");

  std::string suite;
  int trials = 100, ny = 129, nz = 64;
  std::uint64_t seed = 1;
  std::string out;
  auto* ineq = app.add_subcommand("inequalities", "Evaluate inequality ratios on random test functions");
  ineq->add_option("suite", suite, "Suite name")
      ->required()
      ->check(CLI::IsMember(cpks::inequalities::suite_names()));
  ineq->add_option("--trials", trials, "Number of random trials")->check(CLI::PositiveNumber);
  ineq->add_option("--seed", seed, "Base seed");
  ineq->add_option("--ny", ny, "Wall-normal points (odd)");
  ineq->add_option("--nz", nz, "Periodic points (even)");
  ineq->add_option("--out", out, "CSV file (default: stdout)");

  std::vector<int> only;
  std::string scratch;
  auto* chk = app.add_subcommand("check", "Run the acceptance criteria");
  chk->add_option("--only", only, "Criterion ids to run (default: all)")->check(CLI::Range(1, 10));
  chk->add_option("--scratch", scratch, "Scratch directory for run output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return simulate(config_path, overrides, print_config);
    if (*sw) return sweep(config_path, overrides, axes, workers);
    if (*ineq) return inequalities(suite, trials, seed, ny, nz, out);
    if (*chk) return check(only, scratch);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
