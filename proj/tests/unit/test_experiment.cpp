#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpks/checkpoint.hpp"
#include "cpks/diagnostics.hpp"
#include "cpks/experiment.hpp"
#include "json.hpp"

using namespace cpks;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cpks-unit-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

RunConfig small_config() {
  RunConfig c;
  c.nx = 16;
  c.ny = 33;
  c.nz = 16;
  c.params.A = 100.0;
  c.params.t_end = 0.1;
  c.params.dt = 0.01;
  c.init.mass = 0.3;
  c.init.u_product = 0.5;
  c.output.cadence = 2;
  return c;
}

}  // namespace

TEST(BuildInitial, BumpHasTargetMass) {
  RunConfig c = small_config();
  const Grid g = c.grid();
  const State s = build_initial(c, g);
  EXPECT_NEAR(diagnostics::mass(s.n, g), 0.3, 1e-10);
  EXPECT_NEAR(lift_product(s, g, c.params), 0.5, 1e-12);
  EXPECT_LT(s.n.hermitian_defect(), 1e-15);
  for (int i1 = 0; i1 < g.nx(); ++i1)
    for (int i3 = 0; i3 < g.nz(); ++i3) {
      EXPECT_EQ(s.n(i1, i3, 0), Complex(0.0));
      EXPECT_EQ(s.n(i1, i3, g.ny() - 1), Complex(0.0));
    }
}

TEST(BuildInitial, ZeroAmplitudeGivesZeroVelocity) {
  RunConfig c = small_config();
  c.init.u_product = 0.0;
  c.init.u_amp = 0.0;
  const State s = build_initial(c, c.grid());
  EXPECT_EQ(s.omega2.max_abs(), 0.0);
  EXPECT_EQ(s.delta_u2.max_abs(), 0.0);
  for (double v : s.mean_u1) EXPECT_EQ(v, 0.0);
  for (double v : s.mean_u3) EXPECT_EQ(v, 0.0);
}

TEST(BuildInitial, StripeIsStreamwiseConstant) {
  RunConfig c = small_config();
  c.init.preset = "stripe";
  c.init.mass = 1.5;
  const Grid g = c.grid();
  const State s = build_initial(c, g);
  EXPECT_NEAR(diagnostics::mass(s.n, g), 1.5, 1e-10);
  EXPECT_EQ(diagnostics::project_x_nonzero(s.n).max_abs(), 0.0);
}

TEST(BuildInitial, NoiseIsSeeded) {
  RunConfig c = small_config();
  c.init.noise = 0.2;
  const Grid g = c.grid();
  const State a = build_initial(c, g);
  EXPECT_EQ(build_initial(c, g), a);
  c.seed = 2;
  EXPECT_NE(build_initial(c, g), a);
  EXPECT_NEAR(diagnostics::mass(a.n, g), 0.3, 1e-10);
}

TEST(BuildInitial, RestartIsBitExact) {
  const fs::path dir = scratch("restart");
  fs::create_directories(dir);
  RunConfig c = small_config();
  const Grid g = c.grid();
  const State s = random_state(g, 12);
  save_checkpoint(s, g, c.params, dir / "s.cpks");
  c.init.preset = "restart";
  c.init.restart_path = (dir / "s.cpks").string();
  EXPECT_EQ(build_initial(c, g), s);
  c.nx = 32;
  EXPECT_THROW(build_initial(c, c.grid()), std::runtime_error);
}

TEST(RunExperiment, ZeroEndTimeWritesOneRow) {
  RunConfig c = small_config();
  c.params.t_end = 0.0;
  c.output.dir = scratch("t0").string();
  const auto r = run_experiment(c);
  EXPECT_EQ(r.summary.status, RunStatus::Completed);
  EXPECT_EQ(r.summary.steps, 0);
  const auto rows = lines(slurp(fs::path(c.output.dir) / "timeseries.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].rfind("t,mass,linf_n,E,ya_n,ya_dxomega2,xa_u2,wall_flux,", 0), 0u);
  EXPECT_TRUE(fs::exists(fs::path(c.output.dir) / "final.cpks"));
  const auto j = nlohmann::json::parse(slurp(fs::path(c.output.dir) / "summary.json"));
  EXPECT_EQ(j["status"], "Completed");
}

TEST(RunExperiment, OutputsAndCheckpoints) {
  RunConfig c = small_config();
  c.output.dir = scratch("outputs").string();
  c.output.checkpoint_every = 2;
  const auto r = run_experiment(c);
  const fs::path dir = c.output.dir;
  EXPECT_EQ(r.summary.status, RunStatus::Completed);
  EXPECT_EQ(r.summary.steps, 10);
  // samples at steps 0, 2, ..., 10
  const auto rows = lines(slurp(dir / "timeseries.csv"));
  EXPECT_EQ(rows.size(), 7u);
  EXPECT_EQ(r.ledger.size(), 6u);
  int checkpoints = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().rfind("checkpoint_", 0) == 0) ++checkpoints;
  EXPECT_GT(checkpoints, 0);
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_DOUBLE_EQ(j["lift_product"].get<double>(), r.summary.lift_product);
  EXPECT_EQ(j["steps"], 10);
  EXPECT_EQ(load_checkpoint(dir / "final.cpks", c.grid()).state, r.final_state);
  // every float in the csv carries 17 significant digits
  const std::string cell = rows[1].substr(rows[1].find(',') + 1, rows[1].find(',', rows[1].find(',') + 1) - rows[1].find(',') - 1);
  EXPECT_EQ(std::stod(cell), r.ledger.mass_series[0]);
}

TEST(RunExperiment, UnwritableDirectoryReportsPath) {
  RunConfig c = small_config();
  c.output.dir = "/proc/cpks-cannot-write-here";
  try {
    run_experiment(c);
    FAIL() << "expected an I/O error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/proc/cpks-cannot-write-here"), std::string::npos);
  }
}

TEST(RunExperiment, Deterministic) {
  RunConfig c = small_config();
  c.output.dir = scratch("det-a").string();
  run_experiment(c);
  const std::string a = slurp(fs::path(c.output.dir) / "timeseries.csv");
  c.output.dir = scratch("det-b").string();
  run_experiment(c);
  EXPECT_EQ(slurp(fs::path(c.output.dir) / "timeseries.csv"), a);
}

TEST(Sweep, SingleCellMatchesRunExperiment) {
  RunConfig c = small_config();
  SweepAxis axis;
  axis.A = {c.params.A};
  axis.M = {c.init.mass};
  const auto rows = sweep(c, axis, 1);
  ASSERT_EQ(rows.size(), 1u);
  const auto direct = run_experiment(c);
  EXPECT_FALSE(rows[0].failed);
  EXPECT_EQ(rows[0].summary.sup_linf, direct.summary.sup_linf);
  EXPECT_EQ(rows[0].summary.e_final, direct.summary.e_final);
  EXPECT_EQ(rows[0].summary.final_mass, direct.summary.final_mass);
}

TEST(Sweep, WritesCsvAndIsDeterministic) {
  RunConfig c = small_config();
  c.params.t_end = 0.04;
  SweepAxis axis;
  parse_axis("A=50,200", axis);
  parse_axis("M=0.1,0.3", axis);
  c.output.dir = scratch("sweep-a").string();
  const auto rows = sweep(c, axis, 2);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].A, 50.0);
  EXPECT_EQ(rows[1].M, 0.3);
  const std::string a = slurp(fs::path(c.output.dir) / "sweep.csv");
  EXPECT_EQ(lines(a).size(), 5u);
  EXPECT_EQ(lines(a)[0], "A,M,status,t_final,linf_sup_over_initial,decay_rate_n_neq,E_sup,lift_product,error");
  EXPECT_TRUE(fs::exists(fs::path(c.output.dir) / "A50_M0.1" / "timeseries.csv"));
  c.output.dir = scratch("sweep-b").string();
  sweep(c, axis, 1);
  EXPECT_EQ(slurp(fs::path(c.output.dir) / "sweep.csv"), a);
}

TEST(Sweep, FailedRowDoesNotStopOthers) {
  RunConfig c = small_config();
  c.params.t_end = 0.02;
  SweepAxis axis;
  axis.A = {100.0};
  axis.M = {-1.0, 0.3};
  const auto rows = sweep(c, axis, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].failed);
  EXPECT_FALSE(rows[0].error.empty());
  EXPECT_FALSE(rows[1].failed);
}

TEST(Sweep, AxisParsing) {
  SweepAxis axis;
  parse_axis("A=1e3,1e4,1e5", axis);
  EXPECT_EQ(axis.A, (std::vector<double>{1e3, 1e4, 1e5}));
  EXPECT_THROW(parse_axis("B=1", axis), std::invalid_argument);
  EXPECT_THROW(parse_axis("A", axis), std::invalid_argument);
  EXPECT_THROW(parse_axis("M=1,x", axis), std::invalid_argument);
  EXPECT_THROW(parse_axis("M=", axis), std::invalid_argument);
}
