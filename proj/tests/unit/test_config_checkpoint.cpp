#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpks/checkpoint.hpp"
#include "cpks/config.hpp"
#include "cpks/experiment.hpp"

using namespace cpks;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cpks-unit-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::string& b) {
  std::ofstream out(p, std::ios::binary);
  out << b;
}

}  // namespace

TEST(Config, ParsesEveryKey) {
  std::istringstream in(R"(# a comment
grid.nx = 16
grid.ny = 33
grid.nz = 8
params.A = 1e3       # trailing comment
params.a = 0.5
params.dt = 0.02
params.t_end = 3
params.dealias = off
params.linear_only = true
params.coupling = 0
init.preset = stripe
init.mass = 0.25
init.width = 0.4
init.sy = 2
init.center_x = 1
init.center_z = 2
init.u_amp = 0.01
init.u_product = 0
init.noise = 0.1
output.dir = /tmp/x
output.cadence = 5
output.checkpoint_every = 2
seed = 42
blowup.threshold_abs = 1e5
blowup.growth_factor = 50
blowup.tail_frac = 0.3
)");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.nx, 16);
  EXPECT_EQ(c.ny, 33);
  EXPECT_EQ(c.nz, 8);
  EXPECT_EQ(c.params.A, 1e3);
  EXPECT_EQ(c.params.a, 0.5);
  EXPECT_EQ(c.params.dt, 0.02);
  EXPECT_EQ(c.params.t_end, 3.0);
  EXPECT_FALSE(c.params.dealias_on);
  EXPECT_TRUE(c.params.linear_only);
  EXPECT_FALSE(c.params.coupling_on);
  EXPECT_EQ(c.init.preset, "stripe");
  EXPECT_EQ(c.init.mass, 0.25);
  EXPECT_EQ(c.init.width, 0.4);
  EXPECT_EQ(c.init.sy, 2.0);
  EXPECT_EQ(c.init.center_x, 1.0);
  EXPECT_EQ(c.init.center_z, 2.0);
  EXPECT_EQ(c.init.u_amp, 0.01);
  EXPECT_EQ(c.init.noise, 0.1);
  EXPECT_EQ(c.output.dir, "/tmp/x");
  EXPECT_EQ(c.output.cadence, 5);
  EXPECT_EQ(c.output.checkpoint_every, 2);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.blowup.threshold_abs, 1e5);
  EXPECT_EQ(c.blowup.growth_factor, 50.0);
  EXPECT_EQ(c.blowup.tail_frac, 0.3);
}

TEST(Config, TextRoundTrip) {
  RunConfig c;
  c.params.A = 1.0 / 3.0;
  c.init.mass = 0.1 + 0.2;
  c.output.dir = "out";
  std::istringstream in(to_text(c));
  const RunConfig back = parse_config(in);
  EXPECT_EQ(to_text(back), to_text(c));
  EXPECT_EQ(back.params.A, c.params.A);
  EXPECT_EQ(back.init.mass, c.init.mass);
}

TEST(Config, ErrorsCarryLineNumbers) {
  const auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_config(in, "cfg");
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("grid.nx = 16\nbogus.key = 1\n").find("cfg:2"), std::string::npos);
  EXPECT_NE(message("params.A = abc\n").find("cfg:1"), std::string::npos);
  EXPECT_NE(message("grid.nx 16\n").find("cfg:1"), std::string::npos);
  EXPECT_NE(message("params.dealias = maybe\n").find("params.dealias"), std::string::npos);
  EXPECT_NE(message("init.preset = spiral\n").find("init.preset"), std::string::npos);
  EXPECT_NE(message("init.mass = -1\n").find("init.mass"), std::string::npos);
  EXPECT_NE(message("output.cadence = 0\n").find("output.cadence"), std::string::npos);
  EXPECT_NE(message("grid.nx = 12\n"), "");
  EXPECT_NE(message("init.preset = restart\n").find("restart_path"), std::string::npos);
  EXPECT_EQ(message("params.dt = 0\n"), "");  // 0 selects the default step
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/cpks.cfg"), std::runtime_error);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const fs::path dir = scratch("ckpt");
  const Grid g = make_grid(8, 17, 16);
  Params p;
  p.A = 123.5;
  p.a = 0.25;
  State s = random_state(g, 4);
  s.t = 1.0 / 3.0;
  save_checkpoint(s, g, p, dir / "a.cpks");
  const Checkpoint c = load_checkpoint(dir / "a.cpks", g);
  EXPECT_EQ(c.state, s);
  EXPECT_EQ(c.nx, 8);
  EXPECT_EQ(c.ny, 17);
  EXPECT_EQ(c.nz, 16);
  EXPECT_EQ(c.A, 123.5);
  EXPECT_EQ(c.a, 0.25);
  // saving the loaded state reproduces the file
  save_checkpoint(c.state, g, p, dir / "b.cpks");
  EXPECT_EQ(bytes_of(dir / "a.cpks"), bytes_of(dir / "b.cpks"));
  // documented size: header + 3 complex fields + 2 profiles
  const std::size_t expect = 4 + 4 + 12 + 24 + 3 * 8 * 16 * 17 * 16 + 2 * 17 * 8;
  EXPECT_EQ(fs::file_size(dir / "a.cpks"), expect);
}

TEST(Checkpoint, RejectsCorruption) {
  const fs::path dir = scratch("ckpt-bad");
  const Grid g = make_grid(8, 17, 8);
  save_checkpoint(random_state(g, 1), g, Params{}, dir / "good.cpks");
  const std::string good = bytes_of(dir / "good.cpks");

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  write_bytes(dir / "magic.cpks", bad_magic);
  EXPECT_THROW(load_checkpoint(dir / "magic.cpks"), std::runtime_error);

  std::string bad_version = good;
  bad_version[4] = 9;
  write_bytes(dir / "version.cpks", bad_version);
  EXPECT_THROW(load_checkpoint(dir / "version.cpks"), std::runtime_error);

  write_bytes(dir / "short.cpks", good.substr(0, good.size() - 5));
  EXPECT_THROW(load_checkpoint(dir / "short.cpks"), std::runtime_error);

  write_bytes(dir / "long.cpks", good + "x");
  EXPECT_THROW(load_checkpoint(dir / "long.cpks"), std::runtime_error);

  EXPECT_THROW(load_checkpoint(dir / "missing.cpks"), std::runtime_error);
}

TEST(Checkpoint, CrossResolutionLoadFails) {
  const fs::path dir = scratch("ckpt-res");
  const Grid g = make_grid(8, 17, 8);
  save_checkpoint(random_state(g, 1), g, Params{}, dir / "s.cpks");
  EXPECT_NO_THROW(load_checkpoint(dir / "s.cpks"));
  EXPECT_THROW(load_checkpoint(dir / "s.cpks", make_grid(16, 17, 8)), std::runtime_error);
}
