#include "cpks/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cpks {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end)
    throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end)
    throw std::invalid_argument(key + ": expected an integer, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  return static_cast<int>(to_integer(key, v));
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw std::invalid_argument(key + ": expected true/false, got '" + v + "'");
}

// shortest text that parses back to the same double
std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"grid.nx", [](RunConfig& c, auto& k, auto& v) { c.nx = to_int(k, v); }},
      {"grid.ny", [](RunConfig& c, auto& k, auto& v) { c.ny = to_int(k, v); }},
      {"grid.nz", [](RunConfig& c, auto& k, auto& v) { c.nz = to_int(k, v); }},
      {"params.A", [](RunConfig& c, auto& k, auto& v) { c.params.A = to_double(k, v); }},
      {"params.a", [](RunConfig& c, auto& k, auto& v) { c.params.a = to_double(k, v); }},
      {"params.dt", [](RunConfig& c, auto& k, auto& v) { c.params.dt = to_double(k, v); }},
      {"params.t_end", [](RunConfig& c, auto& k, auto& v) { c.params.t_end = to_double(k, v); }},
      {"params.dealias", [](RunConfig& c, auto& k, auto& v) { c.params.dealias_on = to_bool(k, v); }},
      {"params.linear_only", [](RunConfig& c, auto& k, auto& v) { c.params.linear_only = to_bool(k, v); }},
      {"params.coupling", [](RunConfig& c, auto& k, auto& v) { c.params.coupling_on = to_bool(k, v); }},
      {"init.preset", [](RunConfig& c, auto&, auto& v) { c.init.preset = v; }},
      {"init.mass", [](RunConfig& c, auto& k, auto& v) { c.init.mass = to_double(k, v); }},
      {"init.width", [](RunConfig& c, auto& k, auto& v) { c.init.width = to_double(k, v); }},
      {"init.sy", [](RunConfig& c, auto& k, auto& v) { c.init.sy = to_double(k, v); }},
      {"init.center_x", [](RunConfig& c, auto& k, auto& v) { c.init.center_x = to_double(k, v); }},
      {"init.center_z", [](RunConfig& c, auto& k, auto& v) { c.init.center_z = to_double(k, v); }},
      {"init.u_amp", [](RunConfig& c, auto& k, auto& v) { c.init.u_amp = to_double(k, v); }},
      {"init.u_product", [](RunConfig& c, auto& k, auto& v) { c.init.u_product = to_double(k, v); }},
      {"init.noise", [](RunConfig& c, auto& k, auto& v) { c.init.noise = to_double(k, v); }},
      {"init.restart_path", [](RunConfig& c, auto&, auto& v) { c.init.restart_path = v; }},
      {"output.dir", [](RunConfig& c, auto&, auto& v) { c.output.dir = v; }},
      {"output.cadence", [](RunConfig& c, auto& k, auto& v) { c.output.cadence = to_int(k, v); }},
      {"output.checkpoint_every",
       [](RunConfig& c, auto& k, auto& v) { c.output.checkpoint_every = to_int(k, v); }},
      {"seed", [](RunConfig& c, auto& k, auto& v) {
         const auto s = to_integer(k, v);
         if (s < 0) throw std::invalid_argument(k + ": must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"blowup.threshold_abs",
       [](RunConfig& c, auto& k, auto& v) { c.blowup.threshold_abs = to_double(k, v); }},
      {"blowup.growth_factor",
       [](RunConfig& c, auto& k, auto& v) { c.blowup.growth_factor = to_double(k, v); }},
      {"blowup.tail_frac", [](RunConfig& c, auto& k, auto& v) { c.blowup.tail_frac = to_double(k, v); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  (void)grid();
  Params p = params;
  if (p.dt == 0.0) p.dt = 1.0;  // 0 selects the default step
  p.validate();
  if (init.preset != "gaussian_bump" && init.preset != "stripe" && init.preset != "restart")
    throw std::invalid_argument("init.preset: unknown preset '" + init.preset + "'");
  if (init.preset != "restart" && !(init.mass > 0.0))
    throw std::invalid_argument("init.mass: must be > 0");
  if (init.preset == "restart" && init.restart_path.empty())
    throw std::invalid_argument("init.restart_path: required by the restart preset");
  if (!(init.width > 0.0)) throw std::invalid_argument("init.width: must be > 0");
  if (!(init.sy >= 0.0)) throw std::invalid_argument("init.sy: must be >= 0");
  if (init.u_amp < 0.0 || init.u_product < 0.0)
    throw std::invalid_argument("init.u_amp / init.u_product: must be >= 0");
  if (init.noise < 0.0 || init.noise >= 1.0)
    throw std::invalid_argument("init.noise: must lie in [0, 1)");
  if (output.cadence < 1) throw std::invalid_argument("output.cadence: must be >= 1");
  if (output.checkpoint_every < 0)
    throw std::invalid_argument("output.checkpoint_every: must be >= 0");
  if (!(blowup.threshold_abs > 0.0) || !(blowup.growth_factor > 1.0) ||
      !(blowup.tail_frac > 0.0 && blowup.tail_frac < 1.0))
    throw std::invalid_argument("blowup: thresholds out of range");
}

void set_key(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw std::invalid_argument("unknown key '" + key + "'");
  it->second(config, key, value);
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw std::invalid_argument(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw std::invalid_argument(where + "empty key or value");
    try {
      set_key(config, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + e.what());
    }
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(source + ": " + e.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  const auto b = [](bool v) { return v ? "true" : "false"; };
  o << "grid.nx = " << c.nx << "\n"
    << "grid.ny = " << c.ny << "\n"
    << "grid.nz = " << c.nz << "\n"
    << "params.A = " << fmt(c.params.A) << "\n"
    << "params.a = " << fmt(c.params.a) << "\n"
    << "params.dt = " << fmt(c.params.dt) << "\n"
    << "params.t_end = " << fmt(c.params.t_end) << "\n"
    << "params.dealias = " << b(c.params.dealias_on) << "\n"
    << "params.linear_only = " << b(c.params.linear_only) << "\n"
    << "params.coupling = " << b(c.params.coupling_on) << "\n"
    << "init.preset = " << c.init.preset << "\n"
    << "init.mass = " << fmt(c.init.mass) << "\n"
    << "init.width = " << fmt(c.init.width) << "\n"
    << "init.sy = " << fmt(c.init.sy) << "\n"
    << "init.center_x = " << fmt(c.init.center_x) << "\n"
    << "init.center_z = " << fmt(c.init.center_z) << "\n"
    << "init.u_amp = " << fmt(c.init.u_amp) << "\n"
    << "init.u_product = " << fmt(c.init.u_product) << "\n"
    << "init.noise = " << fmt(c.init.noise) << "\n";
  if (!c.init.restart_path.empty()) o << "init.restart_path = " << c.init.restart_path << "\n";
  if (!c.output.dir.empty()) o << "output.dir = " << c.output.dir << "\n";
  o << "output.cadence = " << c.output.cadence << "\n"
    << "output.checkpoint_every = " << c.output.checkpoint_every << "\n"
    << "seed = " << c.seed << "\n"
    << "blowup.threshold_abs = " << fmt(c.blowup.threshold_abs) << "\n"
    << "blowup.growth_factor = " << fmt(c.blowup.growth_factor) << "\n"
    << "blowup.tail_frac = " << fmt(c.blowup.tail_frac) << "\n";
  return o.str();
}

}  // namespace cpks
