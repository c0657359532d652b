#include "tdqmc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tdqmc/error.hpp"

namespace tdqmc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || v.empty()) throw std::invalid_argument("expected a number, got '" + v + "'");
  return out;
}

std::uint64_t to_unsigned(const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || v.empty())
    throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_double(trim(item)));
  if (out.empty()) throw std::invalid_argument("expected a comma-separated list of numbers");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"run",
       {
           {"solver", [](RunConfig& c, const std::string& v) { c.solver = solver_from_string(v); }},
           {"regime", [](RunConfig& c, const std::string& v) { c.regime = regime_from_string(v); }},
           {"seed", [](RunConfig& c, const std::string& v) { c.seed = to_unsigned(v); }},
       }},
      {"grid",
       {
           {"x_min", [](RunConfig& c, const std::string& v) { c.x_min = to_double(v); }},
           {"x_max", [](RunConfig& c, const std::string& v) { c.x_max = to_double(v); }},
           {"points", [](RunConfig& c, const std::string& v) { c.points = to_unsigned(v); }},
       }},
      {"potentials",
       {
           {"a", [](RunConfig& c, const std::string& v) { c.potentials.a = to_double(v); }},
           {"b", [](RunConfig& c, const std::string& v) { c.potentials.b = to_double(v); }},
       }},
      {"engine",
       {
           {"dt", [](RunConfig& c, const std::string& v) { c.engine.dt = to_double(v); }},
           {"relax_steps", [](RunConfig& c, const std::string& v) { c.engine.n_relax_steps = to_unsigned(v); }},
           {"rotation_angle", [](RunConfig& c, const std::string& v) { c.engine.rotation_angle = to_double(v); }},
           {"walkers", [](RunConfig& c, const std::string& v) { c.engine.walkers = to_unsigned(v); }},
           {"sigma0", [](RunConfig& c, const std::string& v) { c.engine.sigma0 = to_double(v); }},
           {"noise_a0", [](RunConfig& c, const std::string& v) { c.engine.noise_a0 = to_double(v); }},
           {"noise_decay_steps",
            [](RunConfig& c, const std::string& v) { c.engine.noise_decay_steps = to_unsigned(v); }},
           {"realtime_noise", [](RunConfig& c, const std::string& v) { c.engine.realtime_noise = to_double(v); }},
           {"thermalization",
            [](RunConfig& c, const std::string& v) { c.engine.thermalization = thermalization_from_string(v); }},
           {"v_max", [](RunConfig& c, const std::string& v) { c.engine.v_max = to_double(v); }},
           {"node_epsilon", [](RunConfig& c, const std::string& v) { c.engine.node_epsilon = to_double(v); }},
           {"potential_refresh_every",
            [](RunConfig& c, const std::string& v) { c.engine.potential_refresh_every = to_unsigned(v); }},
           {"absorber", [](RunConfig& c, const std::string& v) { c.engine.absorber = to_bool(v); }},
           {"absorber_fraction",
            [](RunConfig& c, const std::string& v) { c.engine.absorber_fraction = to_double(v); }},
       }},
      {"bandwidth",
       {
           {"mode", [](RunConfig& c, const std::string& v) { c.bandwidth.mode = bandwidth_mode_from_string(v); }},
           {"sigma", [](RunConfig& c, const std::string& v) { c.bandwidth.sigma = to_double(v); }},
           {"refresh_every", [](RunConfig& c, const std::string& v) { c.bandwidth.refresh_every = to_unsigned(v); }},
       }},
      {"pulse",
       {
           {"e0", [](RunConfig& c, const std::string& v) { c.pulse.e0 = to_double(v); }},
           {"omega", [](RunConfig& c, const std::string& v) { c.pulse.omega = to_double(v); }},
           {"cycles",
            [](RunConfig& c, const std::string& v) {
              const auto n = to_unsigned(v);
              if (n > 100000) throw std::invalid_argument("cycle count too large");
              c.pulse.n_cycles = static_cast<int>(n);
            }},
           {"envelope", [](RunConfig& c, const std::string& v) { c.pulse.envelope = envelope_from_string(v); }},
           {"t_start", [](RunConfig& c, const std::string& v) { c.pulse.t_start = to_double(v); }},
       }},
      {"reference",
       {
           {"dt", [](RunConfig& c, const std::string& v) { c.ground.dt = to_double(v); }},
           {"max_steps", [](RunConfig& c, const std::string& v) { c.ground.max_steps = to_unsigned(v); }},
           {"tolerance", [](RunConfig& c, const std::string& v) { c.ground.tolerance = to_double(v); }},
           {"mixing", [](RunConfig& c, const std::string& v) { c.ground.mixing = to_double(v); }},
       }},
      {"output",
       {
           {"dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
           {"record_every", [](RunConfig& c, const std::string& v) { c.record_every = to_unsigned(v); }},
           {"energy_every", [](RunConfig& c, const std::string& v) { c.energy_every = to_unsigned(v); }},
           {"write_bandwidths", [](RunConfig& c, const std::string& v) { c.write_bandwidths = to_bool(v); }},
       }},
      {"sweep",
       {
           {"sigmas", [](RunConfig& c, const std::string& v) { c.sweep_sigmas = to_list(v); }},
       }},
  };
  return s;
}

}  // namespace

std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::tdqmc:
      return "tdqmc";
    case SolverKind::exact:
      return "exact";
    case SolverKind::tdhf:
      return "tdhf";
  }
  return "?";
}

SolverKind solver_from_string(const std::string& s) {
  if (s == "tdqmc") return SolverKind::tdqmc;
  if (s == "exact") return SolverKind::exact;
  if (s == "tdhf" || s == "hartree") return SolverKind::tdhf;
  throw ConfigError("unknown solver '" + s + "' (expected tdqmc, exact or tdhf)");
}

CorrelationRegime RunConfig::correlation() const { return {regime, bandwidth}; }

EngineConfig RunConfig::resolved_engine() const {
  EngineConfig e = engine;
  e.grid = grid();
  e.potentials = potentials;
  e.seed = seed;
  return e;
}

PropagationOptions RunConfig::propagation() const {
  PropagationOptions p;
  p.dt = engine.dt;
  p.record_every = record_every;
  p.energy_every = energy_every;
  p.absorber = engine.absorber;
  p.absorber_fraction = engine.absorber_fraction;
  return p;
}

void RunConfig::validate() const {
  if (!(x_max > x_min)) throw ConfigError("grid x_max must exceed x_min");
  if (points < 8) throw ConfigError("grid needs at least 8 points");
  potentials.validate();
  pulse.validate();
  if (record_every == 0) throw ConfigError("record_every must be at least 1");
  if (solver == SolverKind::tdqmc) {
    resolved_engine().validate();
    if (regime == RegimeKind::effective) bandwidth.validate();
  } else if (!(engine.dt > 0.0)) {
    throw ConfigError("dt must be positive");
  }
  if (!(ground.dt > 0.0) || ground.max_steps == 0 || !(ground.tolerance > 0.0) ||
      !(ground.mixing > 0.0 && ground.mixing <= 1.0))
    throw ConfigError("reference settings need positive dt, max_steps, tolerance and mixing in (0, 1]");
  for (double s : sweep_sigmas)
    if (!(s > 0.0)) throw ConfigError("sweep sigmas must be positive");
  if (out_dir.empty()) throw ConfigError("output dir must not be empty");
}

nlohmann::json RunConfig::to_json() const {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); };
  return {
      {"run", {{"solver", to_string(solver)}, {"regime", to_string(regime)}, {"seed", seed}}},
      {"grid", {{"x_min", x_min}, {"x_max", x_max}, {"points", points}}},
      {"potentials", {{"a", potentials.a}, {"b", potentials.b}, {"nuclear_charge", potentials.nuclear_charge}}},
      {"engine",
       {{"dt", engine.dt},
        {"relax_steps", engine.n_relax_steps},
        {"rotation_angle", engine.rotation_angle},
        {"walkers", engine.walkers},
        {"sigma0", engine.sigma0},
        {"noise_a0", engine.noise_a0},
        {"noise_decay_steps", engine.decay_steps()},
        {"realtime_noise", engine.realtime_noise},
        {"thermalization", to_string(engine.thermalization)},
        {"v_max", engine.v_max},
        {"node_epsilon", engine.node_epsilon},
        {"potential_refresh_every", engine.potential_refresh_every},
        {"absorber", engine.absorber},
        {"absorber_fraction", engine.absorber_fraction}}},
      {"bandwidth",
       {{"mode", to_string(bandwidth.mode)}, {"sigma", num(bandwidth.sigma)}, {"refresh_every", bandwidth.refresh_every}}},
      {"pulse",
       {{"e0", pulse.e0},
        {"omega", pulse.omega},
        {"cycles", pulse.n_cycles},
        {"envelope", to_string(pulse.envelope)},
        {"t_start", pulse.t_start}}},
      {"reference",
       {{"dt", ground.dt}, {"max_steps", ground.max_steps}, {"tolerance", ground.tolerance}, {"mixing", ground.mixing}}},
      {"output",
       {{"dir", out_dir.string()},
        {"record_every", record_every},
        {"energy_every", energy_every},
        {"write_bandwidths", write_bandwidths}}},
      {"sweep", {{"sigmas", sweep_sigmas}}},
  };
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  const auto& sch = schema();
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) { throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg); };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!sch.count(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) fail("key '" + key + "' appears before any section header");
    const auto& keys = sch.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) fail("unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) fail("duplicate key '" + key + "' in [" + section + "]");
    if (value.empty()) fail("missing value for '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const ConfigError& e) {
      fail(e.what());
    } catch (const std::invalid_argument& e) {
      fail(std::string(key) + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string default_config_text() {
  const RunConfig c;
  std::ostringstream o;
  o << "[run]\nsolver = tdqmc\nregime = effective\nseed = " << c.seed << "\n\n"
    << "[grid]\nx_min = " << c.x_min << "\nx_max = " << c.x_max << "\npoints = " << c.points << "\n\n"
    << "[engine]\ndt = " << c.engine.dt << "\nrelax_steps = " << c.engine.n_relax_steps
    << "\nwalkers = " << c.engine.walkers << "\nsigma0 = " << c.engine.sigma0 << "\n\n"
    << "[bandwidth]\nmode = global\nsigma = " << c.bandwidth.sigma << "\n\n"
    << "[pulse]\ne0 = 0.2\nomega = 0.136\ncycles = 8\nenvelope = sin2\n\n"
    << "[output]\ndir = out\nrecord_every = " << c.record_every << "\n";
  return o.str();
}

}  // namespace tdqmc
