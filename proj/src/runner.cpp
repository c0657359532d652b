#include "tdqmc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tdqmc/error.hpp"

namespace tdqmc {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kCoreRadius = 0.5;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json header(const RunConfig& c, const std::string& command) {
  return {{"command", command}, {"version", version()}, {"seed", c.seed}, {"config", c.to_json()}};
}

json counters_json(const EngineCounters& c) {
  return {{"velocity_evaluations", c.velocity_evaluations},
          {"node_events", c.node_events},
          {"clamp_events", c.clamp_events},
          {"node_rate", c.node_rate()},
          {"clamp_rate", c.clamp_rate()},
          {"proposals", c.proposals},
          {"acceptance_rate", c.acceptance_rate()}};
}

json walker_histogram(const WalkerEnsemble& e, double half_width = 10.0, std::size_t bins = 40) {
  std::vector<std::size_t> counts(bins, 0);
  std::size_t outside = 0;
  const double w = 2.0 * half_width / static_cast<double>(bins);
  for (const auto& xs : e.positions) {
    for (double x : xs) {
      const double b = std::floor((x + half_width) / w);
      if (b < 0 || b >= static_cast<double>(bins)) {
        ++outside;
      } else {
        ++counts[static_cast<std::size_t>(b)];
      }
    }
  }
  return {{"x_min", -half_width}, {"x_max", half_width}, {"bins", bins}, {"counts", counts}, {"outside", outside}};
}

// Mean width of walkers within kCoreRadius of the nucleus, largest width,
// and a profile of the mean width against |x|.
json bandwidth_diagnostics(const GroundState& g) {
  double core_sum = 0.0;
  std::size_t core_n = 0;
  double largest = 0.0;
  constexpr double kBin = 1.0;
  std::map<int, std::pair<double, std::size_t>> profile;
  for (std::size_t i = 0; i < kElectrons; ++i) {
    const auto& xs = g.state.ensemble.positions[i];
    const auto& bw = g.bandwidths[i];
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (!std::isfinite(bw[k])) continue;
      largest = std::max(largest, bw[k]);
      if (std::abs(xs[k]) < kCoreRadius) {
        core_sum += bw[k];
        ++core_n;
      }
      auto& p = profile[static_cast<int>(std::abs(xs[k]) / kBin)];
      p.first += bw[k];
      ++p.second;
    }
  }
  json prof = json::array();
  for (const auto& [bin, p] : profile) {
    prof.push_back({{"abs_x_from", bin * kBin}, {"abs_x_to", (bin + 1) * kBin}, {"mean_sigma", p.first / p.second},
                    {"walkers", p.second}});
  }
  const double core = core_n ? core_sum / static_cast<double>(core_n) : std::nan("");
  return {{"core_radius", kCoreRadius},
          {"core_mean_sigma", finite_or_null(core)},
          {"core_walkers", core_n},
          {"max_sigma", largest},
          {"max_over_core", finite_or_null(largest / core)},
          {"profile", prof}};
}

std::string bandwidths_csv(const GroundState& g) {
  std::string out = "electron,walker,x,sigma\n";
  char buf[96];
  for (std::size_t i = 0; i < kElectrons; ++i) {
    const auto& xs = g.state.ensemble.positions[i];
    for (std::size_t k = 0; k < xs.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.15g,%.15g\n", i, k, xs[k], g.bandwidths[i][k]);
      out += buf;
    }
  }
  return out;
}

// Files are collected first and written only after the whole command has
// succeeded, so a failed run leaves nothing behind.
struct PendingOutputs {
  fs::path dir;
  std::vector<std::pair<std::string, std::string>> files;

  std::vector<fs::path> commit() const {
    fs::create_directories(dir);
    std::vector<fs::path> out;
    for (const auto& [name, content] : files) {
      write_atomically(dir / name, content);
      out.push_back(dir / name);
    }
    return out;
  }
};

json final_values(const TimeSeries& ts) {
  const Record& r = ts.back();
  double max_field = 0.0;
  for (const auto& x : ts.records()) max_field = std::max(max_field, std::abs(x.field));
  std::optional<double> last_energy;
  for (const auto& x : ts.records())
    if (x.energy) last_energy = x.energy;
  return {{"t", r.t},
          {"ion_proj", r.ion_proj},
          {"ion_walk_latched", optional_json(r.ion_walk_latched)},
          {"ion_walk_inst", optional_json(r.ion_walk_inst)},
          {"ion_region", optional_json(r.ion_region)},
          {"energy", optional_json(last_energy)},
          {"dipole", r.dipole},
          {"absorbed_norm", r.absorbed_norm},
          {"node_events", r.node_events},
          {"max_abs_field", max_field}};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string run_label(const json& summary) {
  const auto& run = summary.at("config").at("run");
  std::string s = run.at("solver").get<std::string>();
  if (s == "tdqmc") s += "-" + run.at("regime").get<std::string>();
  return s;
}

}  // namespace

std::string version() { return TDQMC_VERSION; }

RunReport run_relax(const RunConfig& config) {
  config.validate();
  json summary = header(config, "relax");
  PendingOutputs out{config.out_dir, {}};
  const Grid1D grid = config.grid();
  switch (config.solver) {
    case SolverKind::tdqmc: {
      Engine engine(config.resolved_engine(), config.correlation());
      const auto result = engine.relax();
      GroundState g{engine.state(), engine.reference(), result.energy, engine.counters(),
                    {std::vector<double>(engine.bandwidths(0).begin(), engine.bandwidths(0).end()),
                     std::vector<double>(engine.bandwidths(1).begin(), engine.bandwidths(1).end())}};
      json trace = json::array();
      for (const auto& [s, e] : result.energy_trace) trace.push_back({s, e});
      summary["energy"] = result.energy;
      summary["energy_trace"] = trace;
      summary["counters"] = counters_json(engine.counters());
      summary["walker_histogram"] = walker_histogram(g.state.ensemble);
      summary["bandwidths"] = bandwidth_diagnostics(g);
      if (config.write_bandwidths) out.files.emplace_back("bandwidths.csv", bandwidths_csv(g));
      break;
    }
    case SolverKind::exact: {
      const auto ground = exact_ground_state(grid, config.potentials, config.ground);
      const auto gap = exact_first_gap(ground, config.potentials, config.ground);
      summary["energy"] = ground.energy;
      summary["steps"] = ground.steps;
      summary["exchange_asymmetry"] = exchange_asymmetry(ground.psi);
      summary["first_excited_energy"] = gap.excited;
      summary["gap"] = gap.gap;
      break;
    }
    case SolverKind::tdhf: {
      const auto orb = hartree_scf_ground(grid, config.potentials, config.ground);
      summary["energy"] = orb.energy;
      summary["iterations"] = orb.iterations;
      summary["residual"] = orb.residual;
      break;
    }
  }
  out.files.emplace_back("summary.json", summary.dump(2) + "\n");
  return {summary, out.commit()};
}

RunReport run_propagate(const RunConfig& config) {
  config.validate();
  json summary = header(config, "propagate");
  const Grid1D grid = config.grid();
  const std::size_t steps = pulse_steps(config.pulse, config.engine.dt);
  const PropagationOptions opt = config.propagation();
  TimeSeries ts;
  switch (config.solver) {
    case SolverKind::tdqmc: {
      Engine engine(config.resolved_engine(), config.correlation());
      summary["ground_energy"] = engine.relax().energy;
      ts = engine.propagate(config.pulse, steps, config.record_every, config.energy_every);
      summary["counters"] = counters_json(engine.counters());
      if (engine.counters().node_rate() > 0.1) summary["warnings"].push_back("node-proximity rate above 10%");
      if (engine.counters().clamp_rate() > 0.01) summary["warnings"].push_back("velocity clamp rate above 1%");
      break;
    }
    case SolverKind::exact: {
      const auto ground = exact_ground_state(grid, config.potentials, config.ground);
      summary["ground_energy"] = ground.energy;
      auto run = exact_propagate(ground.psi, config.potentials, config.pulse, steps, opt);
      summary["two_electron_survival"] = run.two_electron_survival;
      summary["two_electron_ionization"] = 1.0 - run.two_electron_survival;
      summary["ion_region_full_absorbed"] = run.region_full_absorbed;
      ts = std::move(run.series);
      break;
    }
    case SolverKind::tdhf: {
      const auto orb = hartree_scf_ground(grid, config.potentials, config.ground);
      summary["ground_energy"] = orb.energy;
      ts = tdhf_propagate(orb, config.potentials, config.pulse, steps, opt).series;
      break;
    }
  }
  summary["steps"] = steps;
  summary["records"] = ts.size();
  summary["final"] = final_values(ts);
  PendingOutputs out{config.out_dir, {{"timeseries.csv", ts.to_csv()}, {"summary.json", summary.dump(2) + "\n"}}};
  return {summary, out.commit()};
}

RunReport run_compare(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
  if (run_dirs.size() < 2) throw ConfigError("compare needs at least two run directories");
  struct Run {
    std::string label;
    json summary;
    TimeSeries series;
    double dt;
  };
  std::vector<Run> runs;
  std::map<std::string, int> label_count;
  for (const auto& d : run_dirs) {
    json s = json::parse(read_file(d / "summary.json"));
    if (s.value("command", "") != "propagate") throw ConfigError(d.string() + " is not a propagate run");
    std::string label = run_label(s);
    if (const int n = label_count[label]++; n > 0) label += "#" + std::to_string(n + 1);
    const double dt = s.at("config").at("engine").at("dt").get<double>();
    runs.push_back({label, std::move(s), TimeSeries::from_csv(read_file(d / "timeseries.csv")), dt});
  }
  const json& pulse0 = runs[0].summary.at("config").at("pulse");
  for (const auto& r : runs) {
    if (r.summary.at("config").at("pulse") != pulse0) throw ConfigError("runs use different pulses: " + r.label);
    if (r.series.empty()) throw ConfigError("run " + r.label + " has an empty time series");
  }

  // align on t rounded to 1e-9 a.u.
  auto key = [](double t) { return std::llround(t * 1e9); };
  std::vector<std::map<long long, const Record*>> index(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r)
    for (const auto& rec : runs[r].series.records()) index[r][key(rec.t)] = &rec;
  std::vector<long long> common;
  for (const auto& [k, rec] : index[0]) {
    bool all = true;
    for (std::size_t r = 1; r < runs.size() && all; ++r) all = index[r].count(k) > 0;
    if (all) common.push_back(k);
  }
  if (common.empty()) throw ConfigError("runs share no common time points");

  std::string csv = "t,field";
  for (const auto& r : runs) csv += "," + r.label + ".ion_proj," + r.label + ".ion_walk_latched," + r.label + ".ion_region";
  csv += '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.15g", v);
    csv += buf;
  };
  auto put_opt = [&](const std::optional<double>& v) {
    if (v) {
      put(*v);
    } else {
      csv += ",nan";
    }
  };
  for (long long k : common) {
    const Record* first = index[0].at(k);
    std::snprintf(buf, sizeof buf, "%.15g", first->t);
    csv += buf;
    put(first->field);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const Record* rec = index[r].at(k);
      put(rec->ion_proj);
      put_opt(rec->ion_walk_latched);
      put_opt(rec->ion_region);
    }
    csv += '\n';
  }

  json finals = json::array();
  for (const auto& r : runs) {
    const Record& last = r.series.back();
    finals.push_back({{"label", r.label},
                      {"ion_proj", last.ion_proj},
                      {"ion_walk_latched", optional_json(last.ion_walk_latched)},
                      {"ion_region", optional_json(last.ion_region)}});
  }
  json pairs = json::array();
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      double worst = 0.0;
      for (long long k : common) worst = std::max(worst, std::abs(index[a].at(k)->ion_proj - index[b].at(k)->ion_proj));
      pairs.push_back({{"a", runs[a].label},
                       {"b", runs[b].label},
                       {"max_abs_deviation_ion_proj", worst},
                       {"final_gap_ion_proj", runs[b].series.back().ion_proj - runs[a].series.back().ion_proj}});
    }
  }
  json summary = {{"command", "compare"},
                  {"version", version()},
                  {"runs", [&] {
                     json a = json::array();
                     for (const auto& d : run_dirs) a.push_back(d.string());
                     return a;
                   }()},
                  {"pulse", pulse0},
                  {"aligned_points", common.size()},
                  {"finals", finals},
                  {"pairs", pairs}};
  PendingOutputs out{out_dir, {{"merged_compare.csv", csv}, {"compare_summary.json", summary.dump(2) + "\n"}}};
  return {summary, out.commit()};
}

RunReport run_sweep_sigma(const RunConfig& config, const std::optional<std::vector<double>>& sigmas) {
  config.validate();
  if (config.solver != SolverKind::tdqmc) throw ConfigError("sweep-sigma requires solver = tdqmc");
  const std::vector<double> grid = sigmas ? *sigmas : config.sweep_sigmas;
  if (grid.empty()) throw ConfigError("sweep-sigma needs at least one sigma");
  for (double s : grid)
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("sweep sigmas must be positive and finite");

  const EngineConfig engine = config.resolved_engine();
  const SigmaScan scan = variational_sigma(
      [&](double sigma) {
        BandwidthSpec b = config.bandwidth;
        b.sigma = sigma;
        return relax_ground_state(engine, CorrelationRegime::effective(b)).energy;
      },
      grid);
  const double mean_field = relax_ground_state(engine, CorrelationRegime::mean_field()).energy;

  std::string csv = "sigma,energy,error\n";
  json cands = json::array();
  char buf[96];
  for (const auto& c : scan.candidates) {
    if (c.energy) {
      std::snprintf(buf, sizeof buf, "%.15g,%.15g,\n", c.sigma, *c.energy);
    } else {
      std::snprintf(buf, sizeof buf, "%.15g,nan,", c.sigma);
    }
    csv += buf;
    if (!c.energy) {
      std::string err = c.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      csv += err + "\n";
    }
    cands.push_back({{"sigma", c.sigma}, {"energy", optional_json(c.energy)}, {"error", c.error}});
  }
  json summary = header(config, "sweep-sigma");
  summary["candidates"] = cands;
  summary["best_sigma"] = scan.best_sigma;
  summary["best_energy"] = scan.best_energy;
  summary["mean_field_energy"] = mean_field;
  PendingOutputs out{config.out_dir, {{"sigma_scan.csv", csv}, {"summary.json", summary.dump(2) + "\n"}}};
  return {summary, out.commit()};
}

std::string format_compare_table(const json& summary) {
  std::ostringstream o;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-24s %12s %12s %12s\n", "run", "ion_proj", "walk_latched", "ion_region");
  o << buf;
  auto cell = [](const json& v) {
    char b[32];
    if (v.is_null()) return std::string("-");
    std::snprintf(b, sizeof b, "%.6f", v.get<double>());
    return std::string(b);
  };
  for (const auto& f : summary.at("finals")) {
    std::snprintf(buf, sizeof buf, "%-24s %12s %12s %12s\n", f.at("label").get<std::string>().c_str(),
                  cell(f.at("ion_proj")).c_str(), cell(f.at("ion_walk_latched")).c_str(),
                  cell(f.at("ion_region")).c_str());
    o << buf;
  }
  for (const auto& p : summary.at("pairs")) {
    std::snprintf(buf, sizeof buf, "%s vs %s: max |d ion_proj| = %.6f, final gap = %+.6f\n",
                  p.at("a").get<std::string>().c_str(), p.at("b").get<std::string>().c_str(),
                  p.at("max_abs_deviation_ion_proj").get<double>(), p.at("final_gap_ion_proj").get<double>());
    o << buf;
  }
  return o.str();
}

}  // namespace tdqmc
