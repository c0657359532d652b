#include "tdqmc/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tdqmc/error.hpp"

namespace tdqmc {

namespace {

void check_fraction(const char* name, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw NumericalError(std::string("ionization measure ") + name + " outside [0, 1]: " + std::to_string(v));
  }
}

void put(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void put(std::string& out, const std::optional<double>& v) {
  if (v) {
    put(out, *v);
  } else {
    out += "nan";
  }
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty() || s == "nan") return std::nullopt;
  return std::stod(s);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

const std::vector<std::string>& TimeSeries::columns() {
  static const std::vector<std::string> cols = {"t",           "field",      "ion_proj", "ion_walk_latched",
                                                "ion_walk_inst", "ion_region", "energy",   "dipole",
                                                "absorbed_norm", "node_events"};
  return cols;
}

void TimeSeries::append(const Record& r) {
  if (!records_.empty() && !(r.t > records_.back().t)) throw NumericalError("time series times must increase");
  check_fraction("ion_proj", r.ion_proj);
  if (r.ion_walk_latched) check_fraction("ion_walk_latched", *r.ion_walk_latched);
  if (r.ion_walk_inst) check_fraction("ion_walk_inst", *r.ion_walk_inst);
  if (r.ion_region) check_fraction("ion_region", *r.ion_region);
  records_.push_back(r);
}

std::string TimeSeries::to_csv() const {
  std::string out;
  const auto& cols = columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out += ',';
    out += cols[c];
  }
  out += '\n';
  for (const auto& r : records_) {
    put(out, r.t);
    out += ',';
    put(out, r.field);
    out += ',';
    put(out, r.ion_proj);
    out += ',';
    put(out, r.ion_walk_latched);
    out += ',';
    put(out, r.ion_walk_inst);
    out += ',';
    put(out, r.ion_region);
    out += ',';
    put(out, r.energy);
    out += ',';
    put(out, r.dipole);
    out += ',';
    put(out, r.absorbed_norm);
    out += ',';
    out += std::to_string(r.node_events);
    out += '\n';
  }
  return out;
}

TimeSeries TimeSeries::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty time series CSV");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header != columns()) throw ConfigError("time series CSV has an unexpected header: " + line);
  TimeSeries ts;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw ConfigError("time series CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " fields");
    }
    Record r;
    r.t = std::stod(cells[0]);
    r.field = std::stod(cells[1]);
    r.ion_proj = std::stod(cells[2]);
    r.ion_walk_latched = parse_optional(cells[3]);
    r.ion_walk_inst = parse_optional(cells[4]);
    r.ion_region = parse_optional(cells[5]);
    r.energy = parse_optional(cells[6]);
    r.dipole = std::stod(cells[7]);
    r.absorbed_norm = std::stod(cells[8]);
    r.node_events = std::stoull(cells[9]);
    ts.append(r);
  }
  return ts;
}

double ionization_projection_engine(const GuidingWaveSet& now, const GuidingWaveSet& reference) {
  if (reference.size() == 0) throw ConfigError("projection ionization needs reference waves");
  if (now.size() != reference.size()) throw ConfigError("reference and current wave sets differ in size");
  double survival = 0.0;
  for (std::size_t i = 0; i < kElectrons; ++i) {
    for (std::size_t k = 0; k < now.size(); ++k) {
      survival += std::norm(inner_product(reference.waves[i][k], now.waves[i][k]));
    }
  }
  survival /= static_cast<double>(kElectrons * now.size());
  return clamp01(1.0 - survival);
}

double ionization_projection_orbital(const WaveField& now, const WaveField& ground) {
  return clamp01(1.0 - std::norm(inner_product(ground, now)));
}

double ionization_projection_exact(const Field2D& now, const Field2D& ground) {
  return clamp01(1.0 - std::abs(inner_product(ground, now)));
}

double two_electron_survival(const Field2D& now, const Field2D& ground) {
  return std::norm(inner_product(ground, now));
}

double ionization_walker_count(const WalkerEnsemble& ensemble, double radius) {
  if (ensemble.size() == 0) return 0.0;
  std::size_t n = 0;
  for (const auto& xs : ensemble.positions)
    for (double x : xs) n += std::abs(x) > radius ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(kElectrons * ensemble.size());
}

WalkerIonizationLatch::WalkerIonizationLatch(std::size_t walkers, double radius) : radius_(radius) {
  for (auto& f : flags_) f.assign(walkers, false);
}

double WalkerIonizationLatch::update(const WalkerEnsemble& ensemble) {
  if (ensemble.size() != flags_[0].size()) throw ConfigError("latch size does not match ensemble");
  for (std::size_t i = 0; i < kElectrons; ++i) {
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      if (!flags_[i][k] && std::abs(ensemble.positions[i][k]) > radius_) {
        flags_[i][k] = true;
        ++count_;
      }
    }
  }
  return fraction();
}

double WalkerIonizationLatch::fraction() const {
  if (flags_[0].empty()) return 0.0;
  return static_cast<double>(count_) / static_cast<double>(kElectrons * flags_[0].size());
}

std::array<double, 2> exceedance_marginals(const Field2D& state, double radius) {
  const auto& g = state.grid();
  const std::size_t n = state.n();
  double p1 = 0.0;
  double p2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool out1 = std::abs(g.x(i)) > radius;
    for (std::size_t j = 0; j < n; ++j) {
      const double rho = std::norm(state(i, j));
      if (out1) p1 += rho;
      if (std::abs(g.x(j)) > radius) p2 += rho;
    }
  }
  const double w = g.dx() * g.dx();
  return {p1 * w, p2 * w};
}

double ionization_region_exact(const Field2D& state, double radius) {
  const auto [p1, p2] = exceedance_marginals(state, radius);
  const double absorbed = std::max(0.0, 1.0 - norm_squared(state));
  return clamp01(0.5 * (p1 + p2) + absorbed);
}

double dipole(const Field2D& state) {
  const auto& g = state.grid();
  const std::size_t n = state.n();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += (g.x(i) + g.x(j)) * std::norm(state(i, j));
  return s * g.dx() * g.dx();
}

double dipole(const GuidingWaveSet& waves) {
  double s = 0.0;
  for (std::size_t i = 0; i < kElectrons; ++i)
    for (const auto& w : waves.waves[i]) s += dipole(w);
  return waves.size() ? s / static_cast<double>(waves.size()) : 0.0;
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace tdqmc
