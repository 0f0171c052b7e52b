#pragma once

/// \file driver.hpp
/// \brief Time loop with periodic diagnostics, checkpoint I/O and CSV output
/// of a DiagnosticsSeries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavegauge/diagnostics.hpp"
#include "wavegauge/evolve.hpp"
#include "wavegauge/grid.hpp"

namespace wavegauge::driver {

struct RunOptions {
  evolve::Options evolve;
  diag::EnergyOptions energy;
  int output_every = 1;       ///< steps between diagnostics rows
  double t_final = 1.0;
  double gauge_exclude = 0.0; ///< cells with r below this are left out of the gauge norms
};

struct RunResult {
  diag::DiagnosticsSeries series;
  MetricState final_state;
  bool completed = true;
  std::string failure;
  int steps = 0;
};

inline diag::DiagnosticsRow measure(const MetricState& s, const diag::EnergyOptions& eo, double gauge_exclude,
                                    std::vector<double>& s_density) {
  diag::DiagnosticsRow row;
  row.t = s.t;
  const auto e = diag::energy(s, eo);
  row.E = e.E;
  s_density = e.S;
  const auto gn = diag::gauge_monitor(s, gauge_exclude);
  row.gauge_l2 = gn.l2;
  row.gauge_linf = gn.linf;
  const auto dm = diag::derivative_max(s, eo.mask_radius);
  row.max_dh = dm.all;
  row.max_dh_tu = dm.tu;
  row.max_abs_h = s.max_abs_h();
  return row;
}

/// Evolves to opt.t_final with uniform steps no larger than the grid dt,
/// recording a row at t = 0, every output_every steps and at the end. S_N
/// is accumulated with the trapezoidal rule between rows. An evolution
/// error ends the run early with completed = false and the last valid state.
inline RunResult run(const MetricState& initial, const RunOptions& opt,
                     const std::function<void(const diag::DiagnosticsRow&)>& on_row = {}) {
  if (opt.output_every < 1) throw ConfigError("output_every must be at least 1");
  RunResult res;
  res.series.max_order = opt.energy.max_order;
  res.series.gamma = opt.energy.gamma;
  evolve::Evolver ev(initial, opt.evolve);
  const double remaining = opt.t_final - initial.t;
  const long steps = remaining > 1e-14 ? static_cast<long>(std::ceil(remaining / initial.grid.dt() - 1e-9)) : 0;
  const double dt = steps > 0 ? remaining / static_cast<double>(steps) : 0.0;
  std::vector<double> dens_prev, dens;
  std::vector<double> S(opt.energy.max_order + 1, 0.0), Esup(opt.energy.max_order + 1, 0.0);
  double t_prev = initial.t;
  auto record = [&](const MetricState& s) {
    diag::DiagnosticsRow row = measure(s, opt.energy, opt.gauge_exclude, dens);
    if (!res.series.rows.empty())
      for (std::size_t k = 0; k < S.size(); ++k) S[k] += 0.5 * (dens_prev[k] + dens[k]) * (s.t - t_prev);
    for (std::size_t k = 0; k < S.size(); ++k) Esup[k] = std::max(Esup[k], row.E[k]);
    row.S = S;
    row.E_sup = Esup;
    dens_prev = dens;
    t_prev = s.t;
    res.series.rows.push_back(row);
    if (on_row) on_row(res.series.rows.back());
  };
  record(ev.state());
  try {
    for (long i = 1; i <= steps; ++i) {
      ev.step(dt);
      ++res.steps;
      if (i % opt.output_every == 0 || i == steps) record(ev.state());
    }
    res.final_state = ev.state();
  } catch (const evolve::EvolutionError& e) {
    res.completed = false;
    res.failure = std::string(evolve::to_string(e.kind())) + ": " + e.what();
    res.final_state = e.last_valid();
  }
  return res;
}

/// Shortest decimal text that round-trips the double.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::vector<std::string> csv_header(const diag::DiagnosticsSeries& s) {
  std::vector<std::string> h{"t"};
  for (int k = 0; k <= s.max_order; ++k) {
    h.push_back("E" + std::to_string(k));
    h.push_back("E" + std::to_string(k) + "_sup");
    h.push_back("S" + std::to_string(k));
  }
  for (const char* c : {"gauge_l2", "gauge_linf", "max_dh", "max_dh_tu", "max_abs_h"}) h.emplace_back(c);
  return h;
}

inline void write_csv(std::ostream& os, const diag::DiagnosticsSeries& s) {
  const auto h = csv_header(s);
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << "\n";
  for (const auto& r : s.rows) {
    os << format_double(r.t);
    for (int k = 0; k <= s.max_order; ++k)
      os << "," << format_double(r.E[k]) << "," << format_double(r.E_sup[k]) << "," << format_double(r.S[k]);
    for (double v : {r.gauge_l2, r.gauge_linf, r.max_dh, r.max_dh_tu, r.max_abs_h}) os << "," << format_double(v);
    os << "\n";
  }
}

/// Checkpoint layout (little-endian): "WGEV", u32 version, u32 n, f64 extent,
/// f64 t, f64 M, then h[0..9] and dth[0..9], each n^3 f64 with x fastest.
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {
inline bool little_endian() {
  const std::uint16_t one = 1;
  unsigned char b;
  std::memcpy(&b, &one, 1);
  return b == 1;
}
template <class T>
void put(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if (!little_endian()) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw std::runtime_error("truncated checkpoint");
  if (!little_endian()) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}
}  // namespace detail

inline void write_checkpoint(std::ostream& os, const MetricState& s) {
  os.write("WGEV", 4);
  detail::put<std::uint32_t>(os, kCheckpointVersion);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(s.grid.n));
  detail::put<double>(os, s.grid.extent);
  detail::put<double>(os, s.t);
  detail::put<double>(os, s.mass);
  for (const auto* set : {&s.h, &s.dth})
    for (const auto& f : *set)
      for (double v : f) detail::put<double>(os, v);
}

inline void write_checkpoint(const std::string& path, const MetricState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_checkpoint(os, s);
}

/// Reads a checkpoint; dt_factor and t_final of the grid keep their defaults.
inline MetricState read_checkpoint(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "WGEV", 4) != 0) throw std::runtime_error("not a checkpoint");
  const auto version = detail::get<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw std::runtime_error("unsupported checkpoint version");
  MetricState s;
  s.grid.n = static_cast<int>(detail::get<std::uint32_t>(is));
  s.grid.extent = detail::get<double>(is);
  s.t = detail::get<double>(is);
  s.mass = detail::get<double>(is);
  s.allocate();
  for (auto* set : {&s.h, &s.dth})
    for (auto& f : *set)
      for (double& v : f) v = detail::get<double>(is);
  return s;
}

inline MetricState read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_checkpoint(is);
}

}  // namespace wavegauge::driver
