#pragma once

// Run configuration, CSV emission and the five subcommands. Every CSV gets a
// `<name>.meta` sidecar in flat key=value form that can be fed back through
// --config to reproduce the run.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rotcool/condensate.hpp"
#include "rotcool/errors.hpp"
#include "rotcool/kinetics.hpp"
#include "rotcool/params.hpp"
#include "rotcool/rates_single.hpp"
#include "rotcool/rates_two.hpp"

namespace rotcool {

struct RunConfig {
  SystemParams params;
  int jmax = 0;                  ///< 0 selects (largest initial level) + 8
  int initial_j = 24;
  std::string initial_weights;   ///< comma-separated p_0, p_1, ...; overrides initial_j when set
  std::string channels = "1ph-sp,1ph-T";
  double t_start = 0.0;
  double t_end = 0.0;            ///< 0 selects 10 / (slowest nonzero decay rate)
  int points = 200;
  std::string spacing = "log";
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  std::string out = ".";
  int threads = 1;
  std::string T_over_Tc_grid = "0,0.02,0.05,0.1,0.2,0.3,0.5";
  std::string n0_xi3_grid = "100,1000,10000";
  double k_max = 10.0;
  int k_points = 201;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) items.push_back(cur.substr(b, e - b + 1));
  }
  return items;
}

inline std::vector<double> parse_double_list(const std::string& s, const char* what) {
  std::vector<double> v;
  for (const auto& item : split_list(s)) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !std::isfinite(x))
      throw Error(ErrorCategory::Config, std::string(what) + ": cannot parse '" + item + "'");
    v.push_back(x);
  }
  return v;
}

/// Channel list; "" and "none" mean no channels.
inline std::vector<Channel> parse_channel_list(const std::string& s) {
  std::vector<Channel> out;
  for (const auto& item : split_list(s)) {
    if (item == "none") continue;
    const Channel c = parse_channel(item);
    bool dup = false;
    for (Channel x : out) dup = dup || x == c;
    if (!dup) out.push_back(c);
  }
  return out;
}

inline PopulationVector initial_state(const RunConfig& cfg, int jmax) {
  if (!cfg.initial_weights.empty()) {
    auto w = parse_double_list(cfg.initial_weights, "initial_weights");
    if (static_cast<int>(w.size()) > jmax + 1)
      throw Error(ErrorCategory::Config, "initial_weights longer than jmax + 1");
    w.resize(static_cast<std::size_t>(jmax) + 1, 0.0);
    return PopulationVector::from_weights(w);
  }
  return PopulationVector::delta(jmax, cfg.initial_j);
}

inline int resolved_jmax(const RunConfig& cfg) {
  if (cfg.jmax > 0) return cfg.jmax;
  int top = cfg.initial_j;
  if (!cfg.initial_weights.empty()) {
    const auto w = parse_double_list(cfg.initial_weights, "initial_weights");
    top = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] != 0.0) top = static_cast<int>(i);
  }
  return std::max(1, top + 8);
}

inline EtaQuadrature quadrature_of(const RunConfig& cfg) {
  EtaQuadrature q;
  q.rel_tol = cfg.rel_tol;
  q.abs_tol = cfg.abs_tol;
  return q;
}

inline void validate(const RunConfig& cfg) {
  validate(cfg.params);
  if (cfg.jmax < 0) throw Error(ErrorCategory::Config, "jmax must be >= 1 (or 0 for automatic)");
  if (cfg.initial_weights.empty() && cfg.initial_j < 0)
    throw Error(ErrorCategory::Config, "initial_j must be >= 0");
  if (!(cfg.t_start >= 0.0)) throw Error(ErrorCategory::Config, "t_start must be >= 0");
  if (cfg.t_end != 0.0 && !(cfg.t_end > cfg.t_start))
    throw Error(ErrorCategory::Config, "t_end must exceed t_start");
  if (cfg.points < 2) throw Error(ErrorCategory::Config, "points must be >= 2");
  if (cfg.spacing != "linear" && cfg.spacing != "log")
    throw Error(ErrorCategory::Config, "spacing must be 'linear' or 'log'");
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0))
    throw Error(ErrorCategory::Config, "quadrature tolerances must be > 0");
  if (cfg.threads < 1) throw Error(ErrorCategory::Config, "threads must be >= 1");
  if (!(cfg.k_max > 0.0) || cfg.k_points < 2)
    throw Error(ErrorCategory::Config, "dispersion grid needs k_max > 0 and k_points >= 2");
  parse_channel_list(cfg.channels);
}

/// Time grid between t_start and t_end. Log spacing with t_start = 0 keeps
/// t = 0 and spreads the remaining points over [1e-6 t_end, t_end].
/// Output times. With log spacing and t_start = 0 the grid is 0 followed by
/// log-spaced points from t_first (1e-6 t_end when t_first is not in (0, t_end)).
inline std::vector<double> make_time_grid(double t_start, double t_end, int points, const std::string& spacing,
                                          double t_first = 0.0) {
  std::vector<double> t;
  t.reserve(points);
  if (spacing == "linear") {
    for (int i = 0; i < points; ++i) t.push_back(t_start + (t_end - t_start) * i / (points - 1));
  } else {
    int n = points;
    double lo = t_start;
    if (t_start == 0.0) {
      t.push_back(0.0);
      --n;
      lo = t_first > 0.0 && t_first < t_end ? t_first : 1e-6 * t_end;
    }
    const double a = std::log(lo);
    const double b = std::log(t_end);
    for (int i = 0; i < n; ++i) t.push_back(n == 1 ? t_end : std::exp(a + (b - a) * i / (n - 1)));
    t.back() = t_end;
  }
  return t;
}

/// 10 / (slowest nonzero total outflow) of the generator.
inline double automatic_t_end(const Generator& g) {
  double slowest = 0.0;
  for (Eigen::Index j = 0; j < g.M.rows(); ++j) {
    const double out = -g.M(j, j);
    if (out > 0.0 && (slowest == 0.0 || out < slowest)) slowest = out;
  }
  return slowest > 0.0 ? 10.0 / slowest : 1.0;
}

/// 0.01 / (fastest total outflow); 0 for an empty generator.
inline double automatic_t_first(const Generator& g) {
  const double fastest = g.M.rows() > 0 ? (-g.M.diagonal()).maxCoeff() : 0.0;
  return fastest > 0.0 ? 0.01 / fastest : 0.0;
}

inline std::string to_ini(const RunConfig& c) {
  std::ostringstream os;
  os << "r0_over_xi=" << format_double(c.params.r0_over_xi) << "\n"
     << "mI_over_mB=" << format_double(c.params.mI_over_mB) << "\n"
     << "T_over_Tc=" << format_double(c.params.T_over_Tc) << "\n"
     << "n0_xi3=" << format_double(c.params.n0_xi3) << "\n"
     << "gIB_over_g=" << format_double(c.params.gIB_over_g) << "\n"
     << "jmax=" << c.jmax << "\n"
     << "initial_j=" << c.initial_j << "\n"
     << "initial_weights=\"" << c.initial_weights << "\"\n"
     << "channels=\"" << c.channels << "\"\n"
     << "t_start=" << format_double(c.t_start) << "\n"
     << "t_end=" << format_double(c.t_end) << "\n"
     << "points=" << c.points << "\n"
     << "spacing=" << c.spacing << "\n"
     << "rel_tol=" << format_double(c.rel_tol) << "\n"
     << "abs_tol=" << format_double(c.abs_tol) << "\n"
     << "out=\"" << c.out << "\"\n"
     << "threads=" << c.threads << "\n"
     << "T_over_Tc_grid=\"" << c.T_over_Tc_grid << "\"\n"
     << "n0_xi3_grid=\"" << c.n0_xi3_grid << "\"\n"
     << "k_max=" << format_double(c.k_max) << "\n"
     << "k_points=" << c.k_points << "\n";
  return os.str();
}

namespace detail {

inline std::filesystem::path output_path(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot create output directory '" + cfg.out + "': " + ec.message());
  return std::filesystem::path(cfg.out) / name;
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "' for writing");
  f << body;
  f.close();
  if (!f) throw Error(ErrorCategory::Io, "failed writing '" + path.string() + "'");
}

inline void write_csv(const RunConfig& cfg, const std::string& name, const std::string& command,
                      const std::string& csv, const std::vector<std::string>& notes = {}) {
  const auto path = output_path(cfg, name);
  write_text(path, csv);
  std::ostringstream meta;
  meta << "; " << name << " written by 'rotcool " << command << "'\n"
       << "; units: hbar = c = xi = 1, k_B = 1; energies and rates in c/xi, times in xi/c, momenta in 1/xi\n"
       << "; level energies E_j = j(j+1) B_rot with B_rot = 1/(4 m_I r0^2)\n";
  for (const auto& n : notes) meta << "; " << n << "\n";
  meta << to_ini(cfg);
  write_text(path.string() + ".meta", meta.str());
}

}  // namespace detail

/// Writes rates_<channel>.csv for every configured channel.
inline std::vector<ChannelRateMatrix> cmd_rates(const RunConfig& cfg) {
  validate(cfg);
  const int jmax = resolved_jmax(cfg);
  RunConfig resolved = cfg;
  resolved.jmax = jmax;
  std::vector<ChannelRateMatrix> all;
  for (Channel c : parse_channel_list(cfg.channels)) {
    auto m = assemble_channel(cfg.params, jmax, c, quadrature_of(cfg), cfg.threads);
    std::ostringstream csv;
    csv << "j,j_prime,rate\n";
    for (int j = 0; j <= jmax; ++j)
      for (int jp = 0; jp <= jmax; ++jp) csv << j << "," << jp << "," << format_double(m(j, jp)) << "\n";
    detail::write_csv(resolved, "rates_" + std::string(channel_name(c)) + ".csv", "rates", csv.str(),
                      {"rate = Gamma_{j -> j'} for channel " + std::string(channel_name(c)) + ", jmax = " +
                       std::to_string(jmax)});
    all.push_back(std::move(m));
  }
  return all;
}

struct CriticalSummary {
  double jc = 0.0, jc1 = 0.0, jT = 0.0;
  int jc_floor = 0, jc1_floor = 0, jT_floor = 0;
  double B_rot = 0.0, Tc = 0.0;
};

inline CriticalSummary critical_summary(const SystemParams& p) {
  const auto cm = critical_j(p);
  const auto d = derive_constants(p);
  CriticalSummary s;
  s.jc = cm.jc;
  s.jc1 = cm.jc1;
  s.jT = thermal_angular_momentum(p);
  s.jc_floor = static_cast<int>(std::floor(s.jc));
  s.jc1_floor = static_cast<int>(std::floor(s.jc1));
  s.jT_floor = static_cast<int>(std::floor(s.jT));
  s.B_rot = d.B_rot;
  s.Tc = d.Tc;
  return s;
}

/// Prints the thresholds to `os` and writes critical.csv.
inline CriticalSummary cmd_critical(const RunConfig& cfg, std::ostream& os = std::cout) {
  validate(cfg);
  const auto s = critical_summary(cfg.params);
  os << "jc=" << format_double(s.jc) << " (floor " << s.jc_floor << ")\n"
     << "jc1=" << format_double(s.jc1) << " (floor " << s.jc1_floor << ")\n"
     << "jT=" << format_double(s.jT) << " (floor " << s.jT_floor << ")\n"
     << "B_rot=" << format_double(s.B_rot) << "\n"
     << "Tc=" << format_double(s.Tc) << "\n";
  std::ostringstream csv;
  csv << "jc,jc_floor,jc1,jc1_floor,jT,jT_floor,B_rot,Tc\n"
      << format_double(s.jc) << "," << s.jc_floor << "," << format_double(s.jc1) << "," << s.jc1_floor << ","
      << format_double(s.jT) << "," << s.jT_floor << "," << format_double(s.B_rot) << ","
      << format_double(s.Tc) << "\n";
  detail::write_csv(cfg, "critical.csv", "critical", csv.str());
  return s;
}

struct EvolveResult {
  Generator generator;
  Trajectory trajectory;
  std::vector<DiagnosticsRow> diagnostics;
  int jmax = 0;
  double t_end = 0.0;
};

/// Writes trajectory.csv (long format t,j,p) and diagnostics.csv.
inline EvolveResult cmd_evolve(const RunConfig& cfg, std::ostream& warn = std::cerr) {
  validate(cfg);
  EvolveResult r;
  r.jmax = resolved_jmax(cfg);
  const auto p0 = initial_state(cfg, r.jmax);
  r.generator = assemble_generator(cfg.params, r.jmax, parse_channel_list(cfg.channels), quadrature_of(cfg),
                                   cfg.threads);
  r.t_end = cfg.t_end > 0.0 ? cfg.t_end : automatic_t_end(r.generator);
  if (!(r.t_end > cfg.t_start)) throw Error(ErrorCategory::Config, "t_end must exceed t_start");
  r.trajectory = evolve(p0, r.generator, make_time_grid(cfg.t_start, r.t_end, cfg.points, cfg.spacing, automatic_t_first(r.generator)));
  const int threshold = static_cast<int>(std::floor(critical_j(cfg.params).jc1));
  RunConfig resolved = cfg;
  resolved.jmax = r.jmax;
  resolved.t_end = r.t_end;
  r.diagnostics = diagnostics(r.trajectory, threshold);

  std::vector<std::string> notes{"jmax = " + std::to_string(r.jmax) + ", t_end used = " + format_double(r.t_end),
                                 "mass_below_jc1 sums p_j for j < " + std::to_string(threshold)};
  if (r.trajectory.truncation_leak()) {
    const std::string msg = "warning: truncation leak, up to " + format_double(r.trajectory.max_top_mass) +
                            " of the population reached the two highest levels";
    notes.push_back(msg);
    warn << msg << "\n";
  }

  std::ostringstream traj;
  traj << "t,j,p\n";
  for (const auto& s : r.trajectory.states)
    for (int j = 0; j <= r.jmax; ++j) traj << format_double(s.time) << "," << j << "," << format_double(s.p[j]) << "\n";
  detail::write_csv(resolved, "trajectory.csv", "evolve", traj.str(), notes);

  std::ostringstream diag;
  diag << "t,mean_j,mean_j_j1,mass_below_jc1,even_mass,odd_mass,entropy,norm\n";
  for (const auto& d : r.diagnostics)
    diag << format_double(d.t) << "," << format_double(d.mean_j) << "," << format_double(d.mean_casimir) << ","
         << format_double(d.mass_below) << "," << format_double(d.even_mass) << "," << format_double(d.odd_mass)
         << "," << format_double(d.entropy) << "," << format_double(d.norm) << "\n";
  detail::write_csv(resolved, "diagnostics.csv", "evolve", diag.str(), notes);
  return r;
}

struct RatioRow {
  double T_over_Tc = 0.0;
  double n0_xi3 = 0.0;
  double ratio = 0.0;
  double universal = 0.0;
};

/// Writes ratio.csv over the T_over_Tc_grid x n0_xi3_grid product.
inline std::vector<RatioRow> cmd_scan_ratio(const RunConfig& cfg) {
  validate(cfg);
  const auto temps = parse_double_list(cfg.T_over_Tc_grid, "T_over_Tc_grid");
  const auto dens = parse_double_list(cfg.n0_xi3_grid, "n0_xi3_grid");
  std::vector<RatioRow> rows;
  for (double n : dens)
    for (double t : temps) rows.push_back({t, n, 0.0, std::pow(t, 1.5)});
  const auto q = quadrature_of(cfg);
  detail::parallel_for(static_cast<int>(rows.size()), cfg.threads, [&](int i) {
    SystemParams p = cfg.params;
    p.T_over_Tc = rows[i].T_over_Tc;
    p.n0_xi3 = rows[i].n0_xi3;
    rows[i].ratio = thermal_2ph_ratio(p, q);
  });
  std::ostringstream csv;
  csv << "T_over_Tc,n0_xi3,ratio,universal\n";
  for (const auto& r : rows)
    csv << format_double(r.T_over_Tc) << "," << format_double(r.n0_xi3) << "," << format_double(r.ratio) << ","
        << format_double(r.universal) << "\n";
  detail::write_csv(cfg, "ratio.csv", "scan-ratio", csv.str(), {"universal = (T/Tc)^1.5"});
  return rows;
}

/// Writes dispersion.csv on k = 0 .. k_max; W is reported as 0 at k = 0.
inline void cmd_dispersion(const RunConfig& cfg) {
  validate(cfg);
  std::ostringstream csv;
  csv << "k,omega,k_roundtrip,dk_domega,group_velocity,W\n";
  for (int i = 0; i < cfg.k_points; ++i) {
    const double k = cfg.k_max * i / (cfg.k_points - 1);
    const double w = dispersion(k);
    csv << format_double(k) << "," << format_double(w) << "," << format_double(inverse_dispersion(w)) << ","
        << format_double(dk_domega(w)) << "," << format_double(group_velocity(k)) << ","
        << format_double(k > 0.0 ? w_factor(k) : 0.0) << "\n";
  }
  detail::write_csv(cfg, "dispersion.csv", "dispersion", csv.str());
}

}  // namespace rotcool
