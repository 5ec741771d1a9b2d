#pragma once

// Subcommands of the spdcqkd tool. Each returns a process exit code:
// 0 success, 1 failed consistency check, 2 input error, 3 non-convergence.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spdcqkd/spdcqkd.hpp"

namespace spdcqkd::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kInputError = 2, kNotConverged = 3 };

/// CHSH value the Werner surrogate for the measured source is matched to.
inline constexpr double kSurrogateChsh = 2.815;

inline DensityMatrix surrogate_state() {
  return werner_mix(bell_state(BellState::PhiPlus), 1.0 - kSurrogateChsh / kTsirelsonBound);
}

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline std::string fixed(double x, int decimals) {
  if (std::abs(x) < 0.5 * std::pow(10.0, -decimals)) x = 0.0;  // no "-0.0000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

inline void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw InputError("cannot write " + out_path);
  f << text;
}

inline std::optional<Ordering> parse_ordering(const std::string& s) {
  if (s == "alice-first") return Ordering::AliceFirst;
  if (s == "bob-first") return Ordering::BobFirst;
  return std::nullopt;
}

inline const char* ordering_name(Ordering o) { return o == Ordering::AliceFirst ? "alice-first" : "bob-first"; }

inline Json stat_json(const SampleStatistic& s) { return Json{{"mean", s.mean}, {"stddev", s.stddev}}; }

inline Json vec_json(const BlochVector& x) { return Json::array({x.x1(), x.x2(), x.x3()}); }

inline Json bases_json(const DensityMatrix& rho, Ordering ordering) {
  const BasisSet bs = optimal_bases(rho, ordering);
  const AchievedValues v = verify_bases(rho, bs);
  const double deg = 180.0 / std::numbers::pi;
  Json settings = Json::object();
  const std::pair<const char*, const BlochVector*> entries[] = {
      {"A0", &bs.a0}, {"A1", &bs.a1}, {"A2", &bs.a2}, {"B1", &bs.b1}, {"B2", &bs.b2}};
  for (const auto& [label, x] : entries) {
    const WaveplateSetting w = waveplate_angles(*x);
    settings[label] = Json{{"bloch", vec_json(*x)}, {"half_wave_deg", w.half * deg}, {"quarter_wave_deg", w.quarter * deg}};
  }
  return Json{{"ordering", ordering_name(ordering)}, {"settings", settings}, {"achieved", Json{{"S", v.S}, {"Q", v.Q}}}};
}

// ---------------------------------------------------------------------------
// reconstruct

struct ReconstructArgs {
  std::string dataset;
  int mc_samples = 0;
  std::uint64_t seed = 1;
  int max_iterations = 100000;
  std::string ordering = "alice-first";
  std::string out;
};

inline int cmd_reconstruct(const ReconstructArgs& args) {
  const auto ordering = parse_ordering(args.ordering);
  if (!ordering) throw InputError("--ordering must be alice-first or bob-first");
  if (args.mc_samples == 1 || args.mc_samples < 0) throw InputError("--mc needs 0 or at least 2 samples");
  if (args.max_iterations < 1) throw InputError("--max-iter must be positive");

  const TomographyDataset ds = read_dataset_file(args.dataset);
  ReconstructionOptions opts;
  opts.max_iterations = args.max_iterations;
  const ReconstructionResult rec = mle_reconstruct(ds.frequencies(), ds.settings, opts);
  const double r_c = coincidence_rate_from_counts(ds);
  const QkdMetrics metrics = evaluate_state(rec.rho, r_c);

  std::int64_t total = 0;
  for (std::int64_t c : ds.counts) total += c;

  Json report;
  report["tool"] = Json{{"name", "spdcqkd"}, {"version", kVersion}};
  report["status"] = rec.converged ? "ok" : "not_converged";
  report["dataset"] = Json{{"path", args.dataset},
                           {"fnv1a64", hex64(fnv1a(serialize_dataset(ds)))},
                           {"tau_s", ds.tau_s},
                           {"duration_s", ds.duration_s},
                           {"total_counts", total}};
  report["reconstruction"] = Json{{"converged", rec.converged},
                                  {"iterations", rec.iterations},
                                  {"log_likelihood", rec.log_likelihood},
                                  {"concurrence", concurrence(rec.rho)},
                                  {"rho", to_json(rec.rho)}};
  report["metrics"] = to_json(metrics);

  if (args.mc_samples >= 2) {
    const UncertaintyReport u = monte_carlo_uncertainty(ds, args.mc_samples, args.seed, opts);
    report["uncertainty"] = Json{{"samples", u.samples}, {"seed", u.seed},   {"S", stat_json(u.S)},
                                 {"Q", stat_json(u.Q)},  {"r_dw", stat_json(u.r_dw)}, {"r_c", stat_json(u.r_c)},
                                 {"R_key", stat_json(u.R_key)}};
  } else {
    report["uncertainty"] = nullptr;
  }

  try {
    report["bases"] = bases_json(rec.rho, *ordering);
  } catch (const NoSignalError&) {
    report["bases"] = nullptr;
  }

  report["provenance"] = Json{{"seed", args.seed},
                              {"mc_samples", args.mc_samples},
                              {"max_iterations", args.max_iterations},
                              {"element_tolerance", opts.element_tolerance},
                              {"likelihood_tolerance", opts.likelihood_tolerance},
                              {"ordering", ordering_name(*ordering)}};
  emit(report.dump(2) + "\n", args.out);
  if (!rec.converged) {
    std::cerr << "error: reconstruction did not converge in " << rec.iterations << " iterations\n";
    return kNotConverged;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// model

struct ModelArgs {
  std::optional<double> eta;
  std::optional<double> eta_a;
  std::optional<double> eta_b;
  std::string grid = "0:0.2:201";
  bool log = false;
  std::string rho0 = "bell";
  std::string rho0_file;
  std::string out;
};

inline void check_transmittance(double eta, const char* flag) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InputError(std::string(flag) + " must lie in (0, 1]");
}

inline std::pair<double, double> resolve_etas(const std::optional<double>& eta, const std::optional<double>& eta_a,
                                              const std::optional<double>& eta_b) {
  const double a = eta_a ? *eta_a : eta.value_or(1.0);
  const double b = eta_b ? *eta_b : eta.value_or(1.0);
  check_transmittance(a, "--eta-a");
  check_transmittance(b, "--eta-b");
  return {a, b};
}

inline int cmd_model(const ModelArgs& args) {
  const auto [ea, eb] = resolve_etas(args.eta, args.eta_a, args.eta_b);
  const std::vector<double> grid = parse_grid(args.grid, args.log);
  std::vector<ModelPoint> points;
  if (!args.rho0_file.empty()) {
    points = reconstructed_model_curve(read_density_matrix_file(args.rho0_file), ea, eb, grid);
  } else if (args.rho0 == "surrogate") {
    points = reconstructed_model_curve(surrogate_state(), ea, eb, grid);
  } else if (args.rho0 == "bell") {
    points = model_curve(ea, eb, grid);
  } else {
    throw InputError("--rho0 must be bell or surrogate");
  }
  std::ostringstream out;
  write_model_csv(out, points);
  emit(out.str(), args.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// optimize

struct OptimizeArgs {
  std::optional<double> eta;
  std::optional<double> eta_a;
  std::optional<double> eta_b;
  std::string sweep;
  bool log = false;
  std::string out;
};

inline int cmd_optimize(const OptimizeArgs& args) {
  if (!args.sweep.empty()) {
    std::ostringstream out;
    out << "eta,n_bar_opt,r_key_opt,r_key_opt_over_eta2,n_bar_critical\n";
    for (double eta : parse_grid(args.sweep, args.log)) {
      check_transmittance(eta, "--sweep values");
      const GainOptimum opt = optimize_gain(eta, eta);
      out << format_double(eta) << ',' << format_double(opt.mean_pairs) << ',' << format_double(opt.key_rate) << ','
          << format_double(opt.key_rate / (eta * eta)) << ',' << format_double(critical_gain(eta, eta)) << '\n';
    }
    emit(out.str(), args.out);
    return kOk;
  }
  const auto [ea, eb] = resolve_etas(args.eta, args.eta_a, args.eta_b);
  const GainOptimum opt = optimize_gain(ea, eb);
  const Json j{{"eta_a", ea},
               {"eta_b", eb},
               {"n_bar_opt", opt.mean_pairs},
               {"r_key_opt", opt.key_rate},
               {"n_bar_critical", critical_gain(ea, eb)}};
  emit(j.dump(2) + "\n", args.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// bases

struct BasesArgs {
  std::string state;
  std::string dataset;
  std::string ordering = "alice-first";
  std::string out;
};

inline int cmd_bases(const BasesArgs& args) {
  const auto ordering = parse_ordering(args.ordering);
  if (!ordering) throw InputError("--ordering must be alice-first or bob-first");
  if (args.state.empty() == args.dataset.empty()) throw InputError("give exactly one of --state or --dataset");

  DensityMatrix rho = DensityMatrix::maximally_mixed();
  if (!args.state.empty()) {
    rho = read_density_matrix_file(args.state);
  } else {
    const TomographyDataset ds = read_dataset_file(args.dataset);
    const ReconstructionResult rec = mle_reconstruct(ds.frequencies(), ds.settings);
    if (!rec.converged) {
      std::cerr << "error: reconstruction did not converge\n";
      return kNotConverged;
    }
    rho = rec.rho;
  }

  BasisSet bs;
  try {
    bs = optimal_bases(rho, *ordering);
  } catch (const NoSignalError& e) {
    throw InputError(e.what());
  }
  const AchievedValues v = verify_bases(rho, bs);
  const double deg = 180.0 / std::numbers::pi;

  std::ostringstream out;
  out << "ordering " << ordering_name(*ordering) << "\n";
  out << "label        x1        x2        x3   HWP[deg]   QWP[deg]\n";
  const std::pair<const char*, const BlochVector*> entries[] = {
      {"A0", &bs.a0}, {"A1", &bs.a1}, {"A2", &bs.a2}, {"B1", &bs.b1}, {"B2", &bs.b2}};
  auto pad = [](const std::string& s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };
  for (const auto& [label, x] : entries) {
    const WaveplateSetting w = waveplate_angles(*x);
    out << label << "   " << pad(fixed(x->x1(), 4), 10) << pad(fixed(x->x2(), 4), 10) << pad(fixed(x->x3(), 4), 10)
        << pad(fixed(w.half * deg, 4), 11) << pad(fixed(w.quarter * deg, 4), 11) << "\n";
  }
  out << "S = " << fixed(v.S, 6) << "  (eigen formula " << fixed(chsh_max(rho), 6) << ")\n";
  out << "Q = " << fixed(v.Q, 6) << "  (eigen formula " << fixed(qber_min(rho), 6) << ")\n";
  emit(out.str(), args.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  double concurrence = 0.95;
  double eta = 0.16;
  std::string grid = "1e-5:1:400";
  std::string out;
};

inline int cmd_compare(const CompareArgs& args) {
  check_transmittance(args.eta, "--eta");
  if (!(args.concurrence > 0.0 && args.concurrence <= 1.0)) throw InputError("--concurrence must lie in (0, 1]");
  const std::vector<double> grid = parse_grid(args.grid, true);

  std::ostringstream out;
  out << "series,r_c,R_key\n";
  auto row = [&](const std::string& series, double r_c, double r_key) {
    out << series << ',' << format_double(r_c) << ',' << format_double(r_key) << '\n';
  };
  for (const ModelPoint& p : model_curve(1.0, 1.0, grid)) row("spdc_ideal", p.r_c, p.R_key);
  const std::string lossy = "spdc_eta_" + format_double(args.eta);
  for (const ModelPoint& p : model_curve(args.eta, args.eta, grid)) row(lossy, p.r_c, p.R_key);

  // Single-pair sources: r_c is a free parameter up to one pair per window.
  std::vector<double> rc_grid = parse_grid("1e-5:1:" + std::to_string(grid.size()), true);
  for (const KeyLinePoint& p : qd_key_line(1.0, rc_grid)) row("qd_ideal", p.r_c, p.R_key);
  std::vector<std::pair<std::string, QdThreshold>> thresholds;
  const std::string c = format_double(args.concurrence);
  for (NoiseModel model : {NoiseModel::Dephasing, NoiseModel::White}) {
    const std::string name = std::string(model == NoiseModel::Dephasing ? "dephasing" : "white") + "_C" + c;
    try {
      const QdThreshold t = qd_threshold(args.concurrence, model);
      for (const KeyLinePoint& p : qd_key_line(t.r_dw, rc_grid)) row("qd_" + name, p.r_c, p.R_key);
      thresholds.emplace_back(name, t);
    } catch (const NoSecurityError&) {
      std::cerr << "note: no secure key for the " << name << " source\n";
    }
  }
  for (const auto& [name, t] : thresholds) row("threshold_" + name, t.r_c_threshold, t.key_rate_bound);
  emit(out.str(), args.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// table1-check

inline int cmd_table1_check(const std::string& path, std::ostream& out) {
  const std::vector<Table1Row> rows = read_table1_file(path);
  if (rows.empty()) throw InputError(path + ": no rows");
  const std::vector<Table1Check> checks = check_table1(rows);
  int failed = 0;
  out << "tau_ns    r_dw(calc)  r_dw(table)  diff       R_key(calc)  R_key(table)  diff        result\n";
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const Table1Check& c = checks[i];
    char line[256];
    std::snprintf(line, sizeof line, "%-8s  %-10.4f  %-11.4g  %+-9.4f  %-11.4g  %-12.4g  %+-10.3g  %s\n",
                  c.tau_ns.c_str(), c.r_dw, rows[i].r_dw.value, c.r_dw_diff, c.R_key, rows[i].R_key.value,
                  c.R_key_diff, c.ok() ? "ok" : "FAIL");
    out << line;
    if (!c.ok()) ++failed;
  }
  out << (failed == 0 ? "all " + std::to_string(checks.size()) + " rows consistent\n"
                      : std::to_string(failed) + " of " + std::to_string(checks.size()) + " rows inconsistent\n");
  return failed == 0 ? kOk : kCheckFailed;
}

}  // namespace spdcqkd::cli
