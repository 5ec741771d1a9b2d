#pragma once

// Two-qubit polarization tomography from 36 product projections.
//
// The 36 settings are all ordered pairs of the six states H, V, D, A, R, L.
// They split into 9 complementary quadruples {(a+, b+), (a+, b-), (a-, b+),
// (a-, b-)}, one per pair of local Pauli bases; each quadruple is one
// four-outcome two-qubit measurement of the multinomial likelihood.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "spdcqkd/qkd_metrics.hpp"
#include "spdcqkd/quantum_core.hpp"
#include "spdcqkd/spdc_model.hpp"

namespace spdcqkd {

enum class Polarization : int { H = 0, V, D, A, R, L };

inline constexpr std::array<Polarization, 6> kPolarizations = {
    Polarization::H, Polarization::V, Polarization::D,
    Polarization::A, Polarization::R, Polarization::L};

/// H/V = +-z, D/A = +-x, R/L = +-y on the Bloch sphere.
inline BlochVector bloch(Polarization p) {
  switch (p) {
    case Polarization::H: return {0, 0, 1};
    case Polarization::V: return {0, 0, -1};
    case Polarization::D: return {1, 0, 0};
    case Polarization::A: return {-1, 0, 0};
    case Polarization::R: return {0, 1, 0};
    case Polarization::L: return {0, -1, 0};
  }
  throw std::invalid_argument("unknown polarization");
}

inline char to_char(Polarization p) { return "HVDARL"[static_cast<int>(p)]; }

inline std::optional<Polarization> parse_polarization(const std::string& s) {
  if (s.size() != 1) return std::nullopt;
  for (Polarization p : kPolarizations)
    if (to_char(p) == s[0]) return p;
  return std::nullopt;
}

/// Local basis of a polarization: 0 for H/V, 1 for D/A, 2 for R/L.
inline int local_basis(Polarization p) { return static_cast<int>(p) / 2; }

struct SettingPair {
  Polarization a;
  Polarization b;
  friend bool operator==(const SettingPair&, const SettingPair&) = default;
};

class TomographySettings {
 public:
  static constexpr std::size_t kSize = 36;
  static constexpr std::size_t kQuadruples = 9;

  /// Canonical order: a-major over H, V, D, A, R, L.
  static TomographySettings standard() {
    std::array<SettingPair, kSize> pairs{};
    std::size_t k = 0;
    for (Polarization a : kPolarizations)
      for (Polarization b : kPolarizations) pairs[k++] = {a, b};
    return TomographySettings(pairs);
  }

  /// Throws std::invalid_argument unless every ordered pair occurs exactly once.
  explicit TomographySettings(const std::array<SettingPair, kSize>& pairs) : pairs_(pairs) {
    std::array<int, kSize> seen{};
    for (const SettingPair& p : pairs_) {
      if (++seen[canonical_index(p)] > 1)
        throw std::invalid_argument(std::string("duplicate tomography setting ") + to_char(p.a) + to_char(p.b));
    }
  }

  const SettingPair& operator[](std::size_t i) const { return pairs_.at(i); }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }
  static constexpr std::size_t size() { return kSize; }

  /// Quadruple index 3 * basis(a) + basis(b) of setting i.
  int quadruple(std::size_t i) const {
    return 3 * local_basis(pairs_.at(i).a) + local_basis(pairs_.at(i).b);
  }

  std::optional<std::size_t> index_of(const SettingPair& p) const {
    for (std::size_t i = 0; i < kSize; ++i)
      if (pairs_[i] == p) return i;
    return std::nullopt;
  }

  /// Position of `p` in the canonical order.
  static std::size_t canonical_index(const SettingPair& p) {
    return 6 * static_cast<std::size_t>(p.a) + static_cast<std::size_t>(p.b);
  }

  /// Two-qubit projector |psi_a psi_b><psi_a psi_b| of setting i.
  Matrix4c projector(std::size_t i) const {
    return detail::kron(spdcqkd::projector(bloch(pairs_.at(i).a)), spdcqkd::projector(bloch(pairs_.at(i).b)));
  }

 private:
  std::array<SettingPair, kSize> pairs_;
};

using Frequencies = std::array<double, TomographySettings::kSize>;
using Counts = std::array<std::int64_t, TomographySettings::kSize>;

struct TomographyDataset {
  TomographySettings settings = TomographySettings::standard();
  Counts counts{};
  double tau_s = 1e-9;       ///< coincidence window length
  double duration_s = 1.0;   ///< acquisition time

  void validate() const {
    for (std::int64_t c : counts)
      if (c < 0) throw std::invalid_argument("coincidence counts must be non-negative");
    if (!(tau_s > 0.0) || !std::isfinite(tau_s)) throw std::invalid_argument("tau_s must be positive");
    if (!(duration_s > 0.0) || !std::isfinite(duration_s))
      throw std::invalid_argument("duration_s must be positive");
    if (duration_s < tau_s) throw std::invalid_argument("duration_s must not be shorter than tau_s");
  }

  /// Number of detection windows T / tau.
  double windows() const { return duration_s / tau_s; }

  Frequencies frequencies() const {
    Frequencies f{};
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<double>(counts[i]);
    return f;
  }
};

/// Born-rule probabilities <psi_a psi_b| rho |psi_a psi_b> for every setting.
inline Frequencies born_probabilities(const DensityMatrix& rho, const TomographySettings& settings) {
  Frequencies out{};
  for (std::size_t i = 0; i < settings.size(); ++i) out[i] = rho.expectation(settings.projector(i));
  return out;
}

/// Coincidence probability of every setting for a source emitting rho0 pairs.
inline Frequencies synthesize_frequencies(const DensityMatrix& rho0, const SourceParams& params,
                                          const TomographySettings& settings) {
  Frequencies out{};
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const ClickProbabilities cp = click_probabilities(rho0, bloch(settings[i].a), bloch(settings[i].b), params);
    out[i] = coincidence_probability(cp, params.mean_pairs);
  }
  return out;
}

namespace detail {

/// Frequencies rescaled so every complementary quadruple sums to one. Empty
/// quadruples stay zero. Throws on negative input or all-zero data.
inline Frequencies normalize_per_quadruple(const Frequencies& f, const TomographySettings& settings) {
  std::array<double, TomographySettings::kQuadruples> sums{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] >= 0.0) || !std::isfinite(f[i]))
      throw std::invalid_argument("tomography frequencies must be finite and non-negative");
    sums[settings.quadruple(i)] += f[i];
  }
  bool any = false;
  Frequencies out{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double s = sums[settings.quadruple(i)];
    out[i] = s > 0.0 ? f[i] / s : 0.0;
    any = any || out[i] > 0.0;
  }
  if (!any) throw std::invalid_argument("tomography data are all zero");
  return out;
}

inline double log_likelihood(const Frequencies& weights, const Frequencies& probs) {
  double l = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    if (!(probs[i] > 0.0)) return -std::numeric_limits<double>::infinity();
    l += weights[i] * std::log(probs[i]);
  }
  return l;
}

}  // namespace detail

struct ReconstructionOptions {
  int max_iterations = 100000;
  double element_tolerance = 1e-10;     ///< stop when max |rho' - rho| falls below
  double likelihood_tolerance = 1e-12;  ///< stop when the log-likelihood gain falls below
  bool record_trace = false;            ///< keep the log-likelihood of every accepted iterate
};

struct ReconstructionResult {
  DensityMatrix rho = DensityMatrix::maximally_mixed();
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

/// Maximum-likelihood state for the given tomography data.
///
/// Maximizes sum_k f_k log Tr[rho Pi_k] (f normalized per quadruple) with the
/// fixed-point iteration rho <- R rho R / Tr, R = sum_k f_k / p_k Pi_k,
/// starting from the maximally mixed state. When a full step would lower the
/// likelihood the step is diluted, rho <- (1 + eps R) rho (1 + eps R) / Tr,
/// halving eps until the likelihood does not decrease; small eps always
/// ascends, so accepted iterates are monotone.
inline ReconstructionResult mle_reconstruct(const Frequencies& frequencies, const TomographySettings& settings,
                                            const ReconstructionOptions& opts = {}) {
  const Frequencies weights = detail::normalize_per_quadruple(frequencies, settings);
  std::array<Matrix4c, TomographySettings::kSize> proj;
  for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = settings.projector(i);

  auto probabilities = [&](const Matrix4c& rho) {
    Frequencies p{};
    for (std::size_t i = 0; i < proj.size(); ++i) p[i] = rho.cwiseProduct(proj[i].transpose()).sum().real();
    return p;
  };
  auto step = [](const Matrix4c& g, const Matrix4c& rho) {
    Matrix4c next = g * rho * g.adjoint();
    next = 0.5 * (next + next.adjoint());
    return Matrix4c(next / next.trace().real());
  };

  Matrix4c rho = Matrix4c::Identity() / 4.0;
  Frequencies probs = probabilities(rho);
  double logl = detail::log_likelihood(weights, probs);

  ReconstructionResult result;
  if (opts.record_trace) result.trace.push_back(logl);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    Matrix4c r = Matrix4c::Zero();
    for (std::size_t i = 0; i < proj.size(); ++i)
      if (weights[i] > 0.0) r += (weights[i] / probs[i]) * proj[i];

    Matrix4c candidate = step(r, rho);
    Frequencies cand_probs = probabilities(candidate);
    double cand_logl = detail::log_likelihood(weights, cand_probs);
    if (cand_logl < logl) {
      bool ascended = false;
      for (double eps = 1.0; eps > 1e-14; eps *= 0.5) {
        candidate = step(Matrix4c(Matrix4c::Identity() + eps * r), rho);
        cand_probs = probabilities(candidate);
        cand_logl = detail::log_likelihood(weights, cand_probs);
        if (cand_logl >= logl) {
          ascended = true;
          break;
        }
      }
      if (!ascended) {
        // No ascent direction left at working precision: stationary point.
        result.converged = true;
        break;
      }
    }
    const double change = (candidate - rho).cwiseAbs().maxCoeff();
    const double gain = cand_logl - logl;
    rho = candidate;
    probs = cand_probs;
    logl = cand_logl;
    if (opts.record_trace) result.trace.push_back(logl);
    if (change < opts.element_tolerance || gain < opts.likelihood_tolerance) {
      result.converged = true;
      ++it;
      break;
    }
  }
  result.rho = DensityMatrix::from_estimate(rho);
  result.log_likelihood = logl;
  result.iterations = it;
  return result;
}

/// White-noise weight kappa in [0, 1] maximizing the likelihood of the data
/// under the model (1 - kappa) rho_B + kappa/4.
///
/// The log-likelihood is concave in kappa, so the maximizer is bracketed by the
/// sign change of its derivative and found by bisection to 1e-13.
inline double fit_kappa(const Frequencies& frequencies, const TomographySettings& settings,
                        const DensityMatrix& bell) {
  const Frequencies w = detail::normalize_per_quadruple(frequencies, settings);
  const Frequencies b = born_probabilities(bell, settings);
  auto slope = [&](double kappa) {
    double d = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      const double model = (1.0 - kappa) * b[i] + 0.25 * kappa;
      if (model <= 0.0) return std::numeric_limits<double>::infinity();
      d += w[i] * (0.25 - b[i]) / model;
    }
    return d;
  };
  if (slope(0.0) <= 0.0) return 0.0;
  if (slope(1.0) >= 0.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Coincidences per window: the counts of each complementary quadruple are
/// summed, the 9 sums averaged, and divided by the number of windows T / tau.
inline double coincidence_rate_from_counts(const TomographyDataset& ds) {
  ds.validate();
  std::array<double, TomographySettings::kQuadruples> sums{};
  for (std::size_t i = 0; i < ds.counts.size(); ++i)
    sums[ds.settings.quadruple(i)] += static_cast<double>(ds.counts[i]);
  double mean = 0.0;
  for (double s : sums) mean += s;
  mean /= static_cast<double>(sums.size());
  return mean / ds.windows();
}

struct SampleStatistic {
  double mean = 0.0;
  double stddev = 0.0;
};

struct UncertaintyReport {
  SampleStatistic S;
  SampleStatistic Q;
  SampleStatistic r_dw;
  SampleStatistic r_c;
  SampleStatistic R_key;
  int samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Independent stream for sample `index`, derived from the master seed.
inline std::mt19937_64 sample_rng(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

inline SampleStatistic summarize(const std::vector<double>& xs) {
  SampleStatistic s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return s;
}

}  // namespace detail

/// Metrics of one dataset: MLE state, optimal S and Q, rates.
inline QkdMetrics analyze_counts(const TomographyDataset& ds, const ReconstructionOptions& opts = {}) {
  const ReconstructionResult rec = mle_reconstruct(ds.frequencies(), ds.settings, opts);
  return evaluate_state(rec.rho, coincidence_rate_from_counts(ds));
}

/// Poisson resampling of all 36 counts (mean = observed count, zero stays
/// zero), repeated `samples` times. Each sample draws from its own generator
/// seeded from (seed, sample index), so the report depends only on the inputs.
inline UncertaintyReport monte_carlo_uncertainty(const TomographyDataset& ds, int samples, std::uint64_t seed,
                                                 const ReconstructionOptions& opts = {}) {
  if (samples < 2) throw std::invalid_argument("Monte-Carlo uncertainty needs at least 2 samples");
  ds.validate();
  std::vector<double> s, q, rdw, rc, rkey;
  for (int k = 0; k < samples; ++k) {
    std::mt19937_64 rng = detail::sample_rng(seed, k);
    TomographyDataset resampled = ds;
    for (std::int64_t& c : resampled.counts) {
      if (c > 0) c = std::poisson_distribution<std::int64_t>(static_cast<double>(c))(rng);
    }
    const QkdMetrics m = analyze_counts(resampled, opts);
    s.push_back(m.S);
    q.push_back(m.Q);
    rdw.push_back(m.r_dw);
    rc.push_back(m.r_c);
    rkey.push_back(m.R_key);
  }
  UncertaintyReport rep;
  rep.S = detail::summarize(s);
  rep.Q = detail::summarize(q);
  rep.r_dw = detail::summarize(rdw);
  rep.r_c = detail::summarize(rc);
  rep.R_key = detail::summarize(rkey);
  rep.samples = samples;
  rep.seed = seed;
  return rep;
}

/// Model curve for an arbitrary single-pair state rho0: the multi-pair
/// coincidence probabilities are synthesized and reconstructed by maximum
/// likelihood at each grid point. The kappa column is the white-noise weight
/// a Bell-state source would have at the same parameters.
inline std::vector<ModelPoint> reconstructed_model_curve(const DensityMatrix& rho0, double eta_a, double eta_b,
                                                         const std::vector<double>& grid,
                                                         const ReconstructionOptions& opts = {}) {
  const TomographySettings settings = TomographySettings::standard();
  std::vector<ModelPoint> out;
  out.reserve(grid.size());
  for (double n : grid) {
    const SourceParams params{n, eta_a, eta_b};
    const double kappa = kappa_exact(params);
    const double r_c = coincidence_rate_exact(params);
    const DensityMatrix rho =
        n == 0.0 ? rho0 : mle_reconstruct(synthesize_frequencies(rho0, params, settings), settings, opts).rho;
    const QkdMetrics m = evaluate_state(rho, r_c);
    out.push_back({n, kappa, m.S, m.Q, m.r_dw, m.r_c, m.R_key});
  }
  return out;
}

}  // namespace spdcqkd
