#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spdcqkd/quantum_core.hpp"

namespace spdcqkd {

inline constexpr double kTsirelsonBound = 2.0 * std::numbers::sqrt2;
inline constexpr double kClassicalChshBound = 2.0;

/// Figures of merit of an entanglement source in the entanglement-based
/// protocol: CHSH value S, QBER Q, Devetak-Winter rate r_dw (bits/pair),
/// coincidence rate r_c (pairs/window) and key rate R_key = r_dw * r_c
/// (bits/window).
struct QkdMetrics {
  double S = 0.0;
  double Q = 0.5;
  double r_dw = 0.0;
  double r_c = 0.0;
  double R_key = 0.0;
};

struct ChshQber {
  double S;
  double Q;
};

/// Binary entropy in bits; h(0) = h(1) = 0.
inline double binary_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("binary_entropy argument must lie in [0, 1]");
  if (q == 0.0 || q == 1.0) return 0.0;
  return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

/// Largest CHSH value reachable with projective qubit measurements,
/// 2 sqrt(lambda_1 + lambda_2).
inline double chsh_max(const CorrelationAnalysis& ca) {
  return std::min(2.0 * std::sqrt(ca.eigenvalues[0] + ca.eigenvalues[1]), kTsirelsonBound);
}

inline double chsh_max(const DensityMatrix& rho) { return chsh_max(correlation_analysis(rho)); }

/// Smallest QBER over key bases, (1 - sqrt(lambda_1)) / 2.
inline double qber_min(const CorrelationAnalysis& ca) {
  return 0.5 * (1.0 - std::sqrt(std::clamp(ca.eigenvalues[0], 0.0, 1.0)));
}

inline double qber_min(const DensityMatrix& rho) { return qber_min(correlation_analysis(rho)); }

namespace detail {

inline double checked_chsh(double S) {
  if (!(S >= 0.0)) throw std::invalid_argument("CHSH value must be non-negative");
  if (S > kTsirelsonBound + 1e-9) throw std::invalid_argument("CHSH value exceeds the Tsirelson bound");
  return std::min(S, kTsirelsonBound);
}

inline void check_qber(double Q) {
  if (!(Q >= 0.0 && Q <= 0.5)) throw std::invalid_argument("QBER must lie in [0, 0.5]");
}

}  // namespace detail

/// 1 - h(Q) - h((1 + sqrt((S/2)^2 - 1))/2) without clamping. For S <= 2 the
/// square root is taken as zero, which keeps the expression continuous and
/// negative there; used for root finding.
inline double devetak_winter_unclamped(double S, double Q) {
  S = detail::checked_chsh(S);
  detail::check_qber(Q);
  const double root = std::sqrt(std::max(0.0, 0.25 * S * S - 1.0));
  return 1.0 - binary_entropy(Q) - binary_entropy(std::min(1.0, 0.5 * (1.0 + root)));
}

/// Devetak-Winter lower bound on secret bits per detected pair. Zero when the
/// CHSH inequality is not violated or the bound is negative.
inline double devetak_winter(double S, double Q) {
  S = detail::checked_chsh(S);
  detail::check_qber(Q);
  if (S <= kClassicalChshBound) return 0.0;
  return std::max(0.0, devetak_winter_unclamped(S, Q));
}

/// Secret bits per detection window.
inline double key_rate(double r_dw, double r_c) {
  if (!(r_dw >= 0.0 && r_dw <= 1.0)) throw std::invalid_argument("r_dw must lie in [0, 1]");
  if (!(r_c >= 0.0)) throw std::invalid_argument("coincidence rate must be non-negative");
  return r_dw * r_c;
}

/// S and Q of a Bell state mixed with white noise of weight kappa.
inline ChshQber s_q_from_kappa(double kappa) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in [0, 1]");
  return {kTsirelsonBound * (1.0 - kappa), 0.5 * kappa};
}

inline QkdMetrics make_metrics(double S, double Q, double r_c) {
  QkdMetrics m;
  m.S = S;
  m.Q = Q;
  m.r_dw = devetak_winter(S, Q);
  m.r_c = r_c;
  m.R_key = key_rate(m.r_dw, r_c);
  return m;
}

/// Metrics of a reconstructed state detected at coincidence rate r_c.
inline QkdMetrics evaluate_state(const DensityMatrix& rho, double r_c) {
  const CorrelationAnalysis ca = correlation_analysis(rho);
  return make_metrics(chsh_max(ca), qber_min(ca), r_c);
}

}  // namespace spdcqkd
