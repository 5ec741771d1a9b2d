#pragma once

// Multi-pair model of a continuously pumped SPDC source.
//
// Pairs arrive in a detection window with Poisson statistics of mean n_bar.
// Each pair reaches Alice's detector with probability eta_a and Bob's with
// eta_b. A tomographic coincidence is registered when both projected
// detectors click at least once.
//
// The closed forms below are written in terms of expm1 so that the
// cancellations of the textbook expressions (1 - e^{..} - e^{..} + e^{..})
// happen analytically. The rewriting rests on e^{x+y} - 1 = u + v + uv for
// u = e^x - 1, v = e^y - 1.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spdcqkd/qkd_metrics.hpp"
#include "spdcqkd/quantum_core.hpp"

namespace spdcqkd {

struct SourceParams {
  double mean_pairs = 0.0;  ///< n_bar, mean pair number per detection window
  double eta_a = 1.0;
  double eta_b = 1.0;

  void validate() const {
    if (!(mean_pairs >= 0.0) || !std::isfinite(mean_pairs))
      throw std::invalid_argument("mean pair number must be finite and non-negative");
    if (!(eta_a >= 0.0 && eta_a <= 1.0) || !(eta_b >= 0.0 && eta_b <= 1.0))
      throw std::invalid_argument("transmittances must lie in [0, 1]");
  }
};

/// Detector outcome probabilities for a single pair projected on (psi_i, psi_j):
/// p11 both click, p10 only Alice, p01 only Bob, p00 neither.
struct ClickProbabilities {
  double p11 = 0.0;
  double p10 = 0.0;
  double p01 = 0.0;
  double p00 = 1.0;
};

inline ClickProbabilities click_probabilities(const DensityMatrix& rho0, const BlochVector& psi_i,
                                              const BlochVector& psi_j, const SourceParams& params) {
  params.validate();
  const double ea = params.eta_a;
  const double eb = params.eta_b;
  const Matrix2c pi = projector(psi_i);
  const Matrix2c pj = projector(psi_j);
  const Matrix2c pi_perp = projector(psi_i.antipodal());
  const Matrix2c pj_perp = projector(psi_j.antipodal());
  const SingleQubitState rho_a = partial_trace(rho0, Subsystem::A);
  const SingleQubitState rho_b = partial_trace(rho0, Subsystem::B);
  auto joint = [&](const Matrix2c& a, const Matrix2c& b) {
    return rho0.expectation(detail::kron(a, b));
  };

  ClickProbabilities cp;
  cp.p11 = ea * eb * joint(pi, pj);
  cp.p10 = ea * eb * joint(pi, pj_perp) + ea * (1.0 - eb) * rho_a.expectation(pi);
  cp.p01 = ea * eb * joint(pi_perp, pj) + (1.0 - ea) * eb * rho_b.expectation(pj);
  cp.p00 = ea * eb * joint(pi_perp, pj_perp) + ea * (1.0 - eb) * rho_a.expectation(pi_perp) +
           (1.0 - ea) * eb * rho_b.expectation(pj_perp) + (1.0 - ea) * (1.0 - eb);
  return cp;
}

/// Probability of at least one (i, j) coincidence when the number of pairs in
/// the window is Poisson(n_bar):
///   1 - e^{-n(1-A)} - e^{-n(1-B)} + e^{-n(1-D)},  A = p10+p00, B = p01+p00, D = p00.
inline double coincidence_probability(const ClickProbabilities& cp, double mean_pairs) {
  if (!(mean_pairs >= 0.0)) throw std::invalid_argument("mean pair number must be non-negative");
  const double bob_clicks = cp.p11 + cp.p01;    // 1 - A
  const double alice_clicks = cp.p11 + cp.p10;  // 1 - B
  const double u = std::expm1(-mean_pairs * bob_clicks);
  const double v = std::expm1(-mean_pairs * alice_clicks);
  return u * v + std::expm1(mean_pairs * cp.p11) * std::exp(-mean_pairs * (bob_clicks + alice_clicks));
}

/// Low-gain approximation n_bar / (1 + n_bar).
inline double kappa_approx(double mean_pairs) {
  if (!(mean_pairs >= 0.0)) throw std::invalid_argument("mean pair number must be non-negative");
  return mean_pairs / (1.0 + mean_pairs);
}

/// White-noise weight of the maximum-likelihood two-qubit state reconstructed
/// from the multi-pair statistics of a Bell-state source:
///
///   kappa = 2 (e^{a n/2} - 1)(e^{b n/2} - 1)
///           / (1 - 2e^{a n/2} - 2e^{b n/2} + e^{a b n/2} + 2e^{(a+b) n/2})
///
/// evaluated as 2 u_a u_b / (2 u_a u_b + w) with u = expm1(eta n/2),
/// w = expm1(eta_a eta_b n/2).
inline double kappa_exact(const SourceParams& params) {
  params.validate();
  if (params.mean_pairs == 0.0) return 0.0;
  if (params.eta_a == 0.0 || params.eta_b == 0.0)
    throw std::invalid_argument("kappa_exact is undefined for zero transmittance; use kappa_approx");
  const double n = params.mean_pairs;
  const double ua = std::expm1(0.5 * params.eta_a * n);
  const double ub = std::expm1(0.5 * params.eta_b * n);
  const double w = std::expm1(0.5 * params.eta_a * params.eta_b * n);
  const double num = 2.0 * ua * ub;
  return num / (num + w);
}

/// Detected pairs per window:
///   1 - e^{-a n} - e^{-b n} + e^{-(a + b - ab) n}.
inline double coincidence_rate_exact(const SourceParams& params) {
  params.validate();
  const double n = params.mean_pairs;
  const double u = std::expm1(-params.eta_a * n);
  const double v = std::expm1(-params.eta_b * n);
  return u * v + std::expm1(params.eta_a * params.eta_b * n) * std::exp(-(params.eta_a + params.eta_b) * n);
}

/// Two-qubit state reconstructed from a Bell-state source at these parameters.
inline DensityMatrix effective_state(const SourceParams& params, const DensityMatrix& bell) {
  return werner_mix(bell, kappa_exact(params));
}

struct ModelPoint {
  double mean_pairs;
  double kappa;
  double S;
  double Q;
  double r_dw;
  double r_c;
  double R_key;
};

inline ModelPoint model_point(const SourceParams& params) {
  const double kappa = kappa_exact(params);
  const ChshQber sq = s_q_from_kappa(kappa);
  const QkdMetrics m = make_metrics(sq.S, sq.Q, coincidence_rate_exact(params));
  return {params.mean_pairs, kappa, m.S, m.Q, m.r_dw, m.r_c, m.R_key};
}

/// Model quantities along a grid of mean pair numbers for a Bell-state source.
inline std::vector<ModelPoint> model_curve(double eta_a, double eta_b, const std::vector<double>& grid) {
  std::vector<ModelPoint> out;
  out.reserve(grid.size());
  for (double n : grid) out.push_back(model_point({n, eta_a, eta_b}));
  return out;
}

}  // namespace spdcqkd
