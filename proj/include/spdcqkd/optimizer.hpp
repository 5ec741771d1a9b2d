#pragma once

// Optimal and critical source gain, and the quantum-dot comparison.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spdcqkd/error.hpp"
#include "spdcqkd/qkd_metrics.hpp"
#include "spdcqkd/quantum_core.hpp"
#include "spdcqkd/spdc_model.hpp"

namespace spdcqkd {

/// Upper bound on the key rate of a CW SPDC source, bits per window, as
/// rounded for the quantum-dot thresholds.
inline constexpr double kSpdcKeyRateBound = 0.029;

/// Largest mean pair number with a non-zero key rate in the zero-transmittance
/// limit; upper end of the gain search.
inline constexpr double kZeroTransmittanceCriticalGain = 0.166839;

/// Maximizer of a unimodal `f` on [lo, hi], to an interval width below `tol`.
/// Ties keep the left part, so a zero plateau on the right is skipped.
template <class F>
double golden_section_maximize(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

/// Sign change of `f` on [lo, hi], given f(lo) > 0 >= f(hi).
template <class F>
double bisect_sign_change(F&& f, double lo, double hi, double tol) {
  if (!(f(lo) > 0.0) || f(hi) > 0.0) throw std::invalid_argument("bisection interval does not bracket a sign change");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct GainOptimum {
  double mean_pairs = 0.0;
  double key_rate = 0.0;
  double eta_a = 1.0;
  double eta_b = 1.0;
};

/// Mean pair number maximizing R_key for a Bell-state source with the given
/// transmittances.
inline GainOptimum optimize_gain(double eta_a, double eta_b) {
  if (!(eta_a > 0.0 && eta_a <= 1.0) || !(eta_b > 0.0 && eta_b <= 1.0))
    throw std::invalid_argument("optimize_gain needs transmittances in (0, 1]");
  auto key = [&](double n) { return model_point({n, eta_a, eta_b}).R_key; };
  const double n_opt = golden_section_maximize(key, 0.0, kZeroTransmittanceCriticalGain, 1e-7);
  return {n_opt, key(n_opt), eta_a, eta_b};
}

/// Largest mean pair number with a positive Devetak-Winter rate. A zero
/// transmittance is handled through the low-gain kappa = n/(1+n).
inline double critical_gain(double eta_a, double eta_b) {
  if (!(eta_a >= 0.0 && eta_a <= 1.0) || !(eta_b >= 0.0 && eta_b <= 1.0))
    throw std::invalid_argument("transmittances must lie in [0, 1]");
  const bool lossy_limit = eta_a == 0.0 || eta_b == 0.0;
  auto rate = [&](double n) {
    const double kappa = lossy_limit ? kappa_approx(n) : kappa_exact({n, eta_a, eta_b});
    const ChshQber sq = s_q_from_kappa(kappa);
    return devetak_winter_unclamped(sq.S, sq.Q);
  };
  return bisect_sign_change(rate, 0.0, 1.0, 1e-7);
}

enum class NoiseModel { Dephasing, White };

struct QdThreshold {
  double concurrence = 1.0;
  NoiseModel noise_model = NoiseModel::Dephasing;
  double r_dw = 1.0;
  double r_c_threshold = kSpdcKeyRateBound;
  double key_rate_bound = kSpdcKeyRateBound;
};

/// Phi+ with both coherences scaled by `c`; concurrence c, QBER 0.
inline DensityMatrix dephased_bell_state(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("concurrence must lie in [0, 1]");
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = m(3, 3) = 0.5;
  m(0, 3) = m(3, 0) = 0.5 * c;
  return DensityMatrix(m);
}

/// Phi+ mixed with white noise to concurrence `c`, kappa = 2(1 - c)/3.
inline DensityMatrix white_noise_bell_state(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("concurrence must lie in [0, 1]");
  return werner_mix(bell_state(BellState::PhiPlus), 2.0 * (1.0 - c) / 3.0);
}

/// Coincidence rate a single-pair source of concurrence `c` needs to beat the
/// SPDC key-rate bound.
inline QdThreshold qd_threshold(double c, NoiseModel model, double key_rate_bound = kSpdcKeyRateBound) {
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("concurrence must lie in [0, 1]");
  const DensityMatrix rho = model == NoiseModel::Dephasing ? dephased_bell_state(c) : white_noise_bell_state(c);
  const CorrelationAnalysis ca = correlation_analysis(rho);
  const double r_dw = devetak_winter(chsh_max(ca), qber_min(ca));
  if (r_dw <= 0.0) throw NoSecurityError("Devetak-Winter rate is zero at this concurrence");
  return {c, model, r_dw, key_rate_bound / r_dw, key_rate_bound};
}

struct KeyLinePoint {
  double r_c;
  double R_key;
};

/// Key rate of a source without multi-pair noise: linear in r_c.
inline std::vector<KeyLinePoint> qd_key_line(double r_dw, const std::vector<double>& r_c_grid) {
  std::vector<KeyLinePoint> out;
  out.reserve(r_c_grid.size());
  for (double r_c : r_c_grid) out.push_back({r_c, key_rate(r_dw, r_c)});
  return out;
}

}  // namespace spdcqkd
