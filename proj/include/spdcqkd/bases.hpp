#pragma once

// Optimal measurement bases for the entanglement-based protocol and the
// waveplate settings that realize them.
//
// Alice measures A0 (key), A1, A2 (CHSH); Bob measures B1 (key and CHSH) and
// B2 (CHSH). A basis is a unit Bloch vector x with observable x . sigma.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spdcqkd/error.hpp"
#include "spdcqkd/quantum_core.hpp"

namespace spdcqkd {

/// Which physical mode of rho belongs to Alice: AliceFirst means
/// rho in H_Alice x H_Bob, BobFirst means rho in H_Bob x H_Alice.
enum class Ordering { AliceFirst, BobFirst };

struct BasisSet {
  BlochVector a0{0, 0, 1};
  BlochVector a1{0, 0, 1};
  BlochVector a2{0, 0, 1};
  BlochVector b1{0, 0, 1};
  BlochVector b2{0, 0, 1};
  Ordering ordering = Ordering::AliceFirst;
};

struct AchievedValues {
  double S;
  double Q;
};

/// Dial angles, in radians from the horizontal, of the half- and quarter-wave
/// plates in front of a polarizing beam splitter (HWP first, then QWP, +1
/// outcome on the horizontal output).
struct WaveplateSetting {
  double quarter;  ///< theta_Q in (-pi/2, pi/2]; QWP period is pi
  double half;     ///< theta_H in (-pi/4, pi/4]; HWP period is pi/2
};

namespace detail {

inline constexpr double kDegenerateEigenvalue = 1e-12;

// Correlation tensor as seen from (Alice, Bob), whichever mode comes first in rho.
inline Matrix3 alice_bob_tensor(const Matrix3& t, Ordering ordering) {
  return ordering == Ordering::AliceFirst ? t : Matrix3(t.transpose());
}

}  // namespace detail

/// Bases minimizing the QBER of (A0, B1) while maximizing the CHSH value of
/// (A1, A2, B1, B2). Throws NoSignalError when lambda_1 vanishes.
inline BasisSet optimal_bases(const DensityMatrix& rho, Ordering ordering) {
  const CorrelationAnalysis ca = correlation_analysis(rho);
  const double l1 = ca.eigenvalues[0];
  const double l2 = ca.eigenvalues[1];
  if (l1 <= detail::kDegenerateEigenvalue)
    throw NoSignalError("state has no two-qubit correlations; optimal bases are undefined");

  const Vector3& e1 = ca.eigenvectors[0];
  const Vector3& e2 = ca.eigenvectors[1];
  const Vector3 t1 = (ca.T * e1).normalized();
  const bool flat = l2 <= detail::kDegenerateEigenvalue;
  const Vector3 t2 = flat ? t1 : Vector3((ca.T * e2).normalized());
  const double c = std::sqrt(l1 / (l1 + l2));
  const double s = std::sqrt(l2 / (l1 + l2));

  BasisSet bs;
  bs.ordering = ordering;
  if (ordering == Ordering::AliceFirst) {
    bs.a0 = BlochVector(t1);
    bs.a1 = flat ? bs.a0 : BlochVector::normalized(c * t1 + s * t2);
    bs.a2 = flat ? bs.a0 : BlochVector::normalized(c * t1 - s * t2);
    bs.b1 = BlochVector(e1);
    bs.b2 = BlochVector(e2);
  } else {
    bs.a0 = BlochVector(e1);
    bs.a1 = BlochVector::normalized(c * e1 + s * e2);
    bs.a2 = BlochVector::normalized(c * e1 - s * e2);
    bs.b1 = BlochVector(t1);
    bs.b2 = BlochVector(t2);
  }
  return bs;
}

/// CHSH value a1.T(b1 + b2) + a2.T(b1 - b2) and QBER (1 - a0.T b1)/2 of the
/// given directions, with T oriented as (Alice, Bob).
inline AchievedValues verify_bases(const DensityMatrix& rho, const BasisSet& bs) {
  const Matrix3 t = detail::alice_bob_tensor(correlation_tensor(rho), bs.ordering);
  const Vector3& b1 = bs.b1.vec();
  const Vector3& b2 = bs.b2.vec();
  const double S = bs.a1.vec().dot(t * (b1 + b2)) + bs.a2.vec().dot(t * (b1 - b2));
  const double Q = 0.5 * (1.0 - bs.a0.vec().dot(t * b1));
  return {S, Q};
}

namespace detail {

// Reduces `angle` into (-period/2, period/2].
inline double reduce_angle(double angle, double period) {
  double r = std::remainder(angle, period);
  if (r <= -0.5 * period) r += period;
  return r;
}

}  // namespace detail

/// theta_Q = asin(x2)/2, theta_H = (atan2(x1, x3) + asin(x2))/4, with
/// atan2(0, 0) = 0 so circular projections get theta_H = pi/8.
/// A projection onto -x is the vertical PBS output of the setting for x.
inline WaveplateSetting waveplate_angles(const BlochVector& x) {
  if (!x.is_unit()) throw std::invalid_argument("waveplate_angles needs a unit Bloch vector");
  const double lift = std::asin(std::clamp(x.x2(), -1.0, 1.0));
  const double azimuth = (x.x1() == 0.0 && x.x3() == 0.0) ? 0.0 : std::atan2(x.x1(), x.x3());
  return {detail::reduce_angle(0.5 * lift, std::numbers::pi),
          detail::reduce_angle(0.25 * (azimuth + lift), 0.5 * std::numbers::pi)};
}

}  // namespace spdcqkd
