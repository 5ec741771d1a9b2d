#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spdcqkd/bases.hpp"
#include "spdcqkd/qkd_metrics.hpp"

using namespace spdcqkd;
using Catch::Approx;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

DensityMatrix swap_modes(const DensityMatrix& rho) {
  Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
  p(0, 0) = p(1, 2) = p(2, 1) = p(3, 3) = 1.0;
  const Matrix4c s = p.cast<cplx>();
  return DensityMatrix(s * rho.matrix() * s);
}

}  // namespace

TEST_CASE("optimal bases achieve the eigen-formula values", "[oracle]") {
  std::mt19937_64 rng(101);
  for (int k = 0; k < 100; ++k) {
    const DensityMatrix rho = oracle::random_state(rng, 1 + k % 4);
    for (Ordering o : {Ordering::AliceFirst, Ordering::BobFirst}) {
      const BasisSet bs = optimal_bases(rho, o);
      const AchievedValues v = verify_bases(rho, bs);
      CHECK(v.S == Approx(chsh_max(rho)).margin(1e-9));
      CHECK(v.Q == Approx(qber_min(rho)).margin(1e-9));
      for (const BlochVector* x : {&bs.a0, &bs.a1, &bs.a2, &bs.b1, &bs.b2}) CHECK(x->is_unit(1e-12));
    }
  }
}

TEST_CASE("BobFirst on the swapped state equals AliceFirst on the original") {
  std::mt19937_64 rng(103);
  for (int k = 0; k < 20; ++k) {
    const DensityMatrix rho = oracle::random_state(rng);
    const BasisSet a = optimal_bases(rho, Ordering::AliceFirst);
    BasisSet moved = a;
    moved.ordering = Ordering::BobFirst;
    const AchievedValues v = verify_bases(swap_modes(rho), moved);
    CHECK(v.S == Approx(chsh_max(rho)).margin(1e-9));
    CHECK(v.Q == Approx(qber_min(rho)).margin(1e-9));
  }
}

TEST_CASE("degenerate and signal-free states") {
  CHECK_THROWS_AS(optimal_bases(DensityMatrix::maximally_mixed(), Ordering::AliceFirst), NoSignalError);

  // |HH><HH| + |VV><VV| halves: only zz correlations, lambda_2 = 0.
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = m(3, 3) = 0.5;
  const DensityMatrix classical(m);
  for (Ordering o : {Ordering::AliceFirst, Ordering::BobFirst}) {
    const BasisSet bs = optimal_bases(classical, o);
    const AchievedValues v = verify_bases(classical, bs);
    CHECK(v.Q == Approx(0.0).margin(1e-12));
    CHECK(v.S == Approx(2.0).margin(1e-12));
  }
}

TEST_CASE("Phi+ gives the textbook CHSH geometry") {
  const BasisSet bs = optimal_bases(bell_state(BellState::PhiPlus), Ordering::AliceFirst);
  // A1 and A2 are orthogonal for a maximally entangled state.
  CHECK(bs.a1.vec().dot(bs.a2.vec()) == Approx(0.0).margin(1e-12));
  CHECK(std::abs(bs.b1.vec().dot(bs.b2.vec())) < 1e-12);
}

TEST_CASE("waveplate angles for the tomography states") {
  auto deg = [](const WaveplateSetting& w) { return std::pair{w.quarter * kDeg, w.half * kDeg}; };
  auto [qh, hh] = deg(waveplate_angles({0, 0, 1}));
  CHECK(qh == Approx(0.0).margin(1e-12));
  CHECK(hh == Approx(0.0).margin(1e-12));
  auto [qv, hv] = deg(waveplate_angles({0, 0, -1}));
  CHECK(qv == Approx(0.0).margin(1e-12));
  CHECK(std::abs(hv) == Approx(45.0));
  auto [qd, hd] = deg(waveplate_angles({1, 0, 0}));
  CHECK(qd == Approx(0.0).margin(1e-12));
  CHECK(hd == Approx(22.5));
  auto [qr, hr] = deg(waveplate_angles({0, 1, 0}));
  CHECK(qr == Approx(45.0));
  CHECK(hr == Approx(22.5));
  CHECK_THROWS_AS(waveplate_angles({0, 0, 2}), std::invalid_argument);
}

TEST_CASE("waveplate angles reproduce the projector in Jones calculus", "[oracle]") {
  std::mt19937_64 rng(107);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const BlochVector x(oracle::random_direction(rng));
    const WaveplateSetting w = waveplate_angles(x);
    CHECK(w.quarter > -std::numbers::pi / 2);
    CHECK(w.quarter <= std::numbers::pi / 2);
    CHECK(w.half > -std::numbers::pi / 4);
    CHECK(w.half <= std::numbers::pi / 4);
    worst = std::max(worst, (oracle::analyzer_projector(w.quarter, w.half) - projector(x)).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-9);
}
