#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spdcqkd/qkd_metrics.hpp"

using namespace spdcqkd;
using Catch::Approx;

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == Approx(1.0));
  CHECK(binary_entropy(0.11) == Approx(0.499916).epsilon(1e-5));
  CHECK(binary_entropy(0.2) == Approx(binary_entropy(0.8)));
  CHECK_THROWS_AS(binary_entropy(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(binary_entropy(1.01), std::invalid_argument);
}

TEST_CASE("CHSH and QBER of known states") {
  const DensityMatrix phi = bell_state(BellState::PhiPlus);
  CHECK(chsh_max(phi) == Approx(kTsirelsonBound));
  CHECK(qber_min(phi) == Approx(0.0).margin(1e-15));
  CHECK(chsh_max(DensityMatrix::maximally_mixed()) == 0.0);
  CHECK(qber_min(DensityMatrix::maximally_mixed()) == 0.5);

  for (double kappa : {0.0, 0.05, 0.3, 1.0}) {
    const DensityMatrix w = werner_mix(phi, kappa);
    const ChshQber sq = s_q_from_kappa(kappa);
    CHECK(chsh_max(w) == Approx(sq.S).margin(1e-12));
    CHECK(qber_min(w) == Approx(sq.Q).margin(1e-12));
  }
}

TEST_CASE("Devetak-Winter rate") {
  CHECK(devetak_winter(kTsirelsonBound, 0.0) == Approx(1.0));
  CHECK(devetak_winter(2.0, 0.0) == 0.0);
  CHECK(devetak_winter(1.5, 0.1) == 0.0);
  CHECK(devetak_winter(2.35, 0.080) == 0.0);
  CHECK(devetak_winter(2.815, 0.0013) == Approx(0.94).margin(0.005));
  // Slightly above Tsirelson from rounding is clipped, clearly above is an error.
  CHECK(devetak_winter(kTsirelsonBound + 5e-10, 0.0) == Approx(1.0));
  CHECK_THROWS_AS(devetak_winter(2.9, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(devetak_winter(2.5, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(devetak_winter(-1.0, 0.0), std::invalid_argument);
  CHECK(devetak_winter_unclamped(2.0, 0.1) < 0.0);
}

TEST_CASE("Devetak-Winter rate is monotone") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> us(2.0, kTsirelsonBound), uq(0.0, 0.5);
  for (int k = 0; k < 500; ++k) {
    const double S = us(rng);
    const double Q = uq(rng);
    const double r = devetak_winter(S, Q);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(devetak_winter(std::min(S + 0.01, kTsirelsonBound), Q) >= r);
    CHECK(devetak_winter(S, std::max(Q - 0.01, 0.0)) >= r);
  }
}

TEST_CASE("key rate") {
  CHECK(key_rate(0.5, 0.01) == Approx(0.005));
  CHECK(key_rate(0.0, 0.3) == 0.0);
  CHECK_THROWS_AS(key_rate(1.5, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(key_rate(0.5, -0.1), std::invalid_argument);

  const QkdMetrics m = make_metrics(2.815, 0.0013, 8.66e-6);
  CHECK(m.R_key == Approx(m.r_dw * 8.66e-6));
  CHECK(m.R_key == Approx(8.2e-6).margin(0.2e-6));
}

TEST_CASE("kappa to S and Q") {
  const ChshQber sq = s_q_from_kappa(0.1);
  CHECK(sq.S == Approx(0.9 * 2 * std::sqrt(2.0)));
  CHECK(sq.Q == Approx(0.05));
  CHECK_THROWS_AS(s_q_from_kappa(-0.1), std::invalid_argument);
}

TEST_CASE("eigen formulas match brute-force optimization", "[oracle]") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 20; ++k) {
    const DensityMatrix rho = oracle::random_state(rng, 1 + k % 3);
    CHECK(chsh_max(rho) == Approx(oracle::brute_chsh(rho)).margin(1e-3));
    CHECK(qber_min(rho) == Approx(oracle::brute_qber(rho)).margin(1e-3));
  }
}
