#include "catch_amalgamated.hpp"

#include <cmath>

#include "oracles.hpp"
#include "spdcqkd/optimizer.hpp"

using namespace spdcqkd;
using Catch::Approx;

TEST_CASE("golden section and bisection helpers") {
  CHECK(golden_section_maximize([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-9) ==
        Approx(0.3).margin(1e-8));
  CHECK(bisect_sign_change([](double x) { return 0.7 - x; }, 0.0, 1.0, 1e-10) == Approx(0.7).margin(1e-9));
  CHECK_THROWS_AS(bisect_sign_change([](double x) { return x; }, 0.0, 1.0, 1e-6), std::invalid_argument);
}

TEST_CASE("optimal gain agrees with a grid scan", "[oracle]") {
  for (double eta : {0.05, 0.16, 0.5, 1.0}) {
    const GainOptimum opt = optimize_gain(eta, eta);
    const auto [n_grid, r_grid] =
        oracle::grid_argmax([&](double n) { return model_point({n, eta, eta}).R_key; }, 0.0, 0.2, 20001);
    CHECK(opt.mean_pairs == Approx(n_grid).margin(2e-5));
    CHECK(opt.key_rate >= r_grid - 1e-12);
  }
}

TEST_CASE("optimal gain at unit transmittance") {
  const GainOptimum opt = optimize_gain(1.0, 1.0);
  CHECK(opt.mean_pairs == Approx(0.0702).margin(1e-3));
  CHECK(opt.key_rate == Approx(0.0289).margin(2e-4));
  CHECK_THROWS_AS(optimize_gain(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(optimize_gain(1.0, 1.5), std::invalid_argument);
}

TEST_CASE("asymmetric transmittances are symmetric in the arms") {
  const GainOptimum a = optimize_gain(0.2, 0.6);
  const GainOptimum b = optimize_gain(0.6, 0.2);
  CHECK(a.key_rate == Approx(b.key_rate).epsilon(1e-9));
}

TEST_CASE("critical gain") {
  CHECK(critical_gain(0.0, 0.0) == Approx(0.166839).margin(1e-4));
  CHECK(critical_gain(1e-9, 1e-9) == Approx(0.166839).margin(1e-4));
  CHECK(critical_gain(1.0, 1.0) == Approx(0.16024).margin(1e-4));
  // The model key rate vanishes just above the critical gain.
  const double nc = critical_gain(0.5, 0.5);
  CHECK(model_point({nc * 0.99, 0.5, 0.5}).r_dw > 0.0);
  CHECK(model_point({nc * 1.01, 0.5, 0.5}).r_dw == 0.0);
  CHECK_THROWS_AS(critical_gain(-0.1, 0.5), std::invalid_argument);
}

TEST_CASE("quantum-dot thresholds") {
  const QdThreshold d = qd_threshold(0.95, NoiseModel::Dephasing);
  const QdThreshold w = qd_threshold(0.95, NoiseModel::White);
  CHECK(d.r_c_threshold == Approx(0.035).margin(1e-3));
  CHECK(w.r_c_threshold == Approx(0.044).margin(1e-3));
  CHECK(d.r_dw == Approx(0.831339).margin(1e-5));
  CHECK(w.r_dw == Approx(0.663980).margin(1e-5));
  CHECK(qd_threshold(1.0, NoiseModel::White).r_c_threshold == Approx(kSpdcKeyRateBound));

  CHECK(concurrence(dephased_bell_state(0.8)) == Approx(0.8).margin(1e-7));
  CHECK(concurrence(white_noise_bell_state(0.8)) == Approx(0.8).margin(1e-7));

  CHECK_THROWS_AS(qd_threshold(0.0, NoiseModel::Dephasing), NoSecurityError);
  CHECK_THROWS_AS(qd_threshold(0.3, NoiseModel::White), NoSecurityError);
  CHECK_THROWS_AS(qd_threshold(1.2, NoiseModel::White), std::invalid_argument);
}

TEST_CASE("threshold is monotone in concurrence") {
  double prev = 1e9;
  for (double c = 0.8; c <= 1.0 + 1e-12; c += 0.02) {
    const double t = qd_threshold(std::min(c, 1.0), NoiseModel::Dephasing).r_c_threshold;
    CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("key line") {
  const auto line = qd_key_line(0.5, {0.0, 0.01, 0.1});
  CHECK(line[0].R_key == 0.0);
  CHECK(line[2].R_key == Approx(0.05));
}
