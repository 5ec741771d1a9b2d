#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spdcqkd/spdc_model.hpp"
#include "spdcqkd/tomography.hpp"

using namespace spdcqkd;
using Catch::Approx;

namespace {

// The printed closed form, valid away from tiny eta * n.
double kappa_textbook(double n, double ea, double eb) {
  const double a = std::exp(0.5 * ea * n);
  const double b = std::exp(0.5 * eb * n);
  const double ab = std::exp(0.5 * ea * eb * n);
  const double abn = std::exp(0.5 * (ea + eb) * n);
  return 2.0 * (a - 1.0) * (b - 1.0) / (1.0 - 2.0 * a - 2.0 * b + ab + 2.0 * abn);
}

}  // namespace

TEST_CASE("source parameter validation") {
  CHECK_THROWS_AS(kappa_exact({-0.1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(kappa_exact({0.1, 1.1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(kappa_exact({0.1, 1, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(kappa_exact({0.1, 0.0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(coincidence_rate_exact({std::nan(""), 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(kappa_approx(-1.0), std::invalid_argument);
}

TEST_CASE("click probabilities") {
  const DensityMatrix phi = bell_state(BellState::PhiPlus);
  const BlochVector h{0, 0, 1}, v{0, 0, -1};

  // Perfect detection: only correlated outcomes.
  ClickProbabilities cp = click_probabilities(phi, h, h, {0.1, 1, 1});
  CHECK(cp.p11 == Approx(0.5));
  CHECK(cp.p10 == Approx(0.0).margin(1e-15));
  CHECK(cp.p01 == Approx(0.0).margin(1e-15));
  CHECK(cp.p00 == Approx(0.5));

  cp = click_probabilities(phi, h, v, {0.1, 1, 1});
  CHECK(cp.p11 == Approx(0.0).margin(1e-15));
  CHECK(cp.p10 == Approx(0.5));
  CHECK(cp.p01 == Approx(0.5));
  CHECK(cp.p00 == Approx(0.0).margin(1e-15));

  // Bob's arm at half transmittance.
  cp = click_probabilities(phi, h, v, {0.1, 1, 0.5});
  CHECK(cp.p11 == Approx(0.0).margin(1e-15));
  CHECK(cp.p10 == Approx(0.5));
  CHECK(cp.p01 == Approx(0.25));
  CHECK(cp.p00 == Approx(0.25));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const DensityMatrix rho = oracle::random_state(rng);
    const auto c = click_probabilities(rho, BlochVector(oracle::random_direction(rng)),
                                       BlochVector(oracle::random_direction(rng)), {0.1, u(rng), u(rng)});
    CHECK(c.p11 + c.p10 + c.p01 + c.p00 == Approx(1.0));
    CHECK(c.p11 >= -1e-15);
    CHECK(c.p10 >= -1e-15);
    CHECK(c.p01 >= -1e-15);
    CHECK(c.p00 >= -1e-15);
  }
}

TEST_CASE("closed-form coincidence probability matches the Poisson series", "[oracle]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const DensityMatrix rho = oracle::random_state(rng, 1 + k % 4);
    const double n = std::pow(10.0, -4.0 + 4.5 * u(rng));
    const SourceParams p{n, u(rng), u(rng)};
    const auto cp = click_probabilities(rho, BlochVector(oracle::random_direction(rng)),
                                        BlochVector(oracle::random_direction(rng)), p);
    worst = std::max(worst, std::abs(coincidence_probability(cp, n) - oracle::coincidence_series(cp, n)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("kappa and coincidence rate") {
  CHECK(kappa_exact({0.0, 1, 1}) == 0.0);
  CHECK(kappa_exact({0.0737, 1, 1}) == Approx(0.0698321).epsilon(1e-6));
  CHECK(coincidence_rate_exact({0.0737, 1, 1}) == Approx(0.0710497).epsilon(1e-6));
  CHECK(coincidence_rate_exact({0.0, 0.5, 0.5}) == 0.0);

  // Vanishing transmittance recovers the low-gain approximation.
  CHECK(kappa_exact({0.1, 1e-6, 1e-6}) == Approx(kappa_approx(0.1)).epsilon(1e-6));
  CHECK(kappa_approx(0.1) == Approx(0.1 / 1.1));

  for (double n : {0.01, 0.1, 0.5, 2.0})
    for (double ea : {0.1, 0.5, 1.0})
      for (double eb : {0.2, 0.7, 1.0}) {
        CHECK(kappa_exact({n, ea, eb}) == Approx(kappa_textbook(n, ea, eb)).epsilon(1e-9));
        CHECK(kappa_exact({n, ea, eb}) == Approx(kappa_exact({n, eb, ea})).epsilon(1e-14));
        // Series oracle for the rate: P(both arms detect at least one photon).
        ClickProbabilities cp;
        cp.p11 = ea * eb;
        cp.p10 = ea * (1 - eb);
        cp.p01 = (1 - ea) * eb;
        cp.p00 = (1 - ea) * (1 - eb);
        CHECK(coincidence_rate_exact({n, ea, eb}) == Approx(oracle::coincidence_series(cp, n)).margin(1e-13));
      }
}

TEST_CASE("kappa and rate are monotone in the mean pair number") {
  for (double eta : {0.05, 0.3, 1.0}) {
    double prev_k = 0.0, prev_r = 0.0;
    for (double n = 1e-4; n < 2.0; n *= 1.3) {
      const double k = kappa_exact({n, eta, eta});
      const double r = coincidence_rate_exact({n, eta, eta});
      CHECK(k > prev_k);
      CHECK(r > prev_r);
      prev_k = k;
      prev_r = r;
    }
  }
}

TEST_CASE("model curve") {
  const std::vector<double> grid{0.0, 0.01, 0.0737, 0.2};
  const auto curve = model_curve(1, 1, grid);
  REQUIRE(curve.size() == grid.size());
  CHECK(curve[0].S == Approx(kTsirelsonBound));
  CHECK(curve[0].R_key == 0.0);
  CHECK(curve[2].R_key == Approx(0.0288).margin(2e-4));
  CHECK(curve[3].r_dw == 0.0);
  for (const ModelPoint& p : curve) CHECK(p.R_key == Approx(p.r_dw * p.r_c));

  const DensityMatrix eff = effective_state({0.0737, 1, 1}, bell_state(BellState::PhiPlus));
  CHECK(chsh_max(eff) == Approx(curve[2].S).margin(1e-12));
}
