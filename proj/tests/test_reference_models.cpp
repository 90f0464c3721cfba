#include <doctest.h>

#include <cmath>

#include "levy/reference_models.hpp"
#include "levy/stable_lab.hpp"
#include "oracles.hpp"

using namespace levy;

TEST_CASE("Black-Scholes matches Gaussian quadrature") {
  const double s[] = {80, 100, 120};
  const double vols[] = {0.1, 0.2, 0.45};
  for (double spot : s) {
    for (double vol : vols) {
      for (double tau : {0.25, 1.0, 3.0}) {
        const OptionContract c{spot, 100.0, 0.03, tau};
        const double ref = oracle::bs_call_quadrature(spot, 100.0, 0.03, tau, vol);
        CHECK(std::fabs(black_scholes_call(c, vol) - ref) < 1e-8);
      }
    }
  }
  // Textbook value for S = K = 100, r = 0, τ = 1, vol = 0.2.
  CHECK(black_scholes_call({100, 100, 0, 1}, 0.2) == doctest::Approx(7.965567455405804).epsilon(1e-13));
}

TEST_CASE("Black-Scholes limits, parity and shape") {
  const OptionContract c{100, 90, 0.02, 1.0};
  CHECK(black_scholes_call(c, 1e-6) == doctest::Approx(c.forward_value()).epsilon(1e-10));
  CHECK(black_scholes_call(c, 20.0) == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(black_scholes_call(c, 0.3) - black_scholes_put(c, 0.3) == doctest::Approx(c.forward_value()).epsilon(1e-13));
  CHECK(black_scholes_price(c.as_side(OptionSide::put), 0.3) == black_scholes_put(c, 0.3));
  CHECK_THROWS_AS(black_scholes_call(c, 0.0), std::invalid_argument);

  double prev_price = INFINITY;
  double prev_slope = -INFINITY;
  for (double k = 60; k <= 140; k += 5) {
    const double price = black_scholes_call({100, k, 0.02, 1.0}, 0.25);
    CHECK(price < prev_price);
    if (std::isfinite(prev_price)) {
      const double slope = (price - prev_price) / 5.0;
      CHECK(slope > prev_slope);
      prev_slope = slope;
    }
    prev_price = price;
  }
}

TEST_CASE("Gaussian limit of the residue series") {
  for (double m = 0.8; m <= 1.2001; m += 0.1) {
    for (double sigma = 0.1; sigma <= 0.4001; sigma += 0.075) {
      const OptionContract c{100.0 * m, 100.0, 0.01, 1.0};
      const auto p = StableModelParams::from_theta(2.0, 0.0, sigma);
      CHECK(p.mu() == doctest::Approx(-sigma * sigma).epsilon(1e-15));
      const double series = price_call(p, c, 1e-12).price;
      const double bs = black_scholes_call(c, gaussian_limit_volatility(sigma));
      CHECK(std::fabs(series - bs) <= 1e-10 * bs);
    }
  }
  CHECK(stable_scale_for_volatility(gaussian_limit_volatility(0.3)) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("Carr-Wu forward term is (S - K e^{-r tau}) / alpha") {
  oracle::Draws d(21);
  for (int trial = 0; trial < 100; ++trial) {
    const double alpha = d.uniform(1.05, 2.0);
    const OptionContract c{d.uniform(20, 200), d.uniform(20, 200), d.uniform(0, 0.08), d.uniform(0.05, 3)};
    const auto p = StableModelParams::from_theta(alpha, alpha - 2.0, d.uniform(0.05, 0.5));
    const double ref = (c.spot - c.strike * std::exp(-c.rate * c.maturity)) / alpha;
    CHECK(std::fabs(residue_term(p, c, {-1, 0}) - ref) <= 1e-12 * std::fabs(ref));
  }
}

TEST_CASE("expectation series agrees with density quadrature") {
  // e^{−rτ} ∫ (S e^{(r+μ)τ + x^{1/α} y} − K)^+ g(y) dy with x = −μτ.
  for (double alpha : {1.5, 1.8}) {
    const double sigma = 0.2;
    const OptionContract c{110.0, 100.0, 0.01, 1.0};
    const double mu = mu_fmls(alpha, sigma);
    const double scale = std::pow(-mu * c.maturity, 1.0 / alpha);
    const double drift = std::log(c.spot) + (c.rate + mu) * c.maturity;
    const double y_star = (std::log(c.strike) - drift) / scale;
    const auto integrand = [&](double y) {
      return (std::exp(drift + scale * y) - c.strike) * stable_density(alpha, alpha - 2.0, y);
    };
    const double upper = y_star + 25.0;
    const double ref = std::exp(-c.rate * c.maturity) * oracle::simpson(integrand, y_star, upper, 4000);
    CHECK(carr_wu_series_call(alpha, sigma, c) == doctest::Approx(ref).epsilon(1e-7));
  }
}

TEST_CASE("expectation series reduces to Black-Scholes at alpha 2") {
  const OptionContract c{95.0, 100.0, 0.02, 0.5};
  CHECK(carr_wu_series_call(2.0, 0.2, c) == doctest::Approx(black_scholes_call(c, gaussian_limit_volatility(0.2))).epsilon(1e-10));
}

TEST_CASE("fmls_call is the residue series at theta = alpha - 2") {
  const OptionContract c{4300, 4000, 0.01, 1.0};
  const auto direct = price_call(StableModelParams::from_beta(1.6, -1.0, 0.2), c);
  CHECK(fmls_call(1.6, 0.2, c).price == doctest::Approx(direct.price).epsilon(1e-14));
}
