#include "levy/reference_models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "levy/special_math.hpp"

namespace levy {

void BlackScholesParams::validate() const {
  if (!(volatility > 0.0) || !std::isfinite(volatility)) throw std::invalid_argument("volatility must be positive");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

struct D12 {
  double d1;
  double d2;
};

D12 d_terms(const OptionContract& contract, double vol) {
  BlackScholesParams{vol}.validate();
  const double log_m = log_moneyness(contract).value;
  const double sd = vol * std::sqrt(contract.maturity);
  const double d1 = (log_m + 0.5 * sd * sd) / sd;
  return {d1, d1 - sd};
}

}  // namespace

double black_scholes_call(const OptionContract& contract, double vol) {
  const auto [d1, d2] = d_terms(contract, vol);
  return contract.spot * normal_cdf(d1) - contract.discounted_strike() * normal_cdf(d2);
}

double black_scholes_put(const OptionContract& contract, double vol) {
  const auto [d1, d2] = d_terms(contract, vol);
  return contract.discounted_strike() * normal_cdf(-d2) - contract.spot * normal_cdf(-d1);
}

double black_scholes_price(const OptionContract& contract, double vol) {
  return contract.side == OptionSide::call ? black_scholes_call(contract, vol) : black_scholes_put(contract, vol);
}

double gaussian_limit_volatility(double sigma) { return std::numbers::sqrt2 * sigma; }

double stable_scale_for_volatility(double vol) { return vol / std::numbers::sqrt2; }

PriceResult fmls_call(double alpha, double sigma, const OptionContract& contract, double tolerance, int max_column) {
  const auto params = StableModelParams::from_theta(alpha, alpha - 2.0, sigma, mu_fmls(alpha, sigma));
  return price_call(params, contract.as_side(OptionSide::call), tolerance, max_column);
}

double carr_wu_series_call(double alpha, double sigma, const OptionContract& contract, double tolerance) {
  contract.validate();
  const double mu = mu_fmls(alpha, sigma);
  const double x = -mu * contract.maturity;
  const double log_x = std::log(x);
  const double shifted = log_moneyness(contract).value + mu * contract.maturity;
  const double log_abs_shifted = std::log(std::fabs(shifted));
  const double scale = contract.discounted_strike() / alpha;

  CompensatedSum total;
  int quiet = 0;
  for (int n = 0; n < 2000; ++n) {
    if (n > 0 && shifted == 0.0) break;
    CompensatedSum row;
    double row_max = 0.0;
    const double log_prefix = (n > 0 ? n * log_abs_shifted : 0.0) - log_gamma(n + 1.0);
    const int prefix_sign = (n % 2 == 1 && shifted < 0.0) ? -1 : 1;
    int small = 0;
    for (int m = 1; m < 4000; ++m) {
      const double z = 1.0 + (m - n) / alpha;
      const SignedLog rg = log_reciprocal_gamma(z);
      double term = 0.0;
      if (rg.sign != 0) {
        term = prefix_sign * rg.sign * std::exp(log_prefix + rg.log_abs + (m - n) / alpha * log_x);
      }
      row.add(term);
      row_max = std::max(row_max, std::fabs(term));
      // Terms decay once m exceeds n; stop after a run of negligible ones.
      if (m > n + 2 && std::fabs(term) <= 1e-18 * std::max(row_max, 1e-300)) {
        if (++small >= 3) break;
      } else {
        small = 0;
      }
    }
    const double contribution = scale * row.value();
    total.add(contribution);
    if (std::fabs(contribution) < tolerance) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  return total.value();
}

}  // namespace levy
