#include "levy/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "levy/special_math.hpp"

namespace levy {

namespace {

constexpr double kMinAlphaGap = 1e-8;

// tan(πα/2) written as −tan(π(2−α)/2); 2 − α is exact for α in [1, 2].
double tan_half_pi_alpha(double alpha) { return -std::tan(0.5 * std::numbers::pi * (2.0 - alpha)); }

}  // namespace

std::string_view to_string(OptionSide side) { return side == OptionSide::call ? "call" : "put"; }

void OptionContract::validate() const {
  if (!(spot > 0.0) || !std::isfinite(spot)) throw std::invalid_argument("spot must be positive");
  if (!(strike > 0.0) || !std::isfinite(strike)) throw std::invalid_argument("strike must be positive");
  if (!(maturity > 0.0) || !std::isfinite(maturity)) throw std::invalid_argument("maturity must be positive");
  if (!std::isfinite(rate)) throw std::invalid_argument("rate must be finite");
}

double OptionContract::discount_factor() const { return std::exp(-rate * maturity); }

double OptionContract::discounted_strike() const { return strike * discount_factor(); }

double OptionContract::forward_value() const { return spot - discounted_strike(); }

LogMoneyness log_moneyness(const OptionContract& contract) {
  contract.validate();
  return {std::log(contract.spot / contract.strike) + contract.rate * contract.maturity};
}

void check_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw std::domain_error("alpha must lie in (1, 2], got " + std::to_string(alpha));
  }
}

bool validate_feller_takayasu(double alpha, double theta) {
  check_alpha(alpha);
  return std::fabs(theta) <= std::min(alpha, 2.0 - alpha);
}

double beta_to_theta(double alpha, double beta) {
  check_alpha(alpha);
  if (!(beta >= -1.0 && beta <= 1.0)) {
    throw std::domain_error("beta must lie in [-1, 1], got " + std::to_string(beta));
  }
  if (alpha == 2.0) return 0.0;
  const double theta = 2.0 / std::numbers::pi * std::atan(-beta * tan_half_pi_alpha(alpha));
  // Pin the endpoints so that the diamond check holds exactly.
  if (beta == -1.0) return alpha - 2.0;
  if (beta == 1.0) return 2.0 - alpha;
  return theta;
}

double theta_to_beta(double alpha, double theta) {
  if (!validate_feller_takayasu(alpha, theta)) {
    throw std::domain_error("theta " + std::to_string(theta) +
                            " lies outside the Feller-Takayasu diamond; no skewness beta exists");
  }
  if (alpha == 2.0) return 0.0;
  if (theta == alpha - 2.0) return -1.0;
  if (theta == 2.0 - alpha) return 1.0;
  const double beta = -std::tan(0.5 * std::numbers::pi * theta) / tan_half_pi_alpha(alpha);
  return std::clamp(beta, -1.0, 1.0);
}

double mu_fmls(double alpha, double sigma) {
  check_alpha(alpha);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::domain_error("sigma must be positive");
  if (alpha - 1.0 < kMinAlphaGap) {
    throw std::domain_error("alpha too close to 1: sec(pi*alpha/2) diverges");
  }
  // cos(πα/2) = −sin(π(α−1)/2), accurate near α = 1.
  const double cosine = -sin_pi(0.5 * (alpha - 1.0));
  const double mu = std::pow(sigma, alpha) / cosine;
  if (!std::isfinite(mu)) throw std::domain_error("mu_fmls overflow");
  return mu;
}

StableModelParams::StableModelParams(double alpha, double theta, double sigma, double mu)
    : alpha_(alpha), theta_(theta), sigma_(sigma), mu_(mu) {
  inside_diamond_ = validate_feller_takayasu(alpha, theta);
  if (!std::isfinite(theta)) throw std::domain_error("theta must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::domain_error("sigma must be positive");
  if (!(mu < 0.0) || !std::isfinite(mu)) {
    throw std::domain_error("mu must be negative for the residue series, got " + std::to_string(mu));
  }
}

StableModelParams StableModelParams::from_theta(double alpha, double theta, double sigma, std::optional<double> mu) {
  check_alpha(alpha);
  return StableModelParams(alpha, theta, sigma, mu ? *mu : mu_fmls(alpha, sigma));
}

StableModelParams StableModelParams::from_beta(double alpha, double beta, double sigma, std::optional<double> mu) {
  return from_theta(alpha, beta_to_theta(alpha, beta), sigma, mu);
}

}  // namespace levy
