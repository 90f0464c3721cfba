#pragma once

#include <optional>
#include <string_view>

namespace levy {

enum class OptionSide { call, put };

std::string_view to_string(OptionSide side);

/// European option on a non-dividend asset. Rate is continuously compounded
/// per unit of maturity.
struct OptionContract {
  double spot = 0.0;
  double strike = 0.0;
  double rate = 0.0;
  double maturity = 0.0;
  OptionSide side = OptionSide::call;

  /// Throws std::invalid_argument unless spot, strike and maturity are positive.
  void validate() const;

  double discount_factor() const;
  /// K·e^{-rτ}
  double discounted_strike() const;
  /// S − K·e^{-rτ}, the value of the forward.
  double forward_value() const;

  OptionContract as_side(OptionSide s) const {
    OptionContract c = *this;
    c.side = s;
    return c;
  }
};

/// log(S/K) + rτ; zero at the at-the-money-forward point.
struct LogMoneyness {
  double value = 0.0;
};

LogMoneyness log_moneyness(const OptionContract& contract);

/// True iff |theta| <= min(alpha, 2 - alpha). Throws std::domain_error for alpha outside (1, 2].
bool validate_feller_takayasu(double alpha, double theta);

/// Skewness β of the stable law to Feller asymmetry θ:
/// θ = (2/π)·atan(−β·tan(πα/2)), so β = −1 maps to θ = α − 2 and β = 0 to θ = 0.
double beta_to_theta(double alpha, double beta);

/// Inverse of beta_to_theta. Throws std::domain_error when theta is outside the diamond.
double theta_to_beta(double alpha, double theta);

/// μ = σ^α·sec(πα/2), the log exponential moment of the maximally negatively
/// skewed unit-time increment. Negative for every alpha in (1, 2].
double mu_fmls(double alpha, double sigma);

/// Throws std::domain_error unless 1 < alpha <= 2.
void check_alpha(double alpha);

/// Immutable parameter set of the stable log-price model.
///
/// μ is a free parameter; when omitted it defaults to mu_fmls(α, σ). θ may lie
/// outside the Feller-Takayasu diamond (analytic continuation of the series);
/// inside_diamond() records which case applies.
class StableModelParams {
 public:
  static StableModelParams from_theta(double alpha, double theta, double sigma,
                                      std::optional<double> mu = std::nullopt);
  static StableModelParams from_beta(double alpha, double beta, double sigma,
                                     std::optional<double> mu = std::nullopt);

  double alpha() const { return alpha_; }
  double theta() const { return theta_; }
  double sigma() const { return sigma_; }
  double mu() const { return mu_; }
  bool inside_diamond() const { return inside_diamond_; }

  StableModelParams with_mu(double mu) const { return from_theta(alpha_, theta_, sigma_, mu); }
  StableModelParams with_theta(double theta) const { return from_theta(alpha_, theta, sigma_, mu_); }

 private:
  StableModelParams(double alpha, double theta, double sigma, double mu);

  double alpha_;
  double theta_;
  double sigma_;
  double mu_;
  bool inside_diamond_;
};

}  // namespace levy
