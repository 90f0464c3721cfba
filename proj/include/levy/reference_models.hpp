#pragma once

#include "levy/core_model.hpp"
#include "levy/residue_pricer.hpp"

namespace levy {

struct BlackScholesParams {
  double volatility = 0.0;

  void validate() const;
};

/// Standard normal CDF via erfc.
double normal_cdf(double x);

/// S·N(d1) − K e^{−rτ}·N(d2).
double black_scholes_call(const OptionContract& contract, double vol);
double black_scholes_put(const OptionContract& contract, double vol);
/// Dispatches on contract.side.
double black_scholes_price(const OptionContract& contract, double vol);

/// Lognormal volatility matching the α = 2 stable model with scale σ
/// (μ = −σ², Gaussian kernel of variance 2): vol = √2·σ.
double gaussian_limit_volatility(double sigma);
/// Inverse of gaussian_limit_volatility.
double stable_scale_for_volatility(double vol);

/// Residue series at maximal negative skewness θ = α − 2 with μ = mu_fmls(α, σ).
PriceResult fmls_call(double alpha, double sigma, const OptionContract& contract, double tolerance = 1e-8,
                      int max_column = 400);

/// Closed double series for the finite-moment log-stable call,
///
///   (K e^{−rτ}/α) Σ_{n≥0} Σ_{m≥1} ([log] + μτ)^n / n! · (−μτ)^{(m−n)/α} / Γ(1 + (m−n)/α),
///
/// which equals the convergent risk-neutral expectation. Used as an oracle that
/// is independent of the residue series above.
double carr_wu_series_call(double alpha, double sigma, const OptionContract& contract, double tolerance = 1e-10);

}  // namespace levy
