#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "levy/core_model.hpp"
#include "levy/nelder_mead.hpp"

namespace levy {

enum class ModelKind { black_scholes, carr_wu, alpha_beta_stable };

/// "BS", "CarrWu", "AlphaBetaStable"
std::string_view to_string(ModelKind kind);
/// Accepts bs, carrwu, stable (case-insensitive) and the to_string names.
ModelKind parse_model_kind(std::string_view name);

struct OptionQuote {
  double spot = 0.0;
  double rate = 0.0;
  double maturity = 0.0;
  double strike = 0.0;
  OptionSide side = OptionSide::call;
  double market_price = 0.0;
  int source_row = 0;  // 1-based data row in the source file, 0 if synthetic

  void validate() const;
  OptionContract contract() const { return {spot, strike, rate, maturity, side}; }
};

struct OptionChain {
  std::string as_of;
  std::vector<OptionQuote> quotes;

  /// Non-empty, every quote valid, one spot per chain.
  void validate() const;
  OptionChain filtered(OptionSide side) const;
};

/// Parameters of one of the three nested models.
///
/// black_scholes: sigma is the lognormal volatility; alpha, beta, mu unused.
/// carr_wu: alpha and sigma; beta is −1 and mu is mu_fmls(alpha, sigma).
/// alpha_beta_stable: alpha, beta, sigma; mu defaults to mu_fmls(alpha, sigma).
struct ModelParams {
  ModelKind kind = ModelKind::black_scholes;
  double sigma = 0.2;
  double alpha = 2.0;
  double beta = -1.0;
  std::optional<double> mu;

  void validate() const;
  /// μ actually used for pricing (−sigma²/2 for black_scholes).
  double effective_mu() const;
};

struct PricingSettings {
  double series_tolerance = 1e-8;
  int max_column = 400;
};

double model_price(const ModelParams& params, const OptionContract& contract, const PricingSettings& settings = {});

/// Σ |model − market| over the chain, summed in quote order. A quote whose series
/// does not converge raises ConvergenceError naming its source row.
double aggregated_error(const ModelParams& params, const OptionChain& chain, const PricingSettings& settings = {});

struct CalibrationConfig {
  int starts = 5;
  std::uint64_t seed = 0;  // offset into the Halton start sequence
  NelderMeadOptions optimizer{600, 1e-9, 1e-7, 0.25};
  bool free_mu = false;
  PricingSettings pricing{};
  /// Extra starting points tried before the quasi-random ones.
  std::vector<ModelParams> warm_starts;

  void validate() const;
};

struct CalibrationReport {
  ModelKind model = ModelKind::black_scholes;
  double sigma = 0.0;
  std::optional<double> alpha;
  std::optional<double> beta;
  double mu = 0.0;
  double aggregated_error = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t quote_count = 0;
  int best_start = 0;

  ModelParams params() const;
};

CalibrationReport calibrate(const OptionChain& chain, ModelKind kind, const CalibrationConfig& config = {});

struct NestedCalibration {
  CalibrationReport black_scholes;
  CalibrationReport carr_wu;
  CalibrationReport alpha_beta_stable;
};

/// Fits BS, then Carr-Wu warm-started from the BS fit, then the full model
/// warm-started from the Carr-Wu fit, so each AE is no worse than the previous.
NestedCalibration calibrate_nested(const OptionChain& chain, const CalibrationConfig& config = {});

/// CSV with header as_of,spot,rate,maturity,strike,side,market_price.
/// Throws std::invalid_argument with "row N:" diagnostics.
OptionChain load_chain(std::istream& in);
void write_chain_csv(std::ostream& out, const OptionChain& chain, int precision = 17);

/// JSON object with keys model, sigma, alpha, beta, mu, aggregated_error,
/// iterations, converged, quote_count (alpha and beta are null for BS).
std::string report_to_json(const CalibrationReport& report, int indent = 2);
CalibrationReport report_from_json(const std::string& text);

}  // namespace levy
