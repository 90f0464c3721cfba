#include "levy/calibration.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "levy/reference_models.hpp"
#include "levy/residue_pricer.hpp"
#include "levy/special_math.hpp"

namespace levy {

namespace {

constexpr double kAlphaLo = 1.05;
constexpr double kAlphaHi = 2.0;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string row_label(int row) { return row > 0 ? "row " + std::to_string(row) : "synthetic quote"; }

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::black_scholes: return "BS";
    case ModelKind::carr_wu: return "CarrWu";
    case ModelKind::alpha_beta_stable: return "AlphaBetaStable";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  const std::string n = lower(name);
  if (n == "bs" || n == "black_scholes") return ModelKind::black_scholes;
  if (n == "carrwu" || n == "carr_wu" || n == "fmls") return ModelKind::carr_wu;
  if (n == "stable" || n == "alphabetastable" || n == "alpha_beta_stable") return ModelKind::alpha_beta_stable;
  throw std::invalid_argument("unknown model '" + std::string(name) + "' (expected bs, carrwu or stable)");
}

void OptionQuote::validate() const {
  const std::string where = row_label(source_row) + ": ";
  if (!(spot > 0.0) || !std::isfinite(spot)) throw std::invalid_argument(where + "spot must be positive");
  if (!(strike > 0.0) || !std::isfinite(strike)) throw std::invalid_argument(where + "strike must be positive");
  if (!(maturity > 0.0) || !std::isfinite(maturity)) throw std::invalid_argument(where + "maturity must be positive");
  if (!std::isfinite(rate)) throw std::invalid_argument(where + "rate must be finite");
  if (!(market_price >= 0.0) || !std::isfinite(market_price)) {
    throw std::invalid_argument(where + "market_price must be non-negative");
  }
}

void OptionChain::validate() const {
  if (quotes.empty()) throw std::invalid_argument("option chain '" + as_of + "' has no quotes");
  for (const auto& q : quotes) {
    q.validate();
    if (q.spot != quotes.front().spot) {
      throw std::invalid_argument(row_label(q.source_row) + ": spot differs from the rest of chain '" + as_of + "'");
    }
  }
}

OptionChain OptionChain::filtered(OptionSide side) const {
  OptionChain out{as_of, {}};
  std::copy_if(quotes.begin(), quotes.end(), std::back_inserter(out.quotes),
               [side](const OptionQuote& q) { return q.side == side; });
  return out;
}

void ModelParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::domain_error("sigma must be positive");
  if (kind == ModelKind::black_scholes) return;
  check_alpha(alpha);
  if (kind == ModelKind::carr_wu && beta != -1.0) throw std::domain_error("Carr-Wu model fixes beta = -1");
  if (!(beta >= -1.0 && beta <= 1.0)) throw std::domain_error("beta must lie in [-1, 1]");
  if (mu && !(*mu < 0.0)) throw std::domain_error("mu must be negative");
}

double ModelParams::effective_mu() const {
  if (kind == ModelKind::black_scholes) return -0.5 * sigma * sigma;
  if (kind == ModelKind::carr_wu || !mu) return mu_fmls(alpha, sigma);
  return *mu;
}

double model_price(const ModelParams& params, const OptionContract& contract, const PricingSettings& settings) {
  params.validate();
  if (params.kind == ModelKind::black_scholes) return black_scholes_price(contract, params.sigma);
  const auto stable = StableModelParams::from_beta(params.alpha, params.beta, params.sigma, params.effective_mu());
  return price_option(stable, contract, settings.series_tolerance, settings.max_column).price;
}

double aggregated_error(const ModelParams& params, const OptionChain& chain, const PricingSettings& settings) {
  CompensatedSum total;
  for (const auto& q : chain.quotes) {
    try {
      total.add(std::fabs(model_price(params, q.contract(), settings) - q.market_price));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(row_label(q.source_row) + " (strike " + std::to_string(q.strike) + "): " + e.what(),
                             e.columns_used(), e.last_column_norm());
    }
  }
  return total.value();
}

void CalibrationConfig::validate() const {
  if (starts < 0) throw std::invalid_argument("starts must be non-negative");
  if (starts == 0 && warm_starts.empty()) throw std::invalid_argument("calibration needs at least one start");
  optimizer.validate();
  if (!(pricing.series_tolerance > 0.0) || pricing.max_column < 1) {
    throw std::invalid_argument("invalid series settings");
  }
}

ModelParams CalibrationReport::params() const {
  ModelParams p;
  p.kind = model;
  p.sigma = sigma;
  if (alpha) p.alpha = *alpha;
  if (beta) p.beta = *beta;
  if (model == ModelKind::alpha_beta_stable) p.mu = mu;
  return p;
}

namespace {

// Unconstrained coordinates: σ = e^s, α = lo + (hi−lo)(1 + sin a)/2, β = sin b, μ = −e^m.
struct Transform {
  ModelKind kind;
  bool free_mu;

  std::size_t dim() const {
    switch (kind) {
      case ModelKind::black_scholes: return 1;
      case ModelKind::carr_wu: return 2;
      case ModelKind::alpha_beta_stable: return free_mu ? 4 : 3;
    }
    return 0;
  }

  ModelParams decode(const std::vector<double>& u) const {
    ModelParams p;
    p.kind = kind;
    p.sigma = std::exp(u[0]);
    if (kind != ModelKind::black_scholes) p.alpha = kAlphaLo + (kAlphaHi - kAlphaLo) * 0.5 * (1.0 + std::sin(u[1]));
    if (kind == ModelKind::alpha_beta_stable) {
      p.beta = std::sin(u[2]);
      if (free_mu) p.mu = -std::exp(u[3]);
    }
    return p;
  }

  std::vector<double> encode(const ModelParams& p) const {
    std::vector<double> u(dim());
    u[0] = std::log(p.sigma);
    if (kind != ModelKind::black_scholes) {
      const double s = std::clamp(2.0 * (p.alpha - kAlphaLo) / (kAlphaHi - kAlphaLo) - 1.0, -1.0, 1.0);
      u[1] = std::asin(s);
    }
    if (kind == ModelKind::alpha_beta_stable) {
      u[2] = std::asin(std::clamp(p.beta, -1.0, 1.0));
      if (free_mu) u[3] = std::log(-p.effective_mu());
    }
    return u;
  }
};

// Converts a nested model's fit into an equivalent point of a larger model.
ModelParams lift(const ModelParams& p, ModelKind target) {
  ModelParams out = p;
  out.kind = target;
  if (p.kind == ModelKind::black_scholes && target != ModelKind::black_scholes) {
    // α = 2 with μ = −σ² reproduces Black-Scholes at vol √2·σ.
    out.alpha = 2.0;
    out.beta = -1.0;
    out.sigma = stable_scale_for_volatility(p.sigma);
    out.mu.reset();
  } else if (p.kind == ModelKind::carr_wu && target == ModelKind::alpha_beta_stable) {
    out.beta = -1.0;
    out.mu.reset();
  }
  return out;
}

ModelParams quasi_random_start(ModelKind kind, unsigned index) {
  ModelParams p;
  p.kind = kind;
  p.sigma = 0.05 * std::exp(std::log(12.0) * halton(index, 2));
  p.alpha = 1.1 + 0.9 * halton(index, 3);
  p.beta = kind == ModelKind::alpha_beta_stable ? -1.0 + 2.0 * halton(index, 5) : -1.0;
  return p;
}

}  // namespace

CalibrationReport calibrate(const OptionChain& chain, ModelKind kind, const CalibrationConfig& config) {
  chain.validate();
  config.validate();
  const Transform transform{kind, config.free_mu && kind == ModelKind::alpha_beta_stable};

  const auto objective = [&](const std::vector<double>& u) {
    try {
      return aggregated_error(transform.decode(u), chain, config.pricing);
    } catch (const ConvergenceError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const std::domain_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<ModelParams> starts;
  for (const auto& w : config.warm_starts) starts.push_back(lift(w, kind));
  for (int k = 0; k < config.starts; ++k) {
    starts.push_back(quasi_random_start(kind, static_cast<unsigned>(config.seed) + static_cast<unsigned>(k)));
  }

  NelderMeadResult best;
  best.value = std::numeric_limits<double>::infinity();
  int best_index = -1;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    auto u = transform.encode(starts[i]);
    // Keep warm starts exact: the simplex never returns a point worse than its start.
    const double start_value = objective(u);
    auto result = nelder_mead(objective, u, config.optimizer);
    if (start_value < result.value) {
      result.value = start_value;
      result.x = u;
    }
    if (result.value < best.value || best_index < 0) {
      best = result;
      best_index = static_cast<int>(i);
    }
  }

  const ModelParams fitted = transform.decode(best.x);
  CalibrationReport report;
  report.model = kind;
  report.sigma = fitted.sigma;
  if (kind != ModelKind::black_scholes) {
    report.alpha = fitted.alpha;
    report.beta = kind == ModelKind::carr_wu ? -1.0 : fitted.beta;
  }
  report.mu = fitted.effective_mu();
  report.aggregated_error = best.value;
  report.iterations = best.iterations;
  report.converged = best.converged && std::isfinite(best.value);
  report.quote_count = chain.quotes.size();
  report.best_start = best_index;
  return report;
}

NestedCalibration calibrate_nested(const OptionChain& chain, const CalibrationConfig& config) {
  NestedCalibration out;
  out.black_scholes = calibrate(chain, ModelKind::black_scholes, config);
  CalibrationConfig cw = config;
  cw.warm_starts.insert(cw.warm_starts.begin(), out.black_scholes.params());
  out.carr_wu = calibrate(chain, ModelKind::carr_wu, cw);
  CalibrationConfig full = config;
  full.warm_starts.insert(full.warm_starts.begin(), out.carr_wu.params());
  out.alpha_beta_stable = calibrate(chain, ModelKind::alpha_beta_stable, full);
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, const char* field, int row) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (cell.empty() || used != cell.size() || !std::isfinite(v)) {
    throw std::invalid_argument("row " + std::to_string(row) + ": malformed " + field + " '" + cell + "'");
  }
  return v;
}

}  // namespace

OptionChain load_chain(std::istream& in) {
  static const std::vector<std::string> kHeader{"as_of", "spot", "rate", "maturity", "strike", "side", "market_price"};
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty chain file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_csv(trim(line));
  for (auto& h : header) h = lower(h);
  if (header != kHeader) throw std::invalid_argument("chain header must be as_of,spot,rate,maturity,strike,side,market_price");

  OptionChain chain;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(trim(line));
    if (cells.size() != kHeader.size()) {
      throw std::invalid_argument("row " + std::to_string(row) + ": expected 7 fields, got " + std::to_string(cells.size()));
    }
    if (chain.quotes.empty()) {
      chain.as_of = cells[0];
    } else if (cells[0] != chain.as_of) {
      throw std::invalid_argument("row " + std::to_string(row) + ": as_of '" + cells[0] + "' differs from '" +
                                  chain.as_of + "'; use one file per trading day");
    }
    OptionQuote q;
    q.source_row = row;
    q.spot = parse_number(cells[1], "spot", row);
    q.rate = parse_number(cells[2], "rate", row);
    q.maturity = parse_number(cells[3], "maturity", row);
    q.strike = parse_number(cells[4], "strike", row);
    const std::string side = lower(cells[5]);
    if (side == "call") {
      q.side = OptionSide::call;
    } else if (side == "put") {
      q.side = OptionSide::put;
    } else {
      throw std::invalid_argument("row " + std::to_string(row) + ": unknown side '" + cells[5] + "'");
    }
    q.market_price = parse_number(cells[6], "market_price", row);
    q.validate();
    chain.quotes.push_back(q);
  }
  chain.validate();
  return chain;
}

void write_chain_csv(std::ostream& out, const OptionChain& chain, int precision) {
  std::ostringstream buf;
  buf << std::setprecision(precision) << "as_of,spot,rate,maturity,strike,side,market_price\n";
  for (const auto& q : chain.quotes) {
    buf << chain.as_of << ',' << q.spot << ',' << q.rate << ',' << q.maturity << ',' << q.strike << ','
        << to_string(q.side) << ',' << q.market_price << '\n';
  }
  out << buf.str();
}

std::string report_to_json(const CalibrationReport& report, int indent) {
  nlohmann::ordered_json j;
  j["model"] = std::string(to_string(report.model));
  j["sigma"] = report.sigma;
  j["alpha"] = report.alpha ? nlohmann::ordered_json(*report.alpha) : nlohmann::ordered_json(nullptr);
  j["beta"] = report.beta ? nlohmann::ordered_json(*report.beta) : nlohmann::ordered_json(nullptr);
  j["mu"] = report.mu;
  j["aggregated_error"] = report.aggregated_error;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["quote_count"] = report.quote_count;
  return j.dump(indent);
}

CalibrationReport report_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  CalibrationReport r;
  r.model = parse_model_kind(j.at("model").get<std::string>());
  r.sigma = j.at("sigma").get<double>();
  if (!j.at("alpha").is_null()) r.alpha = j.at("alpha").get<double>();
  if (!j.at("beta").is_null()) r.beta = j.at("beta").get<double>();
  r.mu = j.at("mu").get<double>();
  r.aggregated_error = j.at("aggregated_error").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  if (j.contains("quote_count")) r.quote_count = j.at("quote_count").get<std::size_t>();
  return r;
}

}  // namespace levy
