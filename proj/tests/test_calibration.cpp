#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "levy/calibration.hpp"
#include "levy/reference_models.hpp"
#include "levy/residue_pricer.hpp"
#include "oracles.hpp"
#include "synthetic_chain.hpp"

using namespace levy;

namespace {

ModelParams bs(double vol) {
  ModelParams p;
  p.kind = ModelKind::black_scholes;
  p.sigma = vol;
  return p;
}

}  // namespace

TEST_CASE("load_chain parses and normalizes") {
  std::istringstream in(
      "as_of,spot,rate,maturity,strike,side,market_price\n"
      "2008-11-03,100,0.01,0.5,95,CALL,8.25\n"
      "2008-11-03,100,0.01,0.5,105,put,7.5\n");
  const auto chain = load_chain(in);
  CHECK(chain.as_of == "2008-11-03");
  REQUIRE(chain.quotes.size() == 2);
  CHECK(chain.quotes[0].side == OptionSide::call);
  CHECK(chain.quotes[1].side == OptionSide::put);
  CHECK(chain.quotes[1].source_row == 2);
  CHECK(chain.filtered(OptionSide::call).quotes.size() == 1);
}

TEST_CASE("load_chain row diagnostics") {
  const std::string header = "as_of,spot,rate,maturity,strike,side,market_price\n";
  const auto message = [&](const std::string& rows) {
    std::istringstream in(header + rows);
    try {
      (void)load_chain(in);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("d,100,0.01,0,95,call,1\n").find("row 1") != std::string::npos);
  CHECK(message("d,100,0.01,1,95,call,1\nd,100,0.01,-1,95,call,1\n").find("row 2") != std::string::npos);
  CHECK(message("d,100,0.01,1,95,straddle,1\n").find("unknown side") != std::string::npos);
  CHECK(message("d,100,0.01,1,9x5,call,1\n").find("malformed strike") != std::string::npos);
  CHECK(message("d,100,0.01,1,95,call,-1\n").find("market_price") != std::string::npos);
  CHECK(message("d,100,0.01,1,95,call\n").find("expected 7 fields") != std::string::npos);
  CHECK(message("d,100,0.01,1,95,call,1\nd,101,0.01,1,95,call,1\n").find("spot") != std::string::npos);
  CHECK_FALSE(message("").empty());
  std::istringstream bad_header("date,spot\n");
  CHECK_THROWS_AS(load_chain(bad_header), std::invalid_argument);
}

TEST_CASE("chain CSV round trip") {
  const auto chain = fixture::synthetic_chain(bs(0.25));
  std::ostringstream out;
  write_chain_csv(out, chain);
  std::istringstream in(out.str());
  const auto back = load_chain(in);
  REQUIRE(back.quotes.size() == chain.quotes.size());
  for (std::size_t i = 0; i < chain.quotes.size(); ++i) {
    CHECK(back.quotes[i].market_price == doctest::Approx(chain.quotes[i].market_price).epsilon(1e-12));
    CHECK(back.quotes[i].side == chain.quotes[i].side);
  }
}

TEST_CASE("aggregated error basics") {
  OptionChain chain{"t", {}};
  OptionQuote q{100, 0.0, 1.0, 100, OptionSide::call, 0.0, 1};
  q.market_price = black_scholes_call(q.contract(), 0.2) + 1.5;
  chain.quotes.push_back(q);
  CHECK(aggregated_error(bs(0.2), chain) == doctest::Approx(1.5).epsilon(1e-12));

  const auto synthetic = fixture::synthetic_chain(fixture::stable_generator());
  CHECK(aggregated_error(fixture::stable_generator(), synthetic) < 1e-12);
}

TEST_CASE("aggregated error is invariant under permutation") {
  auto chain = fixture::synthetic_chain(fixture::stable_generator());
  auto params = fixture::stable_generator();
  params.alpha = 1.6;
  const double base = aggregated_error(params, chain);
  std::mt19937_64 gen(3);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(chain.quotes.begin(), chain.quotes.end(), gen);
    CHECK(aggregated_error(params, chain) == doctest::Approx(base).epsilon(1e-13));
  }
}

TEST_CASE("true parameters beat alpha-perturbed ones") {
  oracle::Draws d(5);
  int wins = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    ModelParams p;
    p.kind = ModelKind::alpha_beta_stable;
    p.alpha = d.uniform(1.3, 1.85);
    p.beta = d.uniform(-1.0, 0.0);
    p.sigma = d.uniform(0.15, 0.3);
    const auto chain = fixture::synthetic_chain(p);
    ModelParams up = p;
    up.alpha += 0.1;
    ModelParams down = p;
    down.alpha -= 0.1;
    const double ae = aggregated_error(p, chain);
    if (ae < aggregated_error(up, chain) && ae < aggregated_error(down, chain)) ++wins;
  }
  CHECK(wins >= 19);
}

TEST_CASE("quote errors name the offending row") {
  OptionChain chain{"t", {}};
  chain.quotes.push_back({4300, 0.01, 1.0, 4000, OptionSide::call, 900.0, 7});
  PricingSettings tight;
  tight.max_column = 2;
  ModelParams p = fixture::stable_generator();
  try {
    (void)aggregated_error(p, chain, tight);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::string(e.what()).find("row 7") != std::string::npos);
  }
}

TEST_CASE("Black-Scholes calibration recovers the generating volatility") {
  const auto chain = fixture::synthetic_chain(bs(0.2));
  const auto report = calibrate(chain, ModelKind::black_scholes);
  CHECK(std::fabs(report.sigma - 0.2) < 0.005);
  CHECK(report.converged);
  CHECK_FALSE(report.alpha.has_value());
  CHECK(report.quote_count == 40);
}

TEST_CASE("Carr-Wu report pins beta and mu") {
  ModelParams gen;
  gen.kind = ModelKind::carr_wu;
  gen.alpha = 1.7;
  gen.sigma = 0.18;
  const auto chain = fixture::synthetic_chain(gen);
  CalibrationConfig cfg;
  cfg.starts = 3;
  const auto report = calibrate(chain, ModelKind::carr_wu, cfg);
  REQUIRE(report.beta.has_value());
  CHECK(*report.beta == -1.0);
  CHECK(report.mu == mu_fmls(*report.alpha, report.sigma));
  CHECK(std::fabs(*report.alpha - 1.7) < 0.02);
  CHECK(std::fabs(report.sigma - 0.18) < 0.01);
}

TEST_CASE("calibration is deterministic and JSON round-trips") {
  const auto chain = fixture::synthetic_chain(bs(0.3));
  CalibrationConfig cfg;
  cfg.starts = 2;
  const auto a = calibrate(chain, ModelKind::carr_wu, cfg);
  const auto b = calibrate(chain, ModelKind::carr_wu, cfg);
  CHECK(report_to_json(a) == report_to_json(b));

  const auto back = report_from_json(report_to_json(a));
  CHECK(back.model == a.model);
  CHECK(back.sigma == a.sigma);
  CHECK(back.alpha == a.alpha);
  CHECK(back.beta == a.beta);
  CHECK(back.mu == a.mu);
  CHECK(back.aggregated_error == a.aggregated_error);
  CHECK(back.converged == a.converged);
  for (const char* key : {"\"model\"", "\"sigma\"", "\"alpha\"", "\"beta\"", "\"mu\"", "\"aggregated_error\"",
                          "\"iterations\"", "\"converged\""}) {
    CHECK(report_to_json(a).find(key) != std::string::npos);
  }
  const auto bs_report = calibrate(chain, ModelKind::black_scholes, cfg);
  CHECK(report_to_json(bs_report).find("\"alpha\": null") != std::string::npos);
}

TEST_CASE("non-convergence is flagged with the best parameters kept") {
  const auto chain = fixture::synthetic_chain(bs(0.3));
  CalibrationConfig cfg;
  cfg.starts = 1;
  cfg.optimizer.max_iterations = 2;
  const auto r = calibrate(chain, ModelKind::carr_wu, cfg);
  CHECK_FALSE(r.converged);
  CHECK(std::isfinite(r.aggregated_error));
  CHECK(r.sigma > 0.0);
}

TEST_CASE("model kind names") {
  CHECK(parse_model_kind("BS") == ModelKind::black_scholes);
  CHECK(parse_model_kind("carrwu") == ModelKind::carr_wu);
  CHECK(parse_model_kind("Stable") == ModelKind::alpha_beta_stable);
  CHECK(parse_model_kind(to_string(ModelKind::alpha_beta_stable)) == ModelKind::alpha_beta_stable);
  CHECK_THROWS_AS(parse_model_kind("heston"), std::invalid_argument);
}
