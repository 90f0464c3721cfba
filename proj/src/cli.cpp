#include "levy/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "levy/calibration.hpp"
#include "levy/reference_models.hpp"
#include "levy/residue_pricer.hpp"
#include "levy/stable_lab.hpp"

namespace levy {

namespace {

class UsageError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string num(double v, int precision) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

struct PricingFlags {
  double spot = 0.0;
  double strike = 0.0;
  double rate = 0.0;
  double maturity = 0.0;
  double alpha = 2.0;
  double theta = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
  double tol = 1e-8;
  int max_column = 400;
  std::string side = "call";
  CLI::Option* theta_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* mu_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* spot_opt = nullptr;

  OptionContract contract(double spot_value) const {
    OptionContract c{spot_value, strike, rate, maturity, side == "put" ? OptionSide::put : OptionSide::call};
    c.validate();
    return c;
  }
  OptionContract contract() const { return contract(spot); }

  bool has_asymmetry() const { return theta_opt->count() > 0 || beta_opt->count() > 0; }

  double theta_for(double a) const {
    if (theta_opt->count() > 0) return theta;
    if (beta_opt->count() > 0) return beta_to_theta(a, beta);
    throw UsageError("one of --theta or --beta is required");
  }

  StableModelParams params(double a, double th) const {
    if (mu_opt->count() > 0) return StableModelParams::from_theta(a, th, sigma, mu);
    return StableModelParams::from_theta(a, th, sigma);
  }
};

void add_contract_flags(CLI::App* app, PricingFlags& f, bool spot_required = true) {
  f.spot_opt = app->add_option("--spot", f.spot, "Spot price S");
  if (spot_required) f.spot_opt->required();
  app->add_option("--strike", f.strike, "Strike K")->required();
  app->add_option("--rate", f.rate, "Continuously compounded rate r")->required();
  app->add_option("--maturity", f.maturity, "Time to maturity tau")->required();
  app->add_option("--side", f.side, "call or put")->check(CLI::IsMember({"call", "put"}, CLI::ignore_case));
}

void add_pricing_flags(CLI::App* app, PricingFlags& f, bool spot_required = true, bool alpha_required = true) {
  add_contract_flags(app, f, spot_required);
  f.alpha_opt = app->add_option("--alpha", f.alpha, "Stability index in (1, 2]");
  if (alpha_required) f.alpha_opt->required();
  f.theta_opt = app->add_option("--theta", f.theta, "Feller asymmetry theta");
  f.beta_opt = app->add_option("--beta", f.beta, "Skewness beta in [-1, 1]");
  f.theta_opt->excludes(f.beta_opt);
  app->add_option("--sigma", f.sigma, "Scale sigma > 0")->required();
  f.mu_opt = app->add_option("--mu", f.mu, "Exponent mu < 0 (default: maximal-skew value)");
  app->add_option("--tol", f.tol, "Series column tolerance")->capture_default_str();
  app->add_option("--max-column", f.max_column, "Last series column tried")->capture_default_str();
}

// Writes to --out when given, stdout otherwise.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot open '" + path + "' for writing");
  file << text;
}

std::vector<double> grid(double from, double to, double step) {
  if (!(step > 0.0) || !(to >= from)) throw UsageError("range needs --to >= --from and --step > 0");
  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = from + static_cast<double>(i) * step;
  return xs;
}

int cmd_price(const PricingFlags& f, bool check, int precision, std::ostream& out) {
  const auto contract = f.contract();
  const double th = f.theta_for(f.alpha);
  const auto params = f.params(f.alpha, th);
  const auto result = price_option(params, contract, f.tol, f.max_column);
  out << "price=" << num(result.price, precision) << '\n'
      << "columns_used=" << result.columns_used << '\n'
      << "truncation_estimate=" << num(result.truncation_estimate, precision) << '\n'
      << "inside_diamond=" << (result.inside_diamond ? "true" : "false") << '\n';
  if (!result.inside_diamond) {
    out << "warning=theta outside the Feller-Takayasu diamond; price is an analytic continuation\n";
  }
  if (check) {
    if (f.alpha == 2.0 && th == 0.0) {
      const double vol = std::sqrt(-2.0 * params.mu());
      const double bs = black_scholes_price(contract, vol);
      out << "check=black_scholes vol=" << num(vol, precision) << '\n'
          << "reference=" << num(bs, precision) << '\n'
          << "relative_difference=" << num(std::fabs(result.price - bs) / std::fabs(bs), precision) << '\n';
    } else if (th == f.alpha - 2.0 && f.mu_opt->count() == 0) {
      double ref = carr_wu_series_call(f.alpha, f.sigma, contract.as_side(OptionSide::call));
      if (contract.side == OptionSide::put) ref -= contract.forward_value();
      out << "check=carr_wu_expectation\n"
          << "reference=" << num(ref, precision) << '\n'
          << "relative_difference=" << num(std::fabs(result.price - ref) / std::fabs(ref), precision) << '\n';
    } else {
      throw UsageError("--check needs alpha 2 with theta 0, or theta = alpha - 2 with default mu");
    }
  }
  return kExitOk;
}

int cmd_table(const PricingFlags& f, int nmax, const std::string& path, int precision, std::ostream& out) {
  if (nmax < -1) throw UsageError("--nmax must be at least -1");
  const auto contract = f.contract().as_side(OptionSide::call);
  const auto table = term_table(f.params(f.alpha, f.theta_for(f.alpha)), contract, nmax);
  std::ostringstream buf;
  write_term_table_csv(buf, table, precision);
  emit(buf.str(), path, out);
  return kExitOk;
}

struct CurveFlags {
  std::string sweep;
  double from = 0.0;
  double to = 0.0;
  double step = 0.1;
  std::vector<double> overlay;
  std::string out;
};

int cmd_curve(const PricingFlags& f, const CurveFlags& c, int precision, std::ostream& out) {
  const auto xs = grid(c.from, c.to, c.step);
  if (c.sweep != "theta" && f.alpha_opt->count() == 0 && c.sweep != "alpha") throw UsageError("--alpha is required");
  if (c.sweep != "spot" && f.spot_opt->count() == 0) throw UsageError("--spot is required");
  if (c.sweep == "alpha" && f.alpha_opt->count() > 0) throw UsageError("--alpha conflicts with --sweep alpha");
  if (c.sweep == "theta" && (f.has_asymmetry() || !c.overlay.empty())) {
    throw UsageError("--theta/--beta/--overlay-theta conflict with --sweep theta");
  }
  if (c.sweep != "theta" && c.overlay.empty() && !f.has_asymmetry()) {
    throw UsageError("one of --theta, --beta or --overlay-theta is required");
  }

  std::ostringstream buf;
  buf << "x,price,outside_diamond,theta,status\n";
  const auto row = [&](double x, double a, double th, double s) {
    std::string status = "ok";
    double price = NAN;
    bool outside = false;
    try {
      const auto params = f.params(a, th);
      outside = !params.inside_diamond();
      price = price_option(params, f.contract(s), f.tol, f.max_column).price;
    } catch (const std::exception& e) {
      status = std::string("error: ") + e.what();
      for (char& ch : status) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
    }
    buf << num(x, precision) << ',' << num(price, precision) << ',' << (outside ? 1 : 0) << ',' << num(th, precision)
        << ',' << status << '\n';
  };

  std::vector<std::optional<double>> thetas;
  if (c.overlay.empty()) {
    thetas.emplace_back(std::nullopt);
  } else {
    for (double t : c.overlay) thetas.emplace_back(t);
  }
  for (const auto& fixed : thetas) {
    for (double x : xs) {
      if (c.sweep == "theta") {
        row(x, f.alpha, x, f.spot);
      } else if (c.sweep == "alpha") {
        row(x, x, fixed ? *fixed : f.theta_for(x), f.spot);
      } else {
        row(x, f.alpha, fixed ? *fixed : f.theta_for(f.alpha), x);
      }
    }
  }
  emit(buf.str(), c.out, out);
  return kExitOk;
}

struct LabFlags {
  double alpha = 2.0;
  double theta = 0.0;
  double beta = 0.0;
  CLI::Option* theta_opt = nullptr;
  CLI::Option* beta_opt = nullptr;

  double resolved_theta() const {
    if (beta_opt->count() > 0) return beta_to_theta(alpha, beta);
    return theta;
  }
};

void add_lab_flags(CLI::App* app, LabFlags& f) {
  app->add_option("--alpha", f.alpha, "Stability index in (1, 2]")->required();
  f.theta_opt = app->add_option("--theta", f.theta, "Feller asymmetry theta (default 0)");
  f.beta_opt = app->add_option("--beta", f.beta, "Skewness beta in [-1, 1]");
  f.theta_opt->excludes(f.beta_opt);
}

int cmd_density(const LabFlags& f, double from, double to, int points, const std::string& path, int precision,
                std::ostream& out) {
  const auto g = density_grid(f.alpha, f.resolved_theta(), from, to, points);
  std::ostringstream buf;
  write_density_csv(buf, g, precision);
  emit(buf.str(), path, out);
  return kExitOk;
}

int cmd_sample(const LabFlags& f, std::size_t count, std::uint64_t seed, std::uint64_t stream,
               const std::string& path, int precision, std::ostream& out) {
  const double th = f.resolved_theta();
  if (!validate_feller_takayasu(f.alpha, th)) throw std::domain_error("theta outside the Feller-Takayasu diamond");
  SamplerConfig cfg{f.alpha, theta_to_beta(f.alpha, th), count, seed, stream};
  const auto draws = sample_stable(cfg);
  const double scale = feller_scale(f.alpha, th);
  std::ostringstream buf;
  buf << std::setprecision(precision) << "x\n";
  for (double d : draws) buf << d * scale << '\n';
  emit(buf.str(), path, out);
  return kExitOk;
}

struct McFlags {
  std::size_t paths = 1000000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool check = false;
};

int cmd_mc(const PricingFlags& f, const McFlags& m, int precision, std::ostream& out) {
  const auto contract = f.contract();
  const auto est = mc_price_fmls(f.alpha, f.sigma, contract, m.paths, m.seed, m.threads);
  out << "price=" << num(est.price, precision) << '\n'
      << "std_error=" << num(est.std_error, precision) << '\n'
      << "paths=" << est.paths << '\n';
  if (!est.variance_finite) out << "warning=sample variance is not finite; std_error is unreliable\n";
  if (m.check) {
    const auto series = price_option(StableModelParams::from_theta(f.alpha, f.alpha - 2.0, f.sigma), contract, f.tol,
                                     f.max_column);
    double reference = carr_wu_series_call(f.alpha, f.sigma, contract.as_side(OptionSide::call));
    if (contract.side == OptionSide::put) reference -= contract.forward_value();
    out << "series=" << num(series.price, precision) << '\n'
        << "series_z=" << num(std::fabs(est.price - series.price) / est.std_error, precision) << '\n'
        << "expectation_series=" << num(reference, precision) << '\n'
        << "expectation_z=" << num(std::fabs(est.price - reference) / est.std_error, precision) << '\n';
  }
  return kExitOk;
}

struct CalibrateFlags {
  std::vector<std::string> chains;
  std::string model = "stable";
  bool calls_only = false;
  bool puts_only = false;
  int starts = 5;
  std::uint64_t seed = 0;
  bool free_mu = false;
  int max_iterations = 600;
};

int cmd_calibrate(const CalibrateFlags& c, std::ostream& out) {
  const bool all = c.model == "all";
  const ModelKind kind = all ? ModelKind::alpha_beta_stable : parse_model_kind(c.model);
  CalibrationConfig config;
  config.starts = c.starts;
  config.seed = c.seed;
  config.free_mu = c.free_mu;
  config.optimizer.max_iterations = c.max_iterations;

  nlohmann::ordered_json doc;
  doc["reports"] = nlohmann::ordered_json::array();
  std::map<std::string, std::map<std::string, std::vector<double>>> per_model;

  for (const auto& path : c.chains) {
    std::ifstream file(path);
    if (!file) throw UsageError("cannot open chain file '" + path + "'");
    OptionChain chain;
    try {
      chain = load_chain(file);
    } catch (const std::invalid_argument& e) {
      throw UsageError(path + ": " + e.what());
    }
    if (c.calls_only) chain = chain.filtered(OptionSide::call);
    if (c.puts_only) chain = chain.filtered(OptionSide::put);
    if (chain.quotes.empty()) throw UsageError(path + ": no quotes left after side filter");

    std::vector<CalibrationReport> reports;
    if (all) {
      const auto nested = calibrate_nested(chain, config);
      reports = {nested.black_scholes, nested.carr_wu, nested.alpha_beta_stable};
    } else {
      reports = {calibrate(chain, kind, config)};
    }
    for (const auto& r : reports) {
      auto j = nlohmann::ordered_json::parse(report_to_json(r));
      j["chain"] = path;
      j["as_of"] = chain.as_of;
      if (!r.converged) j["warning"] = "optimizer did not converge; best parameters found are reported";
      doc["reports"].push_back(j);
      auto& acc = per_model[std::string(to_string(r.model))];
      acc["sigma"].push_back(r.sigma);
      if (r.alpha) acc["alpha"].push_back(*r.alpha);
      if (r.beta) acc["beta"].push_back(*r.beta);
      acc["mu"].push_back(r.mu);
      acc["aggregated_error"].push_back(r.aggregated_error);
    }
  }

  if (c.chains.size() > 1) {
    nlohmann::ordered_json summary;
    for (const auto& [model, fields] : per_model) {
      for (const auto& [name, values] : fields) {
        double mean = 0.0;
        for (double v : values) mean += v / values.size();
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var = values.size() > 1 ? var / (values.size() - 1) : 0.0;
        summary[model][name] = {{"mean", mean}, {"std", std::sqrt(var)}, {"count", values.size()}};
      }
    }
    doc["summary"] = summary;
  }
  out << doc.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Option pricing under alpha-stable log-price dynamics", "levyprice"};
  app.require_subcommand(1);
  app.fallthrough();
  int precision = 6;
  app.add_option("--precision", precision, "Significant digits of numeric output")
      ->check(CLI::Range(1, 17))
      ->capture_default_str();

  PricingFlags price_flags;
  bool check = false;
  auto* price = app.add_subcommand("price", "Price one option with the residue series");
  add_pricing_flags(price, price_flags);
  price->add_flag("--check", check, "Cross-check against a closed-form reference");

  PricingFlags table_flags;
  int nmax = 10;
  std::string table_out;
  auto* table = app.add_subcommand("table", "Residue term table as CSV");
  add_pricing_flags(table, table_flags);
  table->add_option("--nmax", nmax, "Last column n")->capture_default_str();
  table->add_option("--out", table_out, "Output file (default stdout)");

  PricingFlags curve_flags;
  CurveFlags curve_opts;
  auto* curve = app.add_subcommand("curve", "Price along a sweep of theta, alpha or spot");
  add_pricing_flags(curve, curve_flags, false, false);
  curve->add_option("--sweep", curve_opts.sweep, "theta, alpha or spot")
      ->required()
      ->check(CLI::IsMember({"theta", "alpha", "spot"}));
  curve->add_option("--from", curve_opts.from, "Sweep start")->required();
  curve->add_option("--to", curve_opts.to, "Sweep end")->required();
  curve->add_option("--step", curve_opts.step, "Sweep step")->required();
  curve->add_option("--overlay-theta", curve_opts.overlay, "Fixed theta values, one curve each")->delimiter(',');
  curve->add_option("--out", curve_opts.out, "Output file (default stdout)");

  LabFlags density_flags;
  double d_from = -10.0;
  double d_to = 10.0;
  int d_points = 201;
  std::string density_out;
  auto* density = app.add_subcommand("density", "Stable density on a uniform grid as CSV");
  add_lab_flags(density, density_flags);
  density->add_option("--from", d_from, "Grid start")->capture_default_str();
  density->add_option("--to", d_to, "Grid end")->capture_default_str();
  density->add_option("--points", d_points, "Number of grid points")->capture_default_str();
  density->add_option("--out", density_out, "Output file (default stdout)");

  LabFlags sample_flags;
  std::size_t count = 1000;
  std::uint64_t sample_seed = 1;
  std::uint64_t stream = 0;
  std::string sample_out;
  auto* sample = app.add_subcommand("sample", "Draws with density g_{alpha,theta}, one per line");
  add_lab_flags(sample, sample_flags);
  sample->add_option("--count", count, "Number of draws")->capture_default_str();
  sample->add_option("--seed", sample_seed, "RNG seed")->capture_default_str();
  sample->add_option("--stream", stream, "RNG stream index")->capture_default_str();
  sample->add_option("--out", sample_out, "Output file (default stdout)");

  PricingFlags mc_flags;
  McFlags mc_opts;
  auto* mc = app.add_subcommand("mc", "Monte-Carlo price under maximal negative skew");
  add_contract_flags(mc, mc_flags);
  mc->add_option("--alpha", mc_flags.alpha, "Stability index in (1, 2]")->required();
  mc->add_option("--sigma", mc_flags.sigma, "Scale sigma > 0")->required();
  mc->add_option("--paths", mc_opts.paths, "Number of paths")->capture_default_str();
  mc->add_option("--seed", mc_opts.seed, "RNG seed")->capture_default_str();
  mc->add_option("--threads", mc_opts.threads, "Worker threads")->capture_default_str();
  mc->add_option("--tol", mc_flags.tol, "Series column tolerance for --check")->capture_default_str();
  mc->add_flag("--check", mc_opts.check, "Compare with the residue series and the expectation series");

  CalibrateFlags cal;
  auto* calib = app.add_subcommand("calibrate", "Fit a model to option chain CSV files");
  calib->add_option("--chain", cal.chains, "Chain CSV file (repeatable)")->required();
  calib->add_option("--model", cal.model, "bs, carrwu, stable or all")
      ->check(CLI::IsMember({"bs", "carrwu", "stable", "all"}, CLI::ignore_case))
      ->capture_default_str();
  auto* calls = calib->add_flag("--calls-only", cal.calls_only, "Use call quotes only");
  auto* puts = calib->add_flag("--puts-only", cal.puts_only, "Use put quotes only");
  calls->excludes(puts);
  calib->add_option("--starts", cal.starts, "Quasi-random starts")->capture_default_str();
  calib->add_option("--seed", cal.seed, "Offset into the start sequence")->capture_default_str();
  calib->add_option("--max-iterations", cal.max_iterations, "Simplex iterations per start")->capture_default_str();
  calib->add_flag("--free-mu", cal.free_mu, "Fit mu freely in the full model");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    for (auto* f : {&price_flags, &table_flags, &curve_flags, &mc_flags}) {
      for (char& ch : f->side) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    std::transform(cal.model.begin(), cal.model.end(), cal.model.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (*price) return cmd_price(price_flags, check, precision, out);
    if (*table) return cmd_table(table_flags, nmax, table_out, precision, out);
    if (*curve) return cmd_curve(curve_flags, curve_opts, precision, out);
    if (*density) return cmd_density(density_flags, d_from, d_to, d_points, density_out, precision, out);
    if (*sample) return cmd_sample(sample_flags, count, sample_seed, stream, sample_out, precision, out);
    if (*mc) return cmd_mc(mc_flags, mc_opts, precision, out);
    if (*calib) return cmd_calibrate(cal, out);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoConvergence;
  }
  return kExitUsage;
}

}  // namespace levy
