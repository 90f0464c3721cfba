#include "levy/residue_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "levy/special_math.hpp"

namespace levy {

namespace {

constexpr double kEpsilon = std::numeric_limits<double>::epsilon();

// Contract- and parameter-dependent quantities shared by every term.
struct SeriesContext {
  double alpha;
  double skew_weight;  // (α − θ) / (2α)
  double spot;
  double discounted_strike;
  double log_moneyness;
  double log_time_scale;  // log(−μτ)
  double forward;         // S − K e^{−rτ}
  double log_abs_forward;
  double log_abs_sum;     // log(S + K e^{−rτ})
  double log_abs_log_moneyness;
  double log_alpha;
};

SeriesContext make_context(const StableModelParams& params, const OptionContract& contract) {
  contract.validate();
  if (contract.side != OptionSide::call) {
    throw std::invalid_argument("residue series prices calls; use price_put for puts");
  }
  SeriesContext s{};
  s.alpha = params.alpha();
  s.skew_weight = (params.alpha() - params.theta()) / (2.0 * params.alpha());
  s.spot = contract.spot;
  s.discounted_strike = contract.discounted_strike();
  s.log_moneyness = log_moneyness(contract).value;
  s.log_time_scale = std::log(-params.mu() * contract.maturity);
  s.forward = s.spot - s.discounted_strike;
  s.log_abs_forward = std::log(std::fabs(s.forward));
  s.log_abs_sum = std::log(s.spot + s.discounted_strike);
  s.log_abs_log_moneyness = std::log(std::fabs(s.log_moneyness));
  s.log_alpha = std::log(s.alpha);
  return s;
}

double log_factorial(int k) {
  static const std::vector<double> table = [] {
    std::vector<double> t(1024);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = log_gamma(i + 1.0);
    return t;
  }();
  return k < static_cast<int>(table.size()) ? table[k] : log_gamma(k + 1.0);
}

struct ColumnResult {
  double sum = 0.0;
  double max_abs = 0.0;
  double rounding = 0.0;
};

// Column n of the triangle, m = 0 .. n + 1.
ColumnResult column(const SeriesContext& s, int n, std::vector<double>* terms) {
  ColumnResult out;
  const auto record = [&](double t) {
    out.max_abs = std::max(out.max_abs, std::fabs(t));
    // exp(log_mag) carries a relative error of about ε·|log_mag|.
    if (t != 0.0) out.rounding += std::fabs(t) * (4.0 + std::fabs(std::log(std::fabs(t)))) * kEpsilon;
    if (terms) terms->push_back(t);
  };
  if (n == -1) {
    out.sum = s.skew_weight * s.forward;
    record(out.sum);
    return out;
  }

  const double sine = sin_pi(s.skew_weight * (n + 1));
  const double base = sine == 0.0 ? 0.0
                                  : log_gamma((n + 1) / s.alpha) - s.log_alpha - std::log(std::numbers::pi) +
                                        std::log(std::fabs(sine)) - (n + 1) / s.alpha * s.log_time_scale;
  CompensatedSum acc;
  for (int m = 0; m <= n + 1; ++m) {
    const int power = 1 + n - m;
    const bool even_m = (m % 2) == 0;
    const double lead = even_m ? s.forward : s.spot + s.discounted_strike;
    double t = 0.0;
    if (sine != 0.0 && lead != 0.0 && !(power > 0 && s.log_moneyness == 0.0)) {
      double log_mag = base + (even_m ? s.log_abs_forward : s.log_abs_sum) + m * s.log_time_scale -
                       log_factorial(m) - log_factorial(power);
      if (power > 0) log_mag += power * s.log_abs_log_moneyness;
      int sign = (sine > 0.0) == (lead > 0.0) ? 1 : -1;
      if (power % 2 == 1 && s.log_moneyness < 0.0) sign = -sign;
      t = sign * std::exp(log_mag);
    }
    acc.add(t);
    record(t);
  }
  out.sum = acc.value();
  return out;
}

}  // namespace

double TermTable::at(TermIndex idx) const {
  if (!contains(idx)) throw std::out_of_range("term index outside table");
  return columns[idx.n + 1][idx.m];
}

bool TermTable::contains(TermIndex idx) const { return idx.in_triangle() && idx.n <= n_max; }

double residue_term(const StableModelParams& params, const OptionContract& contract, TermIndex idx) {
  if (!idx.in_triangle()) {
    throw std::invalid_argument("term index (" + std::to_string(idx.n) + ", " + std::to_string(idx.m) +
                                ") lies outside the triangle");
  }
  std::vector<double> terms;
  (void)column(make_context(params, contract), idx.n, &terms);
  return terms[idx.m];
}

PriceResult price_call(const StableModelParams& params, const OptionContract& contract, double tolerance,
                       int max_column) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_column < 1) throw std::invalid_argument("max_column must be at least 1");
  const SeriesContext s = make_context(params, contract);

  CompensatedSum price;
  PriceResult result;
  result.inside_diamond = params.inside_diamond();

  const double rounding_limit = std::max(tolerance, 1e-10 * (contract.spot + contract.strike));
  const auto check_rounding = [&] {
    if (result.rounding_estimate > rounding_limit) {
      std::ostringstream msg;
      msg << "residue series lost precision to cancellation (largest term " << result.largest_term
          << ", rounding estimate " << result.rounding_estimate << ")";
      throw ConvergenceError(msg.str(), result.columns_used, result.last_column_norm);
    }
  };

  double previous = std::numeric_limits<double>::infinity();
  for (int n = -1; n <= max_column; ++n) {
    const ColumnResult col = column(s, n, nullptr);
    price.add(col.sum);
    result.columns_used = n + 2;
    result.last_column_norm = col.max_abs;
    result.truncation_estimate = std::fabs(col.sum);
    result.largest_term = std::max(result.largest_term, col.max_abs);
    result.rounding_estimate += col.rounding;
    if (!std::isfinite(col.sum)) {
      throw ConvergenceError("residue series produced a non-finite column at n = " + std::to_string(n),
                             result.columns_used, col.max_abs);
    }
    if (n >= 0 && std::fabs(col.sum) < tolerance && std::fabs(previous) < tolerance) {
      result.price = price.value();
      check_rounding();
      return result;
    }
    previous = col.sum;
  }
  result.price = price.value();
  if (result.last_column_norm > tolerance) {
    std::ostringstream msg;
    msg << "residue series did not converge within " << max_column << " columns (last column norm "
        << result.last_column_norm << ")";
    throw ConvergenceError(msg.str(), result.columns_used, result.last_column_norm);
  }
  return result;
}

PriceResult price_put(const StableModelParams& params, const OptionContract& contract, double tolerance,
                      int max_column) {
  if (contract.side != OptionSide::put) throw std::invalid_argument("price_put expects a put contract");
  PriceResult r = price_call(params, contract.as_side(OptionSide::call), tolerance, max_column);
  r.price = r.price - contract.forward_value();
  r.via_parity = true;
  return r;
}

PriceResult price_option(const StableModelParams& params, const OptionContract& contract, double tolerance,
                         int max_column) {
  return contract.side == OptionSide::call ? price_call(params, contract, tolerance, max_column)
                                           : price_put(params, contract, tolerance, max_column);
}

TermTable term_table(const StableModelParams& params, const OptionContract& contract, int n_max) {
  if (n_max < -1) throw std::invalid_argument("n_max must be >= -1");
  const SeriesContext s = make_context(params, contract);
  TermTable table{params, contract, n_max, {}, {}};
  CompensatedSum running;
  for (int n = -1; n <= n_max; ++n) {
    std::vector<double> terms;
    const ColumnResult col = column(s, n, &terms);
    running.add(col.sum);
    table.columns.push_back(std::move(terms));
    table.column_sums.push_back(running.value());
  }
  return table;
}

void write_term_table_csv(std::ostream& out, const TermTable& table, int precision) {
  std::ostringstream buf;
  buf << std::setprecision(precision);
  for (int n = -1; n <= table.n_max; ++n) buf << ',' << n;
  buf << '\n';
  const int m_rows = table.n_max + 2;
  for (int m = 0; m < m_rows; ++m) {
    buf << m;
    for (int n = -1; n <= table.n_max; ++n) {
      buf << ',';
      if (TermIndex{n, m}.in_triangle()) buf << table.columns[n + 1][m];
    }
    buf << '\n';
  }
  buf << "Call";
  for (double v : table.column_sums) buf << ',' << v;
  buf << '\n';
  out << buf.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

TermTableCsv read_term_table_csv(std::istream& in) {
  TermTableCsv out;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("term table CSV is empty");
  auto header = split_csv_line(line);
  if (header.empty() || !header[0].empty()) throw std::invalid_argument("term table header must start with an empty cell");
  for (std::size_t i = 1; i < header.size(); ++i) out.n_values.push_back(std::stoi(header[i]));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    std::vector<double> values;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      values.push_back(cells[i].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[i]));
    }
    values.resize(out.n_values.size(), std::numeric_limits<double>::quiet_NaN());
    if (cells[0] == "Call") {
      out.cumulative = std::move(values);
    } else {
      out.cells.push_back(std::move(values));
    }
  }
  return out;
}

}  // namespace levy
