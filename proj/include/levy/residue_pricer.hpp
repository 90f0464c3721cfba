#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "levy/core_model.hpp"

namespace levy {

/// Index (n, m) of a residue in the triangle n >= -1, m >= 0, 1 + n - m >= 0.
struct TermIndex {
  int n = -1;
  int m = 0;

  bool in_triangle() const { return n >= -1 && m >= 0 && 1 + n - m >= 0; }
};

/// Outcome of a truncated series evaluation.
struct PriceResult {
  double price = 0.0;
  int columns_used = 0;            // columns n = -1 .. n_last
  double last_column_norm = 0.0;   // max |term| in the final column
  double truncation_estimate = 0.0;  // |contribution| of the final column
  double largest_term = 0.0;
  double rounding_estimate = 0.0;    // bound on cancellation error from term magnitudes
  bool inside_diamond = true;
  bool via_parity = false;
};

/// Thrown when the column sums do not settle below the tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int columns_used, double last_column_norm)
      : std::runtime_error(what), columns_used_(columns_used), last_column_norm_(last_column_norm) {}
  int columns_used() const { return columns_used_; }
  double last_column_norm() const { return last_column_norm_; }

 private:
  int columns_used_;
  double last_column_norm_;
};

/// All residues for -1 <= n <= n_max laid out by column, plus cumulative sums.
struct TermTable {
  StableModelParams params;
  OptionContract contract;
  int n_max = -1;
  /// columns[n + 1][m] for m = 0 .. n + 1
  std::vector<std::vector<double>> columns;
  /// column_sums[n + 1] = price truncated after column n
  std::vector<double> column_sums;

  double at(TermIndex idx) const;
  bool contains(TermIndex idx) const;
};

/// One residue of the closed series for a European call:
///
///   (1/α)·Γ((n+1)/α)·sin(π(α−θ)(n+1)/(2α))/π · (S − (−1)^m K e^{−rτ})
///       · [log]^{1+n−m} · (−μτ)^{m−(1+n)/α} / (m!(1+n−m)!)
///
/// with the (−1, 0) residue taken as its limit (α−θ)/(2α)·(S − K e^{−rτ}).
/// Throws std::invalid_argument for an index outside the triangle or a put contract.
double residue_term(const StableModelParams& params, const OptionContract& contract, TermIndex idx);

/// Sums columns n = -1, 0, 1, ... until two consecutive column contributions are
/// both below `tolerance` in absolute value. Throws ConvergenceError if column
/// `max_column` is reached first, or if the terms grow so large before cancelling
/// that the rounding estimate exceeds max(tolerance, 1e-10·(S + K)). The latter
/// happens far from the money when |[log]| is many times (−μτ)^{1/α}.
PriceResult price_call(const StableModelParams& params, const OptionContract& contract,
                       double tolerance = 1e-8, int max_column = 400);

/// Put price from put-call parity: P = C − (S − K e^{−rτ}).
PriceResult price_put(const StableModelParams& params, const OptionContract& contract,
                      double tolerance = 1e-8, int max_column = 400);

/// Dispatches on contract.side.
PriceResult price_option(const StableModelParams& params, const OptionContract& contract,
                         double tolerance = 1e-8, int max_column = 400);

TermTable term_table(const StableModelParams& params, const OptionContract& contract, int n_max);

/// Table layout: header row of n values, one row per m, final cumulative row "Call".
/// Cells outside the triangle are empty.
void write_term_table_csv(std::ostream& out, const TermTable& table, int precision = 6);

/// Parsed form of write_term_table_csv output.
struct TermTableCsv {
  std::vector<int> n_values;
  /// cells[m][n + 1]; NaN marks an empty cell
  std::vector<std::vector<double>> cells;
  std::vector<double> cumulative;
};
TermTableCsv read_term_table_csv(std::istream& in);

}  // namespace levy
