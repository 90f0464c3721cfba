#pragma once

#include <functional>
#include <vector>

namespace levy {

struct NelderMeadOptions {
  int max_iterations = 2000;
  double f_tolerance = 1e-10;  // spread of simplex values
  double x_tolerance = 1e-9;   // simplex diameter in the unconstrained space
  double initial_step = 0.25;

  void validate() const;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
/// Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const NelderMeadOptions& options = {});

/// Radical-inverse (Halton) point `index` in base `base`, in (0, 1).
double halton(unsigned index, unsigned base);

}  // namespace levy
