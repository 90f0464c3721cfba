#include "levy/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace levy {

void NelderMeadOptions::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  if (!(f_tolerance >= 0.0) || !(x_tolerance >= 0.0)) throw std::invalid_argument("tolerances must be non-negative");
  if (!(initial_step > 0.0)) throw std::invalid_argument("initial_step must be positive");
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const NelderMeadOptions& options) {
  options.validate();
  const std::size_t dim = start.size();
  if (dim == 0) throw std::invalid_argument("nelder_mead needs at least one parameter");

  const auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> simplex(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += options.initial_step;
  std::vector<double> values(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(dim + 1);
  NelderMeadResult result;
  const auto point = [&](const std::vector<double>& centroid, const std::vector<double>& worst, double t) {
    std::vector<double> x(dim);
    for (std::size_t j = 0; j < dim; ++j) x[j] = centroid[j] + t * (worst[j] - centroid[j]);
    return x;
  };

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[dim - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) diameter = std::max(diameter, std::fabs(simplex[i][j] - simplex[best][j]));
    }
    const double spread = values[worst] - values[best];
    if (std::isfinite(values[worst]) && spread <= options.f_tolerance * (1.0 + std::fabs(values[best])) &&
        diameter <= options.x_tolerance) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j] / dim;
    }

    const auto reflected = point(centroid, simplex[worst], -1.0);
    const double f_r = eval(reflected);
    if (f_r < values[best]) {
      const auto expanded = point(centroid, simplex[worst], -2.0);
      const double f_e = eval(expanded);
      if (f_e < f_r) {
        simplex[worst] = expanded;
        values[worst] = f_e;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_r;
      }
      continue;
    }
    if (f_r < values[second]) {
      simplex[worst] = reflected;
      values[worst] = f_r;
      continue;
    }
    const bool outside = f_r < values[worst];
    const auto contracted = point(centroid, simplex[worst], outside ? -0.5 : 0.5);
    const double f_c = eval(contracted);
    if (f_c < (outside ? f_r : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_c;
      continue;
    }
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < dim; ++j) simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      values[i] = eval(simplex[i]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  result.x = simplex[best];
  result.value = values[best];
  result.iterations = it;
  return result;
}

double halton(unsigned index, unsigned base) {
  if (base < 2) throw std::invalid_argument("halton base must be at least 2");
  double f = 1.0;
  double r = 0.0;
  for (unsigned i = index + 1; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

}  // namespace levy
