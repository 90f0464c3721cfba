#include "levy/special_math.hpp"

#include <array>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace levy {

namespace {

// Numerical Recipes (3rd ed.) gammln coefficients.
constexpr std::array<double, 14> kLanczos = {
    57.1562356658629235,     -59.5979603554754912,     14.1360979747417471,
    -0.491913816097620199,   .339946499848118887e-4,   .465236289270485756e-4,
    -.983744753048795646e-4, .158088703224912494e-3,   -.210264441724104883e-3,
    .217439618115212643e-3,  -.164318106536763890e-3,  .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5};

bool near_integer(double x) {
  const double r = std::nearbyint(x);
  return std::fabs(x - r) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(x));
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("log_gamma: argument must be positive");
  }
  if (x == 1.0 || x == 2.0) {
    return 0.0;
  }
  // Small arguments lose accuracy in the series; shift up with Γ(x) = Γ(x+1)/x.
  if (x < 0.5) {
    return log_gamma(x + 1.0) - std::log(x);
  }
  double y = x;
  double tmp = x + 5.24218750000000000;
  tmp = (x + 0.5) * std::log(tmp) - tmp;
  double ser = 0.999999999999997092;
  for (double c : kLanczos) {
    ser += c / ++y;
  }
  return tmp + std::log(2.5066282746310005 * ser / x);
}

double sin_pi(double x) {
  if (near_integer(x)) {
    return 0.0;
  }
  // Reduce to [-1, 1) then to the quarter where std::sin is evaluated near zero.
  double r = std::fmod(x, 2.0);
  if (r >= 1.0) r -= 2.0;
  if (r < -1.0) r += 2.0;
  if (r > 0.5) r = 1.0 - r;
  if (r < -0.5) r = -1.0 - r;
  return std::sin(std::numbers::pi * r);
}

SignedLog log_reciprocal_gamma(double z) {
  if (z > 0.0) {
    return {1, -log_gamma(z)};
  }
  if (near_integer(z)) {
    return {};
  }
  // 1/Γ(z) = Γ(1-z) sin(πz) / π
  const double s = sin_pi(z);
  return {s > 0 ? 1 : -1, log_gamma(1.0 - z) + std::log(std::fabs(s)) - std::log(std::numbers::pi)};
}

}  // namespace levy
