#pragma once

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "levy/core_model.hpp"
#include "levy/random.hpp"

namespace levy {

// Density g_{α,θ} is the law with characteristic function exp(−|k|^α e^{i·sgn(k)·θπ/2}).
// θ = α − 2 has a heavy left tail and an exponentially light right tail.

/// g_{α,θ}(y). Fourier inversion near the origin, asymptotic tail series far out.
/// Throws std::domain_error outside 1 < α <= 2 or outside the diamond, and
/// std::runtime_error if the quadrature error estimate exceeds 1e-9.
double stable_density(double alpha, double theta, double y);

/// g_{α,θ}(y) by Fourier inversion only.
double stable_density_fourier(double alpha, double theta, double y);

/// Large-|y| expansion Σ_k (−1)^{k+1} Γ(1+αk)/(πk!) sin(kπ(α∓θ)/2) |y|^{−αk−1}.
/// Returns nullopt when the series has not settled to 1e-15 relative before its
/// terms start to grow.
std::optional<double> stable_density_tail(double alpha, double theta, double y);

/// P(Y > t) (upper) or P(Y < −t) (lower) from the asymptotic tail series.
std::optional<double> stable_tail_mass(double alpha, double theta, double t, bool upper);

/// cos(θπ/2)^{1/α}: a standard S(α, β, 1) draw times this factor has density g_{α,θ}.
double feller_scale(double alpha, double theta);

struct DensityGrid {
  std::vector<double> abscissae;
  std::vector<double> values;
  double alpha = 2.0;
  double theta = 0.0;
};

DensityGrid density_grid(double alpha, double theta, std::span<const double> abscissae);
DensityGrid density_grid(double alpha, double theta, double lo, double hi, int points);

/// Trapezoidal rule over the (possibly non-uniform) abscissae.
double trapezoid_integral(const DensityGrid& grid);

/// Two columns: x,density.
void write_density_csv(std::ostream& out, const DensityGrid& grid, int precision = 6);
DensityGrid read_density_csv(std::istream& in);

/// CDF of g_{α,θ} tabulated by integrating stable_density on [−half_width, half_width]
/// (Simpson per cell, cubic Hermite between nodes) with asymptotic tail masses outside.
class StableCdf {
 public:
  StableCdf(double alpha, double theta, double half_width = 40.0, double step = 0.01);
  double operator()(double y) const;
  /// Integrated mass over the table plus both tails; should be 1.
  double total_mass() const { return total_mass_; }

 private:
  double alpha_;
  double theta_;
  double half_width_;
  double step_;
  double lower_tail_;
  double upper_tail_;
  double total_mass_;
  std::vector<double> cdf_;
  std::vector<double> pdf_;
};

/// Kolmogorov-Smirnov distance between a sample and a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, const Cdf& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

struct SamplerConfig {
  double alpha = 2.0;
  double beta = 0.0;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  void validate() const;
};

/// Chambers-Mallows-Stuck draws of the standard stable law
/// exp(−|k|^α (1 − iβ sgn(k) tan(πα/2))).
class StableSampler {
 public:
  StableSampler(double alpha, double beta);
  double operator()(CounterRng& rng) const;

 private:
  double alpha_;
  double shift_;  // B = atan(β tan(πα/2))/α
  double scale_;  // (1 + β² tan²(πα/2))^{1/(2α)}
};

std::vector<double> sample_stable(const SamplerConfig& config);

struct McEstimate {
  double price = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  bool variance_finite = true;
};

/// Paths are processed in fixed blocks, one RNG stream per block, and the block
/// sums are reduced in block order, so the estimate does not depend on `threads`.
inline constexpr std::size_t kMcBlockSize = 1 << 14;

/// e^{−rτ}·E[(S e^{(r+μ)τ + Z} − K)^+] with Z = (−μτ)^{1/α}·Y, Y ~ g_{α,α−2}
/// and μ = mu_fmls(α, σ). Puts are priced by the same estimator.
McEstimate mc_price_fmls(double alpha, double sigma, const OptionContract& contract, std::size_t paths,
                         std::uint64_t seed, unsigned threads = 1);

/// Estimate of e^{μτ}·E[e^{Z}] under the same law; equals 1 exactly in theory.
McEstimate mc_martingale_fmls(double alpha, double sigma, double maturity, std::size_t paths, std::uint64_t seed);

}  // namespace levy
