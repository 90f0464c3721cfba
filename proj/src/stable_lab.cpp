#include "levy/stable_lab.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "levy/special_math.hpp"

namespace levy {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTailSwitch = 30.0;
constexpr double kQuadratureTolerance = 1e-9;

void check_density_domain(double alpha, double theta) {
  if (!validate_feller_takayasu(alpha, theta)) {
    throw std::domain_error("theta outside the Feller-Takayasu diamond has no probability density");
  }
}

double fourier_density(double alpha, double theta, double y, double* error) {
  const double a = std::cos(0.5 * kPi * theta);
  const double b = std::sin(0.5 * kPi * theta);
  // exp(−a k^α) < e^{−44} beyond k_max.
  const double k_max = std::pow(44.0 / a, 1.0 / alpha);
  const double omega = std::fabs(y) + alpha * std::fabs(b) * std::pow(k_max, alpha - 1.0) + 1.0;
  const double width = std::min(1.0, kPi / omega);  // at most half an oscillation
  const auto integrand = [=](double k) {
    const double ka = std::pow(k, alpha);
    return std::exp(-a * ka) * std::cos(b * ka + k * y);
  };

  using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;
  CompensatedSum sum;
  double err_total = 0.0;
  const auto panels = static_cast<std::size_t>(std::ceil(k_max / width));
  const auto integrate = [&](double lo, double hi) {
    double err = 0.0;
    sum.add(Rule::integrate(integrand, lo, hi, 4, 1e-11, &err));
    err_total += err;
  };
  // k^α is not smooth at 0: grade the first panel geometrically toward the origin.
  double edge = std::min(width, k_max);
  for (int j = 0; j < 16; ++j) {
    integrate(0.5 * edge, edge);
    edge *= 0.5;
  }
  // On [0, e]: exp(−a k^α)·cos(b k^α + k y) = 1 − a k^α + O(k^{2α}, k² y²).
  sum.add(edge - a * std::pow(edge, alpha + 1.0) / (alpha + 1.0));
  for (std::size_t i = 1; i < panels; ++i) {
    const double lo = i * width;
    integrate(lo, std::min(lo + width, k_max));
  }
  if (error) *error = err_total / kPi;
  return sum.value() / kPi;
}

// Σ_k (−1)^{k+1} c_k sin(kπ·phase/2) t^{−αk}(·) / π, stopped at the smallest term.
std::optional<double> tail_series(double alpha, double theta, double y, bool mass) {
  const double t = std::fabs(y);
  if (!(t > 1.0)) return std::nullopt;
  const double phase = y > 0.0 ? alpha - theta : alpha + theta;
  const double log_t = std::log(t);
  CompensatedSum sum;
  double previous = INFINITY;
  double leading = 0.0;
  for (int k = 1; k < 400; ++k) {
    const double log_coeff = mass ? log_gamma(alpha * k) : log_gamma(1.0 + alpha * k);
    const double log_mag = log_coeff - log_gamma(k + 1.0) - alpha * k * log_t - (mass ? 0.0 : log_t);
    const double mag = std::exp(log_mag) / kPi;
    if (k == 1) leading = mag;
    if (mag > previous) return std::nullopt;
    previous = mag;
    const double sine = sin_pi(0.5 * k * phase);
    sum.add((k % 2 == 1 ? 1.0 : -1.0) * sine * mag);
    if (mag <= 1e-15 * std::max(std::fabs(sum.value()), leading)) return std::max(sum.value(), 0.0);
  }
  return std::nullopt;
}

}  // namespace

double stable_density_fourier(double alpha, double theta, double y) {
  check_density_domain(alpha, theta);
  double err = 0.0;
  const double value = fourier_density(alpha, theta, y, &err);
  if (!(err < kQuadratureTolerance)) {
    std::ostringstream msg;
    msg << "stable density quadrature did not converge (error estimate " << err << ")";
    throw std::runtime_error(msg.str());
  }
  return value;
}

std::optional<double> stable_density_tail(double alpha, double theta, double y) {
  check_density_domain(alpha, theta);
  return tail_series(alpha, theta, y, false);
}

std::optional<double> stable_tail_mass(double alpha, double theta, double t, bool upper) {
  check_density_domain(alpha, theta);
  return tail_series(alpha, theta, upper ? t : -t, true);
}

double stable_density(double alpha, double theta, double y) {
  check_density_domain(alpha, theta);
  if (std::fabs(y) >= kTailSwitch) {
    if (auto tail = tail_series(alpha, theta, y, false)) return *tail;
  }
  return stable_density_fourier(alpha, theta, y);
}

double feller_scale(double alpha, double theta) {
  check_density_domain(alpha, theta);
  return std::pow(std::cos(0.5 * kPi * theta), 1.0 / alpha);
}

DensityGrid density_grid(double alpha, double theta, std::span<const double> abscissae) {
  DensityGrid grid;
  grid.alpha = alpha;
  grid.theta = theta;
  grid.abscissae.assign(abscissae.begin(), abscissae.end());
  grid.values.reserve(abscissae.size());
  for (double y : abscissae) grid.values.push_back(stable_density(alpha, theta, y));
  return grid;
}

DensityGrid density_grid(double alpha, double theta, double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) throw std::invalid_argument("density grid needs hi > lo and at least 2 points");
  std::vector<double> xs(points);
  for (int i = 0; i < points; ++i) xs[i] = lo + (hi - lo) * i / (points - 1);
  return density_grid(alpha, theta, xs);
}

double trapezoid_integral(const DensityGrid& grid) {
  CompensatedSum sum;
  for (std::size_t i = 1; i < grid.abscissae.size(); ++i) {
    sum.add(0.5 * (grid.abscissae[i] - grid.abscissae[i - 1]) * (grid.values[i] + grid.values[i - 1]));
  }
  return sum.value();
}

void write_density_csv(std::ostream& out, const DensityGrid& grid, int precision) {
  std::ostringstream buf;
  buf << std::setprecision(precision) << "x,density\n";
  for (std::size_t i = 0; i < grid.abscissae.size(); ++i) buf << grid.abscissae[i] << ',' << grid.values[i] << '\n';
  out << buf.str();
}

DensityGrid read_density_csv(std::istream& in) {
  DensityGrid grid;
  std::string line;
  if (!std::getline(in, line) || line != "x,density") throw std::invalid_argument("density CSV must start with 'x,density'");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("malformed density row: " + line);
    grid.abscissae.push_back(std::stod(line.substr(0, comma)));
    grid.values.push_back(std::stod(line.substr(comma + 1)));
  }
  return grid;
}

StableCdf::StableCdf(double alpha, double theta, double half_width, double step)
    : alpha_(alpha), theta_(theta), half_width_(half_width), step_(step) {
  check_density_domain(alpha, theta);
  if (!(half_width >= kTailSwitch) || !(step > 0.0)) {
    throw std::invalid_argument("StableCdf needs half_width >= 30 and a positive step");
  }
  const auto lower = stable_tail_mass(alpha, theta, half_width, false);
  const auto upper = stable_tail_mass(alpha, theta, half_width, true);
  if (!lower || !upper) throw std::runtime_error("tail mass series did not settle; increase half_width");
  lower_tail_ = *lower;
  upper_tail_ = *upper;

  const auto cells = static_cast<std::size_t>(std::llround(2.0 * half_width / step));
  step_ = 2.0 * half_width / cells;
  pdf_.resize(cells + 1);
  cdf_.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) pdf_[i] = stable_density(alpha, theta, -half_width + i * step_);
  CompensatedSum acc;
  acc.add(lower_tail_);
  cdf_[0] = lower_tail_;
  for (std::size_t i = 0; i < cells; ++i) {
    const double mid = stable_density(alpha, theta, -half_width + (i + 0.5) * step_);
    acc.add(step_ / 6.0 * (pdf_[i] + 4.0 * mid + pdf_[i + 1]));
    cdf_[i + 1] = acc.value();
  }
  total_mass_ = cdf_.back() + upper_tail_;
}

double StableCdf::operator()(double y) const {
  if (y <= -half_width_) return stable_tail_mass(alpha_, theta_, std::max(-y, half_width_), false).value_or(lower_tail_);
  if (y >= half_width_) return 1.0 - stable_tail_mass(alpha_, theta_, std::max(y, half_width_), true).value_or(upper_tail_);
  const double pos = (y + half_width_) / step_;
  const auto i = std::min(static_cast<std::size_t>(pos), cdf_.size() - 2);
  const double s = pos - i;
  // Cubic Hermite on [y_i, y_{i+1}] with F' = pdf.
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * cdf_[i] + h10 * step_ * pdf_[i] + h01 * cdf_[i + 1] + h11 * step_ * pdf_[i + 1];
}

void SamplerConfig::validate() const {
  check_alpha(alpha);
  if (!(beta >= -1.0 && beta <= 1.0)) throw std::domain_error("beta must lie in [-1, 1]");
  if (count < 1) throw std::invalid_argument("sample count must be at least 1");
}

StableSampler::StableSampler(double alpha, double beta) : alpha_(alpha) {
  SamplerConfig{alpha, beta, 1, 0, 0}.validate();
  const double tan_term = -std::tan(0.5 * kPi * (2.0 - alpha));  // tan(πα/2)
  shift_ = std::atan(beta * tan_term) / alpha;
  scale_ = std::pow(1.0 + beta * beta * tan_term * tan_term, 0.5 / alpha);
}

double StableSampler::operator()(CounterRng& rng) const {
  const double v = kPi * (rng.uniform() - 0.5);
  const double w = -std::log(rng.uniform());
  const double av = alpha_ * (v + shift_);
  return scale_ * std::sin(av) / std::pow(std::cos(v), 1.0 / alpha_) *
         std::pow(std::cos(v - av) / w, (1.0 - alpha_) / alpha_);
}

std::vector<double> sample_stable(const SamplerConfig& config) {
  config.validate();
  const StableSampler sampler(config.alpha, config.beta);
  CounterRng rng(config.seed, config.stream);
  std::vector<double> out(config.count);
  for (double& x : out) x = sampler(rng);
  return out;
}

namespace {

// Running mean and sum of squared deviations, merged with Chan's formula.
struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double d = o.mean - mean;
    mean += d * o.count / total;
    m2 += o.m2 + d * d * count * o.count / total;
    count = total;
  }
};

template <typename PathFn>
McEstimate run_blocks(std::size_t paths, std::uint64_t seed, unsigned threads, double alpha, PathFn path_value) {
  if (paths < 2) throw std::invalid_argument("Monte-Carlo needs at least 2 paths");
  const StableSampler sampler(alpha, -1.0);
  const std::size_t blocks = (paths + kMcBlockSize - 1) / kMcBlockSize;
  std::vector<Moments> partial(blocks);
  const auto run_block = [&](std::size_t b) {
    CounterRng rng(seed, b);
    const std::size_t n = std::min(kMcBlockSize, paths - b * kMcBlockSize);
    Moments m;
    for (std::size_t i = 0; i < n; ++i) m.add(path_value(sampler(rng)));
    partial[b] = m;
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks)));
  if (threads == 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t b = t; b < blocks; b += threads) run_block(b);
      });
    }
    for (auto& th : pool) th.join();
  }
  Moments total;
  for (const auto& m : partial) total.merge(m);
  McEstimate est;
  est.paths = paths;
  est.price = total.mean;
  const double variance = total.m2 / (total.count - 1.0);
  est.variance_finite = std::isfinite(variance);
  est.std_error = std::sqrt(variance / total.count);
  return est;
}

}  // namespace

McEstimate mc_price_fmls(double alpha, double sigma, const OptionContract& contract, std::size_t paths,
                         std::uint64_t seed, unsigned threads) {
  contract.validate();
  const double mu = mu_fmls(alpha, sigma);
  const double tau = contract.maturity;
  const double scale = std::pow(-mu * tau, 1.0 / alpha) * feller_scale(alpha, alpha - 2.0);
  const double log_drift = std::log(contract.spot) + (contract.rate + mu) * tau;
  const double df = contract.discount_factor();
  const double strike = contract.strike;
  const bool call = contract.side == OptionSide::call;
  return run_blocks(paths, seed, threads, alpha, [=](double y) {
    const double terminal = std::exp(log_drift + scale * y);
    return df * (call ? std::max(terminal - strike, 0.0) : std::max(strike - terminal, 0.0));
  });
}

McEstimate mc_martingale_fmls(double alpha, double sigma, double maturity, std::size_t paths, std::uint64_t seed) {
  if (!(maturity > 0.0)) throw std::invalid_argument("maturity must be positive");
  const double mu = mu_fmls(alpha, sigma);
  const double scale = std::pow(-mu * maturity, 1.0 / alpha) * feller_scale(alpha, alpha - 2.0);
  const double shift = mu * maturity;
  return run_blocks(paths, seed, 1, alpha, [=](double y) { return std::exp(shift + scale * y); });
}

}  // namespace levy
