#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "levy/calibration.hpp"
#include "levy/cli.hpp"
#include "levy/reference_models.hpp"
#include "levy/residue_pricer.hpp"
#include "levy/stable_lab.hpp"

namespace py = pybind11;
using namespace levy;

namespace {

OptionContract make_contract(double spot, double strike, double rate, double maturity, const std::string& side) {
  OptionContract c{spot, strike, rate, maturity, side == "put" ? OptionSide::put : OptionSide::call};
  if (side != "call" && side != "put") throw std::invalid_argument("side must be 'call' or 'put'");
  c.validate();
  return c;
}

StableModelParams make_params(double alpha, std::optional<double> theta, std::optional<double> beta, double sigma,
                              std::optional<double> mu) {
  if (theta.has_value() == beta.has_value()) throw std::invalid_argument("pass exactly one of theta or beta");
  return theta ? StableModelParams::from_theta(alpha, *theta, sigma, mu)
               : StableModelParams::from_beta(alpha, *beta, sigma, mu);
}

}  // namespace

PYBIND11_MODULE(_levyprice, m) {
  m.doc() = "European option pricing under alpha-stable log-price dynamics";

  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  py::class_<PriceResult>(m, "PriceResult")
      .def_readonly("price", &PriceResult::price)
      .def_readonly("columns_used", &PriceResult::columns_used)
      .def_readonly("last_column_norm", &PriceResult::last_column_norm)
      .def_readonly("truncation_estimate", &PriceResult::truncation_estimate)
      .def_readonly("inside_diamond", &PriceResult::inside_diamond)
      .def_readonly("via_parity", &PriceResult::via_parity)
      .def("__repr__", [](const PriceResult& r) {
        std::ostringstream s;
        s << "PriceResult(price=" << r.price << ", columns_used=" << r.columns_used << ")";
        return s.str();
      });

  m.def("beta_to_theta", &beta_to_theta, py::arg("alpha"), py::arg("beta"));
  m.def("theta_to_beta", &theta_to_beta, py::arg("alpha"), py::arg("theta"));
  m.def("mu_fmls", &mu_fmls, py::arg("alpha"), py::arg("sigma"));
  m.def("in_diamond", &validate_feller_takayasu, py::arg("alpha"), py::arg("theta"));

  m.def(
      "price",
      [](double spot, double strike, double rate, double maturity, double alpha, std::optional<double> theta,
         std::optional<double> beta, double sigma, std::optional<double> mu, const std::string& side, double tol,
         int max_column) {
        return price_option(make_params(alpha, theta, beta, sigma, mu),
                            make_contract(spot, strike, rate, maturity, side), tol, max_column);
      },
      py::arg("spot"), py::arg("strike"), py::arg("rate"), py::arg("maturity"), py::arg("alpha"),
      py::arg("theta") = py::none(), py::arg("beta") = py::none(), py::arg("sigma"), py::arg("mu") = py::none(),
      py::arg("side") = "call", py::arg("tol") = 1e-8, py::arg("max_column") = 400,
      "Residue-series price of a European option.");

  m.def(
      "term_table",
      [](double spot, double strike, double rate, double maturity, double alpha, double theta, double sigma,
         std::optional<double> mu, int n_max) {
        const auto t = levy::term_table(StableModelParams::from_theta(alpha, theta, sigma, mu),
                                        make_contract(spot, strike, rate, maturity, "call"), n_max);
        return py::make_tuple(t.columns, t.column_sums);
      },
      py::arg("spot"), py::arg("strike"), py::arg("rate"), py::arg("maturity"), py::arg("alpha"), py::arg("theta"),
      py::arg("sigma"), py::arg("mu") = py::none(), py::arg("n_max") = 10,
      "Returns (columns, column_sums); columns[n + 1][m] is the (n, m) residue.");

  m.def(
      "black_scholes",
      [](double spot, double strike, double rate, double maturity, double vol, const std::string& side) {
        return black_scholes_price(make_contract(spot, strike, rate, maturity, side), vol);
      },
      py::arg("spot"), py::arg("strike"), py::arg("rate"), py::arg("maturity"), py::arg("vol"),
      py::arg("side") = "call");

  m.def(
      "carr_wu_call",
      [](double alpha, double sigma, double spot, double strike, double rate, double maturity) {
        return carr_wu_series_call(alpha, sigma, make_contract(spot, strike, rate, maturity, "call"));
      },
      py::arg("alpha"), py::arg("sigma"), py::arg("spot"), py::arg("strike"), py::arg("rate"), py::arg("maturity"));

  m.def("stable_density", &stable_density, py::arg("alpha"), py::arg("theta"), py::arg("y"));

  m.def(
      "sample_stable",
      [](double alpha, double beta, std::size_t count, std::uint64_t seed, std::uint64_t stream) {
        return levy::sample_stable(SamplerConfig{alpha, beta, count, seed, stream});
      },
      py::arg("alpha"), py::arg("beta"), py::arg("count"), py::arg("seed") = 0, py::arg("stream") = 0,
      "Standard S(alpha, beta, 1) draws.");

  m.def(
      "mc_price",
      [](double alpha, double sigma, double spot, double strike, double rate, double maturity,
         const std::string& side, std::size_t paths, std::uint64_t seed) {
        const auto est = mc_price_fmls(alpha, sigma, make_contract(spot, strike, rate, maturity, side), paths, seed);
        return py::make_tuple(est.price, est.std_error);
      },
      py::arg("alpha"), py::arg("sigma"), py::arg("spot"), py::arg("strike"), py::arg("rate"), py::arg("maturity"),
      py::arg("side") = "call", py::arg("paths") = 100000, py::arg("seed") = 1,
      "Monte-Carlo (price, std_error) under maximal negative skew.");

  m.def(
      "calibrate_csv",
      [](const std::string& csv_text, const std::string& model, int starts, std::uint64_t seed) {
        std::istringstream in(csv_text);
        const auto chain = load_chain(in);
        CalibrationConfig config;
        config.starts = starts;
        config.seed = seed;
        return report_to_json(calibrate(chain, parse_model_kind(model), config));
      },
      py::arg("csv_text"), py::arg("model") = "stable", py::arg("starts") = 5, py::arg("seed") = 0,
      "Calibrates to a chain given as CSV text; returns the report as JSON.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = levy::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line front end; returns (exit_code, stdout, stderr).");
}
