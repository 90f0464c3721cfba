#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "levy/cli.hpp"
#include "levy/residue_pricer.hpp"
#include "levy/stable_lab.hpp"
#include "synthetic_chain.hpp"

using namespace levy;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string value_of(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return {};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("levyprice_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::vector<std::string> kTableFlags{"--spot", "4300", "--strike", "4000", "--rate", "0.01", "--maturity",
                                           "1", "--theta", "-0.4", "--sigma", "0.25"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

}  // namespace

TEST_CASE("price prints the Table 1 value under its reproducing convention") {
  const auto r = run(with({"price", "--alpha", "1.5", "--mu", "-0.08838834764831845"}, kTableFlags));
  CHECK(r.code == 0);
  CHECK(value_of(r.out, "price") == "989.541");
  CHECK(value_of(r.out, "inside_diamond") == "true");
  CHECK_FALSE(value_of(r.out, "columns_used").empty());
}

TEST_CASE("price at alpha 2 agrees with the built-in Black-Scholes check") {
  const auto r = run({"price", "--spot", "100", "--strike", "100", "--rate", "0", "--maturity", "1", "--alpha", "2",
                      "--theta", "0", "--sigma", "0.2", "--check", "--precision", "12"});
  CHECK(r.code == 0);
  CHECK(value_of(r.out, "price") == value_of(r.out, "reference"));
  CHECK(std::stod(value_of(r.out, "relative_difference")) < 1e-10);
}

TEST_CASE("usage and domain errors exit 2, non-convergence exits 3") {
  auto r = run({"price", "--spot", "100", "--strike", "100", "--rate", "0", "--maturity", "1", "--alpha", "1.5",
                "--theta", "0"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--sigma") != std::string::npos);

  r = run(with({"price", "--alpha", "2.5"}, kTableFlags));
  CHECK(r.code == 2);
  r = run(with({"price", "--alpha", "1.5", "--beta", "-1"}, kTableFlags));
  CHECK(r.code == 2);  // --theta and --beta together
  r = run(with({"price", "--alpha", "1.4", "--max-column", "2"}, kTableFlags));
  CHECK(r.code == 3);
  r = run({});
  CHECK(r.code == 2);
  r = run({"--help"});
  CHECK(r.code == 0);
}

TEST_CASE("outside-diamond prices carry a warning") {
  const auto r = run({"price", "--spot", "4300", "--strike", "4000", "--rate", "0.01", "--maturity", "1", "--alpha",
                      "1.7", "--theta", "0.8", "--sigma", "0.25"});
  CHECK(r.code == 0);
  CHECK(value_of(r.out, "inside_diamond") == "false");
  CHECK_FALSE(value_of(r.out, "warning").empty());
}

TEST_CASE("table output: shape, single cell and file sink") {
  auto r = run(with({"table", "--alpha", "1.4", "--nmax", "10"}, kTableFlags));
  CHECK(r.code == 0);
  std::istringstream in(r.out);
  std::string header;
  std::getline(in, header);
  CHECK(std::count(header.begin(), header.end(), ',') == 12);
  CHECK(r.out.find("\nCall,") != std::string::npos);

  const auto path = temp_path("table.csv");
  const auto to_file = run(with({"table", "--alpha", "1.4", "--nmax", "10", "--out", path.string()}, kTableFlags));
  CHECK(to_file.code == 0);
  CHECK(slurp(path) == r.out);
  std::filesystem::remove(path);

  r = run(with({"table", "--alpha", "1.4", "--nmax", "-1"}, kTableFlags));
  CHECK(r.out.rfind(",-1\n0,", 0) == 0);
}

TEST_CASE("table CSV re-parses to the in-memory table") {
  const auto r = run(with({"table", "--alpha", "1.4", "--nmax", "6", "--precision", "17"}, kTableFlags));
  std::istringstream in(r.out);
  const auto parsed = read_term_table_csv(in);
  const auto table = term_table(StableModelParams::from_theta(1.4, -0.4, 0.25), {4300, 4000, 0.01, 1.0}, 6);
  for (int n = -1; n <= 6; ++n) {
    for (int m = 0; m <= n + 1; ++m) {
      CHECK(std::fabs(parsed.cells[m][n + 1] - table.at({n, m})) <= 1e-12 * std::max(1.0, std::fabs(table.at({n, m}))));
    }
  }
}

TEST_CASE("theta sweep flags out-of-diamond points") {
  const auto r = run({"curve", "--sweep", "theta", "--from", "-1", "--to", "1", "--step", "0.125", "--spot", "4300",
                      "--strike", "4000", "--rate", "0.01", "--maturity", "1", "--alpha", "1.75", "--sigma", "0.25"});
  CHECK(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,price,outside_diamond,theta,status");
  int rows = 0;
  int outside = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string x, price, flag;
    std::getline(cells, x, ',');
    std::getline(cells, price, ',');
    std::getline(cells, flag, ',');
    if (flag == "1") ++outside;
    CHECK(line.find(",ok") != std::string::npos);
  }
  CHECK(rows == 17);
  CHECK(outside == 12);
}

TEST_CASE("spot sweep through the forward point and alpha overlays") {
  // At S = K e^{−rτ} every θ variant has a zero forward term.
  auto r = run({"curve", "--sweep", "spot", "--from", "3960.19867", "--to", "3960.19867", "--step", "1", "--strike",
                "4000", "--rate", "0.01", "--maturity", "1", "--alpha", "1.6", "--sigma", "0.25", "--overlay-theta",
                "-0.4,0,0.4"});
  CHECK(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);

  r = run({"curve", "--sweep", "alpha", "--from", "1.2", "--to", "2", "--step", "0.1", "--spot", "4000", "--strike",
           "4000", "--rate", "0", "--maturity", "1", "--sigma", "0.25", "--overlay-theta", "-0.4,0,0.4"});
  CHECK(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 3 * 9);
}

TEST_CASE("density command emits a Gaussian grid at alpha 2") {
  const auto r = run({"density", "--alpha", "2", "--theta", "0", "--from", "-4", "--to", "4", "--points", "9",
                      "--precision", "17"});
  CHECK(r.code == 0);
  std::istringstream in(r.out);
  const auto g = read_density_csv(in);
  REQUIRE(g.values.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) {
    const double y = g.abscissae[i];
    CHECK(std::fabs(g.values[i] - std::exp(-0.25 * y * y) / std::sqrt(4.0 * M_PI)) < 1e-8);
  }
  CHECK(run({"density", "--alpha", "1.5", "--theta", "0.9"}).code == 2);
}

TEST_CASE("sample output is deterministic given the seed") {
  const auto a = run({"sample", "--alpha", "1.5", "--beta", "-1", "--count", "200", "--seed", "42"});
  const auto b = run({"sample", "--alpha", "1.5", "--beta", "-1", "--count", "200", "--seed", "42"});
  const auto c = run({"sample", "--alpha", "1.5", "--beta", "-1", "--count", "200", "--seed", "43"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
}

TEST_CASE("mc --check reports standardized differences") {
  const auto r = run({"mc", "--spot", "100", "--strike", "100", "--rate", "0", "--maturity", "1", "--alpha", "2",
                      "--sigma", "0.2", "--paths", "200000", "--seed", "3", "--check"});
  CHECK(r.code == 0);
  CHECK(std::stod(value_of(r.out, "std_error")) > 0.0);
  CHECK(std::stod(value_of(r.out, "series_z")) < 4.0);
  CHECK(std::stod(value_of(r.out, "expectation_z")) < 4.0);
}

TEST_CASE("calibrate command") {
  ModelParams gen;
  gen.kind = ModelKind::carr_wu;
  gen.alpha = 1.7;
  gen.sigma = 0.2;
  const auto chain = fixture::synthetic_chain(gen);
  const auto path = temp_path("chain.csv");
  {
    std::ofstream out(path);
    write_chain_csv(out, chain);
  }
  auto r = run({"calibrate", "--chain", path.string(), "--model", "carrwu", "--starts", "2"});
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["reports"][0]["beta"].get<double>() == -1.0);
  CHECK(std::fabs(doc["reports"][0]["alpha"].get<double>() - 1.7) < 0.02);
  CHECK(doc["reports"][0]["quote_count"].get<int>() == 40);

  r = run({"calibrate", "--chain", path.string(), "--model", "bs", "--calls-only"});
  doc = nlohmann::json::parse(r.out);
  const auto calls = std::count_if(chain.quotes.begin(), chain.quotes.end(),
                                   [](const OptionQuote& q) { return q.side == OptionSide::call; });
  CHECK(doc["reports"][0]["quote_count"].get<long>() == calls);
  CHECK(doc["reports"][0]["alpha"].is_null());

  r = run({"calibrate", "--chain", path.string(), "--chain", path.string(), "--model", "bs"});
  doc = nlohmann::json::parse(r.out);
  CHECK(doc["reports"].size() == 2);
  CHECK(doc["summary"]["BS"]["sigma"]["std"].get<double>() == 0.0);

  r = run({"calibrate", "--chain", path.string(), "--model", "bs", "--max-iterations", "1"});
  CHECK(r.code == 0);
  doc = nlohmann::json::parse(r.out);
  CHECK(doc["reports"][0]["converged"].get<bool>() == false);
  CHECK(doc["reports"][0].contains("warning"));

  const auto bad = temp_path("bad.csv");
  {
    std::ofstream out(bad);
    out << "as_of,spot,rate,maturity,strike,side,market_price\nd,100,0,1,100,call,abc\n";
  }
  r = run({"calibrate", "--chain", bad.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("row 1") != std::string::npos);
  CHECK(run({"calibrate", "--chain", "/nonexistent/chain.csv"}).code == 2);
  std::filesystem::remove(path);
  std::filesystem::remove(bad);
}
