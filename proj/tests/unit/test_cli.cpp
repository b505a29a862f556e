#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "common.hpp"
#include "contourlab/cli.hpp"
#include "contourlab/io.hpp"

using namespace contourlab;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "contourlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("contourlab_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_spec(const std::string& name, const std::string& body) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << body;
  return p.string();
}

const char* kElliptic = R"({"H": {"terms": [[0, 2, 1, 0], [3, 0, -1, 0], [1, 0, 3, 0]]},
  "loops": {"oval": {"recipe": "real_oval", "h": 0, "hint": [-2, 0]}}})";

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  FAIL("missing column " << name);
  return 0;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("critical values of the elliptic Hamiltonian") {
    const Result r = run_cli({"critical", "--spec", write_spec("ell.json", kElliptic)});
    REQUIRE(r.code == 0);
    const auto j = io::json::parse(r.out);
    REQUIRE(j["values"].size() == 2);
    std::vector<double> v = {j["values"][0].get<double>(), j["values"][1].get<double>()};
    std::sort(v.begin(), v.end());
    CHECK(v[0] == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(v[1] == doctest::Approx(2.0).epsilon(1e-10));
  }

  TEST_CASE("critical values of a quartic") {
    // y^2 - x^4 + x^2: values 0 at the origin and 1/4 at x = +-1/sqrt 2.
    const Result r =
        run_cli({"critical", "--spec", write_spec("quartic.json", R"({"H": {"terms": [[0,2,1],[4,0,-1],[2,0,1]]}})")});
    REQUIRE(r.code == 0);
    const auto j = io::json::parse(r.out);
    REQUIRE(j["values"].size() == 2);
    std::vector<double> v = {j["values"][0].get<double>(), j["values"][1].get<double>()};
    std::sort(v.begin(), v.end());
    CHECK(std::abs(v[0]) < 1e-10);
    CHECK(v[1] == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(j["points"].size() == 3);
  }

  TEST_CASE("usage and spec errors exit with 2") {
    CHECK(run_cli({"critical", "--spec", write_spec("const.json", R"({"H": 3})")}).code == 2);
    CHECK(run_cli({"critical", "--spec", write_spec("empty.json", "")}).code == 2);
    CHECK(run_cli({"critical", "--spec", write_spec("noh.json", "{}")}).code == 2);
    CHECK(run_cli({"critical", "--spec", (scratch() / "missing.json").string()}).code == 2);
    CHECK(run_cli({"verify", "--spec", write_spec("ell.json", kElliptic), "--suite", "nope"}).code == 2);
    CHECK(run_cli({"critical", "--spec", write_spec("ell.json", kElliptic), "--tol-fiber", "-1"}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
  }

  TEST_CASE("verify group passes") {
    const Result r = run_cli({"verify", "--spec", write_spec("ell.json", kElliptic), "--suite", "group"});
    CHECK(r.code == 0);
    const auto j = io::json::parse(r.out);
    CHECK(j["pass"].get<bool>());
    CHECK(j["seed"].get<int>() == 42);
    CHECK(j["checks"].size() > 0);
  }

  TEST_CASE("single-point sweep matches the library") {
    const std::string spec = write_spec("ell.json", kElliptic);
    const Result r = run_cli({"sweep", "--spec", spec, "--loop", "oval", "--h-from", "0", "--h-to", "0", "--h-n", "1"});
    REQUIRE(r.code == 0);
    const auto rows = read_csv(r.out);
    REQUIRE(rows.size() == 2);
    const Fibration fib(testing::elliptic());
    const FiberLoop l = trace_real_oval(fib, 0.0, -2.0, 0.0, 400);
    const LoopFunctionals f = loop_functionals(fib, l, {testing::c(1.0), testing::c(1.0), Poly::x()});
    const auto& h = rows[0];
    CHECK(std::stod(rows[1][column(h, "T_re")]) == doctest::Approx(f.T.real()).epsilon(1e-14));
    CHECK(std::stod(rows[1][column(h, "psi_re")]) == doctest::Approx(f.psi.real()).epsilon(1e-14));
    CHECK(rows[1][column(h, "status")] == "ok");
  }

  TEST_CASE("resonant grid points are flagged, not fatal") {
    // A = 2 pi i / T(0) makes I = 2 pi i at h = 0.
    const double a = 2 * std::numbers::pi / 1.99233289958349;
    std::ostringstream spec;
    spec.precision(17);
    spec << R"({"H": {"terms": [[0, 2, 1, 0], [3, 0, -1, 0], [1, 0, 3, 0]]}, "A": {"terms": [[0, 0, 0, )" << a
         << R"(]]}, "loops": {"oval": {"recipe": "real_oval", "h": -0.2, "hint": [-2, 0]}},
         "sweep": {"loop": "oval", "h": [-0.2, 0, 0.2]}})";
    const Result r = run_cli({"sweep", "--spec", write_spec("res.json", spec.str())});
    REQUIRE(r.code == 0);
    const auto rows = read_csv(r.out);
    REQUIRE(rows.size() == 4);
    const std::size_t st = column(rows[0], "status");
    CHECK(rows[1][st] == "ok");
    CHECK(rows[2][st] == "resonant");
    CHECK(rows[3][st] == "ok");
  }

  TEST_CASE("outputs are reproducible") {
    const std::string spec = write_spec("ell.json", kElliptic);
    const fs::path a = scratch() / "a", b = scratch() / "b";
    for (const fs::path& d : {a, b})
      REQUIRE(run_cli({"sweep", "--spec", spec, "--loop", "oval", "--h-from", "-1", "--h-to", "1", "--h-n", "5",
                       "--out", d.string()})
                  .code == 0);
    auto slurp = [](const fs::path& p) {
      std::ifstream f(p);
      return std::string(std::istreambuf_iterator<char>(f), {});
    };
    const std::string ca = slurp(a / "sweep.csv");
    CHECK(!ca.empty());
    CHECK(ca == slurp(b / "sweep.csv"));
  }
}
