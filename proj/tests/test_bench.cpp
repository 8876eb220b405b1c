#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "graddiv/bench.hpp"

using namespace graddiv;

TEST_CASE("scheme name parsing") {
  CHECK(parse_scheme("theta") == Scheme::Theta);
  CHECK(parse_scheme("cn") == Scheme::Theta);
  CHECK(parse_scheme("jacobi") == Scheme::BlockJacobi);
  CHECK(parse_scheme("gs") == Scheme::BlockGaussSeidel);
  CHECK(parse_scheme("gauss_seidel") == Scheme::BlockGaussSeidel);
  CHECK(parse_scheme("at") == Scheme::AltTriangular);
  CHECK(parse_scheme("alt_triangular") == Scheme::AltTriangular);
  CHECK(parse_scheme("three_level") == Scheme::ThreeLevelAT);
  CHECK_THROWS_AS(parse_scheme("bogus"), std::invalid_argument);
}

TEST_CASE("configuration keys") {
  BenchConfig cfg;
  cfg.set("scheme", "jacobi");
  cfg.set("sigma", "1");
  cfg.set("tau", "0.05");
  cfg.set("T", "2.5");
  cfg.set("nx", "32");
  cfg.set("k", "0.5");
  cfg.set("monitor", "1");
  cfg.set("out", "report.csv");
  cfg.set("sweep-halvings", "3");
  cfg.set("solver_tol", "1e-9");
  CHECK(cfg.scheme == Scheme::BlockJacobi);
  CHECK(cfg.sigma == 1.0);
  CHECK(cfg.tau == 0.05);
  CHECK(cfg.horizon == 2.5);
  CHECK(cfg.nx == 32);
  CHECK(cfg.k == 0.5);
  CHECK(cfg.monitor == true);
  CHECK(cfg.out == "report.csv");
  CHECK(cfg.sweep_halvings == 3);
  CHECK(cfg.solver_tol == 1e-9);

  CHECK_THROWS_AS(cfg.set("nope", "1"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.set("tau", "fast"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.set("monitor", "maybe"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.set("nx", "12abc"), std::invalid_argument);
}

TEST_CASE("config file parsing and overrides") {
  const std::string path = "test_bench_config.txt";
  {
    std::ofstream os(path);
    os << "# comment line\n"
          "scheme = gauss_seidel\n"
          "tau=0.125\n"
          "\n"
          "T = 0.5\n"
          "nx = 12\n";
  }
  BenchConfig cfg = BenchConfig::from_file(path);
  CHECK(cfg.scheme == Scheme::BlockGaussSeidel);
  CHECK(cfg.tau == 0.125);
  CHECK(cfg.horizon == 0.5);
  CHECK(cfg.nx == 12);
  cfg.set("tau", "0.25");  // flag overrides file
  CHECK(cfg.tau == 0.25);

  CHECK_THROWS_AS(BenchConfig::from_file("does_not_exist.txt"), std::invalid_argument);
  {
    std::ofstream os(path);
    os << "scheme jacobi\n";
  }
  CHECK_THROWS_AS(BenchConfig::from_file(path), std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("configuration validation") {
  BenchConfig cfg;
  cfg.nx = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.nx = 8;
  cfg.tau = 0.3;
  cfg.horizon = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.tau = 0.25;
  CHECK_NOTHROW(cfg.validate());
  cfg.k = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("report CSV round trip is exact") {
  BenchConfig cfg;
  cfg.scheme = Scheme::AltTriangular;
  cfg.sigma = 0.5;
  cfg.tau = 0.2;
  cfg.horizon = 0.4;
  cfg.nx = 8;
  cfg.k = 1.0;
  cfg.sweep_halvings = 1;
  RunReport report = run_sweep(cfg, 1);
  REQUIRE(report.rows.size() == 2);
  CHECK(!report.rows[0].has_order);
  CHECK(report.rows[1].has_order);

  std::ostringstream os;
  write_report_csv(report, os);
  std::istringstream is(os.str());
  const RunReport parsed = read_report_csv(is);
  CHECK(parsed == report);

  // also through a file
  const std::string path = "test_bench_report.csv";
  write_report_csv(report, path);
  CHECK(read_report_csv(path) == report);
  std::remove(path.c_str());
}

TEST_CASE("markdown summary") {
  BenchConfig cfg;
  cfg.scheme = Scheme::BlockJacobi;
  cfg.sigma = 1.0;
  cfg.tau = 0.25;
  cfg.horizon = 0.5;
  cfg.nx = 8;
  const RunReport report = run_sweep(cfg, 1);
  const std::string md = report_markdown(report);
  CHECK(md.find("| tau | error | order |") == 0);
  CHECK(md.find("| 0.25 |") != std::string::npos);
  CHECK(md.find("| 0.125 |") != std::string::npos);
  // first row has no order
  CHECK(md.find("| - |") != std::string::npos);
}

TEST_CASE("single run basics") {
  BenchConfig cfg;
  cfg.scheme = Scheme::BlockGaussSeidel;
  cfg.tau = 0.25;
  cfg.horizon = 1.0;
  cfg.nx = 8;
  const RunReport report = run_single(cfg);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].tau == 0.25);
  CHECK(report.rows[0].error > 0.0);
  CHECK(report.rows[0].wall_seconds >= 0.0);
  CHECK(report.rows[0].ledger.empty());
  CHECK(report.config == cfg);
}

TEST_CASE("zero-horizon run reports zero discrete error") {
  // no steps are taken, so the field still equals the sampled truth
  BenchConfig cfg;
  cfg.tau = 0.1;
  cfg.horizon = 0.0;
  cfg.nx = 16;
  const RunReport report = run_single(cfg);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].error == 0.0);
}

TEST_CASE("monitor ledger lands next to the report") {
  BenchConfig cfg;
  cfg.scheme = Scheme::BlockJacobi;
  cfg.sigma = 1.0;
  cfg.tau = 0.25;
  cfg.horizon = 0.5;
  cfg.nx = 8;
  cfg.monitor = true;
  cfg.out = "test_bench_mon.csv";
  const RunReport report = run_single(cfg);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].ledger == "test_bench_mon.ledger.csv");
  std::ifstream is(report.rows[0].ledger);
  REQUIRE(static_cast<bool>(is));
  std::string header;
  std::getline(is, header);
  CHECK(header == "n,t,A_seminorm_sq,C_norm_w_sq,R_norm_w_sq,rhs_budget,pass");
  int lines = 0;
  for (std::string line; std::getline(is, line);) ++lines;
  CHECK(lines == 3);  // initial row + 2 steps
  std::remove(report.rows[0].ledger.c_str());
}

TEST_CASE("determinism across repeated runs") {
  BenchConfig cfg;
  cfg.scheme = Scheme::ThreeLevelAT;
  cfg.sigma = 0.5;
  cfg.tau = 0.125;
  cfg.horizon = 0.5;
  cfg.nx = 12;
  const RunReport a = run_single(cfg);
  const RunReport b = run_single(cfg);
  CHECK(a.rows[0].error == b.rows[0].error);

  cfg.scheme = Scheme::Theta;
  cfg.sigma = 0.5;
  const RunReport c = run_single(cfg);
  const RunReport d = run_single(cfg);
  CHECK(c.rows[0].error == d.rows[0].error);
}

TEST_CASE("error values are bit-identical for any thread count") {
  BenchConfig cfg;
  cfg.scheme = Scheme::Theta;
  cfg.sigma = 0.5;
  cfg.tau = 0.125;
  cfg.horizon = 0.5;
  cfg.nx = 24;
  par::set_threads(1);
  const RunReport one = run_single(cfg);
  par::set_threads(4);
  const RunReport four = run_single(cfg);
  CHECK(one.rows[0].error == four.rows[0].error);

  cfg.scheme = Scheme::ThreeLevelAT;
  par::set_threads(1);
  const RunReport lod_one = run_single(cfg);
  par::set_threads(4);
  const RunReport lod_four = run_single(cfg);
  CHECK(lod_one.rows[0].error == lod_four.rows[0].error);
}
