#include <doctest.h>

#include <cmath>
#include <sstream>

#include "modhtan/bench.hpp"
#include "modhtan/errors.hpp"
#include "oracles.hpp"

using namespace modhtan;

namespace {

const std::filesystem::path kHeartPath = std::filesystem::path(MODHTAN_DATA_DIR) / "heart.dat";

ExperimentSpec small_synthetic() {
  ExperimentSpec spec;
  spec.data = SyntheticSource{200, false};
  spec.activations = {Htan{}, EluParams{}, ModHtanParams{}};
  spec.trainer = LmConfig{1e-3L, 10, 0.1L, 1e10L, 15};
  spec.runs = 3;
  spec.base_seed = 7;
  return spec;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

BenchRow row(int run, const std::string& label, double seconds, Real metric) {
  BenchRow r;
  r.run = run;
  r.activation = label;
  r.runtime_s = seconds;
  r.metric_name = "mse";
  r.metric_value = metric;
  return r;
}

}  // namespace

TEST_CASE("compute_averages") {
  BenchReport report;
  report.metric_name = "mse";
  report.activations = {"HTAN", "ELU"};
  report.rows = {row(1, "HTAN", 2, 0.1L), row(1, "ELU", 1, 0.3L), row(2, "HTAN", 4, 0.2L),
                 row(2, "ELU", 3, NAN)};
  report.rows.back().failure = "stall";
  compute_averages(report);
  REQUIRE(report.averages.size() == 2);
  CHECK(report.averages[0].activation == "HTAN");
  CHECK(report.averages[0].runtime_s == 3);
  CHECK(report.averages[0].metric_value == doctest::Approx(0.15).epsilon(1e-15));
  // The failed ELU run is left out.
  CHECK(report.averages[1].runtime_s == 1);
  CHECK(report.averages[1].metric_value == 0.3L);
  CHECK(report.runtime_ordering() == std::vector<std::string>{"ELU", "HTAN"});

  SUBCASE("all runs failed") {
    report.rows[0].failure = report.rows[2].failure = "stall";
    compute_averages(report);
    CHECK(std::isnan(report.averages[0].metric_value));
    CHECK(report.averages[0].failure);
  }
}

TEST_CASE("run_experiment on synthetic data") {
  const ExperimentSpec spec = small_synthetic();
  const BenchReport report = run_experiment(spec);
  CHECK(report.metric_name == "mse");
  CHECK(report.activations == std::vector<std::string>{"HTAN", "ELU", "MODHTAN"});
  REQUIRE(report.rows.size() == 9);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].run == static_cast<int>(i / 3 + 1));
    CHECK(report.rows[i].activation == report.activations[i % 3]);
    CHECK_FALSE(report.rows[i].failure);
    CHECK(report.rows[i].runtime_s > 0);
  }

  SUBCASE("averages are the mean of the runs") {
    for (std::size_t a = 0; a < 3; ++a) {
      Real sum = 0;
      for (int r = 0; r < 3; ++r) sum += report.rows[static_cast<std::size_t>(r) * 3 + a].metric_value;
      CHECK(std::abs(report.averages[a].metric_value - sum / 3) <= 1e-12L);
    }
  }
  SUBCASE("metrics are reproducible and independent of scheduling") {
    ExperimentSpec par = spec;
    par.parallel = true;
    const BenchReport again = run_experiment(par);
    REQUIRE(again.rows.size() == report.rows.size());
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      CHECK(again.rows[i].metric_value == report.rows[i].metric_value);
      CHECK(again.rows[i].runtime_s == 0);
    }
  }
  SUBCASE("each run uses its own seed") {
    CHECK(report.rows[0].metric_value != report.rows[3].metric_value);
  }
}

TEST_CASE("run_experiment on heart data reports test accuracy") {
  ExperimentSpec spec;
  spec.data = HeartSource{kHeartPath, 0.2L};
  spec.activations = {ModHtanParams{}};
  spec.trainer = LmConfig{1e-3L, 10, 0.1L, 1e10L, 10};
  spec.runs = 2;
  const BenchReport report = run_experiment(spec);
  CHECK(report.metric_name == "accuracy_pct");
  REQUIRE(report.rows.size() == 2);
  for (const auto& r : report.rows) {
    CHECK(r.metric_value >= 0);
    CHECK(r.metric_value <= 100);
    // 54 test samples, so the accuracy is a multiple of 100/54.
    const Real hits = r.metric_value * 54 / 100;
    CHECK(std::abs(hits - std::round(hits)) <= 1e-9L);
  }
}

TEST_CASE("ExperimentSpec validation") {
  ExperimentSpec spec = small_synthetic();
  spec.runs = 0;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = small_synthetic();
  spec.activations.clear();
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = small_synthetic();
  spec.trainer = GdmConfig{-1, 0.9L, 10};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
}

TEST_CASE("report writers") {
  BenchReport report;
  report.metric_name = "mse";
  report.activations = {"HTAN", "MODHTAN"};
  report.rows = {row(1, "HTAN", 2, 0.5L), row(1, "MODHTAN", 1, 0.25L)};
  compute_averages(report);

  SUBCASE("csv") {
    std::ostringstream out;
    write_report_csv(report, out);
    CHECK(out.str() ==
          "run,activation,runtime_s,metric_name,metric_value\n"
          "1,HTAN,2,mse,0.5\n1,MODHTAN,1,mse,0.25\n"
          "AVERAGE,HTAN,2,mse,0.5\nAVERAGE,MODHTAN,1,mse,0.25\n");
  }
  SUBCASE("markdown") {
    std::ostringstream out;
    write_report_markdown(report, out);
    const auto lines = lines_of(out.str());
    const auto count = [&](const std::string& needle) {
      return std::count_if(lines.begin(), lines.end(),
                           [&](const std::string& l) { return l.find(needle) != std::string::npos; });
    };
    CHECK(count("Run-time (s)") == 1);
    CHECK(count("Error (training MSE)") == 1);
    CHECK(count("| Run | HTAN | MODHTAN |") == 2);
    CHECK(count("| 1 |") == 2);
    CHECK(count("| AVERAGE |") == 2);
    CHECK(lines.back() == "Run-time ordering (fastest first): MODHTAN < HTAN");
  }
}

TEST_CASE("curve_grid") {
  const auto xs = curve_grid(kWithinRangePreset);
  CHECK(xs.size() == 2001);
  CHECK(xs.front() == -10);
  CHECK(std::abs(xs.back() - 10) <= 1e-12L);
  CHECK(curve_grid(kExplodingPreset).size() == 2001);
  CHECK(curve_grid({0, 1, 0.3L}).size() == 4);
  CHECK_THROWS_AS(curve_grid({1, 0, 0.1L}), std::invalid_argument);
  CHECK_THROWS_AS(curve_grid({0, 1, 0}), std::invalid_argument);
}

TEST_CASE("write_curve_csv") {
  std::ostringstream out;
  write_curve_csv(Htan{}, {-1, 1, 1}, out);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "x,value,gradient");
  CHECK(lines[1].rfind("-1,-0.76159415595576", 0) == 0);
  CHECK(lines[2] == "0,0,1");

  std::ostringstream wide;
  write_curve_csv(ModHtanParams{}, kExplodingPreset, wide);
  const auto rows = lines_of(wide.str());
  CHECK(rows.size() == 2002);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].find("nan") == std::string::npos);
    CHECK(rows[i].find("inf") == std::string::npos);
  }
}

TEST_CASE("approx_bench") {
  const auto r = approx_bench(1000, -20, 20, {}, 0);
  CHECK(r.max_rel_err <= 5e-5L);
  CHECK(r.max_rel_err > 0);
  CHECK(r.ns_per_op_rnf > 0);
  CHECK(r.ns_per_op_ref > 0);
  CHECK_THROWS_AS(approx_bench(10, 1e8L, 1e9L), DomainError);
  CHECK_THROWS_AS(approx_bench(10, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(approx_bench(0, 0, 1), std::invalid_argument);
}
