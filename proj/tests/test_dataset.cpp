#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "modhtan/dataset.hpp"
#include "modhtan/errors.hpp"

using namespace modhtan;

namespace {

const std::filesystem::path kHeartPath = std::filesystem::path(MODHTAN_DATA_DIR) / "heart.dat";

std::string heart_line(const std::string& label) {
  return "70.0 1.0 4.0 130.0 322.0 0.0 2.0 109.0 0.0 2.4 2.0 3.0 3.0 " + label + "\n";
}

}  // namespace

TEST_CASE("linear_scale") {
  const std::vector<Real> column{2, 4, 6};
  const auto [scaled, p] = linear_scale(column);
  CHECK(scaled == std::vector<Real>{-1, 0, 1});
  CHECK(p.min == 2);
  CHECK(p.max == 6);
  CHECK(unscale(std::span<const Real>(scaled), p) == column);

  SUBCASE("custom range") {
    const auto [s01, q] = linear_scale(column, 0, 1);
    CHECK(s01 == std::vector<Real>{0, 0.5L, 1});
    CHECK(apply_scale(8, q) == 1.5L);
  }
  SUBCASE("constant column") {
    const std::vector<Real> flat{3, 3, 3};
    const auto [s, q] = linear_scale(flat);
    CHECK(s == std::vector<Real>{0, 0, 0});
    CHECK(unscale(0.7L, q) == 3);
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(linear_scale(std::vector<Real>{}), DomainError);
    CHECK_THROWS_AS(linear_scale(std::vector<Real>{1, NAN}), DomainError);
  }
}

TEST_CASE("gen_quadratic") {
  const Dataset ds = gen_quadratic(5);
  REQUIRE(ds.size() == 5);
  CHECK(ds.kind == TaskKind::kRegression);
  // x already spans [-1, 1]; t = x^2 - 2 spans [-2, -1] and maps to 2x^2 - 1.
  const Real xs[] = {-1, -0.5L, 0, 0.5L, 1};
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(ds.X(i, 0) == doctest::Approx(xs[i]).epsilon(1e-15));
    CHECK(ds.T(i, 0) == doctest::Approx(2 * xs[i] * xs[i] - 1).epsilon(1e-15));
    CHECK(unscale(ds.T(i, 0), ds.target_scale[0]) ==
          doctest::Approx(xs[i] * xs[i] - 2).epsilon(1e-15));
  }

  SUBCASE("random inputs are seeded and stay scaled") {
    const Dataset a = gen_quadratic(200, true, 4);
    const Dataset b = gen_quadratic(200, true, 4);
    const Dataset c = gen_quadratic(200, true, 5);
    CHECK(a.X == b.X);
    CHECK(a.X != c.X);
    CHECK(a.X.minCoeff() == -1);
    CHECK(a.X.maxCoeff() == 1);
  }
  CHECK_THROWS_AS(gen_quadratic(1), std::invalid_argument);
}

TEST_CASE("load_heart") {
  const Dataset ds = load_heart(kHeartPath);
  REQUIRE(ds.size() == kHeartSamples);
  CHECK(ds.X.cols() == kHeartFeatures);
  CHECK(ds.kind == TaskKind::kBinaryClassification);
  CHECK(ds.feature_scale.empty());
  CHECK(ds.T.sum() == 120);
  CHECK(ds.X(0, 0) == 70);
  CHECK(ds.X(0, 4) == 322);
  CHECK(ds.X(0, 9) == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(ds.T(0, 0) == 1);
  for (Eigen::Index r = 0; r < ds.size(); ++r) CHECK((ds.T(r, 0) == 0 || ds.T(r, 0) == 1));
}

TEST_CASE("parse_heart") {
  SUBCASE("comma separated with blank lines") {
    std::istringstream in(
        "\n70,1,4,130,322,0,2,109,0,2.4,2,3,3,1\n\n67,0,3,115,564,0,2,160,0,1.6,2,0,7,2\n");
    const Dataset ds = parse_heart(in);
    CHECK(ds.size() == 2);
    CHECK(ds.T(0, 0) == 0);
    CHECK(ds.T(1, 0) == 1);
    CHECK(ds.X(1, 4) == 564);
  }
  SUBCASE("bad label") {
    std::istringstream in(heart_line("1") + heart_line("3"));
    try {
      parse_heart(in);
      FAIL("expected LabelDomainError");
    } catch (const LabelDomainError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("wrong field count") {
    std::istringstream in("1 2 3\n");
    CHECK_THROWS_AS(parse_heart(in), ParseError);
  }
  SUBCASE("non-numeric field") {
    std::istringstream in(heart_line("x"));
    CHECK_THROWS_AS(parse_heart(in), ParseError);
  }
  SUBCASE("empty input") {
    std::istringstream in("");
    CHECK_THROWS_AS(parse_heart(in), ParseError);
  }
  CHECK_THROWS(load_heart("/nonexistent/heart.dat"));
}

TEST_CASE("split") {
  const Dataset ds = load_heart(kHeartPath);
  const auto [train, test] = split(ds, SplitSpec{0.2L, 1});
  CHECK(train.size() == 216);
  CHECK(test.size() == 54);

  SUBCASE("partitions the rows") {
    // Labels follow their rows, so label totals are preserved.
    CHECK(train.T.sum() + test.T.sum() == ds.T.sum());
    std::multiset<Real> ages;
    for (Eigen::Index r = 0; r < ds.size(); ++r) ages.insert(ds.X(r, 0));
    std::multiset<Real> recovered;
    for (Eigen::Index r = 0; r < train.size(); ++r)
      recovered.insert(unscale(train.X(r, 0), train.feature_scale[0]));
    for (Eigen::Index r = 0; r < test.size(); ++r)
      recovered.insert(unscale(test.X(r, 0), test.feature_scale[0]));
    CHECK(recovered.size() == ages.size());
    auto it = recovered.begin();
    for (const Real age : ages) CHECK(*it++ == doctest::Approx(age).epsilon(1e-15));
  }
  SUBCASE("training features span [-1, 1]") {
    REQUIRE(train.feature_scale.size() == static_cast<std::size_t>(kHeartFeatures));
    for (Eigen::Index c = 0; c < train.X.cols(); ++c) {
      CHECK(train.X.col(c).minCoeff() == -1);
      CHECK(train.X.col(c).maxCoeff() == 1);
    }
  }
  SUBCASE("seeded") {
    const auto again = split(ds, SplitSpec{0.2L, 1});
    CHECK(again.first.X == train.X);
    CHECK(again.second.T == test.T);
    const auto other = split(ds, SplitSpec{0.2L, 2});
    CHECK(other.first.X != train.X);
  }
  SUBCASE("pre-scaled data is not rescaled") {
    const Dataset q = gen_quadratic(10);
    const auto [a, b] = split(q, SplitSpec{0.3L, 0});
    CHECK(a.size() == 7);
    CHECK(b.size() == 3);
    CHECK(a.feature_scale.size() == 1);
    CHECK(a.feature_scale[0].min == -1);
  }
  CHECK_THROWS_AS(split(ds, SplitSpec{0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(split(ds, SplitSpec{1, 1}), std::invalid_argument);
}

TEST_CASE("write_dataset_csv") {
  Dataset ds;
  ds.X = (Matrix(2, 2) << 1, 0.5L, -1, 0).finished();
  ds.T = (Matrix(2, 1) << 0, 1).finished();
  std::ostringstream out;
  write_dataset_csv(ds, out);
  CHECK(out.str() == "x1,x2,t1\n1,0.5,0\n-1,0,1\n");
}
