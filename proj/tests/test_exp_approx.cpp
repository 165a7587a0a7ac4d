#include <doctest.h>

#include <cmath>
#include <future>
#include <random>
#include <vector>

#include "modhtan/errors.hpp"
#include "modhtan/exp_approx.hpp"
#include "oracles.hpp"

using namespace modhtan;

TEST_CASE("rnf_exp at zero is exactly one") {
  CHECK(rnf_exp(0) == 1.0L);
  CHECK(rnf_exp(0, RnfParams{1024, 1, 1}) == 1.0L);
}

TEST_CASE("rnf_exp matches the reference exponential near the origin") {
  // 40-digit value of ((1e7 - 1) / (1e7 - 2))^1e7.
  const Real at_one = 2.718282236201413511484876898886909618097L;
  // Rounding in the base is raised to the power a, so expect about a * eps.
  CHECK(oracle::relative_error(rnf_exp(1), at_one) < 1e-12L);
  CHECK(oracle::relative_error(rnf_exp(1), std::exp(1.0L)) <= 2e-7L);
  CHECK(oracle::relative_error(rnf_exp(-2), std::exp(-2.0L)) <= 1e-6L);
}

TEST_CASE("euler_constant") {
  CHECK(oracle::relative_error(euler_constant(), std::exp(1.0L)) <= 2e-7L);
  CHECK(euler_constant() == rnf_exp(1));

  const RnfParams small{100, 1, 1};
  const Real naive = oracle::naive_power(99.0L / 98.0L, 100);
  CHECK(oracle::relative_error(euler_constant(small), naive) < 1e-15L);
  CHECK(oracle::relative_error(euler_constant(small), 2.760017848074476933041726676703231604376L) <
        1e-15L);

  // a - (m + 1) = 0
  CHECK_THROWS_AS(euler_constant(RnfParams{2, 1, 1}), DomainError);
}

TEST_CASE("euler_constant is safe to call concurrently") {
  std::vector<std::future<Real>> futures;
  for (std::uint64_t i = 0; i < 16; ++i)
    futures.push_back(std::async(std::launch::async,
                                 [i] { return euler_constant(RnfParams{100 + i % 4, 1, 1}); }));
  for (std::uint64_t i = 0; i < 16; ++i)
    CHECK(futures[i].get() == rnf_exp(1, RnfParams{100 + i % 4, 1, 1}));
}

TEST_CASE("rnf_exp rejects inputs outside its domain") {
  CHECK_THROWS_AS(rnf_exp(1e8L), DomainError);                   // m + x >= a
  CHECK_THROWS_AS(rnf_exp(10'000'000.0L - 1), DomainError);      // denominator exactly 0
  CHECK_THROWS_AS(rnf_exp(std::nan("")), DomainError);
  CHECK_THROWS_AS(rnf_exp(INFINITY), DomainError);
  CHECK_THROWS_AS(rnf_exp(0, RnfParams{1, 1, 1}), DomainError);  // a < 2
  CHECK_THROWS_AS(rnf_exp(0, RnfParams{100, 200, 1}), DomainError);  // negative base
  CHECK_THROWS_AS(rnf_exp(1e6L), OverflowError);
  CHECK(std::isfinite(rnf_exp(700)));
  CHECK(std::isfinite(rnf_exp(-700)));
}

TEST_CASE("integer_power agrees with a naive product loop") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> exponent(0, 1024);
  std::uniform_real_distribution<Real> base(0.98L, 1.02L);
  for (int i = 0; i < 200; ++i) {
    const auto e = exponent(rng);
    const Real b = base(rng);
    const Real naive = oracle::naive_power(b, e);
    CHECK(oracle::relative_error(integer_power(b, e), naive) <= 1e-12L);
  }
  CHECK(integer_power(3, 0) == 1);
  CHECK(integer_power(3, 5) == 243);
}

TEST_CASE("rnf_exp is strictly increasing and within the error envelope") {
  Real previous = 0;
  for (int i = 0; i <= 4000; ++i) {
    const Real x = -20 + 40 * static_cast<Real>(i) / 4000;
    const Real v = rnf_exp(x);
    if (i > 0) CHECK(v > previous);
    previous = v;
    const Real err = oracle::relative_error(v, std::exp(x));
    CHECK(err <= 5e-5L);
    if (std::abs(x) <= 2) CHECK(err <= 2e-6L);
  }
}

TEST_CASE("approx_error_profile") {
  SUBCASE("identity row") {
    const std::vector<Real> xs{0};
    const auto rows = approx_error_profile(xs);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].relative_error == 0);
    CHECK_FALSE(rows[0].error);
  }
  SUBCASE("far rows stay inside the leading-order bound") {
    const std::vector<Real> xs{20, -20};
    const auto rows = approx_error_profile(xs);
    CHECK(rows[0].relative_error <= 5e-5L);
    CHECK(rows[1].relative_error <= 5e-5L);
    // (x + x^2/2) / a ~ 2.2e-5 at x = 20
    CHECK(rows[0].relative_error == doctest::Approx(2.2e-5).epsilon(1e-3));
  }
  SUBCASE("domain errors are recorded per row and order is preserved") {
    const std::vector<Real> xs{1, 1e8L, -1};
    const auto rows = approx_error_profile(xs);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].x == 1);
    CHECK_FALSE(rows[0].error);
    CHECK(rows[1].error);
    CHECK(std::isnan(rows[1].relative_error));
    CHECK(rows[2].x == -1);
    CHECK_FALSE(rows[2].error);
  }
}
