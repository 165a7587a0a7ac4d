#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modhtan/types.hpp"

namespace modhtan {

/**
 * Constants of the real-number-formula exponential
 *
 *     exp(x) ~= ((a - n) / (a - (m + x)))^a
 *
 * `a` is the integer calibration constant; larger values trade range for
 * accuracy (leading relative error is roughly (x + x^2/2) / a).
 */
struct RnfParams {
  std::uint64_t a = 10'000'000;
  Real n = 1;
  Real m = 1;

  auto operator<=>(const RnfParams&) const = default;
};

/// Throws DomainError unless a >= 2 and n, m are finite.
void validate(const RnfParams& params);

/// base^exponent by repeated squaring; ceil(log2(exponent)) squarings.
Real integer_power(Real base, std::uint64_t exponent) noexcept;

/**
 * RNF approximation of e^x.
 *
 * Throws DomainError when x is not finite, when a - (m + x) <= 0, or when the
 * base is non-positive; OverflowError when the power is not representable.
 */
Real rnf_exp(Real x, const RnfParams& params = {});

/// rnf_exp(1, params), memoized per parameter set.
Real euler_constant(const RnfParams& params = {});

struct ApproxErrorRow {
  Real x = 0;
  Real rnf_value = 0;
  Real reference_value = 0;
  Real relative_error = 0;
  std::optional<std::string> error;  // set when rnf_exp rejected x
};

/// One row per input, in input order. Domain errors are stored per row.
std::vector<ApproxErrorRow> approx_error_profile(std::span<const Real> xs,
                                                 const RnfParams& params = {});

}  // namespace modhtan
