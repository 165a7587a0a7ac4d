#include "modhtan/exp_approx.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "modhtan/errors.hpp"

namespace modhtan {

void validate(const RnfParams& params) {
  if (params.a < 2) throw DomainError("rnf: calibration constant a must be >= 2");
  if (!std::isfinite(params.n) || !std::isfinite(params.m))
    throw DomainError("rnf: offsets n and m must be finite");
}

Real integer_power(Real base, std::uint64_t exponent) noexcept {
  Real result = 1;
  while (exponent != 0) {
    if (exponent & 1u) result *= base;
    exponent >>= 1;
    if (exponent != 0) base *= base;
  }
  return result;
}

Real rnf_exp(Real x, const RnfParams& params) {
  validate(params);
  if (!std::isfinite(x)) throw DomainError("rnf_exp: x must be finite");
  const Real a = static_cast<Real>(params.a);
  const Real denominator = a - (params.m + x);
  if (!(denominator > 0)) throw DomainError("rnf_exp: requires m + x < a");
  const Real base = (a - params.n) / denominator;
  if (!(base > 0)) throw DomainError("rnf_exp: base (a - n) / (a - (m + x)) must be positive");
  const Real result = integer_power(base, params.a);
  if (!std::isfinite(result)) throw OverflowError("rnf_exp: result overflows");
  return result;
}

Real euler_constant(const RnfParams& params) {
  static const Real default_value = rnf_exp(1, RnfParams{});
  if (params == RnfParams{}) return default_value;

  static std::mutex mutex;
  static std::map<RnfParams, Real> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(params); it != cache.end()) return it->second;
  const Real value = rnf_exp(1, params);
  cache.emplace(params, value);
  return value;
}

std::vector<ApproxErrorRow> approx_error_profile(std::span<const Real> xs,
                                                 const RnfParams& params) {
  std::vector<ApproxErrorRow> rows;
  rows.reserve(xs.size());
  for (const Real x : xs) {
    ApproxErrorRow row;
    row.x = x;
    row.reference_value = std::exp(x);
    try {
      row.rnf_value = rnf_exp(x, params);
      row.relative_error = std::abs(row.rnf_value - row.reference_value) /
                           std::abs(row.reference_value);
    } catch (const std::exception& e) {
      row.rnf_value = std::nan("");
      row.relative_error = std::nan("");
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace modhtan
