#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "modhtan/exp_approx.hpp"
#include "modhtan/types.hpp"

namespace modhtan {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct EluParams {
  Real alpha = 1;
};

/// offset_1 held constant for every batch.
struct FixedOffset {
  Real value = 1;
};

/// offset_1 = (1 + delta) * max|x| + kappa, recomputed per batch.
struct AdaptiveOffset {
  Real delta = 0.05L;
  Real kappa = 1e-6L;
};

using OffsetMode = std::variant<AdaptiveOffset, FixedOffset>;

/// How the exponential base is raised in the squashing step.
enum class EulerMode {
  kConstant,  ///< cached RNF Euler constant raised to a real power
  kDirect,    ///< rnf_exp evaluated at the exponent
};

struct ModHtanParams {
  Real k_o = 2;
  Real x_cutoff = 10;
  OffsetMode offset = AdaptiveOffset{};
  RnfParams rnf{};
  Real x_norm_clamp = 50;
  /// When false, the central region uses plain x instead of x / (x + offset_1).
  bool center_normalize = true;
  EulerMode euler_mode = EulerMode::kConstant;
};

struct SoftStep {};
struct Htan {};

using ActivationKind = std::variant<SoftStep, Htan, EluParams, ModHtanParams>;

void validate(const EluParams& p);
void validate(const ModHtanParams& p);
void validate(const ActivationKind& kind);

/// Short lowercase name: softstep, htan, elu, modhtan.
std::string activation_name(const ActivationKind& kind);
/// Upper-case label used in report tables (HTAN, ELU, ...).
std::string activation_label(const ActivationKind& kind);
/// Parses a short name; `modhtan` takes its parameters from `modhtan_params`.
/// Throws std::invalid_argument on unknown names.
ActivationKind parse_activation(std::string_view name, const ModHtanParams& modhtan_params = {},
                                const EluParams& elu_params = {});

// ---------------------------------------------------------------------------
// Element-wise functions
// ---------------------------------------------------------------------------

Real soft_step(Real x) noexcept;
Real soft_step_grad(Real f) noexcept;

Real htan(Real x) noexcept;
Real htan_grad(Real f) noexcept;

Real elu(Real x, const EluParams& p = {}) noexcept;
/// x = 0 belongs to the exponential branch.
Real elu_grad(Real x, Real f, const EluParams& p = {}) noexcept;

/**
 * Batch-adaptive normalization offset. The result is strictly larger than
 * every |x| in the batch, so x + offset > 0 and x / (x + offset) keeps the
 * sign of x. Throws DomainError on an empty batch or non-finite entries.
 */
Real adaptive_offset(std::span<const Real> batch, Real delta, Real kappa);

enum class Region {
  kPositive,  ///< x > +cutoff
  kNegative,  ///< x < -cutoff
  kCenter,    ///< -cutoff <= x <= +cutoff
};

struct Normalized {
  Region region = Region::kCenter;
  Real x_norm = 0;
};

/// Region of x and the clamped ratio x / (x + offset_1).
Normalized modhtan_normalize(Real x, Real offset_1, Real x_cutoff, Real clamp) noexcept;

/// offset_1 for a batch under the configured offset mode.
Real resolve_offset(const ModHtanParams& p, std::span<const Real> batch);

Real modhtan(Real x, const ModHtanParams& p, Real offset_1);
/// Surrogate gradient 1 - f^2 (the HTAN derivative, reused unchanged).
Real modhtan_grad(Real f) noexcept;

// ---------------------------------------------------------------------------
// Batch dispatch
// ---------------------------------------------------------------------------

struct Activation {
  std::vector<Real> values;
  std::vector<Real> gradients;
  /// offset_1 used for the batch (MODHTAN only).
  std::optional<Real> offset;
};

Activation activate(const ActivationKind& kind, std::span<const Real> batch);

/// In-place variant used by the network; `values` and `gradients` must be
/// the same length as `batch`. Returns offset_1 for MODHTAN.
std::optional<Real> activate_into(const ActivationKind& kind, std::span<const Real> batch,
                                  std::span<Real> values, std::span<Real> gradients);

}  // namespace modhtan
