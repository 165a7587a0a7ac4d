#include "modhtan/activation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "modhtan/errors.hpp"

namespace modhtan {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// k_o / (1 + E^(-2 x_norm)) - 1 for the active branch plus the two inactive
// branches, each of which sees x_i = 0 and contributes k_o / 2 - 1.
Real modhtan_eval(Real x, const ModHtanParams& p, Real offset_1, Real euler) {
  auto [region, x_norm] = modhtan_normalize(x, offset_1, p.x_cutoff, p.x_norm_clamp);
  if (!p.center_normalize && region == Region::kCenter)
    x_norm = std::clamp(x, -p.x_norm_clamp, p.x_norm_clamp);

  const Real power = p.euler_mode == EulerMode::kConstant ? std::pow(euler, -2 * x_norm)
                                                          : rnf_exp(-2 * x_norm, p.rnf);
  const Real active = p.k_o / (1 + power) - 1;
  const Real inactive = p.k_o / 2 - 1;
  return active + 2 * inactive;
}

}  // namespace

void validate(const EluParams& p) {
  if (!(p.alpha > 0) || !std::isfinite(p.alpha)) throw DomainError("elu: alpha must be > 0");
}

void validate(const ModHtanParams& p) {
  if (!(p.k_o > 0) || !std::isfinite(p.k_o)) throw DomainError("modhtan: k_o must be > 0");
  if (!(p.x_cutoff > 0) || !std::isfinite(p.x_cutoff))
    throw DomainError("modhtan: x_cutoff must be > 0");
  if (!(p.x_norm_clamp > 0) || !std::isfinite(p.x_norm_clamp))
    throw DomainError("modhtan: x_norm_clamp must be > 0");
  std::visit(Overloaded{
                 [](const FixedOffset& f) {
                   if (f.value == 0 || !std::isfinite(f.value))
                     throw DomainError("modhtan: fixed offset must be finite and non-zero");
                 },
                 [](const AdaptiveOffset& a) {
                   if (!(a.delta > 0) || !(a.kappa >= 0) || !std::isfinite(a.delta) ||
                       !std::isfinite(a.kappa))
                     throw DomainError("modhtan: adaptive offset needs delta > 0, kappa >= 0");
                 },
             },
             p.offset);
  validate(p.rnf);
}

void validate(const ActivationKind& kind) {
  std::visit(Overloaded{
                 [](const SoftStep&) {},
                 [](const Htan&) {},
                 [](const EluParams& p) { validate(p); },
                 [](const ModHtanParams& p) { validate(p); },
             },
             kind);
}

std::string activation_name(const ActivationKind& kind) {
  return std::visit(Overloaded{
                        [](const SoftStep&) { return std::string("softstep"); },
                        [](const Htan&) { return std::string("htan"); },
                        [](const EluParams&) { return std::string("elu"); },
                        [](const ModHtanParams&) { return std::string("modhtan"); },
                    },
                    kind);
}

std::string activation_label(const ActivationKind& kind) {
  return std::visit(Overloaded{
                        [](const SoftStep&) { return std::string("SOFTSTEP"); },
                        [](const Htan&) { return std::string("HTAN"); },
                        [](const EluParams&) { return std::string("ELU"); },
                        [](const ModHtanParams&) { return std::string("MODHTAN"); },
                    },
                    kind);
}

ActivationKind parse_activation(std::string_view name, const ModHtanParams& modhtan_params,
                                const EluParams& elu_params) {
  if (name == "softstep" || name == "sigmoid") return SoftStep{};
  if (name == "htan" || name == "tanh") return Htan{};
  if (name == "elu") return elu_params;
  if (name == "modhtan") return modhtan_params;
  throw std::invalid_argument("unknown activation '" + std::string(name) +
                              "' (expected softstep, htan, elu or modhtan)");
}

Real soft_step(Real x) noexcept { return 1 / (1 + std::exp(-x)); }

Real soft_step_grad(Real f) noexcept { return (1 - f) * f; }

Real htan(Real x) noexcept { return 2 / (1 + std::exp(-2 * x)) - 1; }

Real htan_grad(Real f) noexcept { return 1 - f * f; }

Real elu(Real x, const EluParams& p) noexcept {
  return x > 0 ? x : p.alpha * std::expm1(x);
}

Real elu_grad(Real x, Real f, const EluParams& p) noexcept { return x > 0 ? 1 : f + p.alpha; }

Real adaptive_offset(std::span<const Real> batch, Real delta, Real kappa) {
  if (batch.empty()) throw DomainError("adaptive_offset: empty batch");
  Real max_abs = 0;
  for (const Real x : batch) {
    if (!std::isfinite(x)) throw DomainError("adaptive_offset: non-finite input");
    max_abs = std::max(max_abs, std::abs(x));
  }
  return (1 + delta) * max_abs + kappa;
}

Normalized modhtan_normalize(Real x, Real offset_1, Real x_cutoff, Real clamp) noexcept {
  Normalized out;
  if (x > x_cutoff)
    out.region = Region::kPositive;
  else if (x < -x_cutoff)
    out.region = Region::kNegative;
  else
    out.region = Region::kCenter;

  const Real denominator = x + offset_1;
  Real x_norm;
  if (!std::isfinite(denominator)) {
    const Real scale = std::max(std::abs(x), std::abs(offset_1));
    x_norm = (x / scale) / (x / scale + offset_1 / scale);
  } else if (denominator == 0 || std::fpclassify(denominator) == FP_SUBNORMAL) {
    x_norm = x > 0 ? clamp : (x < 0 ? -clamp : 0);
  } else {
    x_norm = x / denominator;
  }
  out.x_norm = std::clamp(x_norm, -clamp, clamp);
  return out;
}

Real resolve_offset(const ModHtanParams& p, std::span<const Real> batch) {
  return std::visit(Overloaded{
                        [](const FixedOffset& f) { return f.value; },
                        [&](const AdaptiveOffset& a) {
                          return adaptive_offset(batch, a.delta, a.kappa);
                        },
                    },
                    p.offset);
}

Real modhtan(Real x, const ModHtanParams& p, Real offset_1) {
  return modhtan_eval(x, p, offset_1, euler_constant(p.rnf));
}

Real modhtan_grad(Real f) noexcept { return 1 - f * f; }

std::optional<Real> activate_into(const ActivationKind& kind, std::span<const Real> batch,
                                  std::span<Real> values, std::span<Real> gradients) {
  if (values.size() != batch.size() || gradients.size() != batch.size())
    throw std::invalid_argument("activate: output spans must match the batch length");

  return std::visit(
      Overloaded{
          [&](const SoftStep&) -> std::optional<Real> {
            for (std::size_t i = 0; i < batch.size(); ++i) {
              values[i] = soft_step(batch[i]);
              gradients[i] = soft_step_grad(values[i]);
            }
            return std::nullopt;
          },
          [&](const Htan&) -> std::optional<Real> {
            for (std::size_t i = 0; i < batch.size(); ++i) {
              values[i] = htan(batch[i]);
              gradients[i] = htan_grad(values[i]);
            }
            return std::nullopt;
          },
          [&](const EluParams& p) -> std::optional<Real> {
            for (std::size_t i = 0; i < batch.size(); ++i) {
              values[i] = elu(batch[i], p);
              gradients[i] = elu_grad(batch[i], values[i], p);
            }
            return std::nullopt;
          },
          [&](const ModHtanParams& p) -> std::optional<Real> {
            if (batch.empty()) return std::nullopt;
            const Real offset_1 = resolve_offset(p, batch);
            const Real euler = euler_constant(p.rnf);
            for (std::size_t i = 0; i < batch.size(); ++i) {
              values[i] = modhtan_eval(batch[i], p, offset_1, euler);
              gradients[i] = modhtan_grad(values[i]);
            }
            return offset_1;
          },
      },
      kind);
}

Activation activate(const ActivationKind& kind, std::span<const Real> batch) {
  Activation out;
  out.values.resize(batch.size());
  out.gradients.resize(batch.size());
  out.offset = activate_into(kind, batch, out.values, out.gradients);
  return out;
}

}  // namespace modhtan
