#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "modhtan/activation.hpp"
#include "modhtan/types.hpp"

namespace modhtan {

/// Weights and biases of a one-hidden-layer network. Also used for gradients.
struct MlpParameters {
  Matrix W1;  // n_hidden x n_in
  Vector b1;  // n_hidden
  Matrix W2;  // n_out x n_hidden
  Vector b2;  // n_out
};

/**
 * Feed-forward network with one nonlinear hidden layer and a linear output.
 *
 * Flat parameter order (used by the Jacobian and LM): W1 row-major, b1,
 * W2 row-major, b2.
 */
struct MlpModel {
  MlpParameters params;
  ActivationKind hidden_kind = Htan{};

  Eigen::Index n_in() const { return params.W1.cols(); }
  Eigen::Index n_hidden() const { return params.W1.rows(); }
  Eigen::Index n_out() const { return params.W2.rows(); }
  Eigen::Index parameter_count() const;

  Vector flatten() const;
  void assign(const Vector& theta);
};

/// Zero-initialized model with the given shape.
MlpModel make_model(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out,
                    ActivationKind hidden_kind);

/**
 * Nguyen-Widrow initialization: each hidden weight row is drawn from
 * U[-1, 1] and rescaled to norm beta = 0.7 * n_hidden^(1 / n_in); hidden
 * biases are U[-beta, beta]; the output layer is U[-0.5, 0.5].
 */
MlpModel nguyen_widrow_init(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out,
                            ActivationKind hidden_kind, std::uint64_t seed);

/// Per-sample intermediates of a forward pass (samples along rows).
struct ForwardCache {
  Matrix pre_activations;  // N x n_hidden
  Matrix activations;      // N x n_hidden
  Matrix gradients;        // N x n_hidden, activation derivative per unit
  Matrix outputs;          // N x n_out
  /// offset_1 per hidden unit (MODHTAN only).
  std::vector<std::optional<Real>> offsets;
};

/// Y = W2 act(W1 x + b1) + b2 for every row x of X. A hidden column holding
/// non-finite pre-activations yields NaN activations instead of throwing.
ForwardCache forward(const MlpModel& model, const Matrix& X);

/// Gradient of 0.5 * mean over samples of ||y - t||^2.
MlpParameters backward(const MlpModel& model, const Matrix& X, const Matrix& T,
                       const ForwardCache& cache);

struct ResidualJacobian {
  Matrix J;  // (N * n_out) x parameter_count, row = sample * n_out + output
  Vector e;  // y - t in the same row order
};

ResidualJacobian jacobian(const MlpModel& model, const Matrix& X, const Matrix& T,
                          const ForwardCache& cache);

/// Flattens gradients in the model's parameter order.
Vector flatten(const MlpParameters& p);

/// Plain-text key/value serialization; round-trips exactly.
void save_model(const MlpModel& model, std::ostream& out);
MlpModel load_model(std::istream& in);

}  // namespace modhtan
