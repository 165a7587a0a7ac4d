#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "modhtan/network.hpp"
#include "modhtan/types.hpp"

namespace modhtan {

struct GdmConfig {
  Real learning_rate = 0.01L;
  Real momentum = 0.9L;
  int epochs = 500;
};

struct LmConfig {
  Real mu0 = 1e-3L;
  Real mu_inc = 10;
  Real mu_dec = 0.1L;
  Real mu_max = 1e10L;
  int epochs = 500;
};

using TrainerConfig = std::variant<LmConfig, GdmConfig>;

void validate(const GdmConfig& cfg);
void validate(const LmConfig& cfg);

/// mu-increases tried within one LM epoch before giving up.
inline constexpr int kLmMaxIncreases = 20;
/// LM stops once ||grad of 0.5 * mean e^2|| falls below this.
inline constexpr Real kLmGradientTolerance = 1e-12L;

struct StallEvent {
  int epoch = 0;
  std::string description;
};

enum class StopReason {
  kEpochs,             ///< ran the configured number of epochs
  kGradientTolerance,  ///< LM gradient norm below tolerance
  kMuLimit,            ///< LM damping exceeded mu_max
  kRetryLimit,         ///< LM found no improving step within one epoch
  kStall,              ///< non-finite parameters, activations or loss
};

std::string to_string(StopReason reason);

/// Entry k describes the model after k + 1 completed epochs.
struct TrainHistory {
  std::vector<Real> loss;
  std::vector<double> epoch_seconds;
  std::vector<Real> mu;  // LM only: damping used by the accepted step
  std::vector<StallEvent> stall_events;
  StopReason stop = StopReason::kEpochs;

  bool stalled() const { return !stall_events.empty(); }
};

/// CSV: epoch,loss,epoch_time_s
void write_history_csv(const TrainHistory& history, std::ostream& out);

struct TrainResult {
  MlpModel model;
  TrainHistory history;
};

/// Mean over all entries of (y - t)^2.
Real mse(const Matrix& Y, const Matrix& T);

/// 100 * fraction of rows where (y >= 0.5) matches the 0/1 label.
/// Uses the first output column. Throws std::invalid_argument on empty input.
Real classification_accuracy(const Matrix& Y, const Matrix& labels);

/// Names the first non-finite tensor, if any.
std::optional<std::string> detect_stall(const MlpModel& model, const ForwardCache& cache,
                                        std::optional<Real> loss = std::nullopt);

// ---------------------------------------------------------------------------
// Levenberg-Marquardt core
// ---------------------------------------------------------------------------

/// A nonlinear least-squares objective 0.5 * mean(e(theta)^2).
class LeastSquaresProblem {
 public:
  virtual ~LeastSquaresProblem() = default;
  virtual ResidualJacobian linearize(const Vector& theta) = 0;
  virtual Vector residuals(const Vector& theta) = 0;
  /// Description of a non-finite state at the last linearization, if any.
  virtual std::optional<std::string> stall() const { return std::nullopt; }
};

/// Solves (J^T J + mu I) step = -J^T e; empty when the Cholesky factorization fails.
std::optional<Vector> lm_step(const Matrix& J, const Vector& e, Real mu);

struct LmOutcome {
  Vector theta;
  TrainHistory history;
};

/// Throws SingularSystemError if every retry in an epoch fails to factorize.
LmOutcome levenberg_marquardt(LeastSquaresProblem& problem, Vector theta, const LmConfig& cfg);

// ---------------------------------------------------------------------------
// Network trainers (full batch)
// ---------------------------------------------------------------------------

TrainResult train_gdm(MlpModel model, const Matrix& X, const Matrix& T, const GdmConfig& cfg);
TrainResult train_lm(MlpModel model, const Matrix& X, const Matrix& T, const LmConfig& cfg);
TrainResult train(MlpModel model, const Matrix& X, const Matrix& T, const TrainerConfig& cfg);

}  // namespace modhtan
