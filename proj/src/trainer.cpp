#include "modhtan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "modhtan/errors.hpp"
#include "text_format.hpp"

namespace modhtan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Real mean_square(const Vector& e) {
  return e.size() == 0 ? Real(0) : e.squaredNorm() / static_cast<Real>(e.size());
}

// Residuals in the Jacobian's row order (sample-major).
Vector flat_residuals(const Matrix& Y, const Matrix& T) {
  const Matrix diff = Y - T;
  Vector e(diff.size());
  for (Eigen::Index s = 0; s < diff.rows(); ++s)
    for (Eigen::Index o = 0; o < diff.cols(); ++o) e[s * diff.cols() + o] = diff(s, o);
  return e;
}

void check_shapes(const MlpModel& model, const Matrix& X, const Matrix& T) {
  if (X.rows() != T.rows()) throw std::invalid_argument("train: X and T row counts differ");
  if (X.cols() != model.n_in()) throw std::invalid_argument("train: X width != n_in");
  if (T.cols() != model.n_out()) throw std::invalid_argument("train: T width != n_out");
  if (X.rows() == 0) throw std::invalid_argument("train: empty training set");
}

class MlpProblem final : public LeastSquaresProblem {
 public:
  MlpProblem(MlpModel model, const Matrix& X, const Matrix& T)
      : model_(std::move(model)), X_(X), T_(T) {}

  ResidualJacobian linearize(const Vector& theta) override {
    model_.assign(theta);
    const ForwardCache cache = forward(model_, X_);
    auto lin = jacobian(model_, X_, T_, cache);
    stall_ = detect_stall(model_, cache, mean_square(lin.e));
    return lin;
  }

  Vector residuals(const Vector& theta) override {
    model_.assign(theta);
    return flat_residuals(forward(model_, X_).outputs, T_);
  }

  std::optional<std::string> stall() const override { return stall_; }

  MlpModel& model() { return model_; }

 private:
  MlpModel model_;
  const Matrix& X_;
  const Matrix& T_;
  std::optional<std::string> stall_;
};

}  // namespace

void validate(const GdmConfig& cfg) {
  if (!(cfg.learning_rate > 0)) throw std::invalid_argument("gdm: learning_rate must be > 0");
  if (!(cfg.momentum >= 0 && cfg.momentum < 1))
    throw std::invalid_argument("gdm: momentum must be in [0, 1)");
  if (cfg.epochs < 1) throw std::invalid_argument("gdm: epochs must be >= 1");
}

void validate(const LmConfig& cfg) {
  if (!(cfg.mu0 > 0)) throw std::invalid_argument("lm: mu0 must be > 0");
  if (!(cfg.mu_inc > 1)) throw std::invalid_argument("lm: mu_inc must be > 1");
  if (!(cfg.mu_dec > 0 && cfg.mu_dec < 1)) throw std::invalid_argument("lm: mu_dec must be in (0, 1)");
  if (!(cfg.mu_max > cfg.mu0)) throw std::invalid_argument("lm: mu_max must exceed mu0");
  if (cfg.epochs < 1) throw std::invalid_argument("lm: epochs must be >= 1");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kEpochs: return "epochs";
    case StopReason::kGradientTolerance: return "gradient_tolerance";
    case StopReason::kMuLimit: return "mu_limit";
    case StopReason::kRetryLimit: return "retry_limit";
    case StopReason::kStall: return "stall";
  }
  return "unknown";
}

void write_history_csv(const TrainHistory& history, std::ostream& out) {
  out << "epoch,loss,epoch_time_s\n";
  for (std::size_t i = 0; i < history.loss.size(); ++i) {
    out << (i + 1) << ',' << detail::compact(history.loss[i], 17) << ','
        << detail::compact(history.epoch_seconds[i], 9) << '\n';
  }
}

Real mse(const Matrix& Y, const Matrix& T) {
  if (Y.rows() != T.rows() || Y.cols() != T.cols())
    throw std::invalid_argument("mse: shape mismatch");
  if (Y.size() == 0) return 0;
  return (Y - T).squaredNorm() / static_cast<Real>(Y.size());
}

Real classification_accuracy(const Matrix& Y, const Matrix& labels) {
  if (Y.rows() == 0 || Y.cols() == 0) throw std::invalid_argument("accuracy: empty input");
  if (labels.rows() != Y.rows()) throw std::invalid_argument("accuracy: row count mismatch");
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    const int predicted = Y(i, 0) >= 0.5L ? 1 : 0;
    if (predicted == static_cast<int>(labels(i, 0))) ++correct;
  }
  return 100 * static_cast<Real>(correct) / static_cast<Real>(Y.rows());
}

std::optional<std::string> detect_stall(const MlpModel& model, const ForwardCache& cache,
                                        std::optional<Real> loss) {
  const auto& p = model.params;
  if (!p.W1.allFinite()) return "non-finite value in W1";
  if (!p.b1.allFinite()) return "non-finite value in b1";
  if (!p.W2.allFinite()) return "non-finite value in W2";
  if (!p.b2.allFinite()) return "non-finite value in b2";
  if (!cache.pre_activations.allFinite()) return "non-finite hidden pre-activation";
  if (!cache.activations.allFinite()) return "non-finite hidden activation";
  if (!cache.gradients.allFinite()) return "non-finite hidden activation gradient";
  if (!cache.outputs.allFinite()) return "non-finite network output";
  if (loss && !std::isfinite(*loss)) return "non-finite loss";
  return std::nullopt;
}

namespace {

std::optional<Vector> damped_solve(const Matrix& JtJ, const Vector& Jte, Real mu) {
  Matrix system = JtJ;
  system.diagonal().array() += mu;
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Vector step = llt.solve(-Jte);
  if (!step.allFinite()) return std::nullopt;
  return step;
}

}  // namespace

std::optional<Vector> lm_step(const Matrix& J, const Vector& e, Real mu) {
  return damped_solve(J.transpose() * J, J.transpose() * e, mu);
}

LmOutcome levenberg_marquardt(LeastSquaresProblem& problem, Vector theta, const LmConfig& cfg) {
  validate(cfg);
  LmOutcome out;
  TrainHistory& history = out.history;

  ResidualJacobian lin = problem.linearize(theta);
  if (auto why = problem.stall()) {
    history.stall_events.push_back({0, *why});
    history.stop = StopReason::kStall;
    out.theta = std::move(theta);
    return out;
  }
  Real loss = mean_square(lin.e);
  Real mu = cfg.mu0;
  const Real mu_floor = std::numeric_limits<Real>::min();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = Clock::now();
    const Vector Jte = lin.J.transpose() * lin.e;
    if ((Jte / static_cast<Real>(lin.e.size())).norm() < kLmGradientTolerance) {
      history.stop = StopReason::kGradientTolerance;
      break;
    }

    const Matrix JtJ = lin.J.transpose() * lin.J;
    bool accepted = false;
    int singular = 0;
    int attempts = 0;
    for (int increases = 0;; ++increases) {
      ++attempts;
      if (auto step = damped_solve(JtJ, Jte, mu)) {
        Vector candidate = theta + *step;
        const Real candidate_loss = mean_square(problem.residuals(candidate));
        if (std::isfinite(candidate_loss) && candidate_loss < loss) {
          history.mu.push_back(mu);
          theta = std::move(candidate);
          loss = candidate_loss;
          mu = std::max(mu * cfg.mu_dec, mu_floor);
          accepted = true;
          break;
        }
      } else {
        ++singular;
      }
      if (increases == kLmMaxIncreases) break;
      if (mu * cfg.mu_inc > cfg.mu_max) {
        history.stop = StopReason::kMuLimit;
        break;
      }
      mu *= cfg.mu_inc;
    }

    if (!accepted) {
      if (singular == attempts)
        throw SingularSystemError("lm: damped normal matrix is singular at every retry");
      if (history.stop != StopReason::kMuLimit) history.stop = StopReason::kRetryLimit;
      break;
    }

    lin = problem.linearize(theta);
    history.loss.push_back(loss);
    history.epoch_seconds.push_back(seconds_since(start));
    if (auto why = problem.stall()) {
      history.stall_events.push_back({epoch, *why});
      history.stop = StopReason::kStall;
      break;
    }
  }
  out.theta = std::move(theta);
  return out;
}

TrainResult train_lm(MlpModel model, const Matrix& X, const Matrix& T, const LmConfig& cfg) {
  check_shapes(model, X, T);
  const Vector theta = model.flatten();
  MlpProblem problem(std::move(model), X, T);
  LmOutcome outcome = levenberg_marquardt(problem, theta, cfg);
  problem.model().assign(outcome.theta);
  return {std::move(problem.model()), std::move(outcome.history)};
}

TrainResult train_gdm(MlpModel model, const Matrix& X, const Matrix& T, const GdmConfig& cfg) {
  validate(cfg);
  check_shapes(model, X, T);
  TrainResult result{std::move(model), {}};
  MlpModel& m = result.model;
  TrainHistory& history = result.history;

  ForwardCache cache = forward(m, X);
  if (auto why = detect_stall(m, cache, mse(cache.outputs, T))) {
    history.stall_events.push_back({0, *why});
    history.stop = StopReason::kStall;
    return result;
  }

  Vector theta = m.flatten();
  Vector velocity = Vector::Zero(theta.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = Clock::now();
    const Vector gradient = flatten(backward(m, X, T, cache));
    velocity = cfg.momentum * velocity - cfg.learning_rate * gradient;
    theta += velocity;
    m.assign(theta);
    cache = forward(m, X);
    const Real loss = mse(cache.outputs, T);
    history.loss.push_back(loss);
    history.epoch_seconds.push_back(seconds_since(start));
    if (auto why = detect_stall(m, cache, loss)) {
      history.stall_events.push_back({epoch, *why});
      history.stop = StopReason::kStall;
      break;
    }
  }
  return result;
}

TrainResult train(MlpModel model, const Matrix& X, const Matrix& T, const TrainerConfig& cfg) {
  if (const auto* lm = std::get_if<LmConfig>(&cfg)) return train_lm(std::move(model), X, T, *lm);
  return train_gdm(std::move(model), X, T, std::get<GdmConfig>(cfg));
}

}  // namespace modhtan
