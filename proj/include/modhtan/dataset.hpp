#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "modhtan/types.hpp"

namespace modhtan {

enum class TaskKind { kRegression, kBinaryClassification };

/// Affine map of [min, max] onto [lo, hi]. Constant columns map to (lo + hi) / 2.
struct ScaleParams {
  Real min = 0;
  Real max = 0;
  Real lo = -1;
  Real hi = 1;
};

struct Dataset {
  Matrix X;  // samples x features
  Matrix T;  // samples x outputs
  TaskKind kind = TaskKind::kRegression;
  /// Per-column feature scaling; empty while features are still raw.
  std::vector<ScaleParams> feature_scale;
  /// Per-column target scaling; empty when targets are unscaled (labels).
  std::vector<ScaleParams> target_scale;

  Eigen::Index size() const { return X.rows(); }
};

struct SplitSpec {
  Real test_fraction = 0.2L;
  std::uint64_t seed = 0;
};

/// Number of rows of a Statlog Heart file.
inline constexpr Eigen::Index kHeartSamples = 270;
inline constexpr Eigen::Index kHeartFeatures = 13;

/// Fits scaling on `column`. Throws DomainError on empty or non-finite input.
std::pair<std::vector<Real>, ScaleParams> linear_scale(std::span<const Real> column, Real lo = -1,
                                                       Real hi = 1);
/// Applies an already-fitted scaling; values outside [min, max] land outside [lo, hi].
Real apply_scale(Real value, const ScaleParams& params);
std::vector<Real> unscale(std::span<const Real> scaled, const ScaleParams& params);
Real unscale(Real scaled, const ScaleParams& params);

/**
 * Synthetic regression set t = x^2 - 2 over n points of [-1, 1]. Both the
 * input and the target column are scaled to [-1, 1]. With `random_x` the
 * inputs are drawn uniformly instead of evenly spaced.
 */
Dataset gen_quadratic(Eigen::Index n, bool random_x = false, std::uint64_t seed = 0);

/**
 * Reads a Statlog Heart file: 13 numeric features and a label in {1, 2}
 * per line, whitespace- or comma-separated. Labels map to 0 (absence) and
 * 1 (presence). Features are left raw; split() scales them with training
 * statistics. A row count other than 270 prints a warning to stderr.
 */
Dataset load_heart(const std::filesystem::path& path);
Dataset parse_heart(std::istream& in);

/// Seeded shuffle, then the first ceil((1 - f) n) rows train. Raw features
/// are scaled on the training rows and the same map is applied to the test rows.
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

/// CSV with header x1..xk,t1..tm.
void write_dataset_csv(const Dataset& ds, std::ostream& out);

}  // namespace modhtan
