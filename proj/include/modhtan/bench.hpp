#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "modhtan/activation.hpp"
#include "modhtan/dataset.hpp"
#include "modhtan/exp_approx.hpp"
#include "modhtan/trainer.hpp"

namespace modhtan {

// ---------------------------------------------------------------------------
// Training experiments
// ---------------------------------------------------------------------------

struct SyntheticSource {
  Eigen::Index n = 50'000;
  bool random_x = false;
};

struct HeartSource {
  std::filesystem::path path;
  Real test_fraction = 0.2L;
};

using DataSource = std::variant<SyntheticSource, HeartSource>;

struct ExperimentSpec {
  DataSource data = SyntheticSource{};
  std::vector<ActivationKind> activations;
  TrainerConfig trainer = LmConfig{};
  int runs = 10;
  std::uint64_t base_seed = 0;
  Eigen::Index hidden = 2;
  /// Run every (run, activation) pair concurrently. Timing is disabled and
  /// runtime_s is reported as 0.
  bool parallel = false;
};

void validate(const ExperimentSpec& spec);

struct BenchRow {
  int run = 0;  // 1-based; 0 on AVERAGE rows
  bool average = false;
  std::string activation;  // table label, e.g. "MODHTAN"
  double runtime_s = 0;
  std::string metric_name;  // "mse" or "accuracy_pct"
  Real metric_value = 0;
  /// Stall or solver failure; metric_value is NaN and the row is left out of the average.
  std::optional<std::string> failure;
};

struct BenchReport {
  std::string metric_name;
  std::vector<std::string> activations;  // column order
  std::vector<BenchRow> rows;            // run order, activations within a run
  std::vector<BenchRow> averages;        // one per activation

  /// Activation labels sorted by average run-time, fastest first.
  std::vector<std::string> runtime_ordering() const;
};

/// Recomputes `averages` from `rows` (failed rows excluded).
void compute_averages(BenchReport& report);

/**
 * Repeated timed training: for each run r (1-based) the seed is
 * base_seed + r, the Heart split is redrawn with that seed and shared by
 * every activation, and each activation trains a fresh Nguyen-Widrow model.
 * Synthetic runs report training MSE; Heart runs report test accuracy.
 */
BenchReport run_experiment(const ExperimentSpec& spec);

enum class ReportFormat { kCsv, kMarkdown };

/// CSV columns: run,activation,runtime_s,metric_name,metric_value.
void write_report_csv(const BenchReport& report, std::ostream& out);
/// One table per metric (run-time, then mse/accuracy) with an AVERAGE row.
void write_report_markdown(const BenchReport& report, std::ostream& out);
void emit_report(const BenchReport& report, ReportFormat format, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Activation curves
// ---------------------------------------------------------------------------

struct CurveRange {
  Real lo = -10;
  Real hi = 10;
  Real step = 0.01L;
};

inline constexpr CurveRange kWithinRangePreset{-10, 10, 0.01L};
inline constexpr CurveRange kExplodingPreset{-1000, 1000, 1};

/// Inclusive sample grid lo, lo + step, ..., up to hi.
std::vector<Real> curve_grid(const CurveRange& range);

/// CSV x,value,gradient. A MODHTAN sweep is treated as one batch.
void write_curve_csv(const ActivationKind& kind, const CurveRange& range, std::ostream& out);
void dump_curves(const ActivationKind& kind, const CurveRange& range,
                 const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Exponential micro-benchmark
// ---------------------------------------------------------------------------

struct ApproxBenchResult {
  double ns_per_op_rnf = 0;
  double ns_per_op_ref = 0;
  Real max_rel_err = 0;
};

/**
 * Times `count` evaluations of rnf_exp and std::exp over an evenly spaced
 * sweep of [lo, hi]. The sweep is repeated until at least `min_seconds` has
 * elapsed for each function. Throws DomainError if the range violates the
 * rnf_exp precondition.
 */
ApproxBenchResult approx_bench(std::size_t count, Real lo, Real hi, const RnfParams& params = {},
                               double min_seconds = 0.002);

}  // namespace modhtan
