#include "modhtan/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "modhtan/errors.hpp"
#include "modhtan/network.hpp"
#include "text_format.hpp"

namespace modhtan {

namespace {

using Clock = std::chrono::steady_clock;

struct RunData {
  Dataset train;
  std::optional<Dataset> test;
};

struct Outcome {
  double seconds = 0;
  Real metric = 0;
  std::optional<std::string> failure;
};

Outcome train_once(const ExperimentSpec& spec, const ActivationKind& kind, const RunData& data,
                   std::uint64_t seed, bool timed) {
  Outcome out;
  const Dataset& train = data.train;
  MlpModel model =
      nguyen_widrow_init(train.X.cols(), spec.hidden, train.T.cols(), kind, seed);
  try {
    const auto start = Clock::now();
    TrainResult result = modhtan::train(std::move(model), train.X, train.T, spec.trainer);
    if (timed) out.seconds = std::chrono::duration<double>(Clock::now() - start).count();

    if (result.history.stalled()) {
      const auto& event = result.history.stall_events.front();
      out.failure = fmt::format("stall at epoch {}: {}", event.epoch, event.description);
      out.metric = std::numeric_limits<Real>::quiet_NaN();
      return out;
    }
    if (data.test) {
      const auto y = forward(result.model, data.test->X).outputs;
      out.metric = classification_accuracy(y, data.test->T);
    } else {
      out.metric = mse(forward(result.model, train.X).outputs, train.T);
    }
  } catch (const SingularSystemError& e) {
    out.failure = e.what();
    out.metric = std::numeric_limits<Real>::quiet_NaN();
  }
  return out;
}

std::string table_value(Real value, int decimals) {
  if (!std::isfinite(value)) return "stall";
  return fmt::format("{:.{}f}", value, decimals);
}

void write_markdown_table(const BenchReport& report, std::ostream& out, const std::string& title,
                          bool runtime) {
  const int decimals = runtime ? 4 : (report.metric_name == "mse" ? 6 : 5);
  out << "### " << title << "\n\n| Run |";
  for (const auto& a : report.activations) out << ' ' << a << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < report.activations.size(); ++i) out << "---|";
  out << '\n';

  std::map<std::pair<int, std::string>, const BenchRow*> cells;
  int max_run = 0;
  for (const auto& row : report.rows) {
    cells[{row.run, row.activation}] = &row;
    max_run = std::max(max_run, row.run);
  }
  for (int run = 1; run <= max_run; ++run) {
    out << "| " << run << " |";
    for (const auto& a : report.activations) {
      auto it = cells.find({run, a});
      if (it == cells.end()) {
        out << "  |";
        continue;
      }
      const BenchRow& row = *it->second;
      out << ' '
          << (row.failure ? std::string("stall")
                          : table_value(runtime ? static_cast<Real>(row.runtime_s)
                                                : row.metric_value,
                                        decimals))
          << " |";
    }
    out << '\n';
  }
  out << "| AVERAGE |";
  for (const auto& a : report.activations) {
    auto it = std::find_if(report.averages.begin(), report.averages.end(),
                           [&](const BenchRow& r) { return r.activation == a; });
    const Real value = it == report.averages.end()
                           ? std::numeric_limits<Real>::quiet_NaN()
                           : (runtime ? static_cast<Real>(it->runtime_s) : it->metric_value);
    out << ' ' << table_value(value, decimals) << " |";
  }
  out << "\n\n";
}

}  // namespace

void validate(const ExperimentSpec& spec) {
  if (spec.runs < 1) throw std::invalid_argument("experiment: runs must be >= 1");
  if (spec.activations.empty()) throw std::invalid_argument("experiment: no activations");
  if (spec.hidden < 1) throw std::invalid_argument("experiment: hidden units must be >= 1");
  for (const auto& kind : spec.activations) validate(kind);
  std::visit([](const auto& cfg) { validate(cfg); }, spec.trainer);
}

std::vector<std::string> BenchReport::runtime_ordering() const {
  std::vector<const BenchRow*> sorted;
  for (const auto& avg : averages) sorted.push_back(&avg);
  std::stable_sort(sorted.begin(), sorted.end(), [](const BenchRow* a, const BenchRow* b) {
    return a->runtime_s < b->runtime_s;
  });
  std::vector<std::string> out;
  for (const auto* row : sorted) out.push_back(row->activation);
  return out;
}

void compute_averages(BenchReport& report) {
  report.averages.clear();
  for (const auto& label : report.activations) {
    BenchRow avg;
    avg.average = true;
    avg.activation = label;
    avg.metric_name = report.metric_name;
    double runtime_sum = 0;
    Real metric_sum = 0;
    int count = 0;
    for (const auto& row : report.rows) {
      if (row.activation != label || row.failure) continue;
      runtime_sum += row.runtime_s;
      metric_sum += row.metric_value;
      ++count;
    }
    if (count == 0) {
      avg.runtime_s = std::numeric_limits<double>::quiet_NaN();
      avg.metric_value = std::numeric_limits<Real>::quiet_NaN();
      avg.failure = "every run failed";
    } else {
      avg.runtime_s = runtime_sum / count;
      avg.metric_value = metric_sum / count;
    }
    report.averages.push_back(std::move(avg));
  }
}

BenchReport run_experiment(const ExperimentSpec& spec) {
  validate(spec);

  // Dataset construction is outside every timed region.
  std::optional<Dataset> synthetic;
  std::optional<Dataset> heart;
  Real test_fraction = 0;
  if (const auto* s = std::get_if<SyntheticSource>(&spec.data)) {
    synthetic = gen_quadratic(s->n, s->random_x, spec.base_seed);
  } else {
    const auto& h = std::get<HeartSource>(spec.data);
    heart = load_heart(h.path);
    test_fraction = h.test_fraction;
  }

  BenchReport report;
  report.metric_name = synthetic ? "mse" : "accuracy_pct";
  for (const auto& kind : spec.activations) report.activations.push_back(activation_label(kind));

  std::vector<RunData> per_run;
  for (int run = 1; run <= spec.runs; ++run) {
    const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(run);
    if (synthetic) {
      per_run.push_back({*synthetic, std::nullopt});
    } else {
      auto [train, test] = split(*heart, SplitSpec{test_fraction, seed});
      per_run.push_back({std::move(train), std::move(test)});
    }
  }

  const std::size_t n_act = spec.activations.size();
  std::vector<Outcome> outcomes(per_run.size() * n_act);
  auto task = [&](std::size_t r, std::size_t a, bool timed) {
    const std::uint64_t seed = spec.base_seed + r + 1;
    return train_once(spec, spec.activations[a], per_run[r], seed, timed);
  };

  if (spec.parallel) {
    std::vector<std::future<Outcome>> futures;
    for (std::size_t r = 0; r < per_run.size(); ++r)
      for (std::size_t a = 0; a < n_act; ++a)
        futures.push_back(std::async(std::launch::async, task, r, a, false));
    for (std::size_t i = 0; i < futures.size(); ++i) outcomes[i] = futures[i].get();
  } else {
    for (std::size_t r = 0; r < per_run.size(); ++r)
      for (std::size_t a = 0; a < n_act; ++a) outcomes[r * n_act + a] = task(r, a, true);
  }

  for (std::size_t r = 0; r < per_run.size(); ++r) {
    for (std::size_t a = 0; a < n_act; ++a) {
      const Outcome& o = outcomes[r * n_act + a];
      BenchRow row;
      row.run = static_cast<int>(r + 1);
      row.activation = report.activations[a];
      row.runtime_s = o.seconds;
      row.metric_name = report.metric_name;
      row.metric_value = o.metric;
      row.failure = o.failure;
      report.rows.push_back(std::move(row));
    }
  }
  compute_averages(report);
  return report;
}

void write_report_csv(const BenchReport& report, std::ostream& out) {
  out << "run,activation,runtime_s,metric_name,metric_value\n";
  auto line = [&](const BenchRow& row) {
    out << (row.average ? std::string("AVERAGE") : std::to_string(row.run)) << ','
        << row.activation << ',' << detail::compact(row.runtime_s, 17) << ',' << row.metric_name
        << ',' << detail::compact(row.metric_value, 17) << '\n';
  };
  for (const auto& row : report.rows) line(row);
  for (const auto& row : report.averages) line(row);
}

void write_report_markdown(const BenchReport& report, std::ostream& out) {
  write_markdown_table(report, out, "Run-time (s)", true);
  write_markdown_table(report, out,
                       report.metric_name == "mse" ? "Error (training MSE)"
                                                   : "Classification-test accuracy (%)",
                       false);
  const auto ordering = report.runtime_ordering();
  if (!ordering.empty()) {
    out << "Run-time ordering (fastest first): ";
    for (std::size_t i = 0; i < ordering.size(); ++i) out << (i ? " < " : "") << ordering[i];
    out << '\n';
  }
  for (const auto& row : report.rows)
    if (row.failure)
      out << "\nRun " << row.run << ", " << row.activation << ": " << *row.failure << '\n';
}

void emit_report(const BenchReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report '" + path.string() + "'");
  if (format == ReportFormat::kCsv)
    write_report_csv(report, out);
  else
    write_report_markdown(report, out);
  if (!out) throw std::runtime_error("failed writing report '" + path.string() + "'");
}

std::vector<Real> curve_grid(const CurveRange& range) {
  if (!(range.lo < range.hi)) throw std::invalid_argument("curve: lo must be < hi");
  if (!(range.step > 0)) throw std::invalid_argument("curve: step must be > 0");
  const auto count =
      static_cast<std::size_t>(std::floor((range.hi - range.lo) / range.step + 1e-9L)) + 1;
  std::vector<Real> xs(count);
  for (std::size_t i = 0; i < count; ++i) xs[i] = range.lo + static_cast<Real>(i) * range.step;
  return xs;
}

void write_curve_csv(const ActivationKind& kind, const CurveRange& range, std::ostream& out) {
  validate(kind);
  const auto xs = curve_grid(range);
  const Activation act = activate(kind, xs);
  out << "x,value,gradient\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    out << detail::compact(xs[i], 12) << ',' << detail::compact(act.values[i], 17) << ','
        << detail::compact(act.gradients[i], 17) << '\n';
}

void dump_curves(const ActivationKind& kind, const CurveRange& range,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write curve file '" + path.string() + "'");
  write_curve_csv(kind, range, out);
  if (!out) throw std::runtime_error("failed writing curve file '" + path.string() + "'");
}

ApproxBenchResult approx_bench(std::size_t count, Real lo, Real hi, const RnfParams& params,
                               double min_seconds) {
  if (count < 1) throw std::invalid_argument("approx_bench: count must be >= 1");
  if (lo > hi) throw std::invalid_argument("approx_bench: lo must be <= hi");
  // rnf_exp's domain is x < a - m, so checking both ends covers the sweep.
  (void)rnf_exp(lo, params);
  (void)rnf_exp(hi, params);

  std::vector<Real> xs(count);
  for (std::size_t i = 0; i < count; ++i)
    xs[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<Real>(i) / static_cast<Real>(count - 1);

  ApproxBenchResult result;
  const auto profile = approx_error_profile(xs, params);
  for (const auto& row : profile) result.max_rel_err = std::max(result.max_rel_err, row.relative_error);

  volatile Real sink = 0;
  auto time_per_op = [&](auto&& fn) {
    std::size_t passes = 0;
    const auto start = Clock::now();
    double elapsed = 0;
    do {
      Real acc = 0;
      for (const Real x : xs) acc += fn(x);
      sink = sink + acc;
      ++passes;
      elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    } while (elapsed < min_seconds);
    return elapsed * 1e9 / static_cast<double>(passes * count);
  };
  result.ns_per_op_rnf = time_per_op([&](Real x) { return rnf_exp(x, params); });
  result.ns_per_op_ref = time_per_op([](Real x) { return std::exp(x); });
  return result;
}

}  // namespace modhtan
