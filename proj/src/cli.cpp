#include "modhtan/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "modhtan/activation.hpp"
#include "modhtan/bench.hpp"
#include "modhtan/dataset.hpp"
#include "modhtan/errors.hpp"
#include "modhtan/exp_approx.hpp"
#include "modhtan/network.hpp"
#include "modhtan/trainer.hpp"
#include "text_format.hpp"

namespace modhtan {

namespace {

/// Bad flag values detected after parsing; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalFlags {
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
};

struct ActivationFlags {
  double k = 2;
  double cutoff = 10;
  std::string offset_mode = "adaptive";
  double offset = 1;
  double delta = 0.05;
  double kappa = 1e-6;
  std::string center_normalize = "on";
  std::uint64_t rnf_a = RnfParams{}.a;
  std::string euler_mode = "constant";
  double clamp = 50;
  double alpha = 1;

  ModHtanParams modhtan() const {
    ModHtanParams p;
    p.k_o = k;
    p.x_cutoff = cutoff;
    if (offset_mode == "fixed")
      p.offset = FixedOffset{offset};
    else
      p.offset = AdaptiveOffset{delta, kappa};
    p.center_normalize = center_normalize == "on";
    p.rnf.a = rnf_a;
    p.euler_mode = euler_mode == "direct" ? EulerMode::kDirect : EulerMode::kConstant;
    p.x_norm_clamp = clamp;
    return p;
  }

  ActivationKind parse(const std::string& name) const {
    ActivationKind kind = parse_activation(name, modhtan(), EluParams{alpha});
    try {
      validate(kind);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    return kind;
  }
};

struct TrainingFlags {
  std::string data = "synthetic";
  long long n = 50'000;
  std::string path;
  bool random_x = false;
  double test_fraction = 0.2;
  long long hidden = 2;
  std::string trainer = "lm";
  int epochs = 500;
  double lr = 0.01;
  double momentum = 0.9;
  double mu0 = 1e-3;
  double mu_inc = 10;
  double mu_dec = 0.1;
  double mu_max = 1e10;

  TrainerConfig config() const {
    try {
      if (trainer == "gdm") {
        GdmConfig cfg{lr, momentum, epochs};
        validate(cfg);
        return cfg;
      }
      LmConfig cfg{mu0, mu_inc, mu_dec, mu_max, epochs};
      validate(cfg);
      return cfg;
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  void check() const {
    if (data == "heart" && path.empty()) throw UsageError("--data heart requires --path");
    if (data == "synthetic" && n < 2) throw UsageError("--n must be >= 2");
    if (!(test_fraction > 0 && test_fraction < 1)) throw UsageError("--test-fraction must be in (0, 1)");
    if (hidden < 1) throw UsageError("--hidden must be >= 1");
  }
};

const std::vector<std::string> kActivationNames{"softstep", "htan", "elu", "modhtan"};

void add_activation_flags(CLI::App* cmd, ActivationFlags& f) {
  cmd->add_option("--k", f.k, "MODHTAN calibration numerator k_o");
  cmd->add_option("--cutoff", f.cutoff, "MODHTAN region threshold x_cutoff");
  cmd->add_option("--offset-mode", f.offset_mode, "MODHTAN offset_1 mode")
      ->check(CLI::IsMember({"adaptive", "fixed"}));
  cmd->add_option("--offset", f.offset, "offset_1 value for --offset-mode fixed");
  cmd->add_option("--delta", f.delta, "adaptive offset margin delta");
  cmd->add_option("--kappa", f.kappa, "adaptive offset floor kappa");
  cmd->add_option("--center-normalize", f.center_normalize,
                  "normalize x in the central region too")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--rnf-a", f.rnf_a, "RNF integer calibration constant a");
  cmd->add_option("--euler-mode", f.euler_mode,
                  "constant: cached RNF Euler number to a real power; direct: rnf_exp per value")
      ->check(CLI::IsMember({"constant", "direct"}));
  cmd->add_option("--clamp", f.clamp, "bound on |x_norm|");
  cmd->add_option("--alpha", f.alpha, "ELU negative-branch scale");
}

void add_training_flags(CLI::App* cmd, TrainingFlags& f) {
  cmd->add_option("--data", f.data, "dataset")->check(CLI::IsMember({"synthetic", "heart"}));
  cmd->add_option("--n", f.n, "synthetic sample count");
  cmd->add_option("--path", f.path, "Statlog Heart data file");
  cmd->add_flag("--random-x", f.random_x, "draw synthetic inputs uniformly instead of evenly");
  cmd->add_option("--test-fraction", f.test_fraction, "Heart test fraction");
  cmd->add_option("--hidden", f.hidden, "hidden units");
  cmd->add_option("--trainer", f.trainer, "training algorithm")
      ->check(CLI::IsMember({"lm", "gdm"}));
  cmd->add_option("--epochs", f.epochs, "training epochs");
  cmd->add_option("--lr", f.lr, "GDM learning rate");
  cmd->add_option("--momentum", f.momentum, "GDM momentum");
  cmd->add_option("--mu0", f.mu0, "LM initial damping");
  cmd->add_option("--mu-inc", f.mu_inc, "LM damping increase factor");
  cmd->add_option("--mu-dec", f.mu_dec, "LM damping decrease factor");
  cmd->add_option("--mu-max", f.mu_max, "LM damping limit");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  return file;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct CurvesFlags {
  std::string fn;
  std::string preset = "within";
  std::optional<double> lo, hi, step;
};

int cmd_curves(const GlobalFlags& g, const CurvesFlags& c, const ActivationFlags& a,
               std::ostream& out) {
  const ActivationKind kind = a.parse(c.fn);
  CurveRange range = c.preset == "exploding" ? kExplodingPreset : kWithinRangePreset;
  if (c.lo) range.lo = *c.lo;
  if (c.hi) range.hi = *c.hi;
  if (c.step) range.step = *c.step;
  if (!(range.lo < range.hi)) throw UsageError("--lo must be < --hi");
  if (!(range.step > 0)) throw UsageError("--step must be > 0");

  if (g.out.empty()) {
    write_curve_csv(kind, range, out);
  } else {
    dump_curves(kind, range, g.out);
    out << "wrote " << curve_grid(range).size() << " points to " << g.out << '\n';
  }
  return kExitOk;
}

struct ApproxFlags {
  long long count = 1'000'000;
  double lo = -20;
  double hi = 20;
  std::uint64_t a = RnfParams{}.a;
  double n = 1;
  double m = 1;
};

int cmd_approx_bench(const GlobalFlags& g, const ApproxFlags& f, std::ostream& out) {
  if (f.count < 1) throw UsageError("--count must be >= 1");
  RnfParams params{f.a, f.n, f.m};
  try {
    validate(params);
    (void)rnf_exp(f.lo, params);
    (void)rnf_exp(f.hi, params);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (!(f.lo <= f.hi)) throw UsageError("--lo must be <= --hi");
  const auto r = approx_bench(static_cast<std::size_t>(f.count), f.lo, f.hi, params);
  out << fmt::format("count={} lo={} hi={} a={} ns_per_op_rnf={:.3f} ns_per_op_ref={:.3f} "
                     "max_rel_err={}\n",
                     f.count, f.lo, f.hi, f.a, r.ns_per_op_rnf, r.ns_per_op_ref,
                     detail::compact(r.max_rel_err, 6));
  if (!g.out.empty()) {
    auto file = open_output(g.out);
    file << "count,lo,hi,a,ns_per_op_rnf,ns_per_op_ref,max_rel_err\n"
         << f.count << ',' << f.lo << ',' << f.hi << ',' << f.a << ','
         << fmt::format("{:.3f},{:.3f},", r.ns_per_op_rnf, r.ns_per_op_ref)
         << detail::compact(r.max_rel_err, 17) << '\n';
  }
  return kExitOk;
}

struct TrainOnlyFlags {
  std::string fn = "htan";
  std::string model_out;
  std::string history;
  std::string export_data;
};

int cmd_train(const GlobalFlags& g, const TrainingFlags& t, const TrainOnlyFlags& f,
              const ActivationFlags& a, std::ostream& out, std::ostream& err) {
  t.check();
  const ActivationKind kind = a.parse(f.fn);
  const TrainerConfig cfg = t.config();

  Dataset train_set;
  std::optional<Dataset> test_set;
  if (t.data == "heart") {
    auto [train, test] = split(load_heart(t.path), SplitSpec{t.test_fraction, g.seed});
    train_set = std::move(train);
    test_set = std::move(test);
  } else {
    train_set = gen_quadratic(t.n, t.random_x, g.seed);
  }
  if (!f.export_data.empty()) {
    auto file = open_output(f.export_data);
    write_dataset_csv(train_set, file);
  }

  MlpModel model =
      nguyen_widrow_init(train_set.X.cols(), t.hidden, train_set.T.cols(), kind, g.seed);
  const auto start = std::chrono::steady_clock::now();
  TrainResult result = train(std::move(model), train_set.X, train_set.T, cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!f.history.empty()) {
    auto file = open_output(f.history);
    write_history_csv(result.history, file);
  }
  if (result.history.stalled()) {
    const auto& event = result.history.stall_events.front();
    err << "stall at epoch " << event.epoch << ": " << event.description << '\n';
    return kExitFailure;
  }

  out << "activation=" << activation_label(kind) << " epochs_run=" << result.history.loss.size()
      << " stop=" << to_string(result.history.stop) << '\n';
  const Real train_mse = mse(forward(result.model, train_set.X).outputs, train_set.T);
  out << "final_mse=" << detail::compact(train_mse, 10) << '\n';
  if (test_set) {
    const auto y = forward(result.model, test_set->X).outputs;
    out << "test_accuracy_pct=" << detail::compact(classification_accuracy(y, test_set->T), 10)
        << '\n';
  }
  out << fmt::format("train_time_s={:.6f}\n", seconds);

  const std::string model_path = f.model_out.empty() ? g.out : f.model_out;
  if (!model_path.empty()) {
    auto file = open_output(model_path);
    save_model(result.model, file);
  }
  return kExitOk;
}

struct BenchOnlyFlags {
  std::vector<std::string> fns{"htan", "elu", "modhtan"};
  int runs = 10;
  bool parallel = false;
};

int cmd_bench(const GlobalFlags& g, const TrainingFlags& t, const BenchOnlyFlags& b,
              const ActivationFlags& a, std::ostream& out, std::ostream& err) {
  t.check();
  if (b.runs < 1) throw UsageError("--runs must be >= 1");
  ExperimentSpec spec;
  if (t.data == "heart")
    spec.data = HeartSource{t.path, t.test_fraction};
  else
    spec.data = SyntheticSource{t.n, t.random_x};
  for (const auto& name : b.fns) spec.activations.push_back(a.parse(name));
  spec.trainer = t.config();
  spec.runs = b.runs;
  spec.base_seed = g.seed;
  spec.hidden = t.hidden;
  spec.parallel = b.parallel;

  const BenchReport report = run_experiment(spec);

  for (const auto& row : report.rows)
    if (row.failure) err << "run " << row.run << " " << row.activation << ": " << *row.failure << '\n';

  out << "activation,avg_runtime_s,avg_" << report.metric_name << '\n';
  for (const auto& avg : report.averages)
    out << avg.activation << ',' << fmt::format("{:.6f}", avg.runtime_s) << ','
        << detail::compact(avg.metric_value, 10) << '\n';
  if (!spec.parallel) {
    out << "runtime ordering (observation, fastest first):";
    for (const auto& label : report.runtime_ordering()) out << ' ' << label;
    out << '\n';
  }

  if (!g.out.empty()) {
    ReportFormat format = ReportFormat::kCsv;
    if (g.format == "markdown" ||
        (g.format.empty() && std::filesystem::path(g.out).extension() == ".md"))
      format = ReportFormat::kMarkdown;
    emit_report(report, format, g.out);
  }
  return kExitOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"MODHTAN activation and RNF exponential toolkit", "modhtan"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  GlobalFlags global;
  app.add_option("--seed", global.seed, "base random seed");
  app.add_option("--out", global.out, "output file (stdout when omitted for curves)");
  app.add_option("--format", global.format, "report format (default: from --out extension)")
      ->check(CLI::IsMember({"csv", "markdown"}));

  std::function<int()> action;

  ActivationFlags act_flags;
  TrainingFlags train_flags;

  CurvesFlags curves_flags;
  auto* curves = app.add_subcommand("curves", "write activation value/gradient curves as CSV");
  curves->fallthrough();
  curves->add_option("--fn", curves_flags.fn, "activation")
      ->required()
      ->check(CLI::IsMember(kActivationNames));
  curves->add_option("--preset", curves_flags.preset, "within: [-10,10] step 0.01; exploding: [-1000,1000] step 1")
      ->check(CLI::IsMember({"within", "exploding"}));
  curves->add_option("--lo", curves_flags.lo, "sweep start (overrides preset)");
  curves->add_option("--hi", curves_flags.hi, "sweep end, inclusive (overrides preset)");
  curves->add_option("--step", curves_flags.step, "sweep step (overrides preset)");
  add_activation_flags(curves, act_flags);
  curves->callback([&] { action = [&] { return cmd_curves(global, curves_flags, act_flags, out); }; });

  ApproxFlags approx_flags;
  auto* approx = app.add_subcommand("approx-bench", "time rnf_exp against std::exp");
  approx->fallthrough();
  approx->add_option("--count", approx_flags.count, "evaluations per sweep");
  approx->add_option("--lo", approx_flags.lo, "sweep start");
  approx->add_option("--hi", approx_flags.hi, "sweep end");
  approx->add_option("--a,--rnf-a", approx_flags.a, "RNF integer calibration constant a");
  approx->add_option("--rnf-n", approx_flags.n, "RNF offset n");
  approx->add_option("--rnf-m", approx_flags.m, "RNF offset m");
  approx->callback([&] { action = [&] { return cmd_approx_bench(global, approx_flags, out); }; });

  TrainOnlyFlags train_only;
  auto* train_cmd = app.add_subcommand("train", "train one network and report its error");
  train_cmd->fallthrough();
  add_training_flags(train_cmd, train_flags);
  train_cmd->add_option("--fn", train_only.fn, "hidden activation")
      ->check(CLI::IsMember(kActivationNames));
  train_cmd->add_option("--model-out", train_only.model_out, "write the trained model here (default: --out)");
  train_cmd->add_option("--history", train_only.history, "write per-epoch loss CSV here");
  train_cmd->add_option("--export-data", train_only.export_data, "write the training set CSV here");
  add_activation_flags(train_cmd, act_flags);
  train_cmd->callback([&] {
    action = [&] { return cmd_train(global, train_flags, train_only, act_flags, out, err); };
  });

  BenchOnlyFlags bench_only;
  auto* bench = app.add_subcommand("bench", "repeated timed training runs per activation");
  bench->fallthrough();
  add_training_flags(bench, train_flags);
  bench->add_option("--fns", bench_only.fns, "comma-separated activations")
      ->delimiter(',')
      ->check(CLI::IsMember(kActivationNames));
  bench->add_option("--runs", bench_only.runs, "runs per activation");
  bench->add_flag("--parallel", bench_only.parallel, "run concurrently without timing");
  add_activation_flags(bench, act_flags);
  bench->callback([&] {
    action = [&] { return cmd_bench(global, train_flags, bench_only, act_flags, out, err); };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace modhtan
