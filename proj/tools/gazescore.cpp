// Command-line harness for the gazescore library: dataset synthesis,
// training, baseline comparison, feature attribution, and the episode-size
// sweep. Every command writes its artifacts into one output directory next
// to a manifest.json describing exactly how they were produced; result files
// reference that manifest by relative name so a run can be archived or
// diffed as a unit. Timing information lives only in the manifest, which
// keeps the result files byte-identical across repeat runs.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gazescore/checkpoint.hpp"
#include "gazescore/gazescore.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gazescore;

namespace {

// Process exit codes; usage problems, bad data, and numeric divergence are
// distinguishable by scripts.
constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDiverged = 4;

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kManifestComment = "manifest: manifest.json";

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

// FNV-1a over the raw bytes of a file; cheap fingerprint for the manifest.
std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw data_error("cannot open '" + path.string() + "' for digesting");
  }
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf), in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + hex;
}

fs::path prepare_out_dir(const std::string& out_dir) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw data_error("cannot create output directory '" + dir.string() +
                     "': " + ec.message());
  }
  return dir;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw data_error("cannot write '" + path.string() + "'");
  }
  out << content;
}

// Accumulates the run description and is written to manifest.json as the
// final artifact, once the timings are known.
struct Manifest {
  json body;

  Manifest(const std::string& command, std::uint64_t seed) {
    body["format"] = "gazescore-manifest";
    body["version"] = 1;
    body["command"] = command;
    body["seeds"] = {{"run", seed}};
    body["artifacts"] = json::array();
  }

  void artifact(const std::string& name) { body["artifacts"].push_back(name); }
  void timing(const std::string& phase, double sec) {
    body["timings_sec"][phase] = sec;
  }

  void write(const fs::path& dir) {
    write_text(dir / kManifestName, body.dump(2) + "\n");
  }
};

// Infers the feature dimension (19 or 22) from a dataset file's header so
// commands do not need a separate schema flag.
FeatureSchema detect_schema(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw data_error("cannot open dataset file " + path.string());
  }
  std::string line;
  do {
    if (!std::getline(in, line)) {
      throw data_error("dataset file " + path.string() + " has no header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
  } while (!line.empty() && line.front() == '#');
  const std::size_t columns =
      1 + static_cast<std::size_t>(
              std::count(line.begin(), line.end(), ','));
  if (columns != 3 + 19 && columns != 3 + 22) {
    throw data_error("dataset header has " + std::to_string(columns) +
                     " columns; expected subject_id,test_id,score plus 19 or "
                     "22 features");
  }
  return FeatureSchema::for_dimension(columns - 3);
}

// Loads a raw-score CSV, drops unusable subjects (writing rejections.csv if
// any), and normalizes scores to [0, 1]. All commands consume this shape.
Dataset load_prepared(const std::string& data_path, const fs::path& out_dir,
                      Manifest& manifest) {
  const fs::path path(data_path);
  const Dataset raw = load_dataset(path, detect_schema(path));
  auto [clean, rejections] = filter_invalid(raw);
  if (!rejections.empty()) {
    save_row_issues(out_dir / "rejections.csv", rejections);
    manifest.artifact("rejections.csv");
    std::fprintf(stderr,
                 "gazescore: dropped %zu subject(s); see rejections.csv\n",
                 rejections.size());
  }
  if (clean.records.empty()) {
    throw data_error("dataset '" + data_path +
                     "' has no usable records after filtering");
  }
  manifest.body["data"] = data_path;
  manifest.body["data_digest"] = file_digest(path);
  return normalize_scores(clean);
}

std::string metric_csv_row(const MetricReport& m) {
  return format_double(m.mae) + "," + format_double(m.sd);
}

std::string metric_csv_row(const EvalReport& e) {
  return format_double(e.mae) + "," + format_double(e.sd);
}

// ---------------------------------------------------------------------------
// synth

struct SynthOpts {
  std::size_t subjects = 68;
  std::size_t tests = 42;
  std::size_t features = 22;
  std::uint64_t seed = 7;
  double noise = 1.0;
  double nonlinearity = 1.0;
  bool structured = false;
  std::string out_dir;
};

int cmd_synth(const SynthOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = prepare_out_dir(o.out_dir);
  Manifest manifest("synth", o.seed);
  manifest.body["config"] = {
      {"subjects", o.subjects},     {"tests", o.tests},
      {"features", o.features},     {"seed", o.seed},
      {"noise", o.noise},           {"nonlinearity", o.nonlinearity},
      {"structured", o.structured},
  };

  SyntheticOptions opt;
  opt.structured = o.structured;
  opt.noise = o.noise;
  opt.nonlinearity = o.nonlinearity;
  const Dataset data =
      generate_synthetic(o.subjects, o.tests, o.features, o.seed, opt);

  save_dataset(dir / "dataset.csv", data, kManifestComment);
  manifest.artifact("dataset.csv");
  manifest.body["data_digest"] = file_digest(dir / "dataset.csv");
  manifest.timing("total", seconds_since(t0));
  manifest.write(dir);

  std::printf("wrote %zu records (%zu subjects x %zu tests, d=%zu) to %s\n",
              data.records.size(), o.subjects, o.tests, o.features,
              (dir / "dataset.csv").string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  std::string data;
  std::uint64_t seed = 0;
  double r = 0.9;
  std::size_t k = 3;
  std::size_t layers = 4;
  std::size_t hidden = 8;
  std::string cv_mode = "full";
  std::string strategy = "episodic";
  std::size_t epochs = 200;
  double lr = 1e-3;
  std::size_t batch = 8;
  std::string out_dir;
};

ExperimentConfig experiment_config(const TrainOpts& o) {
  ExperimentConfig cfg;
  cfg.split.r = o.r;
  cfg.split.k = o.k;
  cfg.split.seed = o.seed;
  cfg.train.epochs = o.epochs;
  cfg.train.lr = o.lr;
  cfg.train.batch = o.batch;
  cfg.train.cv_mode = cv_mode_from_string(o.cv_mode);
  cfg.train.seed = o.seed;
  cfg.hidden = o.hidden;
  cfg.layers = o.layers;
  cfg.strategy = strategy_from_string(o.strategy);
  return cfg;
}

json train_config_json(const TrainOpts& o) {
  return {
      {"seed", o.seed},         {"r", o.r},
      {"k", o.k},               {"layers", o.layers},
      {"hidden", o.hidden},     {"cv_mode", o.cv_mode},
      {"strategy", o.strategy}, {"epochs", o.epochs},
      {"lr", o.lr},             {"batch", o.batch},
  };
}

std::string predictions_csv(const ExperimentResult& result) {
  std::string out = std::string("# ") + kManifestComment +
                    "\nseries,test_id,subject_id,predicted,actual\n";
  const auto emit = [&out](const char* series, const EvalReport& eval) {
    for (const PredictionRecord& p : eval.predictions) {
      out += std::string(series) + "," + p.test_id + "," + p.subject_id +
             "," + format_double(p.predicted) + "," + format_double(p.label) +
             "\n";
    }
  };
  emit("train", result.train_eval);
  emit("test", result.test_eval);
  return out;
}

json split_json(const TrainTestSplit& split) {
  return {{"train_subjects", split.train.size()},
          {"test_subjects", split.test.size()}};
}

json eval_json(const EvalReport& eval) {
  return {{"mae_percent", eval.mae},
          {"sd", eval.sd},
          {"predictions", eval.predictions.size()},
          {"degenerate_support", eval.degenerate_support}};
}

int cmd_train(const TrainOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = prepare_out_dir(o.out_dir);
  Manifest manifest("train", o.seed);
  manifest.body["config"] = train_config_json(o);
  manifest.body["seeds"]["split"] = derive_seed(o.seed, 17);
  manifest.body["seeds"]["episodes"] = derive_seed(o.seed, 29);
  manifest.body["seeds"]["trainer_shuffle"] = derive_seed(o.seed, 101);
  manifest.body["seeds"]["model_init"] = derive_seed(o.seed, 3);

  const Dataset data = load_prepared(o.data, dir, manifest);
  const auto t_train = std::chrono::steady_clock::now();
  const ExperimentResult result =
      run_experiment(data, experiment_config(o));
  manifest.timing("train", seconds_since(t_train));

  Checkpoint ckpt;
  ckpt.params = result.model;
  ckpt.seed = o.seed;
  ckpt.note = std::string(kManifestComment) + "; data " +
              manifest.body["data_digest"].get<std::string>();
  save_checkpoint((dir / "checkpoint.json").string(), ckpt);
  manifest.artifact("checkpoint.json");

  json metrics;
  metrics["manifest"] = kManifestName;
  metrics["config"] = train_config_json(o);
  metrics["data_digest"] = manifest.body["data_digest"];
  metrics["split"] = split_json(result.split);
  metrics["pool_size"] = result.train_report.pool_size;
  metrics["final_epoch_loss"] = result.train_report.epoch_loss.back();
  metrics["train"] = eval_json(result.train_eval);
  metrics["test"] = eval_json(result.test_eval);
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  manifest.artifact("metrics.json");

  std::string loss = std::string("# ") + kManifestComment + "\nepoch,loss\n";
  for (std::size_t e = 0; e < result.train_report.epoch_loss.size(); ++e) {
    loss += std::to_string(e + 1) + "," +
            format_double(result.train_report.epoch_loss[e]) + "\n";
  }
  write_text(dir / "loss.csv", loss);
  manifest.artifact("loss.csv");

  write_text(dir / "predictions.csv", predictions_csv(result));
  manifest.artifact("predictions.csv");

  manifest.timing("total", seconds_since(t0));
  manifest.write(dir);

  std::printf(
      "train[%s/%s] subjects %zu/%zu  train MAE %.4f%% (sd %.4f)  "
      "test MAE %.4f%% (sd %.4f)  final loss %.3e\n",
      o.strategy.c_str(), o.cv_mode.c_str(), result.split.train.size(),
      result.split.test.size(), result.train_eval.mae, result.train_eval.sd,
      result.test_eval.mae, result.test_eval.sd,
      result.train_report.epoch_loss.back());
  std::printf("artifacts in %s\n", dir.string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOpts {
  std::string data;
  std::string checkpoint;
  std::uint64_t seed = 0;
  double r = 0.9;
  std::size_t k = 3;
  std::string cv_mode = "full";
  std::string out_dir;
};

// Scores the checkpointed model on the held-out split, mirroring the
// training pipeline: same split, training-only feature statistics, same
// episode construction.
EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& data,
                               const SplitConfig& split_cfg, CvMode mode) {
  if (ckpt.params.input_dim() != data.schema.dimension()) {
    throw dimension_error("checkpoint expects " +
                          std::to_string(ckpt.params.input_dim()) +
                          " features, dataset has " +
                          std::to_string(data.schema.dimension()));
  }
  const TrainTestSplit split = split_train_test(data, split_cfg);
  const FeatureStats stats = compute_feature_stats(data, split.train);
  const Dataset prepared = standardize_features(data, stats);
  const std::vector<Episode> episodes =
      build_episodes(split.test, prepared, split_cfg);
  return evaluate(ckpt.params, episodes,
                  mode == CvMode::kFull ? CvMode::kFull : CvMode::kNA);
}

int cmd_compare(const CompareOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = prepare_out_dir(o.out_dir);
  Manifest manifest("compare", o.seed);
  manifest.body["config"] = {
      {"seed", o.seed},         {"r", o.r},
      {"k", o.k},               {"cv_mode", o.cv_mode},
      {"checkpoint", o.checkpoint},
  };
  manifest.body["seeds"]["crossval_folds"] = derive_seed(o.seed, 71);

  const Dataset data = load_prepared(o.data, dir, manifest);
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);

  const LinearFitter ls = [](const Tensor& x, std::span<const double> y) {
    return least_squares_fit(x, y);
  };
  const LinearFitter br = [](const Tensor& x, std::span<const double> y) {
    return bayesian_ridge_fit(x, y);
  };
  const CrossvalReport ls4 = crossval_eval(ls, data, CvScheme::kKFold4, o.seed);
  const CrossvalReport lsloo =
      crossval_eval(ls, data, CvScheme::kLeaveOneOut, o.seed);
  const CrossvalReport brloo =
      crossval_eval(br, data, CvScheme::kLeaveOneOut, o.seed);

  SplitConfig split_cfg;
  split_cfg.r = o.r;
  split_cfg.k = o.k;
  split_cfg.seed = o.seed;
  const EvalReport proposed = evaluate_checkpoint(
      ckpt, data, split_cfg, cv_mode_from_string(o.cv_mode));

  // Computed rows first, then previously reported results on the original
  // private eye-tracking dataset as fixed reference lines for context.
  std::string csv = std::string("# ") + kManifestComment +
                    "\nmethod,scheme,mae_percent,sd,source\n";
  csv += "least_squares,participant-4fold," + metric_csv_row(ls4.metrics) +
         ",computed\n";
  csv += "least_squares,leave-one-out," + metric_csv_row(lsloo.metrics) +
         ",computed\n";
  csv += "bayesian_ridge,leave-one-out," + metric_csv_row(brloo.metrics) +
         ",computed\n";
  csv += "proposed,episodic-" + o.cv_mode + "-test," +
         format_double(proposed.mae) + "," + format_double(proposed.sd) +
         ",computed\n";
  csv += "least_squares,participant-4fold,12.04,,reference\n";
  csv += "mtjl,,4.91,,reference\n";
  csv += "proposed,episodic-full-test,4.02,0.0344,reference\n";
  write_text(dir / "comparison.csv", csv);
  manifest.artifact("comparison.csv");

  manifest.timing("total", seconds_since(t0));
  manifest.write(dir);

  std::printf(
      "least squares 4-fold %.4f%%  loo %.4f%%  bayesian ridge loo %.4f%%  "
      "proposed %.4f%%\n",
      ls4.metrics.mae, lsloo.metrics.mae, brloo.metrics.mae, proposed.mae);
  std::printf("comparison table in %s\n",
              (dir / "comparison.csv").string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// impact

struct ImpactOpts {
  std::string data;
  std::string checkpoint;
  std::uint64_t seed = 0;
  double r = 0.9;
  std::size_t k = 3;
  std::size_t samples = 200;
  std::string out_dir;
};

int cmd_impact(const ImpactOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = prepare_out_dir(o.out_dir);
  Manifest manifest("impact", o.seed);
  manifest.body["config"] = {
      {"seed", o.seed},   {"r", o.r},
      {"k", o.k},         {"samples", o.samples},
      {"checkpoint", o.checkpoint},
  };

  const Dataset data = load_prepared(o.data, dir, manifest);
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  if (ckpt.params.input_dim() != data.schema.dimension()) {
    throw dimension_error("checkpoint expects " +
                          std::to_string(ckpt.params.input_dim()) +
                          " features, dataset has " +
                          std::to_string(data.schema.dimension()));
  }

  // The explained function: the checkpointed model's prediction for a probe
  // feature row placed in the target slot of a fixed reference episode (the
  // first k-1 training-split subjects on the first test). Fixing the support
  // keeps the function single-argument, which is what the sampler expects.
  SplitConfig split_cfg;
  split_cfg.r = o.r;
  split_cfg.k = o.k;
  split_cfg.seed = o.seed;
  const TrainTestSplit split = split_train_test(data, split_cfg);
  const FeatureStats stats = compute_feature_stats(data, split.train);
  if (o.k < 2) {
    std::fprintf(stderr,
                 "gazescore: k=1 leaves an empty support set; the model "
                 "prediction is constant and all attributions will be 0\n");
  }
  if (split.train.size() < o.k - 1) {
    throw value_error("impact: need " + std::to_string(o.k - 1) +
                      " training subjects for the reference support, have " +
                      std::to_string(split.train.size()));
  }

  Episode reference;
  reference.test_id = data.test_ids().front();
  const DatasetIndex index(data);
  for (std::size_t s = 0; s + 1 < o.k; ++s) {
    reference.members.push_back(
        data.records[index.at(split.train[s], reference.test_id)]);
  }
  for (SubjectRecord& r : reference.members) {
    for (std::size_t j = 0; j < stats.mean.size(); ++j) {
      if (stats.passthrough[j]) continue;
      r.features[j] = (r.features[j] - stats.mean[j]) / stats.stdev[j];
    }
  }
  reference.members.push_back({"probe", reference.test_id, 0.0, {}});

  Tape tape;
  const RowPredictor predictor = [&](std::span<const double> row) {
    SubjectRecord& probe = reference.members.back();
    probe.features.assign(row.begin(), row.end());
    for (std::size_t j = 0; j < stats.mean.size(); ++j) {
      if (stats.passthrough[j]) continue;
      probe.features[j] = (probe.features[j] - stats.mean[j]) / stats.stdev[j];
    }
    tape.reset();
    ModelVars vars = load_model(tape, ckpt.params);
    return tape.scalar_value(
        forward_episode(tape, vars, reference).prediction);
  };

  const AttributionReport report =
      shapley_impact(predictor, data, o.samples, o.seed);

  std::vector<std::size_t> order(report.mean_abs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return report.mean_abs[a] > report.mean_abs[b];
  });

  std::string csv =
      std::string("# ") + kManifestComment + "\nfeature,mean_abs_phi\n";
  for (std::size_t j : order) {
    csv += data.schema.names[j] + "," + format_double(report.mean_abs[j]) +
           "\n";
  }
  write_text(dir / "attribution.csv", csv);
  manifest.artifact("attribution.csv");

  manifest.timing("total", seconds_since(t0));
  manifest.write(dir);

  std::printf("top feature: %s (mean |phi| %.6f); table in %s\n",
              data.schema.names[order.front()].c_str(),
              report.mean_abs[order.front()],
              (dir / "attribution.csv").string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep-k

struct SweepOpts {
  std::string data;
  std::uint64_t seed = 0;
  double r = 0.9;
  std::vector<std::size_t> k_values;
  std::size_t layers = 4;
  std::size_t hidden = 8;
  std::string cv_mode = "full";
  std::size_t epochs = 200;
  double lr = 1e-3;
  std::size_t batch = 8;
  std::string out_dir;
};

int cmd_sweep_k(const SweepOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = prepare_out_dir(o.out_dir);
  Manifest manifest("sweep-k", o.seed);
  manifest.body["config"] = {
      {"seed", o.seed},     {"r", o.r},       {"k_values", o.k_values},
      {"layers", o.layers}, {"hidden", o.hidden}, {"cv_mode", o.cv_mode},
      {"epochs", o.epochs}, {"lr", o.lr},     {"batch", o.batch},
  };

  const Dataset data = load_prepared(o.data, dir, manifest);

  std::string csv = std::string("# ") + kManifestComment +
                    "\nk,train_mae,train_sd,test_mae,test_sd,error\n";
  for (std::size_t k : o.k_values) {
    TrainOpts t;
    t.seed = o.seed;
    t.r = o.r;
    t.k = k;
    t.layers = o.layers;
    t.hidden = o.hidden;
    t.cv_mode = o.cv_mode;
    t.epochs = o.epochs;
    t.lr = o.lr;
    t.batch = o.batch;
    try {
      const auto tk = std::chrono::steady_clock::now();
      const ExperimentResult result =
          run_experiment(data, experiment_config(t));
      manifest.timing("k=" + std::to_string(k), seconds_since(tk));
      csv += std::to_string(k) + "," + metric_csv_row(result.train_eval) +
             "," + metric_csv_row(result.test_eval) + ",\n";
      std::printf("k %3zu  train MAE %.4f%%  test MAE %.4f%%\n", k,
                  result.train_eval.mae, result.test_eval.mae);
    } catch (const error& e) {
      // An infeasible or diverging k is reported in its row; the sweep goes
      // on so one bad setting cannot sink the whole scan.
      std::string reason = e.what();
      for (char& c : reason) {
        if (c == ',' || c == '"' || c == '\n') c = ';';
      }
      csv += std::to_string(k) + ",,,,,\"" + reason + "\"\n";
      std::printf("k %3zu  skipped: %s\n", k, reason.c_str());
    }
  }
  write_text(dir / "sweep.csv", csv);
  manifest.artifact("sweep.csv");

  manifest.timing("total", seconds_since(t0));
  manifest.write(dir);

  std::printf("sweep table in %s\n", (dir / "sweep.csv").string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Few-shot reading-score prediction: synthesis, training, baselines, "
      "attribution, and episode-size sweeps"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read option defaults from a TOML/INI file (command-line "
                 "flags override it)");

  // Default output directory: flag > GAZESCORE_OUT_DIR > ./out.
  std::string default_out = "out";
  if (const char* env = std::getenv("GAZESCORE_OUT_DIR");
      env != nullptr && *env != '\0') {
    default_out = env;
  }

  SynthOpts synth;
  synth.out_dir = default_out;
  CLI::App* c_synth =
      app.add_subcommand("synth", "Generate a synthetic dataset CSV");
  c_synth->add_option("--subjects", synth.subjects, "Number of subjects")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  c_synth->add_option("--tests", synth.tests, "Number of reading tests")
      ->check(CLI::PositiveNumber);
  c_synth->add_option("--features", synth.features,
                      "Feature dimension (19 gaze, or 22 with exam scores)")
      ->check(CLI::IsMember({19, 22}));
  c_synth->add_option("--seed", synth.seed, "Generator seed");
  c_synth->add_option("--noise", synth.noise, "Nuisance-term amplitude")
      ->check(CLI::NonNegativeNumber);
  c_synth->add_option("--nonlinearity", synth.nonlinearity,
                      "Squared-ability score term amplitude")
      ->check(CLI::NonNegativeNumber);
  c_synth->add_flag("--structured", synth.structured,
                    "Add block-correlated label offsets shared by subject "
                    "groups");
  c_synth->add_option("--out-dir", synth.out_dir, "Output directory")
      ->capture_default_str();

  TrainOpts train;
  train.out_dir = default_out;
  CLI::App* c_train = app.add_subcommand(
      "train", "Train the episodic model and score both splits");
  c_train->add_option("--data", train.data, "Dataset CSV path")->required();
  c_train->add_option("--seed", train.seed,
                      "Run seed (split, episodes, init, shuffling)");
  c_train->add_option("--r", train.r, "Training fraction of subjects")
      ->check(CLI::Range(0.0, 1.0));
  c_train->add_option("--k", train.k, "Episode size (support + target)")
      ->check(CLI::PositiveNumber);
  c_train->add_option("--l", train.layers, "Estimator depth (stacked layers)")
      ->check(CLI::PositiveNumber);
  c_train->add_option("--hidden", train.hidden, "Recurrent state width")
      ->check(CLI::PositiveNumber);
  c_train->add_option("--cv-mode", train.cv_mode,
                      "Episode fold expansion: na, semi, or full")
      ->check(CLI::IsMember({"na", "semi", "full"}));
  c_train->add_option("--train-strategy", train.strategy,
                      "episodic or traditional (fixed windows)")
      ->check(CLI::IsMember({"episodic", "traditional"}));
  c_train->add_option("--epochs", train.epochs, "Training epochs")
      ->check(CLI::PositiveNumber);
  c_train->add_option("--lr", train.lr, "Learning rate")
      ->check(CLI::NonNegativeNumber);
  c_train->add_option("--batch", train.batch, "Episodes per optimizer step")
      ->check(CLI::PositiveNumber);
  c_train->add_option("--out-dir", train.out_dir, "Output directory")
      ->capture_default_str();

  CompareOpts compare;
  compare.out_dir = default_out;
  CLI::App* c_compare = app.add_subcommand(
      "compare", "Score classical baselines against a trained checkpoint");
  c_compare->add_option("--data", compare.data, "Dataset CSV path")
      ->required();
  c_compare->add_option("--checkpoint", compare.checkpoint,
                        "Trained checkpoint JSON")
      ->required()
      ->check(CLI::ExistingFile);
  c_compare->add_option("--seed", compare.seed,
                        "Fold/split seed for every evaluation");
  c_compare->add_option("--r", compare.r, "Training fraction of subjects")
      ->check(CLI::Range(0.0, 1.0));
  c_compare->add_option("--k", compare.k, "Episode size")
      ->check(CLI::PositiveNumber);
  c_compare->add_option("--cv-mode", compare.cv_mode,
                        "Fold expansion for the proposed-method evaluation")
      ->check(CLI::IsMember({"na", "semi", "full"}));
  c_compare->add_option("--out-dir", compare.out_dir, "Output directory")
      ->capture_default_str();

  ImpactOpts impact;
  impact.out_dir = default_out;
  CLI::App* c_impact = app.add_subcommand(
      "impact", "Per-feature attribution of a trained checkpoint");
  c_impact->add_option("--data", impact.data, "Dataset CSV path")->required();
  c_impact->add_option("--checkpoint", impact.checkpoint,
                       "Trained checkpoint JSON")
      ->required()
      ->check(CLI::ExistingFile);
  c_impact->add_option("--seed", impact.seed, "Sampling/split seed");
  c_impact->add_option("--r", impact.r, "Training fraction of subjects")
      ->check(CLI::Range(0.0, 1.0));
  c_impact->add_option("--k", impact.k, "Episode size")
      ->check(CLI::PositiveNumber);
  c_impact->add_option("--samples", impact.samples,
                       "Permutation samples per evaluation point")
      ->check(CLI::PositiveNumber);
  c_impact->add_option("--out-dir", impact.out_dir, "Output directory")
      ->capture_default_str();

  SweepOpts sweep;
  sweep.out_dir = default_out;
  CLI::App* c_sweep = app.add_subcommand(
      "sweep-k", "Train across several episode sizes and tabulate MAE");
  c_sweep->add_option("--data", sweep.data, "Dataset CSV path")->required();
  c_sweep->add_option("--k-values", sweep.k_values,
                      "Comma-separated episode sizes, e.g. 1,3,10,60")
      ->required()
      ->delimiter(',');
  c_sweep->add_option("--seed", sweep.seed, "Run seed shared by every k");
  c_sweep->add_option("--r", sweep.r, "Training fraction of subjects")
      ->check(CLI::Range(0.0, 1.0));
  c_sweep->add_option("--l", sweep.layers, "Estimator depth")
      ->check(CLI::PositiveNumber);
  c_sweep->add_option("--hidden", sweep.hidden, "Recurrent state width")
      ->check(CLI::PositiveNumber);
  c_sweep->add_option("--cv-mode", sweep.cv_mode,
                      "Episode fold expansion: na, semi, or full")
      ->check(CLI::IsMember({"na", "semi", "full"}));
  c_sweep->add_option("--epochs", sweep.epochs, "Training epochs")
      ->check(CLI::PositiveNumber);
  c_sweep->add_option("--lr", sweep.lr, "Learning rate")
      ->check(CLI::NonNegativeNumber);
  c_sweep->add_option("--batch", sweep.batch, "Episodes per optimizer step")
      ->check(CLI::PositiveNumber);
  c_sweep->add_option("--out-dir", sweep.out_dir, "Output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(c_synth)) return cmd_synth(synth);
    if (app.got_subcommand(c_train)) return cmd_train(train);
    if (app.got_subcommand(c_compare)) return cmd_compare(compare);
    if (app.got_subcommand(c_impact)) return cmd_impact(impact);
    if (app.got_subcommand(c_sweep)) return cmd_sweep_k(sweep);
  } catch (const numeric_error& e) {
    std::fprintf(stderr, "gazescore: %s\n", e.what());
    return kExitDiverged;
  } catch (const error& e) {
    std::fprintf(stderr, "gazescore: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gazescore: internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
