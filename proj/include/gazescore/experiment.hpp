#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gazescore/dataset.hpp"
#include "gazescore/episodes.hpp"
#include "gazescore/errors.hpp"
#include "gazescore/model.hpp"
#include "gazescore/trainer.hpp"

namespace gazescore {

enum class TrainStrategy { kEpisodic, kTraditional };

inline TrainStrategy strategy_from_string(const std::string& name) {
  if (name == "episodic") return TrainStrategy::kEpisodic;
  if (name == "traditional") return TrainStrategy::kTraditional;
  throw value_error("unknown train strategy '" + name +
                    "' (expected episodic|traditional)");
}

inline std::string to_string(TrainStrategy strategy) {
  return strategy == TrainStrategy::kEpisodic ? "episodic" : "traditional";
}

// Everything one end-to-end run needs beyond the dataset itself.
struct ExperimentConfig {
  SplitConfig split;  // train fraction r, episode size k, split/episode seed
  TrainConfig train;
  std::size_t hidden = 8;
  std::size_t layers = 4;
  TrainStrategy strategy = TrainStrategy::kEpisodic;
  bool standardize = true;
};

struct ExperimentResult {
  ModelParams model;
  TrainReport train_report;
  EvalReport train_eval;
  EvalReport test_eval;
  TrainTestSplit split;
  FeatureStats stats;
};

// Runs the whole pipeline on an already-normalized dataset: subject-level
// split, feature standardization with training-split statistics, episode (or
// fixed-window) construction, training, and evaluation of both splits.
//
// Evaluation convention: the training split is always scored on episode
// targets only, while the test split additionally rotates folds under kFull
// so that every subject of every test episode is scored exactly once. This
// keeps the train-side numbers comparable between the semi and full modes,
// which differ only in how the test side is scored.
inline ExperimentResult run_experiment(const Dataset& data,
                                       const ExperimentConfig& cfg) {
  if (!data.normalized) {
    throw value_error("run_experiment: normalize scores first");
  }
  if (cfg.hidden == 0 || cfg.layers == 0) {
    throw value_error("run_experiment: hidden size and layer count must be "
                      "positive");
  }

  ExperimentResult result;
  result.split = split_train_test(data, cfg.split);

  result.stats = compute_feature_stats(data, result.split.train);
  const Dataset prepared =
      cfg.standardize ? standardize_features(data, result.stats) : data;

  const ModelParams init =
      init_model(data.schema.dimension(), cfg.hidden, cfg.layers,
                 derive_seed(cfg.train.seed, 3));

  if (cfg.strategy == TrainStrategy::kTraditional) {
    auto [model, report] = train_traditional(init, result.split.train,
                                             prepared, cfg.split.k, cfg.train);
    result.model = std::move(model);
    result.train_report = std::move(report);
    const std::uint64_t order_seed = traditional_order_seed(cfg.train.seed);
    result.train_eval =
        evaluate(result.model,
                 build_traditional_windows(result.split.train, prepared,
                                           cfg.split.k, order_seed),
                 CvMode::kNA);
    result.test_eval =
        evaluate(result.model,
                 build_traditional_windows(result.split.test, prepared,
                                           cfg.split.k, order_seed),
                 CvMode::kNA);
    return result;
  }

  const std::vector<Episode> train_episodes =
      build_episodes(result.split.train, prepared, cfg.split);
  const std::vector<Episode> test_episodes =
      build_episodes(result.split.test, prepared, cfg.split);

  auto [model, report] = train(init, train_episodes, cfg.train);
  result.model = std::move(model);
  result.train_report = std::move(report);
  result.train_eval = evaluate(result.model, train_episodes, CvMode::kNA);
  result.test_eval =
      evaluate(result.model, test_episodes,
               cfg.train.cv_mode == CvMode::kFull ? CvMode::kFull
                                                  : CvMode::kNA);
  return result;
}

}  // namespace gazescore
