#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gazescore/dataset.hpp"
#include "gazescore/episodes.hpp"
#include "gazescore/errors.hpp"
#include "gazescore/metrics.hpp"
#include "gazescore/model.hpp"
#include "gazescore/regression.hpp"
#include "gazescore/rng.hpp"
#include "gazescore/tape.hpp"

namespace gazescore {

// How circular folds participate in a run:
//   kNA   - episodes are used exactly as built, in training and evaluation.
//   kSemi - training also sees every circular fold of each episode (k times
//           the episode pool); evaluation still scores original targets only.
//   kFull - training as in kSemi, and evaluation also rotates each episode
//           through its folds so every member is scored as the target once.
enum class CvMode { kNA, kSemi, kFull };

enum class OptimizerKind { kAdam, kSgd };

inline CvMode cv_mode_from_string(const std::string& name) {
  if (name == "na") return CvMode::kNA;
  if (name == "semi") return CvMode::kSemi;
  if (name == "full") return CvMode::kFull;
  throw value_error("unknown cv mode '" + name + "' (expected na|semi|full)");
}

inline std::string to_string(CvMode mode) {
  switch (mode) {
    case CvMode::kNA:
      return "na";
    case CvMode::kSemi:
      return "semi";
    case CvMode::kFull:
      return "full";
  }
  throw value_error("unknown cv mode value");
}

inline OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw value_error("unknown optimizer '" + name + "' (expected adam|sgd)");
}

inline std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

struct TrainConfig {
  std::size_t epochs = 200;
  double lr = 1e-3;
  std::size_t batch = 8;
  CvMode cv_mode = CvMode::kFull;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // A batch loss above this (or any non-finite loss) aborts the run.
  double divergence_cap = 1e6;
  std::uint64_t seed = 0;
};

inline void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs == 0) throw value_error("train: epochs must be at least 1");
  if (cfg.batch == 0) throw value_error("train: batch size must be at least 1");
  if (!std::isfinite(cfg.lr) || cfg.lr < 0.0) {
    throw value_error("train: learning rate must be finite and non-negative");
  }
  if (cfg.adam_beta1 < 0.0 || cfg.adam_beta1 >= 1.0 || cfg.adam_beta2 < 0.0 ||
      cfg.adam_beta2 >= 1.0 || cfg.adam_eps <= 0.0) {
    throw value_error("train: adam hyperparameters out of range");
  }
  if (!(cfg.divergence_cap > 0.0)) {
    throw value_error("train: divergence cap must be positive");
  }
}

struct TrainReport {
  // Mean batch loss per epoch; always exactly one entry per epoch.
  std::vector<double> epoch_loss;
  // Episodes actually cycled each epoch (folds included under semi/full).
  std::size_t pool_size = 0;
  // Set when any episode had an empty support set (k = 1): the model then
  // predicts the constant zero and training cannot use the support labels.
  bool degenerate_support = false;
};

struct EvalReport {
  std::vector<PredictionRecord> predictions;
  double mae = 0.0;
  double sd = 0.0;
  bool degenerate_support = false;
};

// Training pool: under semi/full every circular fold of every episode joins
// the pool, so each member takes a turn as the held-out target.
inline std::vector<Episode> expand_episode_pool(
    const std::vector<Episode>& episodes, CvMode mode) {
  if (mode == CvMode::kNA) return episodes;
  std::vector<Episode> pool;
  pool.reserve(episodes.size() * (episodes.empty()
                                      ? 1
                                      : episodes.front().members.size()));
  for (const Episode& episode : episodes) {
    std::vector<Episode> folds = circular_shift_folds(episode);
    for (Episode& fold : folds) pool.push_back(std::move(fold));
  }
  return pool;
}

namespace detail {

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

// Applies one update from the gradients recorded on `tape`. Parameter
// tensors and their leaves are walked in the shared canonical order, so the
// flat optimizer state lines up across batches.
inline void apply_gradients(ModelParams& params, const ModelVars& vars,
                            Tape& tape, const TrainConfig& cfg,
                            OptimizerState& state) {
  const std::vector<Var> leaves = model_leaves(vars);
  std::size_t leaf_index = 0;
  std::size_t offset = 0;
  if (cfg.optimizer == OptimizerKind::kAdam) ++state.step;
  const double bias1 =
      1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.step));
  const double bias2 =
      1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.step));
  for_each_model_tensor(params, [&](Tensor& tensor) {
    const std::span<const double> grad = tape.gradient(leaves[leaf_index++]);
    std::vector<double>& data = tensor.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (cfg.optimizer == OptimizerKind::kSgd) {
        data[i] -= cfg.lr * grad[i];
        continue;
      }
      double& m = state.m[offset + i];
      double& v = state.v[offset + i];
      m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad[i];
      v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
      const double m_hat = m / bias1;
      const double v_hat = v / bias2;
      data[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
    offset += data.size();
  });
}

}  // namespace detail

// Episodic training: each epoch shuffles the pool, cuts it into batches of
// cfg.batch episodes (a shorter final batch is kept), and takes one
// optimizer step per batch on the mean squared target-prediction error.
inline std::pair<ModelParams, TrainReport> train(
    ModelParams params, const std::vector<Episode>& episodes,
    const TrainConfig& cfg) {
  validate_train_config(cfg);
  validate_model(params);
  const std::vector<Episode> pool = expand_episode_pool(episodes, cfg.cv_mode);
  if (pool.empty()) throw value_error("train: episode pool is empty");

  TrainReport report;
  report.pool_size = pool.size();
  report.epoch_loss.reserve(cfg.epochs);

  Rng shuffle_rng(derive_seed(cfg.seed, 101));
  detail::OptimizerState state;
  state.m.assign(model_parameter_count(params), 0.0);
  state.v.assign(model_parameter_count(params), 0.0);

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Tape tape;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_total = 0.0;
    std::size_t batch_count = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch);
      tape.reset();
      const ModelVars vars = load_model(tape, params);
      std::vector<Var> preds;
      std::vector<double> labels;
      preds.reserve(stop - start);
      labels.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const EpisodeForward fwd = forward_episode(tape, vars, pool[order[i]]);
        preds.push_back(fwd.prediction);
        labels.push_back(fwd.target_label);
        report.degenerate_support |= fwd.degenerate;
      }
      const Var loss = mse_loss(tape, preds, labels);
      const double loss_value = tape.scalar_value(loss);
      if (!std::isfinite(loss_value) || loss_value > cfg.divergence_cap) {
        throw numeric_error(
            "training diverged at epoch " + std::to_string(epoch + 1) +
            ", batch " + std::to_string(batch_count + 1) + ": loss = " +
            format_double(loss_value));
      }
      loss_total += loss_value;
      ++batch_count;
      tape.backward(loss);
      detail::apply_gradients(params, vars, tape, cfg, state);
    }
    report.epoch_loss.push_back(loss_total /
                                static_cast<double>(batch_count));
  }
  return {std::move(params), std::move(report)};
}

// Scores a model on a set of episodes. Under kFull every circular fold is
// scored, so each member of each episode receives exactly one prediction;
// otherwise only the episode's own target is scored.
inline EvalReport evaluate(const ModelParams& params,
                           const std::vector<Episode>& episodes, CvMode mode) {
  validate_model(params);
  if (episodes.empty()) throw value_error("evaluate: no episodes given");

  EvalReport report;
  Tape tape;
  const auto score_one = [&](const Episode& episode) {
    tape.reset();
    const ModelVars vars = load_model(tape, params);
    const EpisodeForward fwd = forward_episode(tape, vars, episode);
    report.degenerate_support |= fwd.degenerate;
    report.predictions.push_back({episode.test_id,
                                  episode.members.back().subject_id,
                                  tape.scalar_value(fwd.prediction),
                                  fwd.target_label});
  };
  for (const Episode& episode : episodes) {
    if (mode == CvMode::kFull) {
      for (const Episode& fold : circular_shift_folds(episode)) {
        score_one(fold);
      }
    } else {
      score_one(episode);
    }
  }

  std::vector<double> preds;
  std::vector<double> labels;
  preds.reserve(report.predictions.size());
  labels.reserve(report.predictions.size());
  for (const PredictionRecord& rec : report.predictions) {
    preds.push_back(rec.predicted);
    labels.push_back(rec.label);
  }
  report.mae = mae(preds, labels);
  report.sd = sd_abs_errors(preds, labels);
  return report;
}

// One fixed, seeded subject order shared by every traditional window.
inline std::vector<std::string> fixed_subject_order(
    std::span<const std::string> subjects, std::uint64_t seed) {
  std::vector<std::string> order(subjects.begin(), subjects.end());
  Rng rng(seed);
  rng.shuffle(order);
  return order;
}

// Traditional (non-episodic) organization: for every test, each subject gets
// one window whose support is its k-1 predecessors in the fixed order
// (wrapping circularly), with the subject itself as the target. Consecutive
// windows overlap in k-1 subjects and never re-sample, so the pairing
// between a subject and its support is identical in every epoch.
inline std::vector<Episode> build_traditional_windows(
    std::span<const std::string> subjects, const Dataset& data, std::size_t k,
    std::uint64_t seed) {
  if (k == 0) {
    throw value_error("traditional windows: window size must be positive");
  }
  if (subjects.size() < k) {
    throw value_error("traditional windows: need at least " +
                      std::to_string(k) + " subjects, got " +
                      std::to_string(subjects.size()));
  }
  const std::vector<std::string> order = fixed_subject_order(subjects, seed);
  const std::size_t n = order.size();
  const DatasetIndex index(data);

  std::vector<Episode> windows;
  windows.reserve(n * data.test_ids().size());
  for (const std::string& test_id : data.test_ids()) {
    for (std::size_t p = 0; p < n; ++p) {
      Episode window;
      window.test_id = test_id;
      window.members.reserve(k);
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t pos = (p + n - (k - 1) + i) % n;
        window.members.push_back(
            data.records[index.at(order[pos], test_id)]);
      }
      windows.push_back(std::move(window));
    }
  }
  return windows;
}

// Seed stream for the fixed traditional subject order; exposed so that
// evaluation can rebuild windows for a different split under the same run.
inline std::uint64_t traditional_order_seed(std::uint64_t run_seed) {
  return derive_seed(run_seed, 7);
}

// Traditional training: same loss and updates as `train`, but over fixed
// sliding windows instead of sampled episodes. Folding is disabled because
// rotating a window would contradict its fixed-support semantics.
inline std::pair<ModelParams, TrainReport> train_traditional(
    ModelParams params, std::span<const std::string> subjects,
    const Dataset& data, std::size_t k, const TrainConfig& cfg) {
  const std::vector<Episode> windows = build_traditional_windows(
      subjects, data, k, traditional_order_seed(cfg.seed));
  TrainConfig window_cfg = cfg;
  window_cfg.cv_mode = CvMode::kNA;
  return train(std::move(params), windows, window_cfg);
}

}  // namespace gazescore
