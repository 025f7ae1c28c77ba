#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gazescore/episodes.hpp"
#include "gazescore/errors.hpp"
#include "gazescore/estimator.hpp"
#include "gazescore/lstm.hpp"
#include "gazescore/regression.hpp"
#include "gazescore/rng.hpp"
#include "gazescore/tape.hpp"

namespace gazescore {

// Full model: the recurrent embedder plus the stacked network that maps a
// pooled support summary to per-episode regression parameters. The stacked
// network operates on label-augmented embeddings, so its side length must be
// exactly hidden + 1.
struct ModelParams {
  LstmWeights lstm;
  StackedNetWeights net;

  std::size_t hidden() const { return lstm.hidden(); }
  std::size_t input_dim() const { return lstm.input_dim(); }
  std::size_t layers() const { return net.layers(); }
};

inline void validate_model(const ModelParams& params) {
  if (params.net.side() != params.lstm.hidden() + 1) {
    throw dimension_error("model: stacked network side " +
                          std::to_string(params.net.side()) +
                          " must equal hidden size + 1 = " +
                          std::to_string(params.lstm.hidden() + 1));
  }
}

inline ModelParams init_model(std::size_t input_dim, std::size_t hidden,
                              std::size_t layers, std::uint64_t seed) {
  ModelParams params{
      init_lstm_weights(input_dim, hidden, derive_seed(seed, 0)),
      init_stacked_weights(hidden, layers, derive_seed(seed, 1))};
  validate_model(params);
  return params;
}

struct ModelVars {
  LstmWeightVars lstm;
  StackedNetVars net;
};

inline ModelVars load_model(Tape& tape, const ModelParams& params) {
  validate_model(params);
  return {load_lstm_weights(tape, params.lstm),
          load_stacked_weights(tape, params.net)};
}

// Canonical parameter order used everywhere a model is walked linearly
// (gradient extraction, optimizer state, serialization).
inline std::vector<Var> model_leaves(const ModelVars& vars) {
  std::vector<Var> leaves = lstm_leaves(vars.lstm);
  const std::vector<Var> net = stacked_leaves(vars.net);
  leaves.insert(leaves.end(), net.begin(), net.end());
  return leaves;
}

// Visits every parameter tensor in the canonical order; used to pair model
// tensors with flat optimizer state.
template <typename Params, typename Fn>
void for_each_model_tensor(Params& params, Fn&& fn) {
  fn(params.lstm.forget_w);
  fn(params.lstm.candidate_w);
  fn(params.lstm.input_w);
  fn(params.lstm.output_w);
  fn(params.lstm.forget_b);
  fn(params.lstm.candidate_b);
  fn(params.lstm.input_b);
  fn(params.lstm.output_b);
  for (std::size_t layer = 0; layer < params.net.layers(); ++layer) {
    fn(params.net.weights[layer]);
    fn(params.net.biases[layer]);
  }
}

inline std::size_t model_parameter_count(const ModelParams& params) {
  std::size_t total = 0;
  for_each_model_tensor(params, [&](const Tensor& t) { total += t.numel(); });
  return total;
}

// One episode pushed through the whole pipeline. The prediction node depends
// only on the member features and the support labels; the held-out target
// label never enters the recording and is handed back for the caller's loss.
struct EpisodeForward {
  Var prediction;
  double target_label = 0.0;
  // True when the support set was empty (k = 1): the regression parameters
  // degenerate to zero and the prediction is identically zero.
  bool degenerate = false;
};

inline EpisodeForward forward_episode(Tape& tape, const ModelVars& model,
                                      const Episode& episode) {
  if (episode.members.empty()) {
    throw value_error("forward_episode: episode has no members");
  }
  for (const SubjectRecord& rec : episode.members) {
    if (!std::isfinite(rec.score) || rec.score < 0.0 || rec.score > 1.0) {
      throw value_error("forward_episode: subject '" + rec.subject_id +
                        "' test '" + rec.test_id +
                        "' has score outside [0, 1]; normalize scores first");
    }
  }

  const std::size_t k = episode.members.size();
  std::vector<Var> inputs;
  inputs.reserve(k);
  for (const SubjectRecord& rec : episode.members) {
    inputs.push_back(tape.vector_leaf(rec.features));
  }
  const std::vector<Var> embeddings = embed_episode(tape, model.lstm, inputs);

  if (k == 1) {
    const std::size_t h = tape.values(embeddings[0]).size();
    RegressionParamVars params{tape.zeros_leaf(h), tape.scalar_leaf(0.0)};
    return {predict(tape, params, embeddings[0]), episode.members[0].score,
            true};
  }

  std::vector<Var> support(embeddings.begin(), embeddings.end() - 1);
  std::vector<double> support_labels;
  support_labels.reserve(k - 1);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    support_labels.push_back(episode.members[i].score);
  }
  const RegressionParamVars params =
      estimate_params(tape, model.net, support, support_labels);
  return {predict(tape, params, embeddings[k - 1]),
          episode.members[k - 1].score, false};
}

}  // namespace gazescore
