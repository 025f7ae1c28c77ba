#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gazescore/errors.hpp"
#include "gazescore/rng.hpp"
#include "gazescore/tape.hpp"
#include "gazescore/tensor.hpp"

namespace gazescore {

// The stacked dense network that turns support pairs into regression
// parameters: L layers, each a square affine map of side h+1 followed by
// ReLU (the final layer included).
struct StackedNetWeights {
  std::vector<Tensor> weights;  // each [h+1, h+1]
  std::vector<Tensor> biases;   // each [h+1]

  std::size_t layers() const { return weights.size(); }
  std::size_t side() const { return weights.empty() ? 0 : weights[0].dim(0); }
};

// Entries drawn i.i.d. uniform in [-1/sqrt(h+1), +1/sqrt(h+1)], layer by
// layer, each layer's matrix (row-major) before its bias.
inline StackedNetWeights init_stacked_weights(std::size_t h, std::size_t L,
                                              std::uint64_t seed) {
  if (h == 0 || L == 0) {
    throw value_error("init_stacked_weights: h and L must be positive");
  }
  const std::size_t side = h + 1;
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(side));
  auto draw = [&](std::size_t n) {
    std::vector<double> out(n);
    for (double& v : out) v = rng.uniform(-bound, bound);
    return out;
  };
  StackedNetWeights net;
  for (std::size_t l = 0; l < L; ++l) {
    net.weights.push_back(Tensor::matrix(side, side, draw(side * side)));
    net.biases.push_back(Tensor::vector(draw(side)));
  }
  return net;
}

struct StackedNetVars {
  std::vector<Var> weights;
  std::vector<Var> biases;
};

inline StackedNetVars load_stacked_weights(Tape& tape,
                                           const StackedNetWeights& net) {
  if (net.weights.empty() || net.weights.size() != net.biases.size()) {
    throw value_error("stacked weights: need one bias per layer and at least "
                      "one layer");
  }
  const std::size_t side = net.side();
  StackedNetVars v;
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const Tensor& w = net.weights[l];
    const Tensor& b = net.biases[l];
    if (w.rank() != 2 || w.dim(0) != side || w.dim(1) != side) {
      throw dimension_error("stacked weights: layer " + std::to_string(l) +
                            " matrix must be [" + std::to_string(side) + ", " +
                            std::to_string(side) + "], got " +
                            shape_string(w.shape()));
    }
    if (b.rank() != 1 || b.dim(0) != side) {
      throw dimension_error("stacked weights: layer " + std::to_string(l) +
                            " bias must be [" + std::to_string(side) +
                            "], got " + shape_string(b.shape()));
    }
    v.weights.push_back(tape.leaf(w));
    v.biases.push_back(tape.leaf(b));
  }
  return v;
}

// Canonical flat ordering of the trainable leaves (per layer: matrix, bias).
inline std::vector<Var> stacked_leaves(const StackedNetVars& v) {
  std::vector<Var> out;
  out.reserve(2 * v.weights.size());
  for (std::size_t l = 0; l < v.weights.size(); ++l) {
    out.push_back(v.weights[l]);
    out.push_back(v.biases[l]);
  }
  return out;
}

// Appends a normalized score after the embedding entries: [z_1..z_h, y].
// The score's admissible range is enforced where episodes are assembled.
inline Var append_label(Tape& tape, Var z, Var y) {
  return tape.concat(z, y);
}

inline Var append_label(Tape& tape, Var z, double y) {
  if (!std::isfinite(y)) {
    throw value_error("append_label: score must be finite");
  }
  return tape.concat(z, tape.scalar_leaf(y));
}

// Applies the L stacked layers: v -> relu(W_l v + b_l), in layer order.
inline Var stacked_forward(Tape& tape, const StackedNetVars& net, Var v) {
  if (net.weights.empty() || net.weights.size() != net.biases.size()) {
    throw value_error("stacked_forward: need one bias per layer and at least "
                      "one layer");
  }
  Var cur = v;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    cur = tape.relu(tape.add(tape.matvec(net.weights[l], cur), net.biases[l]));
  }
  return cur;
}

// Per-episode linear regression parameters: a weight vector over the
// embedding entries plus an intercept.
struct RegressionParamVars {
  Var w;
  Var beta;
};

// Runs every support pair through append_label + stacked_forward, sums the
// resulting vectors over the support set (fixed input order), and splits the
// total u into w = u[0..h) and beta = u[h].
inline RegressionParamVars estimate_params(Tape& tape,
                                           const StackedNetVars& net,
                                           std::span<const Var> embeddings,
                                           std::span<const double> labels) {
  if (embeddings.empty()) {
    throw value_error("estimate_params: support set must be nonempty");
  }
  if (embeddings.size() != labels.size()) {
    throw value_error("estimate_params: " + std::to_string(embeddings.size()) +
                      " embeddings vs " + std::to_string(labels.size()) +
                      " labels");
  }
  Var total = stacked_forward(
      tape, net, append_label(tape, embeddings[0], labels[0]));
  for (std::size_t s = 1; s < embeddings.size(); ++s) {
    Var out = stacked_forward(
        tape, net, append_label(tape, embeddings[s], labels[s]));
    total = tape.add(total, out);
  }
  const std::size_t side = tape.values(total).size();
  return {tape.slice(total, 0, side - 1), tape.slice(total, side - 1, 1)};
}

inline RegressionParamVars estimate_params(Tape& tape,
                                           const StackedNetVars& net,
                                           const std::vector<Var>& embeddings,
                                           const std::vector<double>& labels) {
  return estimate_params(tape, net, std::span<const Var>(embeddings),
                         std::span<const double>(labels));
}

}  // namespace gazescore
