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

// Trainable parameters of the recurrent embedder. Every gate reads the
// concatenation [prev_hidden, x], so each weight matrix is [h, h+d].
struct LstmWeights {
  Tensor forget_w, candidate_w, input_w, output_w;
  Tensor forget_b, candidate_b, input_b, output_b;

  std::size_t hidden() const { return forget_b.dim(0); }
  std::size_t input_dim() const { return forget_w.dim(1) - hidden(); }
};

// Entries are drawn i.i.d. uniform in [-1/sqrt(h), +1/sqrt(h)], matrices
// first (forget, candidate, input, output; row-major), then biases in the
// same gate order. The draw order is part of the reproducibility contract.
inline LstmWeights init_lstm_weights(std::size_t d, std::size_t h,
                                     std::uint64_t seed) {
  if (d == 0 || h == 0) {
    throw value_error("init_lstm_weights: dimensions must be positive");
  }
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  auto draw = [&](std::size_t n) {
    std::vector<double> out(n);
    for (double& v : out) v = rng.uniform(-bound, bound);
    return out;
  };
  LstmWeights w;
  w.forget_w = Tensor::matrix(h, h + d, draw(h * (h + d)));
  w.candidate_w = Tensor::matrix(h, h + d, draw(h * (h + d)));
  w.input_w = Tensor::matrix(h, h + d, draw(h * (h + d)));
  w.output_w = Tensor::matrix(h, h + d, draw(h * (h + d)));
  w.forget_b = Tensor::vector(draw(h));
  w.candidate_b = Tensor::vector(draw(h));
  w.input_b = Tensor::vector(draw(h));
  w.output_b = Tensor::vector(draw(h));
  return w;
}

// Handles of the weights once placed on a tape as leaves.
struct LstmWeightVars {
  Var forget_w, candidate_w, input_w, output_w;
  Var forget_b, candidate_b, input_b, output_b;
};

inline LstmWeightVars load_lstm_weights(Tape& tape, const LstmWeights& w) {
  const std::size_t h = w.hidden();
  const std::size_t cols = w.forget_w.dim(1);
  for (const Tensor* m :
       {&w.forget_w, &w.candidate_w, &w.input_w, &w.output_w}) {
    if (m->rank() != 2 || m->dim(0) != h || m->dim(1) != cols) {
      throw dimension_error("lstm weights: gate matrices must share shape [" +
                            std::to_string(h) + ", " + std::to_string(cols) +
                            "], got " + shape_string(m->shape()));
    }
  }
  for (const Tensor* b :
       {&w.forget_b, &w.candidate_b, &w.input_b, &w.output_b}) {
    if (b->rank() != 1 || b->dim(0) != h) {
      throw dimension_error("lstm weights: gate biases must share shape [" +
                            std::to_string(h) + "], got " +
                            shape_string(b->shape()));
    }
  }
  LstmWeightVars v;
  v.forget_w = tape.leaf(w.forget_w);
  v.candidate_w = tape.leaf(w.candidate_w);
  v.input_w = tape.leaf(w.input_w);
  v.output_w = tape.leaf(w.output_w);
  v.forget_b = tape.leaf(w.forget_b);
  v.candidate_b = tape.leaf(w.candidate_b);
  v.input_b = tape.leaf(w.input_b);
  v.output_b = tape.leaf(w.output_b);
  return v;
}

// Canonical flat ordering of the trainable leaves (matrices then biases);
// shared by the optimizer and the gradient checker.
inline std::vector<Var> lstm_leaves(const LstmWeightVars& v) {
  return {v.forget_w, v.candidate_w, v.input_w, v.output_w,
          v.forget_b, v.candidate_b, v.input_b, v.output_b};
}

struct LstmStateVars {
  Var cell;
  Var hidden;
};

inline LstmStateVars lstm_initial_state(Tape& tape, std::size_t h) {
  return {tape.leaf(Tensor::zeros({h})), tape.leaf(Tensor::zeros({h}))};
}

// One cell update:
//   forget = sigmoid(Wf.[prev_hidden, x] + Bf)
//   cand   = tanh  (Wg.[prev_hidden, x] + Bg)
//   in     = sigmoid(Wi.[prev_hidden, x] + Bi)
//   out    = sigmoid(Wo.[prev_hidden, x] + Bo)
//   cell'  = prev_cell o forget + cand o in
//   hidden = out o tanh(cell')
inline LstmStateVars lstm_step(Tape& tape, const LstmWeightVars& w,
                               LstmStateVars prev, Var x) {
  const Var joint = tape.concat(prev.hidden, x);
  auto gate = [&](Var matrix, Var bias) {
    return tape.add(tape.matvec(matrix, joint), bias);
  };
  const Var forget = tape.sigmoid(gate(w.forget_w, w.forget_b));
  const Var cand = tape.tanh_act(gate(w.candidate_w, w.candidate_b));
  const Var in = tape.sigmoid(gate(w.input_w, w.input_b));
  const Var out = tape.sigmoid(gate(w.output_w, w.output_b));
  const Var cell = tape.add(tape.hadamard(prev.cell, forget),
                            tape.hadamard(cand, in));
  const Var hidden = tape.hadamard(out, tape.tanh_act(cell));
  return {cell, hidden};
}

// Embeds an ordered episode, oldest support first, target last; both state
// vectors start at zero. Returns one hidden state per input, same order.
inline std::vector<Var> embed_episode(Tape& tape, const LstmWeightVars& w,
                                      std::span<const Var> xs) {
  if (xs.empty()) {
    throw value_error("embed_episode: episode must hold at least one vector");
  }
  const std::size_t h = tape.values(w.forget_b).size();
  LstmStateVars state = lstm_initial_state(tape, h);
  std::vector<Var> hidden;
  hidden.reserve(xs.size());
  for (Var x : xs) {
    state = lstm_step(tape, w, state, x);
    hidden.push_back(state.hidden);
  }
  return hidden;
}

inline std::vector<Var> embed_episode(Tape& tape, const LstmWeightVars& w,
                                      const std::vector<Var>& xs) {
  return embed_episode(tape, w, std::span<const Var>(xs));
}

}  // namespace gazescore
