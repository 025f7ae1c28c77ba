#pragma once

#include <span>
#include <vector>

#include "gazescore/errors.hpp"
#include "gazescore/estimator.hpp"
#include "gazescore/tape.hpp"

namespace gazescore {

// y* = w . z + beta, differentiable through all three inputs. Predictions are
// deliberately not clamped here; clamping to [0,1] is a presentation step
// applied only when writing CLI reports.
inline Var predict(Tape& tape, const RegressionParamVars& params, Var z) {
  return tape.add(tape.dot(params.w, z), params.beta);
}

// Batch loss: (1/n) * sum_i (y_i - y*_i)^2.
inline Var mse_loss(Tape& tape, std::span<const Var> preds,
                    std::span<const double> labels) {
  if (preds.empty()) {
    throw value_error("mse_loss: batch must be nonempty");
  }
  if (preds.size() != labels.size()) {
    throw value_error("mse_loss: " + std::to_string(preds.size()) +
                      " predictions vs " + std::to_string(labels.size()) +
                      " labels");
  }
  Var total = tape.square(tape.sub(tape.scalar_leaf(labels[0]), preds[0]));
  for (std::size_t i = 1; i < preds.size(); ++i) {
    Var term = tape.square(tape.sub(tape.scalar_leaf(labels[i]), preds[i]));
    total = tape.add(total, term);
  }
  return tape.scale(total, 1.0 / static_cast<double>(preds.size()));
}

inline Var mse_loss(Tape& tape, const std::vector<Var>& preds,
                    const std::vector<double>& labels) {
  return mse_loss(tape, std::span<const Var>(preds),
                  std::span<const double>(labels));
}

}  // namespace gazescore
