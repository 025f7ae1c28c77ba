#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gazescore/errors.hpp"
#include "gazescore/tape.hpp"

namespace gazescore {

// A scalar loss assembled on a tape, together with the leaf handles whose
// concatenated entries (in vector order) correspond to the flat parameter
// vector the builder consumed.
struct BuiltLoss {
  Var loss;
  std::vector<Var> leaves;
};

// Maps a flat parameter vector to a recorded scalar loss. The builder must
// consume the parameters in a fixed order so repeat invocations are
// comparable.
using LossBuilder = std::function<BuiltLoss(Tape&, std::span<const double>)>;

inline double evaluate_loss(const LossBuilder& builder,
                            std::span<const double> params) {
  Tape tape;
  const BuiltLoss built = builder(tape, params);
  const double value = tape.scalar_value(built.loss);
  if (!std::isfinite(value)) {
    throw numeric_error("loss evaluated to a non-finite value");
  }
  return value;
}

// Compares the recorded (reverse-mode) gradient against central finite
// differences, one parameter at a time. Returns the largest
// |analytic - numeric| / max(1e-8, |analytic|) across all parameters.
inline double grad_check(const LossBuilder& builder,
                         std::span<const double> params, double eps = 1e-6) {
  if (eps <= 0.0) {
    throw value_error("grad_check: step must be positive");
  }

  std::vector<double> analytic;
  {
    Tape tape;
    const BuiltLoss built = builder(tape, params);
    if (!std::isfinite(tape.scalar_value(built.loss))) {
      throw numeric_error("loss evaluated to a non-finite value");
    }
    tape.backward(built.loss);
    for (Var leaf : built.leaves) {
      auto g = tape.gradient(leaf);
      analytic.insert(analytic.end(), g.begin(), g.end());
    }
  }
  if (analytic.size() != params.size()) {
    throw value_error("grad_check: builder exposed " +
                      std::to_string(analytic.size()) +
                      " parameter slots for " + std::to_string(params.size()) +
                      " inputs");
  }

  std::vector<double> probe(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + eps;
    const double plus = evaluate_loss(builder, probe);
    probe[i] = saved - eps;
    const double minus = evaluate_loss(builder, probe);
    probe[i] = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double denom = std::max(1e-8, std::abs(analytic[i]));
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > worst) worst = rel;
  }
  return worst;
}

}  // namespace gazescore
