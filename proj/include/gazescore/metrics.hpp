#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "gazescore/errors.hpp"

namespace gazescore {

// Accuracy summary on the normalized score scale: MAE is reported as a
// percentage of the 100-point scale; SD is the population standard deviation
// of the absolute errors (kept on the normalized scale).
struct MetricReport {
  double mae = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

// One scored prediction, tagged with where it came from.
struct PredictionRecord {
  std::string test_id;
  std::string subject_id;
  double predicted = 0.0;
  double label = 0.0;
};

inline double mae(std::span<const double> preds,
                  std::span<const double> labels) {
  if (preds.empty() || preds.size() != labels.size()) {
    throw value_error("mae: need equal nonempty prediction/label lists");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    total += std::abs(labels[i] - preds[i]);
  }
  return total / static_cast<double>(preds.size()) * 100.0;
}

inline double sd_abs_errors(std::span<const double> preds,
                            std::span<const double> labels) {
  if (preds.empty() || preds.size() != labels.size()) {
    throw value_error("sd_abs_errors: need equal nonempty lists");
  }
  const std::size_t n = preds.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean += std::abs(labels[i] - preds[i]);
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::abs(labels[i] - preds[i]) - mean;
    var += c * c;
  }
  return std::sqrt(var / static_cast<double>(n));
}

inline MetricReport compute_metrics(std::span<const double> preds,
                                    std::span<const double> labels) {
  return {mae(preds, labels), sd_abs_errors(preds, labels), preds.size()};
}

}  // namespace gazescore
