#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "gazescore/dataset.hpp"
#include "gazescore/errors.hpp"
#include "gazescore/rng.hpp"

namespace gazescore {

using RowPredictor = std::function<double(std::span<const double>)>;

// Per-feature mean absolute attribution across every evaluation point.
struct AttributionReport {
  std::vector<double> mean_abs;
  std::size_t samples = 0;  // permutation samples per evaluation point
  std::uint64_t seed = 0;
};

// Attribution estimate for a single evaluation point, with the Monte Carlo
// standard error of each component.
struct ShapleyEstimate {
  std::vector<double> phi;
  std::vector<double> se;
  std::size_t samples = 0;
};

// Permutation-sampling Shapley values against a marginal background: each
// sample draws a background row and a feature order, then walks the order
// switching features from the background's values to the point's values,
// crediting each feature with the induced change in the prediction. Summed
// over a sample the credits telescope to f(point) - f(background), so the
// estimates inherit the efficiency property up to background sampling noise.
inline ShapleyEstimate shapley_values(
    const RowPredictor& predictor,
    const std::vector<std::vector<double>>& background,
    std::span<const double> point, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) {
    throw value_error("shapley_values: need at least one sample");
  }
  if (background.empty()) {
    throw value_error("shapley_values: background set is empty");
  }
  const std::size_t d = point.size();
  for (const std::vector<double>& row : background) {
    if (row.size() != d) {
      throw dimension_error("shapley_values: background width mismatch");
    }
  }

  std::vector<double> sum(d, 0.0);
  std::vector<double> sum_sq(d, 0.0);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> x(d);
  Rng rng(seed);

  for (std::size_t s = 0; s < samples; ++s) {
    const std::vector<double>& base = background[rng.below(background.size())];
    rng.shuffle(order);
    x.assign(base.begin(), base.end());
    double before = predictor(x);
    for (std::size_t j : order) {
      x[j] = point[j];
      const double after = predictor(x);
      const double credit = after - before;
      sum[j] += credit;
      sum_sq[j] += credit * credit;
      before = after;
    }
  }

  ShapleyEstimate estimate;
  estimate.samples = samples;
  estimate.phi.resize(d);
  estimate.se.resize(d);
  const double n = static_cast<double>(samples);
  for (std::size_t j = 0; j < d; ++j) {
    estimate.phi[j] = sum[j] / n;
    const double var = std::max(0.0, sum_sq[j] / n -
                                         estimate.phi[j] * estimate.phi[j]);
    estimate.se[j] = std::sqrt(var / n);
  }
  return estimate;
}

// Dataset-level impact: every record is an evaluation point explained
// against the dataset's own rows as the marginal background, each point with
// its own derived seed so the loop order never matters.
inline AttributionReport shapley_impact(const RowPredictor& predictor,
                                        const Dataset& data,
                                        std::size_t samples,
                                        std::uint64_t seed) {
  if (data.records.empty()) {
    throw value_error("shapley_impact: dataset has no records");
  }
  const std::size_t d = data.schema.dimension();
  std::vector<std::vector<double>> background;
  background.reserve(data.records.size());
  for (const SubjectRecord& rec : data.records) {
    background.push_back(rec.features);
  }

  AttributionReport report;
  report.samples = samples;
  report.seed = seed;
  report.mean_abs.assign(d, 0.0);
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const ShapleyEstimate estimate =
        shapley_values(predictor, background, data.records[i].features,
                       samples, derive_seed(seed, i));
    for (std::size_t j = 0; j < d; ++j) {
      report.mean_abs[j] += std::abs(estimate.phi[j]);
    }
  }
  for (double& v : report.mean_abs) {
    v /= static_cast<double>(data.records.size());
  }
  return report;
}

}  // namespace gazescore
