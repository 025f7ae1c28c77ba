#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gazescore/dataset.hpp"
#include "gazescore/errors.hpp"
#include "gazescore/metrics.hpp"
#include "gazescore/rng.hpp"
#include "gazescore/tensor.hpp"

namespace gazescore {

// Linear predictor fitted by one of the classical baselines. The last
// coefficient multiplies the design matrix's trailing intercept column.
struct LinearModel {
  std::vector<double> coef;
  bool converged = true;
  std::size_t iterations = 0;
  // Bayesian-ridge precisions; zero for plain least squares.
  double weight_precision = 0.0;
  double noise_precision = 0.0;
};

namespace detail {

// Solves A x = b for symmetric positive-definite A (row-major n x n) by an
// in-place Cholesky factorization.
inline std::vector<double> cholesky_solve(std::vector<double> a,
                                          std::vector<double> b,
                                          std::size_t n) {
  if (a.size() != n * n || b.size() != n) {
    throw dimension_error("cholesky_solve: inconsistent system sizes");
  }
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw numeric_error(
          "cholesky_solve: matrix is not positive definite (singular "
          "system)");
    }
    const double root = std::sqrt(diag);
    a[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double sum = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = sum / root;
    }
  }
  // Forward substitution: L z = b.
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= a[i * n + k] * b[k];
    b[i] = sum / a[i * n + i];
  }
  // Back substitution: L^T x = z.
  for (std::size_t i = n; i-- > 0;) {
    double sum = b[i];
    for (std::size_t k = i + 1; k < n; ++k) sum -= a[k * n + i] * b[k];
    b[i] = sum / a[i * n + i];
  }
  return b;
}

inline void check_regression_inputs(const Tensor& x,
                                    std::span<const double> y,
                                    const char* who) {
  if (x.rank() != 2) {
    throw dimension_error(std::string(who) + ": design matrix must be 2-d");
  }
  if (x.dim(0) != y.size()) {
    throw dimension_error(std::string(who) + ": " + std::to_string(x.dim(0)) +
                          " rows but " + std::to_string(y.size()) +
                          " targets");
  }
}

}  // namespace detail

// Builds the design matrix for the given records: one row per record holding
// its features followed by a trailing 1.0 intercept column.
inline Tensor design_matrix(std::span<const SubjectRecord> records) {
  if (records.empty()) {
    throw value_error("design_matrix: no records given");
  }
  const std::size_t d = records.front().features.size();
  std::vector<double> cells;
  cells.reserve(records.size() * (d + 1));
  for (const SubjectRecord& rec : records) {
    if (rec.features.size() != d) {
      throw dimension_error("design_matrix: inconsistent feature widths");
    }
    cells.insert(cells.end(), rec.features.begin(), rec.features.end());
    cells.push_back(1.0);
  }
  return Tensor::matrix(records.size(), d + 1, std::move(cells));
}

inline double predict_linear(const LinearModel& model,
                             std::span<const double> features) {
  if (features.size() + 1 != model.coef.size()) {
    throw dimension_error("predict_linear: expected " +
                          std::to_string(model.coef.size() - 1) +
                          " features, got " +
                          std::to_string(features.size()));
  }
  double value = model.coef.back();  // intercept
  for (std::size_t j = 0; j < features.size(); ++j) {
    value += model.coef[j] * features[j];
  }
  return value;
}

// Ordinary least squares via the normal equations, with a fixed 1e-10 ridge
// jitter on the diagonal so benign rank deficiencies do not abort the solve.
inline LinearModel least_squares_fit(const Tensor& x,
                                     std::span<const double> y) {
  detail::check_regression_inputs(x, y, "least_squares_fit");
  const std::size_t rows = x.dim(0);
  const std::size_t cols = x.dim(1);
  if (rows < cols) {
    throw value_error("least_squares_fit: need at least " +
                      std::to_string(cols) + " rows, got " +
                      std::to_string(rows));
  }

  std::vector<double> gram(cols * cols, 0.0);
  std::vector<double> moment(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < cols; ++i) {
      const double xi = x(r, i);
      moment[i] += xi * y[r];
      for (std::size_t j = i; j < cols; ++j) {
        gram[i * cols + j] += xi * x(r, j);
      }
    }
  }
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      gram[i * cols + j] = gram[j * cols + i];
    }
    gram[i * cols + i] += 1e-10;
  }

  LinearModel model;
  model.coef = detail::cholesky_solve(std::move(gram), std::move(moment),
                                      cols);
  return model;
}

// Bayesian linear regression fitted by evidence maximization: alternate
// closed-form updates of the weight precision (alpha) and noise precision
// (lambda) with the posterior mean/covariance until both stabilize.
inline LinearModel bayesian_ridge_fit(const Tensor& x,
                                      std::span<const double> y,
                                      std::size_t max_iter = 300,
                                      double tol = 1e-6) {
  detail::check_regression_inputs(x, y, "bayesian_ridge_fit");
  const std::size_t rows = x.dim(0);
  const std::size_t cols = x.dim(1);
  if (rows < 2) {
    throw value_error("bayesian_ridge_fit: need at least 2 rows");
  }
  if (max_iter == 0 || !(tol > 0.0)) {
    throw value_error("bayesian_ridge_fit: bad iteration controls");
  }

  std::vector<double> gram(cols * cols, 0.0);
  std::vector<double> moment(cols, 0.0);
  double yy = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    yy += y[r] * y[r];
    for (std::size_t i = 0; i < cols; ++i) {
      const double xi = x(r, i);
      moment[i] += xi * y[r];
      for (std::size_t j = i; j < cols; ++j) {
        gram[i * cols + j] += xi * x(r, j);
      }
    }
  }
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      gram[i * cols + j] = gram[j * cols + i];
    }
  }

  double alpha = 1.0;   // weight precision
  double lambda = 1.0;  // noise precision
  LinearModel model;
  model.converged = false;

  for (std::size_t iter = 1; iter <= max_iter; ++iter) {
    // Posterior covariance is (alpha I + lambda X'X)^-1; we only need its
    // trace and the posterior mean, both via Cholesky solves.
    std::vector<double> a(cols * cols);
    for (std::size_t i = 0; i < cols * cols; ++i) a[i] = lambda * gram[i];
    for (std::size_t i = 0; i < cols; ++i) a[i * cols + i] += alpha;

    std::vector<double> rhs(cols);
    for (std::size_t i = 0; i < cols; ++i) rhs[i] = lambda * moment[i];
    std::vector<double> mean = detail::cholesky_solve(a, rhs, cols);

    double trace_cov = 0.0;
    for (std::size_t i = 0; i < cols; ++i) {
      std::vector<double> unit(cols, 0.0);
      unit[i] = 1.0;
      trace_cov += detail::cholesky_solve(a, std::move(unit), cols)[i];
    }

    double mean_sq = 0.0;
    for (double m : mean) mean_sq += m * m;
    // Residual sum of squares: y'y - 2 mean'X'y + mean'X'X mean.
    double rss = yy;
    for (std::size_t i = 0; i < cols; ++i) {
      rss -= 2.0 * mean[i] * moment[i];
      for (std::size_t j = 0; j < cols; ++j) {
        rss += mean[i] * gram[i * cols + j] * mean[j];
      }
    }
    rss = std::max(rss, 1e-30);

    const double gamma =
        static_cast<double>(cols) - alpha * trace_cov;  // effective dims
    const double alpha_next =
        std::max(gamma, 1e-12) / std::max(mean_sq, 1e-30);
    const double lambda_next =
        std::max(static_cast<double>(rows) - gamma, 1e-12) / rss;
    if (!(alpha_next > 0.0) || !(lambda_next > 0.0) ||
        !std::isfinite(alpha_next) || !std::isfinite(lambda_next)) {
      throw numeric_error("bayesian_ridge_fit: precision update left the "
                          "positive domain");
    }

    const double rel_change = std::abs(alpha_next - alpha) / alpha +
                              std::abs(lambda_next - lambda) / lambda;
    alpha = alpha_next;
    lambda = lambda_next;
    model.coef = std::move(mean);
    model.iterations = iter;
    if (rel_change < tol) {
      model.converged = true;
      break;
    }
  }

  // Final posterior mean under the last precisions.
  std::vector<double> a(cols * cols);
  for (std::size_t i = 0; i < cols * cols; ++i) a[i] = lambda * gram[i];
  for (std::size_t i = 0; i < cols; ++i) a[i * cols + i] += alpha;
  std::vector<double> rhs(cols);
  for (std::size_t i = 0; i < cols; ++i) rhs[i] = lambda * moment[i];
  model.coef = detail::cholesky_solve(std::move(a), std::move(rhs), cols);
  model.weight_precision = alpha;
  model.noise_precision = lambda;
  return model;
}

enum class CvScheme { kKFold4, kLeaveOneOut };

inline std::string to_string(CvScheme scheme) {
  return scheme == CvScheme::kKFold4 ? "4-fold" : "leave-one-out";
}

using LinearFitter =
    std::function<LinearModel(const Tensor&, std::span<const double>)>;

struct CrossvalReport {
  MetricReport metrics;
  std::vector<PredictionRecord> predictions;
  std::size_t fits = 0;
};

// Participant-level folds: subjects are shuffled once (seeded) and cut into
// `folds` nearly equal groups; records never split across folds.
inline std::vector<std::vector<std::string>> participant_folds(
    std::span<const std::string> subjects, std::size_t folds,
    std::uint64_t seed) {
  if (folds == 0 || subjects.size() < folds) {
    throw value_error("participant_folds: need at least " +
                      std::to_string(folds) + " participants, got " +
                      std::to_string(subjects.size()));
  }
  std::vector<std::string> order(subjects.begin(), subjects.end());
  Rng rng(derive_seed(seed, 71));
  rng.shuffle(order);

  std::vector<std::vector<std::string>> out(folds);
  const std::size_t base = order.size() / folds;
  const std::size_t extra = order.size() % folds;
  std::size_t cursor = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    out[f].assign(order.begin() + cursor, order.begin() + cursor + size);
    cursor += size;
  }
  return out;
}

// Fits on all participants outside each fold and predicts the held-out
// participants' records; aggregates the errors across every fold.
inline CrossvalReport crossval_eval(const LinearFitter& fitter,
                                    const Dataset& data, CvScheme scheme,
                                    std::uint64_t seed) {
  if (!data.normalized) {
    throw value_error("crossval_eval: normalize scores first");
  }
  const std::vector<std::string> subjects = data.subject_ids();
  std::vector<std::vector<std::string>> folds;
  if (scheme == CvScheme::kLeaveOneOut) {
    for (const std::string& s : subjects) folds.push_back({s});
  } else {
    folds = participant_folds(subjects, 4, seed);
  }

  CrossvalReport report;
  for (const std::vector<std::string>& fold : folds) {
    const auto held_out = [&](const std::string& subject) {
      return std::find(fold.begin(), fold.end(), subject) != fold.end();
    };
    std::vector<SubjectRecord> train;
    std::vector<const SubjectRecord*> test;
    for (const SubjectRecord& rec : data.records) {
      if (held_out(rec.subject_id)) {
        test.push_back(&rec);
      } else {
        train.push_back(rec);
      }
    }
    std::vector<double> y;
    y.reserve(train.size());
    for (const SubjectRecord& rec : train) y.push_back(rec.score);

    const LinearModel model = fitter(design_matrix(train), y);
    ++report.fits;
    for (const SubjectRecord* rec : test) {
      report.predictions.push_back({rec->test_id, rec->subject_id,
                                    predict_linear(model, rec->features),
                                    rec->score});
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
  report.metrics = compute_metrics(preds, labels);
  return report;
}

}  // namespace gazescore
