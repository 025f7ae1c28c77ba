#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "gazescore/dataset.hpp"
#include "gazescore/rng.hpp"
#include "gazescore/shapley.hpp"
#include "gazescore/synthetic.hpp"

using namespace gazescore;

namespace {

Dataset small_synth(std::size_t subjects, std::size_t tests,
                    std::uint64_t seed) {
  return normalize_scores(generate_synthetic(subjects, tests, 19, seed));
}

std::vector<std::vector<double>> feature_rows(const Dataset& data) {
  std::vector<std::vector<double>> rows;
  for (const SubjectRecord& rec : data.records) rows.push_back(rec.features);
  return rows;
}

std::vector<double> column_means(const std::vector<std::vector<double>>& rows) {
  std::vector<double> means(rows.front().size(), 0.0);
  for (const std::vector<double>& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) means[j] += row[j];
  }
  for (double& m : means) m /= static_cast<double>(rows.size());
  return means;
}

}  // namespace

TEST_CASE("a constant predictor earns zero attribution everywhere") {
  const Dataset data = small_synth(4, 2, 6);
  const AttributionReport report = shapley_impact(
      [](std::span<const double>) { return 3.25; }, data, 5, 77);
  REQUIRE(report.mean_abs.size() == 19);
  for (double v : report.mean_abs) REQUIRE(v == 0.0);
}

TEST_CASE("attribution for a linear predictor matches its closed form") {
  const Dataset data = small_synth(6, 2, 8);
  const std::vector<std::vector<double>> rows = feature_rows(data);
  const std::vector<double> means = column_means(rows);

  std::vector<double> coef(19, 0.0);
  for (std::size_t j = 0; j < coef.size(); ++j) {
    coef[j] = (static_cast<double>(j % 3) - 1.0) * (0.4 + 0.05 * j);
  }
  const auto linear = [&](std::span<const double> x) {
    double out = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) out += coef[j] * x[j];
    return out;
  };

  const std::vector<double>& point = rows.front();
  const ShapleyEstimate est = shapley_values(linear, rows, point, 2000, 7);
  for (std::size_t j = 0; j < coef.size(); ++j) {
    const double expected = coef[j] * (point[j] - means[j]);
    REQUIRE_THAT(est.phi[j], Catch::Matchers::WithinAbs(
                                 expected, 3.0 * est.se[j] + 1e-12));
  }
}

TEST_CASE("attributions telescope to the centered prediction") {
  const Dataset data = small_synth(6, 2, 12);
  const std::vector<std::vector<double>> rows = feature_rows(data);

  const auto predictor = [](std::span<const double> x) {
    return x[0] * x[1] + std::sin(x[2]) + 0.5 * x[3] * x[3] - 0.8 * x[4];
  };
  double background_mean = 0.0;
  for (const std::vector<double>& row : rows) background_mean += predictor(row);
  background_mean /= static_cast<double>(rows.size());

  // Evaluate at the row farthest from the background mean so the relative
  // bound is exercised against a well-separated target.
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (std::abs(predictor(rows[i]) - background_mean) >
        std::abs(predictor(rows[best]) - background_mean)) {
      best = i;
    }
  }
  const std::vector<double>& point = rows[best];
  const double target = predictor(point) - background_mean;
  REQUIRE(std::abs(target) > 0.05);  // fixture must exercise the property

  const ShapleyEstimate est = shapley_values(predictor, rows, point, 2000, 5);
  const double total = std::accumulate(est.phi.begin(), est.phi.end(), 0.0);
  REQUIRE_THAT(total, Catch::Matchers::WithinAbs(target,
                                                 0.05 * std::abs(target)));
}

TEST_CASE("duplicated feature columns earn equal attribution") {
  Rng rng(31);
  std::vector<std::vector<double>> rows;
  for (int r = 0; r < 12; ++r) {
    std::vector<double> row = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                               rng.uniform(-2.0, 2.0), 0.0};
    row[3] = row[2];  // identical twin column
    rows.push_back(std::move(row));
  }
  const auto predictor = [](std::span<const double> x) {
    return 1.5 * (x[2] + x[3]) + 0.7 * x[0];
  };
  const std::vector<double>& point = rows[0];
  const ShapleyEstimate est = shapley_values(predictor, rows, point, 4000, 2);
  const double spread =
      3.0 * std::sqrt(est.se[2] * est.se[2] + est.se[3] * est.se[3]);
  REQUIRE_THAT(est.phi[2],
               Catch::Matchers::WithinAbs(est.phi[3], spread + 1e-12));
}

TEST_CASE("impact ranking follows coefficient-times-spread for linear models") {
  const Dataset data = small_synth(6, 2, 9);
  std::vector<double> coef(19, 0.0);
  coef[0] = 5.0;
  coef[4] = -3.0;
  coef[9] = 1.5;
  const auto linear = [&](std::span<const double> x) {
    double out = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) out += coef[j] * x[j];
    return out;
  };

  const AttributionReport report = shapley_impact(linear, data, 300, 4);

  // Inactive features change the prediction by exactly zero.
  for (std::size_t j = 0; j < 19; ++j) {
    if (coef[j] == 0.0) REQUIRE(report.mean_abs[j] == 0.0);
  }

  // Active features rank by |coefficient| x mean absolute deviation.
  const std::vector<std::vector<double>> rows = feature_rows(data);
  const std::vector<double> means = column_means(rows);
  const auto mad = [&](std::size_t j) {
    double total = 0.0;
    for (const std::vector<double>& row : rows) {
      total += std::abs(row[j] - means[j]);
    }
    return total / static_cast<double>(rows.size());
  };
  const std::vector<std::size_t> active = {0, 4, 9};
  for (std::size_t a : active) {
    for (std::size_t b : active) {
      if (std::abs(coef[a]) * mad(a) > std::abs(coef[b]) * mad(b)) {
        REQUIRE(report.mean_abs[a] > report.mean_abs[b]);
      }
    }
  }
}

TEST_CASE("attribution sampling is deterministic in the seed") {
  const Dataset data = small_synth(4, 2, 10);
  const std::vector<std::vector<double>> rows = feature_rows(data);
  const auto predictor = [](std::span<const double> x) {
    return x[0] - 2.0 * x[5] + x[7] * x[7];
  };
  const ShapleyEstimate a = shapley_values(predictor, rows, rows[0], 50, 123);
  const ShapleyEstimate b = shapley_values(predictor, rows, rows[0], 50, 123);
  const ShapleyEstimate c = shapley_values(predictor, rows, rows[0], 50, 124);
  REQUIRE(a.phi == b.phi);
  REQUIRE(a.phi != c.phi);
}

TEST_CASE("attribution rejects degenerate sampling setups") {
  const std::vector<std::vector<double>> rows = {{1.0, 2.0}};
  const auto f = [](std::span<const double>) { return 0.0; };
  REQUIRE_THROWS_AS(
      shapley_values(f, rows, std::vector<double>{1.0, 2.0}, 0, 1),
      value_error);
  REQUIRE_THROWS_AS(shapley_values(f, {}, std::vector<double>{1.0}, 5, 1),
                    value_error);
  REQUIRE_THROWS_AS(
      shapley_values(f, rows, std::vector<double>{1.0, 2.0, 3.0}, 5, 1),
      dimension_error);
}
