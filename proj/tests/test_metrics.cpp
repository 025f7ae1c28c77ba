#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "gazescore/metrics.hpp"

using namespace gazescore;

TEST_CASE("mae reports mean absolute error as a percentage") {
  // Residuals 0.04 and 0.02 on the normalized scale average to 0.03,
  // i.e. three points on the 100-point scale.
  const std::vector<double> preds = {0.50, 0.50};
  const std::vector<double> labels = {0.54, 0.48};
  REQUIRE_THAT(mae(preds, labels),
               Catch::Matchers::WithinAbs(3.0, 1e-12));
}

TEST_CASE("mae is invariant under a common shift of both series") {
  const std::vector<double> preds = {0.1, 0.4, 0.9};
  const std::vector<double> labels = {0.2, 0.35, 0.8};
  std::vector<double> preds_shift = preds;
  std::vector<double> labels_shift = labels;
  for (double& v : preds_shift) v += 0.05;
  for (double& v : labels_shift) v += 0.05;
  REQUIRE_THAT(mae(preds_shift, labels_shift),
               Catch::Matchers::WithinAbs(mae(preds, labels), 1e-12));
}

TEST_CASE("mae is invariant under reordering the pairs") {
  const std::vector<double> preds = {0.1, 0.4, 0.9, 0.3};
  const std::vector<double> labels = {0.2, 0.35, 0.8, 0.33};
  const std::vector<double> preds_perm = {0.3, 0.9, 0.1, 0.4};
  const std::vector<double> labels_perm = {0.33, 0.8, 0.2, 0.35};
  REQUIRE_THAT(mae(preds_perm, labels_perm),
               Catch::Matchers::WithinAbs(mae(preds, labels), 1e-12));
  REQUIRE_THAT(sd_abs_errors(preds_perm, labels_perm),
               Catch::Matchers::WithinAbs(sd_abs_errors(preds, labels),
                                          1e-12));
}

TEST_CASE("sd_abs_errors is the population deviation of absolute errors") {
  // Absolute errors {0.0, 0.2}: mean 0.1, population variance 0.01.
  const std::vector<double> preds = {0.5, 0.5};
  const std::vector<double> labels = {0.5, 0.7};
  REQUIRE_THAT(sd_abs_errors(preds, labels),
               Catch::Matchers::WithinAbs(0.1, 1e-12));
}

TEST_CASE("a perfect predictor scores zero error and zero spread") {
  const std::vector<double> labels = {0.12, 0.5, 0.98, 0.0};
  const MetricReport report = compute_metrics(labels, labels);
  REQUIRE(report.mae == 0.0);
  REQUIRE(report.sd == 0.0);
  REQUIRE(report.count == 4);
}

TEST_CASE("metrics reject empty or mismatched inputs") {
  const std::vector<double> empty;
  const std::vector<double> one = {0.5};
  const std::vector<double> two = {0.5, 0.6};
  REQUIRE_THROWS_AS(mae(empty, empty), value_error);
  REQUIRE_THROWS_AS(mae(one, two), value_error);
  REQUIRE_THROWS_AS(sd_abs_errors(empty, empty), value_error);
  REQUIRE_THROWS_AS(sd_abs_errors(two, one), value_error);
}
