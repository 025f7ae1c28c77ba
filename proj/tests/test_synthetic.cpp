// Synthetic dataset generation: determinism, dimensions, score range, and
// the option toggles used by the experiment suite.
#include <catch2/catch_amalgamated.hpp>

#include <cstddef>
#include <set>
#include <vector>

#include "gazescore/errors.hpp"
#include "gazescore/synthetic.hpp"

using namespace gazescore;

TEST_CASE("same seed reproduces the dataset bit for bit", "[synthetic]") {
  Dataset a = generate_synthetic(12, 7, 19, 31337);
  Dataset b = generate_synthetic(12, 7, 19, 31337);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].subject_id == b.records[i].subject_id);
    CHECK(a.records[i].test_id == b.records[i].test_id);
    CHECK(a.records[i].score == b.records[i].score);
    CHECK(a.records[i].features == b.records[i].features);
  }
  Dataset c = generate_synthetic(12, 7, 19, 31338);
  CHECK(a.records[0].score != c.records[0].score);
}

TEST_CASE("benchmark dimensions produce the full grid", "[synthetic]") {
  Dataset d = generate_synthetic(68, 42, 22, 7);
  CHECK(d.records.size() == 68 * 42);
  CHECK(d.schema.dimension() == 22);
  CHECK(d.subject_ids().size() == 68);
  CHECK(d.test_ids().size() == 42);
  CHECK_FALSE(d.normalized);

  // Complete grid: every subject has every test exactly once.
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : d.records) {
    REQUIRE(r.features.size() == 22);
    CHECK(seen.insert({r.subject_id, r.test_id}).second);
  }
}

TEST_CASE("scores stay on the raw 0-100 scale", "[synthetic]") {
  Dataset d = generate_synthetic(40, 20, 19, 99);
  double lo = 1e9, hi = -1e9;
  for (const auto& r : d.records) {
    REQUIRE(r.score >= 0.0);
    REQUIRE(r.score <= 100.0);
    lo = std::min(lo, r.score);
    hi = std::max(hi, r.score);
  }
  // The range should be meaningfully exercised.
  CHECK(hi - lo > 20.0);
}

TEST_CASE("dimension must be 19 or 22 and sizes positive", "[synthetic]") {
  CHECK_THROWS_AS(generate_synthetic(10, 5, 20, 1), value_error);
  CHECK_THROWS_AS(generate_synthetic(1, 5, 19, 1), value_error);
  CHECK_THROWS_AS(generate_synthetic(10, 0, 19, 1), value_error);
}

TEST_CASE("noise and nonlinearity toggles share latent draws", "[synthetic]") {
  SyntheticOptions noisy;
  SyntheticOptions silent;
  silent.noise = 0.0;
  silent.nonlinearity = 0.0;
  Dataset a = generate_synthetic(8, 5, 19, 2024, noisy);
  Dataset b = generate_synthetic(8, 5, 19, 2024, silent);
  REQUIRE(a.records.size() == b.records.size());
  // Same subjects and tests in the same order; different realized values.
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].subject_id == b.records[i].subject_id);
    CHECK(a.records[i].test_id == b.records[i].test_id);
  }

  // With all noise off, the noiseless dataset must be reproducible on its
  // own (pure function of the latents).
  Dataset b2 = generate_synthetic(8, 5, 19, 2024, silent);
  for (std::size_t i = 0; i < b.records.size(); ++i) {
    CHECK(b.records[i].score == b2.records[i].score);
    CHECK(b.records[i].features == b2.records[i].features);
  }
}

TEST_CASE("structured mode alters labels, not features", "[synthetic]") {
  SyntheticOptions plain;
  SyntheticOptions blocked;
  blocked.structured = true;
  Dataset a = generate_synthetic(16, 6, 19, 606, plain);
  Dataset b = generate_synthetic(16, 6, 19, 606, blocked);
  REQUIRE(a.records.size() == b.records.size());
  bool any_score_differs = false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].features == b.records[i].features);
    any_score_differs =
        any_score_differs || a.records[i].score != b.records[i].score;
  }
  CHECK(any_score_differs);
}
