#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gazescore/dataset.hpp"
#include "gazescore/errors.hpp"
#include "gazescore/rng.hpp"

namespace gazescore {

// How subjects are divided and grouped: train fraction r, episode size k,
// and the seed driving both shuffles.
struct SplitConfig {
  double r = 0.9;
  std::size_t k = 3;
  std::uint64_t seed = 0;
};

struct TrainTestSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// An ordered group of k same-test records; the last member is always the
// prediction target, the first k-1 are its support set.
struct Episode {
  std::string test_id;
  std::vector<SubjectRecord> members;

  const SubjectRecord& target() const { return members.back(); }
  std::span<const SubjectRecord> support() const {
    return {members.data(), members.size() - 1};
  }
};

// Seeded shuffle of all subject ids; the first floor(r*N) become training
// subjects, the rest testing subjects.
inline TrainTestSplit split_train_test(const Dataset& dataset,
                                       const SplitConfig& cfg) {
  if (!(cfg.r > 0.0 && cfg.r < 1.0)) {
    throw value_error("split: train fraction must lie strictly in (0,1)");
  }
  if (cfg.k == 0) {
    throw value_error("split: episode size must be at least 1");
  }
  std::vector<std::string> ids = dataset.subject_ids();
  const auto train_count = static_cast<std::size_t>(
      cfg.r * static_cast<double>(ids.size()));
  if (train_count < cfg.k) {
    throw value_error("split: floor(r*N) = " + std::to_string(train_count) +
                      " training subjects cannot form episodes of size " +
                      std::to_string(cfg.k));
  }
  Rng rng(derive_seed(cfg.seed, 17));
  rng.shuffle(ids);
  TrainTestSplit split;
  split.train.assign(ids.begin(), ids.begin() + train_count);
  split.test.assign(ids.begin() + train_count, ids.end());
  return split;
}

// For each test (in seeded-shuffled order) shuffles the given subjects and
// partitions them consecutively into floor(count/k) groups of exactly k;
// leftover subjects are dropped for that test. Group order and member order
// are both part of the deterministic output.
inline std::vector<Episode> build_episodes(
    std::span<const std::string> subject_ids, const Dataset& dataset,
    const SplitConfig& cfg) {
  if (cfg.k == 0) {
    throw value_error("episodes: size k must be at least 1");
  }
  if (subject_ids.size() < cfg.k) {
    throw value_error("episodes: " + std::to_string(subject_ids.size()) +
                      " subjects cannot form episodes of size " +
                      std::to_string(cfg.k));
  }
  const DatasetIndex index(dataset);
  std::vector<std::string> tests = dataset.test_ids();
  Rng rng(derive_seed(cfg.seed, 29));
  rng.shuffle(tests);

  std::vector<std::string> order(subject_ids.begin(), subject_ids.end());
  std::vector<Episode> episodes;
  episodes.reserve(tests.size() * (order.size() / cfg.k));
  for (const std::string& tid : tests) {
    rng.shuffle(order);
    const std::size_t groups = order.size() / cfg.k;
    for (std::size_t g = 0; g < groups; ++g) {
      Episode e;
      e.test_id = tid;
      e.members.reserve(cfg.k);
      for (std::size_t m = 0; m < cfg.k; ++m) {
        const std::size_t rec = index.at(order[g * cfg.k + m], tid);
        e.members.push_back(dataset.records[rec]);
      }
      episodes.push_back(std::move(e));
    }
  }
  return episodes;
}

// Fold t rotates the members left by t, so every subject lands in the target
// (last) slot exactly once across the k folds; fold 0 is the input episode.
inline std::vector<Episode> circular_shift_folds(const Episode& e) {
  const std::size_t k = e.members.size();
  if (k == 0) {
    throw value_error("folds: episode has no members");
  }
  std::vector<Episode> folds;
  folds.reserve(k);
  for (std::size_t t = 0; t < k; ++t) {
    Episode fold;
    fold.test_id = e.test_id;
    fold.members.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      fold.members.push_back(e.members[(i + t) % k]);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

}  // namespace gazescore
