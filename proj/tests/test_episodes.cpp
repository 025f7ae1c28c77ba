// Train/test subject splitting, episode grouping, and circular-shift folds.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gazescore/episodes.hpp"
#include "gazescore/errors.hpp"
#include "gazescore/synthetic.hpp"

using namespace gazescore;

TEST_CASE("split_train_test uses floor(r*N) deterministic assignment",
          "[episodes]") {
  SECTION("68 subjects at r=0.9 give 61 train, 7 test") {
    Dataset d = generate_synthetic(68, 2, 19, 1);
    SplitConfig cfg{0.9, 3, 42};
    TrainTestSplit s = split_train_test(d, cfg);
    CHECK(s.train.size() == 61);
    CHECK(s.test.size() == 7);
  }
  SECTION("r close to 1 keeps at least one test subject") {
    Dataset d = generate_synthetic(10, 2, 19, 1);
    SplitConfig cfg{0.99, 3, 42};
    TrainTestSplit s = split_train_test(d, cfg);
    CHECK(s.train.size() == 9);
    CHECK(s.test.size() == 1);
  }
  SECTION("same seed reproduces the split; different seed moves it") {
    Dataset d = generate_synthetic(20, 2, 19, 5);
    SplitConfig cfg{0.8, 3, 7};
    TrainTestSplit a = split_train_test(d, cfg);
    TrainTestSplit b = split_train_test(d, cfg);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    cfg.seed = 8;
    TrainTestSplit c = split_train_test(d, cfg);
    CHECK(a.train != c.train);
  }
  SECTION("split is disjoint and exhaustive") {
    Dataset d = generate_synthetic(17, 2, 19, 5);
    SplitConfig cfg{0.7, 2, 99};
    TrainTestSplit s = split_train_test(d, cfg);
    std::set<std::string> all(s.train.begin(), s.train.end());
    for (const auto& id : s.test) CHECK(all.insert(id).second);
    CHECK(all.size() == 17);
  }
  SECTION("too-small training side is a split error") {
    Dataset d = generate_synthetic(4, 2, 19, 5);
    SplitConfig cfg{0.5, 3, 1};
    CHECK_THROWS_AS(split_train_test(d, cfg), value_error);
  }
  SECTION("train fraction must lie in (0,1)") {
    Dataset d = generate_synthetic(10, 2, 19, 5);
    CHECK_THROWS_AS(split_train_test(d, SplitConfig{0.0, 2, 1}), value_error);
    CHECK_THROWS_AS(split_train_test(d, SplitConfig{1.0, 2, 1}), value_error);
  }
}

TEST_CASE("build_episodes partitions shuffled subjects per test",
          "[episodes]") {
  Dataset d = generate_synthetic(61, 4, 19, 11);
  const std::vector<std::string> subjects = d.subject_ids();
  SplitConfig cfg{0.9, 3, 202};

  std::vector<Episode> eps = build_episodes(subjects, d, cfg);

  SECTION("61 subjects at k=3 give 20 episodes per test") {
    CHECK(eps.size() == 20 * 4);
    std::map<std::string, int> per_test;
    for (const auto& e : eps) ++per_test[e.test_id];
    for (const auto& [tid, count] : per_test) CHECK(count == 20);
  }
  SECTION("members share the episode's test id and are distinct subjects") {
    for (const auto& e : eps) {
      REQUIRE(e.members.size() == 3);
      std::set<std::string> ids;
      for (const auto& m : e.members) {
        CHECK(m.test_id == e.test_id);
        CHECK(ids.insert(m.subject_id).second);
      }
    }
  }
  SECTION("per test, episodes are disjoint and cover 60 subjects") {
    std::map<std::string, std::set<std::string>> used;
    for (const auto& e : eps) {
      for (const auto& m : e.members) {
        CHECK(used[e.test_id].insert(m.subject_id).second);
      }
    }
    for (const auto& [tid, ids] : used) CHECK(ids.size() == 60);
  }
  SECTION("identical config reproduces the same episodes") {
    std::vector<Episode> again = build_episodes(subjects, d, cfg);
    REQUIRE(again.size() == eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
      CHECK(again[i].test_id == eps[i].test_id);
      for (std::size_t m = 0; m < eps[i].members.size(); ++m) {
        CHECK(again[i].members[m].subject_id == eps[i].members[m].subject_id);
      }
    }
  }
}

TEST_CASE("build_episodes edge cases", "[episodes]") {
  Dataset d = generate_synthetic(5, 2, 19, 3);
  const std::vector<std::string> subjects = d.subject_ids();
  SECTION("k=1 yields one single-member episode per subject per test") {
    SplitConfig cfg{0.9, 1, 17};
    std::vector<Episode> eps = build_episodes(subjects, d, cfg);
    CHECK(eps.size() == 5 * 2);
    for (const auto& e : eps) CHECK(e.members.size() == 1);
  }
  SECTION("fewer subjects than k is an episode error") {
    SplitConfig cfg{0.9, 6, 17};
    CHECK_THROWS_AS(build_episodes(subjects, d, cfg), value_error);
  }
  SECTION("features must be standardized-compatible: members carry data") {
    SplitConfig cfg{0.9, 2, 17};
    std::vector<Episode> eps = build_episodes(subjects, d, cfg);
    for (const auto& e : eps) {
      for (const auto& m : e.members) REQUIRE(m.features.size() == 19);
    }
  }
}

TEST_CASE("circular folds rotate each member into the target slot",
          "[episodes]") {
  Dataset d = generate_synthetic(3, 1, 19, 77);
  SplitConfig cfg{0.9, 3, 5};
  std::vector<Episode> eps = build_episodes(d.subject_ids(), d, cfg);
  REQUIRE(eps.size() == 1);
  const Episode& e = eps[0];
  const std::string a = e.members[0].subject_id;
  const std::string b = e.members[1].subject_id;
  const std::string c = e.members[2].subject_id;

  std::vector<Episode> folds = circular_shift_folds(e);
  REQUIRE(folds.size() == 3);

  SECTION("fold 0 is the original; targets cycle C, A, B") {
    CHECK(folds[0].members[2].subject_id == c);
    CHECK(folds[1].members[2].subject_id == a);
    CHECK(folds[2].members[2].subject_id == b);
    CHECK(folds[0].members[0].subject_id == a);
    CHECK(folds[1].members[0].subject_id == b);
    CHECK(folds[2].members[0].subject_id == c);
  }
  SECTION("k rotations return to the original ordering") {
    Episode rotated = folds[0];
    for (int t = 0; t < 3; ++t) rotated = circular_shift_folds(rotated)[1];
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(rotated.members[i].subject_id == e.members[i].subject_id);
    }
  }
  SECTION("targets across folds cover the members exactly once") {
    std::multiset<std::string> targets, members;
    for (const auto& f : folds) targets.insert(f.members.back().subject_id);
    for (const auto& m : e.members) members.insert(m.subject_id);
    CHECK(targets == members);
  }
}

TEST_CASE("single-member episodes have a single identity fold", "[episodes]") {
  Dataset d = generate_synthetic(2, 1, 19, 8);
  SplitConfig cfg{0.6, 1, 5};
  std::vector<Episode> eps = build_episodes(d.subject_ids(), d, cfg);
  REQUIRE_FALSE(eps.empty());
  std::vector<Episode> folds = circular_shift_folds(eps[0]);
  REQUIRE(folds.size() == 1);
  CHECK(folds[0].members[0].subject_id == eps[0].members[0].subject_id);
}

TEST_CASE("episode and fold invariants hold across N and k",
          "[episodes][property]") {
  for (std::size_t n = 5; n <= 20; ++n) {
    Dataset d = generate_synthetic(n, 2, 19, 1000 + n);
    for (std::size_t k = 1; k <= 5; ++k) {
      SplitConfig cfg{0.9, k, 31 * n + k};
      const std::size_t train_count =
          static_cast<std::size_t>(0.9 * static_cast<double>(n));
      if (train_count < k) {
        CHECK_THROWS_AS(split_train_test(d, cfg), value_error);
        continue;
      }
      TrainTestSplit split = split_train_test(d, cfg);
      REQUIRE(split.train.size() == train_count);

      std::vector<Episode> eps = build_episodes(split.train, d, cfg);
      const std::size_t groups = split.train.size() / k;
      REQUIRE(eps.size() == groups * 2);

      const std::set<std::string> test_ids(split.test.begin(),
                                           split.test.end());
      std::map<std::string, std::set<std::string>> used;
      for (const auto& e : eps) {
        REQUIRE(e.members.size() == k);
        for (const auto& m : e.members) {
          // Leakage check: training episodes never contain test subjects.
          REQUIRE(test_ids.count(m.subject_id) == 0);
          REQUIRE(used[e.test_id].insert(m.subject_id).second);
        }
        // Fold coverage and k-shift identity.
        std::vector<Episode> folds = circular_shift_folds(e);
        REQUIRE(folds.size() == k);
        std::multiset<std::string> targets;
        for (const auto& f : folds) {
          targets.insert(f.members.back().subject_id);
        }
        std::multiset<std::string> members;
        for (const auto& m : e.members) members.insert(m.subject_id);
        REQUIRE(targets == members);
      }
      for (const auto& [tid, ids] : used) REQUIRE(ids.size() == groups * k);
    }
  }
}
