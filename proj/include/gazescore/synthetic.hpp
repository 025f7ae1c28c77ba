#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gazescore/dataset.hpp"
#include "gazescore/errors.hpp"
#include "gazescore/rng.hpp"

namespace gazescore {

// Knobs of the generator. `noise` scales every nuisance term (test shifts,
// test-level label offsets, measurement noise); `nonlinearity` scales the
// squared-ability score term; `structured` adds block-correlated label
// offsets shared by groups of subjects (used by the episode-size sweep).
struct SyntheticOptions {
  bool structured = false;
  double noise = 1.0;
  double nonlinearity = 1.0;
};

namespace detail {

inline std::string padded_id(char prefix, std::size_t index,
                             std::size_t total) {
  std::size_t width = 1, cap = 10;
  while (total > cap) {
    ++width;
    cap *= 10;
  }
  std::string digits = std::to_string(index);
  while (digits.size() < width) digits.insert(digits.begin(), '0');
  return std::string(1, prefix) + digits;
}

}  // namespace detail

// Stand-in for the private reading-study data: a complete N-subjects x
// M-tests grid with raw scores on [0, 100].
//
// Latent model, all draws from independent seeded streams so option toggles
// never shift the shared latents:
//   subject i: ability a_i, identity traits t_i (in features only), and
//              three exam aptitudes (extended schema columns);
//   test j:    difficulty delta_j (feature-recoverable), a per-test label
//              offset eta_j that is NOT expressed in features (what support
//              scores can calibrate but plain feature regression cannot),
//              and small per-test feature shifts;
//   cell i,j:  measurement noise in features and score.
// Score: 50 + 14*a + nonlinearity*6*(a^2-1) + 8*delta
//        + noise*(eta_j [+ block offset] + eps_ij), clipped to [0, 100].
inline Dataset generate_synthetic(std::size_t n_subjects, std::size_t m_tests,
                                  std::size_t d, std::uint64_t seed,
                                  const SyntheticOptions& opt = {}) {
  if (n_subjects < 2 || m_tests < 1) {
    throw value_error("generate_synthetic: need at least 2 subjects and "
                      "1 test");
  }
  const FeatureSchema schema = FeatureSchema::for_dimension(d);

  constexpr std::size_t kGaze = 19;
  constexpr std::size_t kTraits = 3;
  constexpr std::size_t kBlock = 4;

  Rng column_rng(derive_seed(seed, 0));
  Rng subject_rng(derive_seed(seed, 1));
  Rng test_rng(derive_seed(seed, 2));
  Rng cell_rng(derive_seed(seed, 3));
  Rng block_rng(derive_seed(seed, 4));

  // Fixed per-column loadings of the gaze features onto the latents.
  std::vector<double> load_ability(kGaze), load_difficulty(kGaze);
  std::vector<std::array<double, kTraits>> load_traits(kGaze);
  for (std::size_t c = 0; c < kGaze; ++c) {
    load_ability[c] = 0.8 * column_rng.normal();
    load_difficulty[c] = 0.6 * column_rng.normal();
    for (std::size_t t = 0; t < kTraits; ++t) {
      load_traits[c][t] = 0.7 * column_rng.normal();
    }
  }

  std::vector<double> ability(n_subjects);
  std::vector<std::array<double, kTraits>> traits(n_subjects);
  std::vector<std::array<double, 3>> exam_aptitude(n_subjects);
  for (std::size_t i = 0; i < n_subjects; ++i) {
    ability[i] = subject_rng.normal();
    for (std::size_t t = 0; t < kTraits; ++t) {
      traits[i][t] = subject_rng.normal();
    }
    for (std::size_t e = 0; e < 3; ++e) {
      exam_aptitude[i][e] = subject_rng.normal();
    }
  }

  std::vector<double> difficulty(m_tests), label_offset(m_tests);
  std::vector<std::vector<double>> feature_shift(m_tests);
  for (std::size_t j = 0; j < m_tests; ++j) {
    difficulty[j] = test_rng.normal();
    label_offset[j] = 3.0 * test_rng.normal();
    feature_shift[j].resize(kGaze);
    for (std::size_t c = 0; c < kGaze; ++c) {
      feature_shift[j][c] = 0.25 * test_rng.normal();
    }
  }

  const std::size_t blocks = (n_subjects + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> block_offset(m_tests);
  for (std::size_t j = 0; j < m_tests; ++j) {
    block_offset[j].resize(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
      block_offset[j][b] = 4.0 * block_rng.normal();
    }
  }

  Dataset out;
  out.schema = schema;
  out.provenance = "synthetic(seed=" + std::to_string(seed) +
                   ", n=" + std::to_string(n_subjects) +
                   ", m=" + std::to_string(m_tests) +
                   ", d=" + std::to_string(d) + ")";
  out.records.reserve(n_subjects * m_tests);

  for (std::size_t i = 0; i < n_subjects; ++i) {
    const std::string sid = detail::padded_id('S', i + 1, n_subjects);
    for (std::size_t j = 0; j < m_tests; ++j) {
      SubjectRecord rec;
      rec.subject_id = sid;
      rec.test_id = detail::padded_id('T', j + 1, m_tests);
      rec.features.reserve(d);
      for (std::size_t c = 0; c < kGaze; ++c) {
        double f = load_ability[c] * ability[i] +
                   load_difficulty[c] * difficulty[j];
        for (std::size_t t = 0; t < kTraits; ++t) {
          f += load_traits[c][t] * traits[i][t];
        }
        f += opt.noise *
             (feature_shift[j][c] + 0.3 * cell_rng.normal());
        rec.features.push_back(f);
      }
      if (d == 22) {
        for (std::size_t e = 0; e < 3; ++e) {
          const double exam = 60.0 + 12.0 * ability[i] +
                              6.0 * exam_aptitude[i][e];
          rec.features.push_back(std::clamp(exam, 0.0, 100.0));
        }
      }
      double score = 50.0 + 14.0 * ability[i] +
                     opt.nonlinearity * 6.0 *
                         (ability[i] * ability[i] - 1.0) +
                     8.0 * difficulty[j];
      double nuisance = label_offset[j] + 2.0 * cell_rng.normal();
      if (opt.structured) nuisance += block_offset[j][i / kBlock];
      score += opt.noise * nuisance;
      rec.score = std::clamp(score, 0.0, 100.0);
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace gazescore
