#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "gazescore/errors.hpp"

namespace gazescore {

// Shortest decimal representation that parses back to the identical double;
// used for every numeric field we serialize so round-trips are bit-exact.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

// Strict full-string parse; locale independent.
inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && end == s.data() + s.size();
}

// Active feature columns. The 19 gaze columns are opaque names f1..f19; the
// extended schema appends the three exam-score indicators.
struct FeatureSchema {
  std::vector<std::string> names;

  std::size_t dimension() const { return names.size(); }

  static FeatureSchema for_dimension(std::size_t d) {
    if (d != 19 && d != 22) {
      throw value_error("feature dimension must be 19 or 22, got " +
                        std::to_string(d));
    }
    FeatureSchema s;
    for (int i = 1; i <= 19; ++i) s.names.push_back("f" + std::to_string(i));
    if (d == 22) {
      s.names.push_back("chinese");
      s.names.push_back("math");
      s.names.push_back("english");
    }
    return s;
  }
};

// One subject-test measurement: the feature vector and the attained score
// (raw 0-100 until normalize_scores is applied).
struct SubjectRecord {
  std::string subject_id;
  std::string test_id;
  double score = 0.0;
  std::vector<double> features;
};

// A row that failed validation, with the reason kept for the rejection
// report rather than being silently dropped.
struct RowIssue {
  std::string subject_id;
  std::string test_id;
  std::string reason;
};

struct Dataset {
  FeatureSchema schema;
  std::vector<SubjectRecord> records;
  std::vector<RowIssue> flagged;
  bool normalized = false;
  std::string provenance;

  // Unique ids in first-appearance order (stable across runs).
  std::vector<std::string> subject_ids() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& r : records) {
      if (seen.insert(r.subject_id).second) out.push_back(r.subject_id);
    }
    return out;
  }

  std::vector<std::string> test_ids() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& r : records) {
      if (seen.insert(r.test_id).second) out.push_back(r.test_id);
    }
    return out;
  }
};

// Fast (subject, test) -> record position lookup over an immutable dataset.
class DatasetIndex {
 public:
  explicit DatasetIndex(const Dataset& d) {
    for (std::size_t i = 0; i < d.records.size(); ++i) {
      at_[d.records[i].subject_id][d.records[i].test_id] = i;
    }
  }

  std::size_t at(const std::string& subject, const std::string& test) const {
    auto s = at_.find(subject);
    if (s != at_.end()) {
      auto t = s->second.find(test);
      if (t != s->second.end()) return t->second;
    }
    throw value_error("no record for subject " + subject + ", test " + test);
  }

 private:
  std::map<std::string, std::map<std::string, std::size_t>> at_;
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace detail

// Reads the CSV contract `subject_id,test_id,score,<features...>`. Leading
// `#` lines (provenance comments written by the CLI) are skipped. The
// header must match the schema exactly; rows that fail to parse are kept in
// `flagged` with a reason instead of being dropped.
inline Dataset load_dataset(const std::filesystem::path& path,
                            const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw data_error("cannot open dataset file " + path.string());
  }
  std::string line;
  do {
    if (!std::getline(in, line)) {
      throw data_error("dataset file " + path.string() + " has no header");
    }
    line = detail::strip_cr(line);
  } while (!line.empty() && line.front() == '#');

  std::vector<std::string> expected{"subject_id", "test_id", "score"};
  for (const auto& n : schema.names) expected.push_back(n);
  const auto found = detail::split_csv_line(line);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= found.size()) {
      throw data_error("header is missing column '" + expected[i] + "'");
    }
    if (found[i] != expected[i]) {
      throw data_error("header column " + std::to_string(i + 1) +
                       ": expected '" + expected[i] + "', found '" +
                       std::string(found[i]) + "'");
    }
  }
  if (found.size() > expected.size()) {
    throw data_error("header has unexpected extra column '" +
                     std::string(found[expected.size()]) + "'");
  }

  Dataset d;
  d.schema = schema;
  d.provenance = path.string();
  const std::size_t want = expected.size();

  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    const std::string sid =
        fields.size() > 0 ? std::string(fields[0]) : std::string();
    const std::string tid =
        fields.size() > 1 ? std::string(fields[1]) : std::string();
    if (fields.size() != want) {
      d.flagged.push_back({sid, tid,
                           "row has " + std::to_string(fields.size()) +
                               " columns, expected " + std::to_string(want)});
      continue;
    }
    if (sid.empty() || tid.empty()) {
      d.flagged.push_back({sid, tid, "empty subject_id or test_id"});
      continue;
    }
    SubjectRecord rec;
    rec.subject_id = sid;
    rec.test_id = tid;
    if (!parse_double(fields[2], rec.score)) {
      d.flagged.push_back({sid, tid, "score is not numeric"});
      continue;
    }
    if (!std::isfinite(rec.score)) {
      d.flagged.push_back({sid, tid, "score is not finite"});
      continue;
    }
    bool ok = true;
    rec.features.reserve(schema.dimension());
    for (std::size_t j = 0; j < schema.dimension(); ++j) {
      double v = 0.0;
      if (!parse_double(fields[3 + j], v)) {
        d.flagged.push_back(
            {sid, tid, "feature " + schema.names[j] + " is not numeric"});
        ok = false;
        break;
      }
      if (!std::isfinite(v)) {
        d.flagged.push_back(
            {sid, tid, "feature " + schema.names[j] + " is not finite"});
        ok = false;
        break;
      }
      rec.features.push_back(v);
    }
    if (ok) d.records.push_back(std::move(rec));
  }
  return d;
}

// Writes the CSV contract back out. A nonempty `comment` becomes a single
// `# ...` provenance line above the header (the loader skips it).
inline void save_dataset(const std::filesystem::path& path, const Dataset& d,
                         const std::string& comment = "") {
  std::ofstream out(path);
  if (!out) {
    throw data_error("cannot write dataset file " + path.string());
  }
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "subject_id,test_id,score";
  for (const auto& n : d.schema.names) out << ',' << n;
  out << '\n';
  for (const auto& r : d.records) {
    out << r.subject_id << ',' << r.test_id << ',' << format_double(r.score);
    for (double f : r.features) out << ',' << format_double(f);
    out << '\n';
  }
}

// Rejection report per the data contract: one line per removal reason. The
// free-text reason is quoted since it may contain commas.
inline void save_row_issues(const std::filesystem::path& path,
                            std::span<const RowIssue> issues) {
  std::ofstream out(path);
  if (!out) {
    throw data_error("cannot write rejection report " + path.string());
  }
  out << "subject_id,test_id,reason\n";
  for (const auto& i : issues) {
    out << i.subject_id << ',' << i.test_id << ",\"" << i.reason << "\"\n";
  }
}

// Removes whole subjects whose data is unusable: any flagged row, any
// missing test (relative to the union of test ids), or duplicate records.
// Returns the surviving dataset plus the rejection report.
inline std::pair<Dataset, std::vector<RowIssue>> filter_invalid(
    const Dataset& d) {
  const std::vector<std::string> tests = d.test_ids();

  std::map<std::string, std::vector<RowIssue>> causes;
  for (const auto& issue : d.flagged) {
    causes[issue.subject_id].push_back(issue);
  }
  std::map<std::string, std::map<std::string, int>> grid;
  for (const auto& r : d.records) ++grid[r.subject_id][r.test_id];
  for (const auto& [sid, counts] : grid) {
    for (const auto& t : tests) {
      const auto it = counts.find(t);
      if (it == counts.end()) {
        causes[sid].push_back({sid, t, "missing test " + t});
      } else if (it->second > 1) {
        causes[sid].push_back(
            {sid, t, "duplicate records for test " + t});
      }
    }
  }

  Dataset kept;
  kept.schema = d.schema;
  kept.normalized = d.normalized;
  kept.provenance = d.provenance;
  for (const auto& r : d.records) {
    if (causes.find(r.subject_id) == causes.end()) kept.records.push_back(r);
  }
  std::vector<RowIssue> report;
  for (const auto& [sid, issues] : causes) {
    report.insert(report.end(), issues.begin(), issues.end());
  }
  return {std::move(kept), std::move(report)};
}

// Divides raw 0-100 scores by 100, exactly once per dataset.
inline Dataset normalize_scores(const Dataset& d) {
  if (d.normalized) {
    throw value_error("normalize_scores: dataset is already normalized");
  }
  Dataset out = d;
  for (auto& r : out.records) {
    if (!std::isfinite(r.score) || r.score < 0.0 || r.score > 100.0) {
      throw data_error("score " + format_double(r.score) +
                       " outside [0, 100] for subject " + r.subject_id +
                       ", test " + r.test_id);
    }
    r.score /= 100.0;
  }
  out.normalized = true;
  return out;
}

// Per-feature location/scale computed from the training subjects only.
// Features with (population) spread below 1e-12 are marked for passthrough.
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stdev;
  std::vector<bool> passthrough;
};

inline FeatureStats compute_feature_stats(
    const Dataset& d, std::span<const std::string> train_subjects) {
  const std::set<std::string> train(train_subjects.begin(),
                                    train_subjects.end());
  const std::size_t dim = d.schema.dimension();
  FeatureStats stats;
  stats.mean.assign(dim, 0.0);
  stats.stdev.assign(dim, 0.0);
  stats.passthrough.assign(dim, false);

  std::size_t count = 0;
  for (const auto& r : d.records) {
    if (!train.count(r.subject_id)) continue;
    ++count;
    for (std::size_t j = 0; j < dim; ++j) stats.mean[j] += r.features[j];
  }
  if (count == 0) {
    throw value_error("compute_feature_stats: no training records");
  }
  for (std::size_t j = 0; j < dim; ++j) {
    stats.mean[j] /= static_cast<double>(count);
  }
  for (const auto& r : d.records) {
    if (!train.count(r.subject_id)) continue;
    for (std::size_t j = 0; j < dim; ++j) {
      const double c = r.features[j] - stats.mean[j];
      stats.stdev[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    stats.stdev[j] = std::sqrt(stats.stdev[j] / static_cast<double>(count));
    if (stats.stdev[j] < 1e-12) stats.passthrough[j] = true;
  }
  return stats;
}

// Z-scores every record with the training statistics; passthrough features
// are left untouched.
inline Dataset standardize_features(const Dataset& d,
                                    const FeatureStats& stats) {
  if (stats.mean.size() != d.schema.dimension()) {
    throw dimension_error("standardize_features: stats cover " +
                          std::to_string(stats.mean.size()) +
                          " features, dataset has " +
                          std::to_string(d.schema.dimension()));
  }
  Dataset out = d;
  for (auto& r : out.records) {
    for (std::size_t j = 0; j < stats.mean.size(); ++j) {
      if (stats.passthrough[j]) continue;
      r.features[j] = (r.features[j] - stats.mean[j]) / stats.stdev[j];
    }
  }
  return out;
}

}  // namespace gazescore
