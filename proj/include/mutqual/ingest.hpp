#pragma once

// Prediction-log parsing (line-delimited JSON or CSV) and grouping of
// records into complete, paired SubjectRuns.

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mutqual/domain.hpp"
#include "mutqual/error.hpp"

namespace mutqual {

enum class LogFormat { jsonl, csv };

inline LogFormat parse_log_format(std::string_view text) {
  if (text == "jsonl") return LogFormat::jsonl;
  if (text == "csv") return LogFormat::csv;
  throw Error(ErrorKind::MalformedLine, "unknown log format '" + std::string(text) + "'");
}

inline constexpr std::array<std::string_view, 8> kLogFields = {
    "dataset_id", "subject_id", "model_kind",      "config_id",
    "run_index",  "test_id",    "true_label", "predicted_label"};

namespace csv {

/// Splits one CSV line. Fields may be double-quoted with "" as an escaped quote.
inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw Error(ErrorKind::MalformedLine, "unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

inline std::string escape(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace csv

namespace detail {

inline bool parse_int(std::string_view text, std::int64_t& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline PredictionRecord record_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) throw Error(ErrorKind::MalformedLine, "not a JSON object");
  for (const auto& [name, value] : obj.items()) {
    if (std::find(kLogFields.begin(), kLogFields.end(), name) == kLogFields.end()) {
      throw Error(ErrorKind::UnknownField, name);
    }
  }
  auto text = [&](std::string_view field) -> std::string {
    auto it = obj.find(std::string(field));
    if (it == obj.end()) throw Error(ErrorKind::MalformedLine, "missing " + std::string(field));
    if (!it->is_string()) {
      throw Error(ErrorKind::MalformedLine, std::string(field) + " is not a string");
    }
    return it->get<std::string>();
  };
  PredictionRecord r;
  r.dataset_id = text("dataset_id");
  r.subject_id = text("subject_id");
  r.model_kind = parse_model_kind(text("model_kind"));
  r.config_id = text("config_id");
  auto run = obj.find("run_index");
  if (run == obj.end()) throw Error(ErrorKind::MalformedLine, "missing run_index");
  if (!run->is_number_integer()) throw Error(ErrorKind::MalformedLine, "run_index is not an integer");
  r.run_index = run->get<std::int64_t>();
  r.test_id = text("test_id");
  r.true_label = text("true_label");
  r.predicted_label = text("predicted_label");
  return r;
}

inline PredictionRecord record_from_csv(const std::vector<std::string>& f) {
  if (f.size() != kLogFields.size()) {
    throw Error(ErrorKind::MalformedLine,
                "expected 8 fields, found " + std::to_string(f.size()));
  }
  PredictionRecord r;
  r.dataset_id = f[0];
  r.subject_id = f[1];
  r.model_kind = parse_model_kind(f[2]);
  r.config_id = f[3];
  if (!parse_int(f[4], r.run_index)) {
    throw Error(ErrorKind::MalformedLine, "run_index '" + f[4] + "' is not an integer");
  }
  r.test_id = f[5];
  r.true_label = f[6];
  r.predicted_label = f[7];
  return r;
}

inline void check_csv_header(const std::vector<std::string>& header) {
  for (const auto& name : header) {
    if (std::find(kLogFields.begin(), kLogFields.end(), name) == kLogFields.end()) {
      throw Error(ErrorKind::UnknownField, name);
    }
  }
  if (header.size() != kLogFields.size() ||
      !std::equal(header.begin(), header.end(), kLogFields.begin())) {
    throw Error(ErrorKind::MalformedLine, "header must list the schema fields in schema order");
  }
}

}  // namespace detail

/// Parses a whole log. Records come back in file order; each has passed
/// validate_record and keys are unique. Aborts on the first error, located by
/// line number.
inline std::vector<PredictionRecord> parse_log(std::istream& in, LogFormat format) {
  std::vector<PredictionRecord> records;
  std::set<RecordKey> seen;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    const std::string where = "line " + std::to_string(line_no);
    try {
      if (format == LogFormat::csv && !header_seen) {
        detail::check_csv_header(csv::split(line));
        header_seen = true;
        continue;
      }
      if (line.empty()) continue;
      PredictionRecord r;
      if (format == LogFormat::jsonl) {
        nlohmann::json obj;
        try {
          obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
          throw Error(ErrorKind::MalformedLine, "invalid JSON");
        }
        r = detail::record_from_json(obj);
      } else {
        r = detail::record_from_csv(csv::split(line));
      }
      validate_record(r);
      auto key = key_of(r);
      if (!seen.insert(key).second) throw Error(ErrorKind::DuplicateKey, to_string(key));
      records.push_back(std::move(r));
    } catch (const Error& e) {
      throw e.located(where);
    }
  }
  if (format == LogFormat::csv && !header_seen) {
    throw Error(ErrorKind::MalformedLine, "line 1: missing header row");
  }
  return records;
}

inline std::vector<PredictionRecord> parse_log_file(const std::string& path, LogFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path);
  try {
    return parse_log(in, format);
  } catch (const Error& e) {
    throw e.located(path);
  }
}

/// Concatenates independently parsed sources, rejecting keys that occur in
/// more than one of them.
inline std::vector<PredictionRecord> merge_logs(std::vector<std::vector<PredictionRecord>> sources) {
  std::vector<PredictionRecord> merged;
  std::set<RecordKey> seen;
  for (auto& source : sources) {
    for (auto& r : source) {
      auto key = key_of(r);
      if (!seen.insert(key).second) throw Error(ErrorKind::DuplicateKey, to_string(key));
      merged.push_back(std::move(r));
    }
  }
  return merged;
}

inline void write_csv_header(std::ostream& out) {
  for (std::size_t i = 0; i < kLogFields.size(); ++i) out << (i ? "," : "") << kLogFields[i];
  out << '\n';
}

inline void write_record(std::ostream& out, const PredictionRecord& r, LogFormat format) {
  if (format == LogFormat::jsonl) {
    nlohmann::ordered_json obj;
    obj["dataset_id"] = r.dataset_id;
    obj["subject_id"] = r.subject_id;
    obj["model_kind"] = std::string(to_string(r.model_kind));
    obj["config_id"] = r.config_id;
    obj["run_index"] = r.run_index;
    obj["test_id"] = r.test_id;
    obj["true_label"] = r.true_label;
    obj["predicted_label"] = r.predicted_label;
    out << obj.dump() << '\n';
  } else {
    out << csv::escape(r.dataset_id) << ',' << csv::escape(r.subject_id) << ','
        << to_string(r.model_kind) << ',' << csv::escape(r.config_id) << ',' << r.run_index << ','
        << csv::escape(r.test_id) << ',' << csv::escape(r.true_label) << ','
        << csv::escape(r.predicted_label) << '\n';
  }
}

inline void write_log(std::ostream& out, const std::vector<PredictionRecord>& records,
                      LogFormat format) {
  if (format == LogFormat::csv) write_csv_header(out);
  for (const auto& r : records) write_record(out, r, format);
}

using SubjectKey = std::pair<std::string, std::string>;  // (dataset_id, subject_id)

namespace detail {

struct VariantName {
  ModelKind kind;
  std::string config_id;
  friend auto operator<=>(const VariantName&, const VariantName&) = default;

  std::string describe() const {
    return kind == ModelKind::mutant ? "mutant " + config_id : std::string(to_string(kind));
  }
};

inline SubjectRuns build_subject(const SubjectKey& key,
                                 const std::vector<const PredictionRecord*>& records) {
  const std::string& subject = key.second;
  const std::string where = key.first + "/" + subject;

  std::map<std::string, std::string> truth;  // test_id -> true label
  std::set<std::string> label_text;
  std::map<VariantName, std::set<std::string>> variant_tests;
  std::set<std::int64_t> original_runs;
  std::int64_t n = 0;
  for (const auto* r : records) {
    auto [it, inserted] = truth.emplace(r->test_id, r->true_label);
    if (!inserted && it->second != r->true_label) {
      throw Error(ErrorKind::LabelConflict,
                  where + " test " + r->test_id + ": '" + it->second + "' vs '" + r->true_label + "'");
    }
    label_text.insert(r->true_label);
    label_text.insert(r->predicted_label);
    variant_tests[{r->model_kind, r->config_id}].insert(r->test_id);
    if (r->model_kind == ModelKind::original) original_runs.insert(r->run_index);
    n = std::max(n, r->run_index);
  }

  const VariantName original_name{ModelKind::original, ""};
  for (std::int64_t run = 1; run <= n; ++run) {
    if (!original_runs.count(run)) {
      throw Error(ErrorKind::MissingOriginalRun, where + " run " + std::to_string(run));
    }
  }
  const auto& tests = variant_tests.at(original_name);
  for (const auto& [variant, seen] : variant_tests) {
    if (seen == tests) continue;
    std::vector<std::string> extra;
    std::vector<std::string> missing;
    std::set_difference(seen.begin(), seen.end(), tests.begin(), tests.end(),
                        std::back_inserter(extra));
    std::set_difference(tests.begin(), tests.end(), seen.begin(), seen.end(),
                        std::back_inserter(missing));
    std::string detail = where + " " + variant.describe();
    if (!extra.empty()) detail += ": extra test_id " + extra.front();
    if (!missing.empty()) detail += (extra.empty() ? ": " : ", ") + std::string("missing test_id ") + missing.front();
    throw Error(ErrorKind::TestSetMismatch, detail);
  }

  SubjectRuns runs;
  runs.dataset_id = key.first;
  runs.subject_id = subject;
  runs.n = static_cast<int>(n);
  auto ids = std::make_shared<std::vector<std::string>>(tests.begin(), tests.end());
  std::unordered_map<std::string, std::size_t> test_index;
  for (std::size_t i = 0; i < ids->size(); ++i) test_index.emplace((*ids)[i], i);
  runs.labels.assign(label_text.begin(), label_text.end());
  std::unordered_map<std::string, LabelId> label_id;
  for (std::size_t i = 0; i < runs.labels.size(); ++i) {
    label_id.emplace(runs.labels[i], static_cast<LabelId>(i));
  }
  runs.true_labels.reserve(ids->size());
  for (const auto& t : *ids) runs.true_labels.push_back(label_id.at(truth.at(t)));

  const std::size_t cells = ids->size() * static_cast<std::size_t>(n);
  std::map<VariantName, std::pair<LabelGrid, std::size_t>> grids;  // grid, filled cells
  for (const auto& [variant, seen] : variant_tests) {
    grids.emplace(variant, std::pair{LabelGrid(runs.n, ids->size()), std::size_t{0}});
  }
  for (const auto* r : records) {
    auto& [grid, filled] = grids.at({r->model_kind, r->config_id});
    grid.at(static_cast<int>(r->run_index), test_index.at(r->test_id)) =
        label_id.at(r->predicted_label);
    ++filled;
  }
  for (const auto& [variant, entry] : grids) {
    if (entry.second == cells) continue;
    // Locate the first hole for the error message.
    std::set<std::pair<std::int64_t, std::string>> present;
    for (const auto* r : records) {
      if (VariantName{r->model_kind, r->config_id} == variant) present.emplace(r->run_index, r->test_id);
    }
    for (std::int64_t run = 1; run <= n; ++run) {
      for (const auto& t : *ids) {
        if (!present.count({run, t})) {
          throw Error(ErrorKind::IncompleteGrid,
                      where + " " + variant.describe() + ": run " + std::to_string(run) +
                          " test " + t);
        }
      }
    }
  }

  runs.test_ids = std::move(ids);
  for (auto& [variant, entry] : grids) {
    switch (variant.kind) {
      case ModelKind::original: runs.original = std::move(entry.first); break;
      case ModelKind::faulty: runs.faulty = std::move(entry.first); break;
      case ModelKind::mutant: runs.mutants.emplace(variant.config_id, std::move(entry.first)); break;
    }
  }
  return runs;
}

}  // namespace detail

/// Groups validated records into complete paired grids, one per subject.
/// A subject without faulty records is accepted; every variant must cover
/// exactly the original's test set over runs 1..n.
inline std::map<SubjectKey, SubjectRuns> group_runs(const std::vector<PredictionRecord>& records) {
  std::map<SubjectKey, std::vector<const PredictionRecord*>> buckets;
  std::set<RecordKey> seen;
  for (const auto& r : records) {
    auto key = key_of(r);
    if (!seen.insert(key).second) throw Error(ErrorKind::DuplicateKey, to_string(key));
    buckets[{r.dataset_id, r.subject_id}].push_back(&r);
  }
  std::map<SubjectKey, SubjectRuns> out;
  for (const auto& [key, bucket] : buckets) {
    const bool has_original = std::any_of(bucket.begin(), bucket.end(), [](const auto* r) {
      return r->model_kind == ModelKind::original;
    });
    if (!has_original) {
      throw Error(ErrorKind::MissingOriginalRun, key.first + "/" + key.second + " run 1");
    }
    out.emplace(key, detail::build_subject(key, bucket));
  }
  return out;
}

/// Inverse of grouping: every cell of every grid as a record, in canonical
/// order (original, faulty, mutants by config; run-major; tests sorted).
inline std::vector<PredictionRecord> flatten(const SubjectRuns& runs) {
  std::vector<PredictionRecord> out;
  auto emit = [&](ModelKind kind, const std::string& config, const LabelGrid& grid) {
    for (int run = 1; run <= runs.n; ++run) {
      for (std::size_t t = 0; t < runs.test_count(); ++t) {
        out.push_back({runs.dataset_id, runs.subject_id, kind, config, run, (*runs.test_ids)[t],
                       runs.labels[runs.true_labels[t]], runs.labels[grid.at(run, t)]});
      }
    }
  };
  emit(ModelKind::original, "", runs.original);
  if (runs.faulty) emit(ModelKind::faulty, "", *runs.faulty);
  for (const auto& [config, grid] : runs.mutants) emit(ModelKind::mutant, config, grid);
  return out;
}

}  // namespace mutqual
