#pragma once

// Core data model: prediction records, paired-run grids, execution matrices,
// killing-probability vectors and per-mutant quality records.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "mutqual/error.hpp"

namespace mutqual {

enum class ModelKind : std::uint8_t { original, faulty, mutant };

constexpr std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::original: return "original";
    case ModelKind::faulty: return "faulty";
    case ModelKind::mutant: return "mutant";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view text) {
  if (text == "original") return ModelKind::original;
  if (text == "faulty") return ModelKind::faulty;
  if (text == "mutant") return ModelKind::mutant;
  throw Error(ErrorKind::BadModelKind, "model_kind=" + std::string(text));
}

/// One hard-label prediction of one model instance on one test input.
struct PredictionRecord {
  std::string dataset_id;
  std::string subject_id;
  ModelKind model_kind = ModelKind::original;
  std::string config_id;  // non-empty iff model_kind == mutant
  std::int64_t run_index = 1;
  std::string test_id;
  std::string true_label;
  std::string predicted_label;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// Uniqueness key of a record within one log.
struct RecordKey {
  std::string dataset_id;
  std::string subject_id;
  ModelKind model_kind;
  std::string config_id;
  std::int64_t run_index;
  std::string test_id;

  friend auto operator<=>(const RecordKey&, const RecordKey&) = default;
};

inline RecordKey key_of(const PredictionRecord& r) {
  return {r.dataset_id, r.subject_id, r.model_kind, r.config_id, r.run_index, r.test_id};
}

inline std::string to_string(const RecordKey& k) {
  return k.dataset_id + "/" + k.subject_id + "/" + std::string(to_string(k.model_kind)) +
         (k.config_id.empty() ? "" : "/" + k.config_id) + "/run " + std::to_string(k.run_index) +
         "/" + k.test_id;
}

/// Throws on the first violated field-level invariant; the detail names the field.
inline void validate_record(const PredictionRecord& r) {
  auto require = [](const std::string& value, const char* field) {
    if (value.empty()) throw Error(ErrorKind::EmptyField, field);
  };
  require(r.dataset_id, "dataset_id");
  require(r.subject_id, "subject_id");
  if (r.model_kind != ModelKind::original && r.model_kind != ModelKind::faulty &&
      r.model_kind != ModelKind::mutant) {
    throw Error(ErrorKind::BadModelKind, "model_kind");
  }
  const bool is_mutant = r.model_kind == ModelKind::mutant;
  if (is_mutant == r.config_id.empty()) throw Error(ErrorKind::ConfigOnNonMutant, "config_id");
  if (r.run_index < 1) throw Error(ErrorKind::NonPositiveRunIndex, "run_index");
  require(r.test_id, "test_id");
  require(r.true_label, "true_label");
  require(r.predicted_label, "predicted_label");
}

using LabelId = std::uint32_t;
using TestIds = std::shared_ptr<const std::vector<std::string>>;

/// Dense n x |T| grid of interned labels, stored run-major.
class LabelGrid {
 public:
  LabelGrid() = default;
  LabelGrid(int runs, std::size_t tests) : runs_(runs), tests_(tests), cells_(runs * tests) {}

  int runs() const noexcept { return runs_; }
  std::size_t tests() const noexcept { return tests_; }

  /// `run` is 1-based, matching run_index.
  LabelId at(int run, std::size_t test) const { return cells_[(run - 1) * tests_ + test]; }
  LabelId& at(int run, std::size_t test) { return cells_[(run - 1) * tests_ + test]; }

  friend bool operator==(const LabelGrid&, const LabelGrid&) = default;

 private:
  int runs_ = 0;
  std::size_t tests_ = 0;
  std::vector<LabelId> cells_;
};

/// The reserved variant id of a subject's faulty model.
inline constexpr std::string_view kFaultyVariant = "@faulty";

/// All paired predictions of one subject system: original, optional faulty,
/// and every mutant configuration, each covering test_ids x [1..n].
struct SubjectRuns {
  std::string dataset_id;
  std::string subject_id;
  int n = 0;
  TestIds test_ids;                 // sorted lexicographically
  std::vector<std::string> labels;  // LabelId -> label text
  std::vector<LabelId> true_labels;  // per test
  LabelGrid original;
  std::optional<LabelGrid> faulty;
  std::map<std::string, LabelGrid> mutants;  // config_id -> grid

  std::size_t test_count() const { return test_ids ? test_ids->size() : 0; }

  /// nullptr when `variant_id` names neither the faulty model nor a mutant.
  const LabelGrid* variant(std::string_view variant_id) const {
    if (variant_id == kFaultyVariant) return faulty ? &*faulty : nullptr;
    auto it = mutants.find(std::string(variant_id));
    return it == mutants.end() ? nullptr : &it->second;
  }

  friend bool operator==(const SubjectRuns& a, const SubjectRuns& b) {
    return a.dataset_id == b.dataset_id && a.subject_id == b.subject_id && a.n == b.n &&
           *a.test_ids == *b.test_ids && a.labels == b.labels && a.true_labels == b.true_labels &&
           a.original == b.original && a.faulty == b.faulty && a.mutants == b.mutants;
  }
};

/// Binary killing indicators for one variant: rows are tests in canonical
/// order, columns are runs 1..n.
struct ExecutionMatrix {
  std::string variant_id;
  TestIds test_ids;
  int n = 0;
  std::vector<std::uint8_t> cells;  // row-major, |T| x n

  std::size_t rows() const { return test_ids ? test_ids->size() : 0; }
  std::uint8_t at(std::size_t test, int run) const { return cells[test * n + (run - 1)]; }
  std::uint8_t& at(std::size_t test, int run) { return cells[test * n + (run - 1)]; }
};

/// Per-test killing probabilities held exactly as kills[t] / n.
struct KPVector {
  std::string variant_id;
  TestIds test_ids;
  int n = 0;
  std::vector<std::uint32_t> kills;

  std::size_t size() const { return kills.size(); }
  double value(std::size_t test) const { return static_cast<double>(kills[test]) / n; }
  std::vector<double> values() const {
    std::vector<double> out(kills.size());
    for (std::size_t t = 0; t < kills.size(); ++t) out[t] = value(t);
    return out;
  }
};

struct MutantQuality {
  std::string dataset_id;
  std::string subject_id;
  std::string config_id;
  std::string family_id;
  double s_m = 0.0;
  double iq = 0.0;
  std::optional<double> eq;  // absent when the subject has no faulty model

  friend bool operator==(const MutantQuality&, const MutantQuality&) = default;
};

struct FamilyStats {
  std::string family_id;
  std::int64_t mutant_count = 0;
  std::int64_t high_high_count = 0;
  double hit_rate = 0.0;

  static FamilyStats from_counts(std::string family_id, std::int64_t mutants, std::int64_t hh) {
    return {std::move(family_id), mutants, hh,
            static_cast<double>(hh) / static_cast<double>(mutants)};
  }

  friend bool operator==(const FamilyStats&, const FamilyStats&) = default;
};

}  // namespace mutqual
