#pragma once

// Execution matrices and killing probabilities for faulty and mutant
// variants of a subject.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>

#include "mutqual/domain.hpp"
#include "mutqual/error.hpp"

namespace mutqual {

/// A test kills a variant instance when the paired original instance
/// classifies it correctly and the variant does not.
template <typename Label>
constexpr bool killing_indicator(const Label& original, const Label& variant, const Label& truth) {
  return original == truth && variant != truth;
}

inline ExecutionMatrix build_execution_matrix(const SubjectRuns& runs, std::string_view variant_id) {
  const LabelGrid* grid = runs.variant(variant_id);
  if (grid == nullptr) throw Error(ErrorKind::UnknownVariant, std::string(variant_id));
  ExecutionMatrix m;
  m.variant_id = std::string(variant_id);
  m.test_ids = runs.test_ids;
  m.n = runs.n;
  m.cells.resize(runs.test_count() * runs.n);
  for (std::size_t t = 0; t < runs.test_count(); ++t) {
    const LabelId truth = runs.true_labels[t];
    for (int run = 1; run <= runs.n; ++run) {
      m.at(t, run) = killing_indicator(runs.original.at(run, t), grid->at(run, t), truth);
    }
  }
  return m;
}

inline KPVector killing_probabilities(const ExecutionMatrix& matrix) {
  KPVector kp;
  kp.variant_id = matrix.variant_id;
  kp.test_ids = matrix.test_ids;
  kp.n = matrix.n;
  kp.kills.assign(matrix.rows(), 0);
  for (std::size_t t = 0; t < matrix.rows(); ++t) {
    for (int run = 1; run <= matrix.n; ++run) kp.kills[t] += matrix.at(t, run);
  }
  return kp;
}

/// Both steps at once without materializing the matrix.
inline KPVector variant_killing_probabilities(const SubjectRuns& runs, std::string_view variant_id) {
  const LabelGrid* grid = runs.variant(variant_id);
  if (grid == nullptr) throw Error(ErrorKind::UnknownVariant, std::string(variant_id));
  KPVector kp;
  kp.variant_id = std::string(variant_id);
  kp.test_ids = runs.test_ids;
  kp.n = runs.n;
  kp.kills.assign(runs.test_count(), 0);
  for (int run = 1; run <= runs.n; ++run) {
    for (std::size_t t = 0; t < runs.test_count(); ++t) {
      kp.kills[t] += killing_indicator(runs.original.at(run, t), grid->at(run, t), runs.true_labels[t]);
    }
  }
  return kp;
}

/// CSV dump: header `test_id,run_1..run_n`, one 0/1 row per test.
inline void write_matrix_csv(std::ostream& out, const ExecutionMatrix& m) {
  out << "test_id";
  for (int run = 1; run <= m.n; ++run) out << ",run_" << run;
  out << '\n';
  for (std::size_t t = 0; t < m.rows(); ++t) {
    out << (*m.test_ids)[t];
    for (int run = 1; run <= m.n; ++run) out << ',' << static_cast<int>(m.at(t, run));
    out << '\n';
  }
}

/// Writes `<dir>/<dataset>__<subject>__<variant>.csv`; path separators in ids
/// are replaced by '_'.
inline std::filesystem::path dump_matrix(const std::filesystem::path& dir, const SubjectRuns& runs,
                                         const ExecutionMatrix& m) {
  auto clean = [](std::string s) {
    for (char& c : s) {
      if (c == '/' || c == '\\' || c == '@') c = '_';
    }
    return s;
  };
  const std::string variant = m.variant_id == kFaultyVariant ? "faulty" : "mutant_" + m.variant_id;
  auto path = dir / (clean(runs.dataset_id) + "__" + clean(runs.subject_id) + "__" + clean(variant) + ".csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  write_matrix_csv(out, m);
  return path;
}

}  // namespace mutqual
