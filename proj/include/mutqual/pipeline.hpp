#pragma once

// Composition of the analysis stages: grouped runs -> KP vectors -> quality
// records with family ids, optionally parallel over subjects.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include "mutqual/domain.hpp"
#include "mutqual/ingest.hpp"
#include "mutqual/killing.hpp"
#include "mutqual/quality.hpp"
#include "mutqual/quality_table.hpp"
#include "mutqual/selection.hpp"

namespace mutqual {

struct AnalyzeOptions {
  const CanonRuleSet* rules = nullptr;  // nullptr leaves family_id empty
  int jobs = 1;
  std::optional<std::filesystem::path> dump_matrices;
};

inline std::vector<MutantQuality> analyze_subject(const SubjectRuns& runs, const AnalyzeOptions& options = {}) {
  if (options.dump_matrices) {
    if (runs.faulty) dump_matrix(*options.dump_matrices, runs, build_execution_matrix(runs, kFaultyVariant));
    for (const auto& [config, grid] : runs.mutants) {
      dump_matrix(*options.dump_matrices, runs, build_execution_matrix(runs, config));
    }
  }
  auto qualities = score_subject(subject_kps(runs));
  if (options.rules) {
    for (auto& q : qualities) q.family_id = canonicalize(q.config_id, *options.rules);
  }
  return qualities;
}

/// Runs `fn(i)` for i in [0, count) on up to `jobs` threads. The exception of
/// the lowest failing index is rethrown, so failures do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  const auto workers = static_cast<std::size_t>(std::clamp<std::size_t>(jobs < 1 ? 1 : jobs, 1, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Quality records of every subject, ordered by (dataset, subject, config)
/// regardless of `jobs`.
inline std::vector<MutantQuality> analyze(const std::map<SubjectKey, SubjectRuns>& subjects,
                                          const AnalyzeOptions& options = {}) {
  std::vector<const SubjectRuns*> order;
  for (const auto& [key, runs] : subjects) order.push_back(&runs);
  std::vector<std::vector<MutantQuality>> results(order.size());
  parallel_for(order.size(), options.jobs, [&](std::size_t i) { results[i] = analyze_subject(*order[i], options); });
  std::vector<MutantQuality> out;
  for (auto& r : results) std::move(r.begin(), r.end(), std::back_inserter(out));
  return out;
}

/// Analysis and selection in one process, seeing the same values a separate
/// `select` step would read back from the quality CSV.
inline SelectionReport fused_select(const std::vector<PredictionRecord>& records, const CanonRuleSet& rules,
                                    double tau, bool strict_exceeds = false, int jobs = 1) {
  AnalyzeOptions options;
  options.rules = &rules;
  options.jobs = jobs;
  auto qualities = analyze(group_runs(records), options);
  for (auto& q : qualities) q = as_written(std::move(q));
  return select_from_qualities(qualities, tau, strict_exceeds);
}

}  // namespace mutqual
