#pragma once

// Intrinsic quality (resistance to killing, weighted by how discriminating
// the killing tests are) and extrinsic quality (generalized Jaccard
// similarity to the paired real fault) of mutants.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mutqual/domain.hpp"
#include "mutqual/error.hpp"
#include "mutqual/killing.hpp"

namespace mutqual {

/// KP vectors of one subject. All vectors share test_ids.
struct SubjectKPSet {
  std::string dataset_id;
  std::string subject_id;
  TestIds test_ids;
  std::optional<KPVector> kp_fault;
  std::map<std::string, KPVector> kp_mutants;  // config_id -> KP
};

/// Per-test mean kill probability over the subject's mutants, aligned with test_ids.
struct MutantCoverage {
  TestIds test_ids;
  std::vector<double> values;
};

namespace detail {

inline bool same_tests(const TestIds& a, const TestIds& b) {
  return a == b || (a && b && *a == *b);
}

inline void require_same_tests(const TestIds& a, const TestIds& b, const std::string& what) {
  if (!same_tests(a, b)) throw Error(ErrorKind::TestSetMismatch, what);
}

}  // namespace detail

inline MutantCoverage mutant_coverage(const SubjectKPSet& kps) {
  if (kps.kp_mutants.empty()) throw Error(ErrorKind::NoMutants, kps.subject_id);
  const std::size_t tests = kps.test_ids ? kps.test_ids->size() : 0;
  std::vector<long double> sum(tests, 0.0L);
  for (const auto& [config, kp] : kps.kp_mutants) {
    detail::require_same_tests(kp.test_ids, kps.test_ids, kps.subject_id + " mutant " + config);
    for (std::size_t t = 0; t < tests; ++t) {
      sum[t] += static_cast<long double>(kp.kills[t]) / kp.n;
    }
  }
  MutantCoverage c{kps.test_ids, std::vector<double>(tests)};
  const auto count = static_cast<long double>(kps.kp_mutants.size());
  for (std::size_t t = 0; t < tests; ++t) c.values[t] = static_cast<double>(sum[t] / count);
  return c;
}

inline double mean_kill_probability(const KPVector& kp) {
  if (kp.size() == 0) throw Error(ErrorKind::EmptyTestSet, kp.variant_id);
  long double kills = 0.0L;
  for (auto k : kp.kills) kills += k;
  return static_cast<double>(kills / (static_cast<long double>(kp.n) * kp.size()));
}

/// Zero for a never-killed mutant. Otherwise (1 - S_m) times one minus the
/// KP-weighted mean coverage of the tests that kill it.
inline double intrinsic_quality(const KPVector& kp, const MutantCoverage& coverage) {
  detail::require_same_tests(kp.test_ids, coverage.test_ids, kp.variant_id);
  const double s_m = mean_kill_probability(kp);
  if (s_m == 0.0) return 0.0;
  // KP_m(t) = kills[t] / n, so n cancels out of the weighted mean.
  long double weighted = 0.0L;
  long double weight = 0.0L;
  for (std::size_t t = 0; t < kp.size(); ++t) {
    weighted += static_cast<long double>(kp.kills[t]) * coverage.values[t];
    weight += kp.kills[t];
  }
  const long double iq = (1.0L - s_m) * (1.0L - weighted / weight);
  return std::clamp(static_cast<double>(iq), 0.0, 1.0);
}

/// Sum of pointwise minima over sum of pointwise maxima; 0 when both vectors
/// are all-zero.
inline double extrinsic_quality(const KPVector& kp_m, const KPVector& kp_f) {
  detail::require_same_tests(kp_m.test_ids, kp_f.test_ids, kp_m.variant_id + " vs " + kp_f.variant_id);
  long double lo = 0.0L;
  long double hi = 0.0L;
  for (std::size_t t = 0; t < kp_m.size(); ++t) {
    const long double a = static_cast<long double>(kp_m.kills[t]) / kp_m.n;
    const long double b = static_cast<long double>(kp_f.kills[t]) / kp_f.n;
    lo += std::min(a, b);
    hi += std::max(a, b);
  }
  if (hi == 0.0L) return 0.0;
  return static_cast<double>(lo / hi);
}

inline SubjectKPSet subject_kps(const SubjectRuns& runs) {
  SubjectKPSet kps;
  kps.dataset_id = runs.dataset_id;
  kps.subject_id = runs.subject_id;
  kps.test_ids = runs.test_ids;
  if (runs.faulty) kps.kp_fault = variant_killing_probabilities(runs, kFaultyVariant);
  for (const auto& [config, grid] : runs.mutants) {
    kps.kp_mutants.emplace(config, variant_killing_probabilities(runs, config));
  }
  return kps;
}

/// One record per mutant, ordered by config_id; family_id left empty.
inline std::vector<MutantQuality> score_subject(const SubjectKPSet& kps) {
  std::vector<MutantQuality> out;
  if (kps.kp_mutants.empty()) return out;
  const MutantCoverage coverage = mutant_coverage(kps);
  out.reserve(kps.kp_mutants.size());
  for (const auto& [config, kp] : kps.kp_mutants) {
    MutantQuality q;
    q.dataset_id = kps.dataset_id;
    q.subject_id = kps.subject_id;
    q.config_id = config;
    q.s_m = mean_kill_probability(kp);
    q.iq = intrinsic_quality(kp, coverage);
    if (kps.kp_fault) q.eq = extrinsic_quality(kp, *kps.kp_fault);
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace mutqual
