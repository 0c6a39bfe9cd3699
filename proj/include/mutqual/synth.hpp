#pragma once

// Deterministic synthetic prediction logs with planted per-family kill
// profiles. Original instances are always correct, so the planted
// misclassification probability of a variant is exactly its expected KP.
//
// Random draws are keyed, not sequential: every draw is a pure function of
// (seed, dataset, subject, variant, run, test_id), computed as a chain of
// SplitMix64 finalizers over FNV-1a-64 hashes of the key parts. The uniform
// variate is the top 53 bits of the chained hash scaled to [0, 1).

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mutqual/domain.hpp"
#include "mutqual/error.hpp"
#include "mutqual/ingest.hpp"

namespace mutqual::synth {

// ---------------------------------------------------------------------------
// Keyed generator

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t combine(std::uint64_t state, std::uint64_t part) noexcept {
  return splitmix64(state ^ splitmix64(part));
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit_interval(std::uint64_t h) noexcept {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct DrawKey {
  std::uint64_t seed;
  std::string_view dataset_id;
  std::string_view subject_id;
  std::string_view variant_id;
  std::int64_t run;
  std::string_view test_id;
};

constexpr double keyed_uniform(const DrawKey& k) noexcept {
  std::uint64_t h = splitmix64(k.seed);
  h = combine(h, fnv1a64(k.dataset_id));
  h = combine(h, fnv1a64(k.subject_id));
  h = combine(h, fnv1a64(k.variant_id));
  h = combine(h, static_cast<std::uint64_t>(k.run));
  h = combine(h, fnv1a64(k.test_id));
  return unit_interval(h);
}

/// Variant id under which true labels are drawn (run 0).
inline constexpr std::string_view kLabelStream = "@label";

// ---------------------------------------------------------------------------
// Scenario

struct FamilySpec {
  std::string family_id;
  std::vector<std::string> configs;  // raw config ids, default `<family>_layer_<k>`
  std::vector<double> kill_profile;  // per test
  double correlation_with_fault = 0.0;
};

struct SubjectSpec {
  std::string subject_id;
  int n_runs = 5;
  int n_tests = 1;
  std::optional<std::vector<double>> fault_kill_profile;  // absent: no faulty model
  std::vector<FamilySpec> families;
};

struct DatasetSpec {
  std::string dataset_id;
  std::vector<SubjectSpec> subjects;
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  std::vector<DatasetSpec> datasets;
};

namespace detail {

inline std::vector<double> profile_from(const nlohmann::json& j, int n_tests, const std::string& where) {
  std::vector<double> out;
  if (j.is_number()) {
    out.assign(static_cast<std::size_t>(n_tests), j.get<double>());
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_number()) throw Error(ErrorKind::InvalidSpec, where + ": profile entries must be numbers");
      out.push_back(v.get<double>());
    }
    if (out.size() != static_cast<std::size_t>(n_tests)) {
      throw Error(ErrorKind::InvalidSpec, where + ": profile has " + std::to_string(out.size()) +
                                              " entries for " + std::to_string(n_tests) + " tests");
    }
  } else {
    throw Error(ErrorKind::InvalidSpec, where + ": profile must be a number or an array");
  }
  return out;
}

inline void check_probability(double p, const std::string& where) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidSpec, where + ": probability outside [0,1]");
}

}  // namespace detail

/// Throws InvalidSpec on the first problem found.
inline void validate(const ScenarioSpec& spec) {
  std::set<std::string> datasets;
  for (const auto& d : spec.datasets) {
    if (d.dataset_id.empty()) throw Error(ErrorKind::InvalidSpec, "empty dataset_id");
    if (!datasets.insert(d.dataset_id).second) throw Error(ErrorKind::InvalidSpec, "duplicate dataset " + d.dataset_id);
    std::set<std::string> subjects;
    for (const auto& s : d.subjects) {
      const std::string where = d.dataset_id + "/" + s.subject_id;
      if (s.subject_id.empty()) throw Error(ErrorKind::InvalidSpec, d.dataset_id + ": empty subject_id");
      if (!subjects.insert(s.subject_id).second) throw Error(ErrorKind::InvalidSpec, "duplicate subject " + where);
      if (s.n_runs < 1) throw Error(ErrorKind::InvalidSpec, where + ": n_runs < 1");
      if (s.n_tests < 1) throw Error(ErrorKind::InvalidSpec, where + ": n_tests < 1");
      if (s.fault_kill_profile) {
        if (s.fault_kill_profile->size() != static_cast<std::size_t>(s.n_tests)) {
          throw Error(ErrorKind::InvalidSpec, where + ": fault profile length");
        }
        for (double p : *s.fault_kill_profile) detail::check_probability(p, where + " fault");
      }
      std::set<std::string> configs;
      for (const auto& f : s.families) {
        const std::string fwhere = where + " family " + f.family_id;
        if (f.family_id.empty()) throw Error(ErrorKind::InvalidSpec, where + ": empty family_id");
        if (f.configs.empty()) throw Error(ErrorKind::InvalidSpec, fwhere + ": no configs");
        if (f.kill_profile.size() != static_cast<std::size_t>(s.n_tests)) {
          throw Error(ErrorKind::InvalidSpec, fwhere + ": kill profile length");
        }
        for (double p : f.kill_profile) detail::check_probability(p, fwhere);
        detail::check_probability(f.correlation_with_fault, fwhere + " correlation_with_fault");
        for (const auto& c : f.configs) {
          if (c.empty() || c.front() == '@') throw Error(ErrorKind::InvalidSpec, fwhere + ": bad config id '" + c + "'");
          if (!configs.insert(c).second) throw Error(ErrorKind::InvalidSpec, where + ": duplicate config " + c);
        }
      }
    }
  }
}

inline ScenarioSpec spec_from_json(const nlohmann::json& j) {
  try {
    ScenarioSpec spec;
    spec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& dj : j.at("datasets")) {
      DatasetSpec d;
      d.dataset_id = dj.at("dataset_id").get<std::string>();
      for (const auto& sj : dj.at("subjects")) {
        SubjectSpec s;
        s.subject_id = sj.at("subject_id").get<std::string>();
        s.n_runs = sj.at("n_runs").get<int>();
        s.n_tests = sj.at("n_tests").get<int>();
        const std::string where = d.dataset_id + "/" + s.subject_id;
        if (s.n_tests < 1) throw Error(ErrorKind::InvalidSpec, where + ": n_tests < 1");
        if (sj.contains("fault_kill_profile") && !sj["fault_kill_profile"].is_null()) {
          s.fault_kill_profile = detail::profile_from(sj["fault_kill_profile"], s.n_tests, where + " fault");
        }
        for (const auto& fj : sj.at("families")) {
          FamilySpec f;
          f.family_id = fj.at("family_id").get<std::string>();
          if (fj.contains("configs")) {
            f.configs = fj["configs"].get<std::vector<std::string>>();
          } else {
            const int count = fj.at("configs_per_family").get<int>();
            for (int k = 1; k <= count; ++k) f.configs.push_back(f.family_id + "_layer_" + std::to_string(k));
          }
          f.kill_profile = detail::profile_from(fj.at("kill_profile"), s.n_tests, where + " " + f.family_id);
          f.correlation_with_fault = fj.value("correlation_with_fault", 0.0);
          s.families.push_back(std::move(f));
        }
        d.subjects.push_back(std::move(s));
      }
      spec.datasets.push_back(std::move(d));
    }
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, e.what());
  }
}

inline nlohmann::ordered_json to_json(const ScenarioSpec& spec) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  auto datasets = nlohmann::ordered_json::array();
  for (const auto& d : spec.datasets) {
    nlohmann::ordered_json dj;
    dj["dataset_id"] = d.dataset_id;
    auto subjects = nlohmann::ordered_json::array();
    for (const auto& s : d.subjects) {
      nlohmann::ordered_json sj;
      sj["subject_id"] = s.subject_id;
      sj["n_runs"] = s.n_runs;
      sj["n_tests"] = s.n_tests;
      if (s.fault_kill_profile) sj["fault_kill_profile"] = *s.fault_kill_profile;
      auto families = nlohmann::ordered_json::array();
      for (const auto& f : s.families) {
        nlohmann::ordered_json fj;
        fj["family_id"] = f.family_id;
        fj["configs"] = f.configs;
        fj["kill_profile"] = f.kill_profile;
        fj["correlation_with_fault"] = f.correlation_with_fault;
        families.push_back(std::move(fj));
      }
      sj["families"] = std::move(families);
      subjects.push_back(std::move(sj));
    }
    dj["subjects"] = std::move(subjects);
    datasets.push_back(std::move(dj));
  }
  j["datasets"] = std::move(datasets);
  return j;
}

/// Zero-padded so that lexicographic order equals index order.
inline std::string test_id(int index, int n_tests) {
  const int width = std::max<int>(6, static_cast<int>(std::to_string(n_tests - 1).size()));
  std::string digits = std::to_string(index);
  return "t" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

namespace detail {

inline const SubjectSpec& find_subject(const ScenarioSpec& spec, std::string_view dataset, std::string_view subject) {
  for (const auto& d : spec.datasets) {
    if (d.dataset_id != dataset) continue;
    for (const auto& s : d.subjects) {
      if (s.subject_id == subject) return s;
    }
  }
  throw Error(ErrorKind::UnknownVariant, std::string(dataset) + "/" + std::string(subject));
}

/// Planted misclassification probability per test for each variant.
inline std::map<std::string, std::vector<double>> variant_profiles(const SubjectSpec& s) {
  std::map<std::string, std::vector<double>> out;
  if (s.fault_kill_profile) out.emplace(std::string(kFaultyVariant), *s.fault_kill_profile);
  for (const auto& f : s.families) {
    std::vector<double> p = f.kill_profile;
    if (s.fault_kill_profile) {
      const double w = f.correlation_with_fault;
      for (std::size_t t = 0; t < p.size(); ++t) p[t] = w * (*s.fault_kill_profile)[t] + (1.0 - w) * p[t];
    }
    for (const auto& c : f.configs) out.emplace(c, p);
  }
  return out;
}

}  // namespace detail

/// Expected KP of `variant_id` on test `test_index`: the planted probability,
/// blended toward the fault's profile by correlation_with_fault.
inline double expected_kp(const ScenarioSpec& spec, std::string_view dataset_id, std::string_view subject_id,
                          std::string_view variant_id, std::size_t test_index) {
  const auto& s = detail::find_subject(spec, dataset_id, subject_id);
  const auto profiles = detail::variant_profiles(s);
  auto it = profiles.find(std::string(variant_id));
  if (it == profiles.end() || test_index >= it->second.size()) {
    throw Error(ErrorKind::UnknownVariant, std::string(variant_id));
  }
  return it->second[test_index];
}

/// In-memory grids of one subject, drawn exactly as `generate` draws them.
inline SubjectRuns generate_subject(std::uint64_t seed, const DatasetSpec& d, const SubjectSpec& s) {
  SubjectRuns runs;
  runs.dataset_id = d.dataset_id;
  runs.subject_id = s.subject_id;
  runs.n = s.n_runs;
  auto ids = std::make_shared<std::vector<std::string>>();
  for (int t = 0; t < s.n_tests; ++t) ids->push_back(test_id(t, s.n_tests));
  runs.labels = {"0", "1"};
  runs.true_labels.resize(ids->size());
  for (std::size_t t = 0; t < ids->size(); ++t) {
    runs.true_labels[t] =
        keyed_uniform({seed, d.dataset_id, s.subject_id, kLabelStream, 0, (*ids)[t]}) < 0.5 ? 0 : 1;
  }
  runs.original = LabelGrid(s.n_runs, ids->size());
  for (int run = 1; run <= s.n_runs; ++run) {
    for (std::size_t t = 0; t < ids->size(); ++t) runs.original.at(run, t) = runs.true_labels[t];
  }

  // Hash prefix up to the variant, then per run, then per test.
  const std::uint64_t subject_state =
      combine(combine(splitmix64(seed), fnv1a64(d.dataset_id)), fnv1a64(s.subject_id));
  std::vector<std::uint64_t> test_hash(ids->size());
  for (std::size_t t = 0; t < ids->size(); ++t) test_hash[t] = fnv1a64((*ids)[t]);

  for (const auto& [variant, profile] : detail::variant_profiles(s)) {
    LabelGrid grid(s.n_runs, ids->size());
    const std::uint64_t variant_state = combine(subject_state, fnv1a64(variant));
    for (int run = 1; run <= s.n_runs; ++run) {
      const std::uint64_t run_state = combine(variant_state, static_cast<std::uint64_t>(run));
      for (std::size_t t = 0; t < ids->size(); ++t) {
        const bool flip = unit_interval(combine(run_state, test_hash[t])) < profile[t];
        grid.at(run, t) = flip ? 1 - runs.true_labels[t] : runs.true_labels[t];
      }
    }
    if (variant == kFaultyVariant) {
      runs.faulty = std::move(grid);
    } else {
      runs.mutants.emplace(variant, std::move(grid));
    }
  }
  // Only labels that occur are interned, matching what grouping a log yields.
  bool used[2] = {false, false};
  for (auto l : runs.true_labels) used[l] = true;
  auto scan = [&](const LabelGrid& g) {
    for (int run = 1; run <= g.runs(); ++run) {
      for (std::size_t t = 0; t < g.tests(); ++t) used[g.at(run, t)] = true;
    }
  };
  if (runs.faulty) scan(*runs.faulty);
  for (const auto& [c, g] : runs.mutants) scan(g);
  if (!(used[0] && used[1])) {
    const LabelId only = used[0] ? 0 : 1;
    runs.labels = {runs.labels[only]};
    auto remap = [](LabelGrid& g) {
      for (int run = 1; run <= g.runs(); ++run) {
        for (std::size_t t = 0; t < g.tests(); ++t) g.at(run, t) = 0;
      }
    };
    for (auto& l : runs.true_labels) l = 0;
    remap(runs.original);
    if (runs.faulty) remap(*runs.faulty);
    for (auto& [c, g] : runs.mutants) remap(g);
  }
  runs.test_ids = std::move(ids);
  return runs;
}

inline std::map<SubjectKey, SubjectRuns> generate_runs(const ScenarioSpec& spec) {
  validate(spec);
  std::map<SubjectKey, SubjectRuns> out;
  for (const auto& d : spec.datasets) {
    for (const auto& s : d.subjects) out.emplace(SubjectKey{d.dataset_id, s.subject_id}, generate_subject(spec.seed, d, s));
  }
  return out;
}

/// Writes the whole scenario as a prediction log: per subject the original,
/// then the faulty model, then mutants by config id; run-major, tests in order.
inline void generate(const ScenarioSpec& spec, std::ostream& out, LogFormat format) {
  validate(spec);
  if (format == LogFormat::csv) write_csv_header(out);
  for (const auto& d : spec.datasets) {
    for (const auto& s : d.subjects) {
      for (const auto& r : flatten(generate_subject(spec.seed, d, s))) write_record(out, r, format);
    }
  }
}

inline std::string generate(const ScenarioSpec& spec, LogFormat format) {
  std::ostringstream out;
  generate(spec, out, format);
  return out.str();
}

}  // namespace mutqual::synth
