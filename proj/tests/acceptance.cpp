// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "mutqual/cli.hpp"
#include "mutqual/pipeline.hpp"
#include "mutqual/synth.hpp"
#include "oracle.hpp"

using namespace mutqual;
namespace fs = std::filesystem;

namespace {

constexpr double kFormulaTol = 1e-12;
constexpr double kFormulaSeconds = 10.0;
constexpr double kReportedRrPercent = 55.6;
constexpr double kReportedRrTolPp = 0.05;
constexpr int kSeeds = 100;
constexpr int kRequiredWins = 95;
constexpr double kScaleSeconds = 300.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void check(const char* name, const std::function<Outcome()>& fn) {
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome formula_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> tests_d(1, 20), mutants_d(1, 10), n_d(1, 5);
  double worst = 0.0;
  long ki_mismatch = 0, kp_mismatch = 0;
  for (int instance = 0; instance < 1000; ++instance) {
    const auto records = oracle::random_subject(rng, tests_d(rng), mutants_d(rng), n_d(rng));
    const auto ref = oracle::collect(records);
    const auto runs = group_runs(records).begin()->second;
    const auto kps = subject_kps(runs);
    const auto c = mutant_coverage(kps);
    const auto c_ref = oracle::coverage(ref);
    for (std::size_t t = 0; t < c.values.size(); ++t) {
      worst = std::max(worst, std::abs(c.values[t] - c_ref.at((*c.test_ids)[t])));
    }
    std::vector<std::string> variants = {std::string(kFaultyVariant)};
    for (const auto& [config, grid] : runs.mutants) variants.push_back(config);
    for (const auto& v : variants) {
      const auto m = build_execution_matrix(runs, v);
      for (std::size_t t = 0; t < m.rows(); ++t) {
        for (int run = 1; run <= m.n; ++run) ki_mismatch += m.at(t, run) != oracle::ki(ref, v, run, (*m.test_ids)[t]);
      }
      const auto kp_ref = oracle::kp(ref, v);
      const auto kp = variant_killing_probabilities(runs, v);
      for (std::size_t t = 0; t < kp.size(); ++t) kp_mismatch += kp.value(t) != kp_ref.at((*kp.test_ids)[t]);
    }
    const auto kp_f = oracle::kp(ref, oracle::kFault);
    for (const auto& q : score_subject(kps)) {
      const auto kp_m = oracle::kp(ref, q.config_id);
      worst = std::max({worst, std::abs(q.s_m - oracle::s_m(kp_m)), std::abs(q.iq - oracle::iq(kp_m, c_ref)),
                        std::abs(*q.eq - oracle::eq(kp_m, kp_f))});
    }
  }
  const double secs = seconds_since(start);
  return {ki_mismatch == 0 && kp_mismatch == 0 && worst <= kFormulaTol && secs < kFormulaSeconds,
          fmt("1000 instances, max |diff| %.3g (tol 1e-12), KI/KP mismatches %.0f, %.2fs", worst,
              static_cast<double>(ki_mismatch + kp_mismatch), secs)};
}

TestIds ids(std::size_t count) {
  auto v = std::make_shared<std::vector<std::string>>();
  for (std::size_t i = 0; i < count; ++i) v->push_back(synth::test_id(static_cast<int>(i), static_cast<int>(count)));
  return v;
}

Outcome iq_degenerate() {
  std::mt19937_64 rng(2002);
  std::uniform_int_distribution<int> tests_d(1, 20), mutants_d(1, 10), n_d(1, 5);
  long checked = 0, bad = 0;
  for (int instance = 0; instance < 1000; ++instance) {
    const int n = n_d(rng);
    const auto tests = ids(static_cast<std::size_t>(tests_d(rng)));
    std::uniform_int_distribution<std::uint32_t> kills(0, static_cast<std::uint32_t>(n));
    SubjectKPSet kps{"d", "s", tests, std::nullopt, {}};
    kps.kp_mutants.emplace("never", KPVector{"never", tests, n, std::vector<std::uint32_t>(tests->size(), 0)});
    kps.kp_mutants.emplace("always", KPVector{"always", tests, n, std::vector<std::uint32_t>(tests->size(), n)});
    for (int m = mutants_d(rng); m > 0; --m) {
      std::vector<std::uint32_t> k(tests->size());
      for (auto& x : k) x = kills(rng);
      kps.kp_mutants.emplace("m" + std::to_string(m), KPVector{"m", tests, n, k});
    }
    const auto c = mutant_coverage(kps);
    for (const auto& [id, kp] : kps.kp_mutants) {
      const double s = mean_kill_probability(kp);
      if (s != 0.0 && s != 1.0) continue;
      ++checked;
      bad += intrinsic_quality(kp, c) != 0.0;
    }
  }
  return {bad == 0 && checked >= 2000, fmt("%.0f degenerate mutants checked, %.0f nonzero IQ", checked, bad)};
}

Outcome eq_properties() {
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<int> tests_d(1, 20), n_d(1, 5);
  long violations = 0;
  for (int instance = 0; instance < 2000; ++instance) {
    const int n = n_d(rng);
    const auto tests = ids(static_cast<std::size_t>(tests_d(rng)));
    std::uniform_int_distribution<std::uint32_t> kills(0, static_cast<std::uint32_t>(n));
    std::bernoulli_distribution zero(0.4);
    std::vector<std::uint32_t> a(tests->size()), b(tests->size());
    for (std::size_t t = 0; t < a.size(); ++t) {
      a[t] = zero(rng) ? 0 : kills(rng);
      b[t] = zero(rng) ? 0 : kills(rng);
    }
    const KPVector ka{"a", tests, n, a}, kb{"b", tests, n, b};
    const double e = extrinsic_quality(ka, kb);
    violations += e != extrinsic_quality(kb, ka);
    violations += !(e >= 0.0 && e <= 1.0);
    const bool a_zero = std::all_of(a.begin(), a.end(), [](auto k) { return k == 0; });
    violations += extrinsic_quality(ka, ka) != (a_zero ? 0.0 : 1.0);
    // Disjoint supports: zero out b wherever a kills.
    auto d = b;
    for (std::size_t t = 0; t < d.size(); ++t) {
      if (a[t]) d[t] = 0;
    }
    violations += extrinsic_quality(ka, KPVector{"d", tests, n, d}) != 0.0;
    const KPVector z{"z", tests, n, std::vector<std::uint32_t>(tests->size(), 0)};
    violations += extrinsic_quality(z, z) != 0.0;
  }
  return {violations == 0, fmt("2000 random pairs, %.0f violations", static_cast<double>(violations))};
}

Outcome reported_arithmetic() {
  const double rr = reduction_ratio(4939, 2194) * 100.0;
  const long a = std::lround(reduction_ratio(123, 67) * 100.0);
  const long b = std::lround(reduction_ratio(123, 51) * 100.0);
  const long c = std::lround(reduction_ratio(123, 27) * 100.0);
  const bool ok = std::abs(rr - kReportedRrPercent) <= kReportedRrTolPp && a == 46 && b == 59 && c == 78;
  char buf[160];
  std::snprintf(buf, sizeof buf, "4939->2194 = %.3f%%; 123->67/51/27 = %ld/%ld/%ld%%", rr, a, b, c);
  return {ok, buf};
}

Outcome canonicalization() {
  const auto rules = CanonRuleSet::defaults();
  const std::vector<std::pair<std::string, std::string>> fixtures = {{"ARM_layer_3", "ARM"},
                                                                     {"ACH_relu_layer_3", "ACH_relu"},
                                                                     {"TRD_pct_8", "TRD_pct_5_15"},
                                                                     {"TRD_pct_12", "TRD_pct_5_15"},
                                                                     {"TRD_pct_15", "TRD_pct_5_15"}};
  std::string wrong;
  for (const auto& [in, expected] : fixtures) {
    const auto got = canonicalize(in, rules);
    if (got != expected) wrong += " " + in + "->" + got;
  }
  return {wrong.empty(), wrong.empty() ? "5 fixtures under default rules" : "mismatch:" + wrong};
}

// ---------------------------------------------------------------------------
// Synthetic scenarios

synth::FamilySpec family(const std::string& id, int configs, int tests, double p, double corr) {
  synth::FamilySpec f{id, {}, std::vector<double>(static_cast<std::size_t>(tests), p), corr};
  for (int k = 1; k <= configs; ++k) f.configs.push_back(id + "_layer_" + std::to_string(k));
  return f;
}

std::vector<double> fault_profile(std::mt19937_64& rng, int tests) {
  std::bernoulli_distribution hot(0.3);
  std::vector<double> p(static_cast<std::size_t>(tests));
  for (auto& x : p) x = hot(rng) ? 0.6 : 0.05;
  return p;
}

/// Families drawn at random per subject, for corpora without planted structure.
synth::ScenarioSpec random_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> ops = {"ARM", "WRB", "AAL_tanh", "RAW", "WCI_he", "ACH_relu", "RCW", "WAB"};
  constexpr int kTests = 40;
  synth::ScenarioSpec spec{seed, {}};
  for (const char* d : {"alpha", "beta"}) {
    synth::DatasetSpec ds{d, {}};
    for (const char* s : {"s1", "s2"}) {
      synth::SubjectSpec sub{s, 5, kTests, fault_profile(rng, kTests), {}};
      for (const auto& op : ops) {
        auto f = family(op, 2, kTests, 0.0, u(rng));
        for (auto& p : f.kill_profile) p = u(rng) * u(rng);
        sub.families.push_back(std::move(f));
      }
      ds.subjects.push_back(std::move(sub));
    }
    spec.datasets.push_back(std::move(ds));
  }
  return spec;
}

std::vector<MutantQuality> analyze_spec(const synth::ScenarioSpec& spec, int jobs = 1) {
  static const CanonRuleSet rules = CanonRuleSet::defaults();
  AnalyzeOptions options;
  options.rules = &rules;
  options.jobs = jobs;
  return analyze(synth::generate_runs(spec), options);
}

Outcome tau_monotonicity() {
  const std::vector<double> taus = {0.20, 0.25, 0.30};
  int violations = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const auto q = analyze_spec(random_scenario(static_cast<std::uint64_t>(seed)));
    std::optional<SelectionReport> prev;
    std::int64_t prev_mutants = 0;
    for (double tau : taus) {
      const auto sel = select_from_qualities(q, tau);
      const auto mutants = std::count_if(q.begin(), q.end(), [&](auto& m) { return sel.retained_ids.count(m.family_id); });
      if (prev) {
        const bool nested = std::includes(prev->retained_ids.begin(), prev->retained_ids.end(),
                                          sel.retained_ids.begin(), sel.retained_ids.end());
        if (!nested || sel.families_retained > prev->families_retained || mutants > prev_mutants) ++violations;
      }
      prev = sel;
      prev_mutants = mutants;
    }
  }
  return {violations == 0, fmt("%.0f seeds x tau {0.20,0.25,0.30}, %.0f violations", kSeeds, violations)};
}

/// Good families: moderate kill probability, strongly tied to the fault.
/// Bad families: kill probability near 0 or near 1, independent of the fault.
synth::ScenarioSpec planted_scenario(std::uint64_t seed, const std::vector<std::string>& datasets) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> moderate(0.2, 0.5), corr(0.8, 1.0), low(0.0, 0.02), high(0.95, 1.0);
  constexpr int kTests = 100;
  synth::ScenarioSpec spec{seed, {}};
  for (const auto& d : datasets) {
    synth::DatasetSpec ds{d, {}};
    for (const char* s : {"s1", "s2", "s3"}) {
      synth::SubjectSpec sub{s, 5, kTests, fault_profile(rng, kTests), {}};
      sub.families.push_back(family("ARM", 3, kTests, moderate(rng), corr(rng)));
      sub.families.push_back(family("WRB", 3, kTests, moderate(rng), corr(rng)));
      sub.families.push_back(family("RAW", 3, kTests, high(rng), 0.0));
      sub.families.push_back(family("WAB", 3, kTests, low(rng), 0.0));
      ds.subjects.push_back(std::move(sub));
    }
    spec.datasets.push_back(std::move(ds));
  }
  return spec;
}

Outcome end_to_end() {
  int wins = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const auto s = static_cast<std::uint64_t>(seed);
    const auto sel = select_from_qualities(analyze_spec(planted_scenario(s, {"sel_a", "sel_b"})), 0.25);
    const auto v = validate_holdout(analyze_spec(planted_scenario(s + 100000, {"holdout"})), sel.retained_ids);
    if (v.hh_after && v.hh_before && *v.hh_after > *v.hh_before && v.reduction_ratio > 0.0) ++wins;
  }
  return {wins >= kRequiredWins, fmt("hh_after > hh_before and RR > 0 in %.0f/%.0f seeds (need %.0f)", wins, kSeeds,
                                     kRequiredWins)};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mutqual");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

/// Runs synth -> analyze -> select -> holdout -> report into `dir`; returns
/// every produced file keyed by relative path.
std::map<std::string, std::string> pipeline_outputs(const fs::path& dir, const fs::path& specs, int jobs) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto p = [&](const char* name) { return (dir / name).string(); };
  const auto j = std::to_string(jobs);
  int rc = 0;
  rc |= cli({"synth", "--spec", (specs / "sel.json").string(), "--out", p("sel.jsonl")});
  rc |= cli({"synth", "--spec", (specs / "hold.json").string(), "--out", p("hold.csv"), "--format", "csv"});
  rc |= cli({"analyze", "--in", p("sel.jsonl"), "--out", p("sel_q.csv"), "--jobs", j});
  rc |= cli({"analyze", "--in", p("hold.csv"), "--format", "csv", "--out", p("hold_q.csv"), "--jobs", j});
  rc |= cli({"select", "--in", p("sel_q.csv"), "--out", p("selection.json")});
  rc |= cli({"holdout", "--in", p("hold_q.csv"), "--selection", p("selection.json"), "--out", p("validation.json")});
  rc |= cli({"report", "--in", p("hold_q.csv"), "--selection", p("selection.json"), "--out", p("figures")});
  if (rc != 0) throw Error(ErrorKind::IoFailure, "pipeline step failed");
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "mutqual_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root / "specs");
  report::write_text_file(root / "specs" / "sel.json", synth::to_json(planted_scenario(7, {"sel_a", "sel_b"})).dump());
  report::write_text_file(root / "specs" / "hold.json", synth::to_json(planted_scenario(8, {"holdout"})).dump());
  const auto a = pipeline_outputs(root / "run_a", root / "specs", 1);
  const auto b = pipeline_outputs(root / "run_b", root / "specs", 1);
  const auto c = pipeline_outputs(root / "run_c", root / "specs", 8);
  std::size_t svgs = 0;
  for (const auto& [name, text] : a) svgs += name.size() > 4 && name.substr(name.size() - 4) == ".svg";
  const bool ok = a == b && a == c && svgs >= 4 && a.count("selection.json") && a.count("hold_q.csv");
  return {ok, fmt("%.0f files (%.0f SVG) identical across two runs and jobs 1 vs 8", static_cast<double>(a.size()),
                  static_cast<double>(svgs))};
}

Outcome scale_smoke() {
  constexpr int kDatasets = 2, kSubjects = 10, kFamilies = 25, kConfigs = 10, kTests = 10000, kRuns = 5;
  const auto start = Clock::now();
  const auto rules = CanonRuleSet::defaults();
  AnalyzeOptions options;
  options.rules = &rules;
  const std::vector<std::string> ops = {"ARM", "WRB", "RAW", "WAB", "RCW"};
  std::mt19937_64 rng(9009);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MutantQuality> qualities;
  std::size_t mutants = 0;
  for (int d = 0; d < kDatasets; ++d) {
    synth::DatasetSpec ds{"scale_" + std::to_string(d), {}};
    for (int s = 0; s < kSubjects; ++s) {
      synth::SubjectSpec sub{"s" + std::to_string(s), kRuns, kTests, fault_profile(rng, kTests), {}};
      for (int f = 0; f < kFamilies; ++f) {
        const std::string id = ops[f % ops.size()] + "_v" + std::to_string(f);
        synth::FamilySpec fam{id, {}, std::vector<double>(kTests, 0.5 * u(rng)), u(rng)};
        for (int k = 1; k <= kConfigs; ++k) fam.configs.push_back(ops[f % ops.size()] + "_layer_" + std::to_string(k) + "_v" + std::to_string(f));
        sub.families.push_back(std::move(fam));
      }
      // Subjects are generated and analyzed one at a time to bound memory.
      const auto runs = synth::generate_subject(9009, ds, sub);
      mutants += runs.mutants.size();
      auto q = analyze_subject(runs, options);
      std::move(q.begin(), q.end(), std::back_inserter(qualities));
    }
  }
  const auto sel = select_from_qualities(qualities, 0.25);
  std::vector<MutantQuality> holdout;
  std::copy_if(qualities.begin(), qualities.end(), std::back_inserter(holdout),
               [](const auto& q) { return q.dataset_id == "scale_1"; });
  validate_holdout(holdout, sel.retained_ids);
  const double secs = seconds_since(start);
  return {mutants == 5000 && qualities.size() == 5000 && secs < kScaleSeconds,
          fmt("%.0f mutants x 10000 tests x n=5 in %.1fs (limit %.0fs)", static_cast<double>(mutants), secs,
              kScaleSeconds)};
}

}  // namespace

int main() {
  check("formula-oracle", formula_oracle);
  check("iq-degenerate-branches", iq_degenerate);
  check("eq-properties", eq_properties);
  check("reported-arithmetic", reported_arithmetic);
  check("canonicalization-fixtures", canonicalization);
  check("tau-monotonicity", tau_monotonicity);
  check("end-to-end-planted", end_to_end);
  check("determinism", determinism);
  check("scale-smoke", scale_smoke);
  std::printf("%s: %d failure(s)\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
