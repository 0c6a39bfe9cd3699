#pragma once

// Configuration-family selection: canonicalization of raw configuration
// ids, per-dataset median quadrants, family hit rates, threshold selection
// and validation of the retained families on a held-out corpus.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mutqual/domain.hpp"
#include "mutqual/error.hpp"

namespace mutqual {

// ---------------------------------------------------------------------------
// Canonicalization

enum class RuleAction { strip_layer_index, bucket_percentage, keep_category, toggle_only, keep_factor };

constexpr std::string_view to_string(RuleAction a) noexcept {
  switch (a) {
    case RuleAction::strip_layer_index: return "strip_layer_index";
    case RuleAction::bucket_percentage: return "bucket_percentage";
    case RuleAction::keep_category: return "keep_category";
    case RuleAction::toggle_only: return "toggle_only";
    case RuleAction::keep_factor: return "keep_factor";
  }
  return "?";
}

inline RuleAction parse_rule_action(std::string_view text) {
  for (auto a : {RuleAction::strip_layer_index, RuleAction::bucket_percentage, RuleAction::keep_category,
                 RuleAction::toggle_only, RuleAction::keep_factor}) {
    if (to_string(a) == text) return a;
  }
  throw Error(ErrorKind::InvalidRuleSet, "unknown action '" + std::string(text) + "'");
}

inline const std::vector<double>& default_percentage_edges() {
  static const std::vector<double> edges = {0, 5, 15, 30, 50, 70, 90, 100};
  return edges;
}

struct CanonRule {
  std::string prefix;  // operator id, matched as `prefix` or `prefix_...`
  RuleAction action = RuleAction::keep_category;
  std::vector<double> edges;  // bucket_percentage only

  bool matches(std::string_view config_id) const {
    return config_id == prefix ||
           (config_id.size() > prefix.size() && config_id.substr(0, prefix.size()) == prefix &&
            config_id[prefix.size()] == '_');
  }
};

namespace detail {

inline std::vector<std::string> split_tokens(std::string_view id) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= id.size(); ++i) {
    if (i == id.size() || id[i] == '_') {
      tokens.emplace_back(id.substr(start, i - start));
      start = i + 1;
    }
  }
  return tokens;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back('_');
    out += tokens[i];
  }
  return out;
}

inline std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

inline bool is_index(std::string_view text) {
  return !text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// Shortest round-trip decimal, e.g. 5 -> "5", 0.50 -> "0.5".
inline std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

/// Drops every `layer_<index>` token pair.
inline std::vector<std::string> strip_layers(const std::vector<std::string>& tokens, std::string_view config_id) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "layer") {
      if (i + 1 >= tokens.size() || !is_index(tokens[i + 1])) {
        throw Error(ErrorKind::MalformedConfig, std::string(config_id) + ": layer without index");
      }
      ++i;
      continue;
    }
    out.push_back(tokens[i]);
  }
  return out;
}

}  // namespace detail

/// Ordered rule list; exactly one rule must match any valid config id.
class CanonRuleSet {
 public:
  CanonRuleSet() = default;
  explicit CanonRuleSet(std::vector<CanonRule> rules) : rules_(std::move(rules)) { check(); }

  /// One rule per operator of the training-time operator vocabulary.
  static CanonRuleSet defaults() {
    std::vector<CanonRule> rules;
    auto add = [&](std::string prefix, RuleAction action) {
      CanonRule r{std::move(prefix), action, {}};
      if (action == RuleAction::bucket_percentage) r.edges = default_percentage_edges();
      rules.push_back(std::move(r));
    };
    for (auto op : {"TCL", "TRD", "TUD", "TAN", "TCO"}) add(op, RuleAction::bucket_percentage);
    for (auto op : {"HBS", "HLR", "HNE", "RCP"}) add(op, RuleAction::keep_factor);
    for (auto op : {"HDB", "VRM"}) add(op, RuleAction::toggle_only);
    for (auto op : {"ACH", "ARM", "AAL", "RAW", "RCW", "RRW", "RCD", "WCI", "WAB", "WRB"}) {
      add(op, RuleAction::strip_layer_index);
    }
    for (auto op : {"LCH", "OCH", "OCG"}) add(op, RuleAction::keep_category);
    return CanonRuleSet(std::move(rules));
  }

  /// Line-delimited JSON, one `{"prefix", "action", "edges"?}` object per line.
  static CanonRuleSet parse(std::istream& in) {
    std::vector<CanonRule> rules;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      const std::string where = "rules line " + std::to_string(line_no);
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error&) {
        throw Error(ErrorKind::InvalidRuleSet, where + ": invalid JSON");
      }
      if (!obj.is_object()) throw Error(ErrorKind::InvalidRuleSet, where + ": not an object");
      for (const auto& [name, value] : obj.items()) {
        if (name != "prefix" && name != "action" && name != "edges") {
          throw Error(ErrorKind::InvalidRuleSet, where + ": unknown field " + name);
        }
      }
      if (!obj.contains("prefix") || !obj["prefix"].is_string() || !obj.contains("action") ||
          !obj["action"].is_string()) {
        throw Error(ErrorKind::InvalidRuleSet, where + ": prefix and action are required strings");
      }
      CanonRule rule;
      rule.prefix = obj["prefix"].get<std::string>();
      try {
        rule.action = parse_rule_action(obj["action"].get<std::string>());
      } catch (const Error& e) {
        throw e.located(where);
      }
      if (obj.contains("edges")) {
        if (!obj["edges"].is_array()) throw Error(ErrorKind::InvalidRuleSet, where + ": edges must be an array");
        for (const auto& e : obj["edges"]) {
          if (!e.is_number()) throw Error(ErrorKind::InvalidRuleSet, where + ": edges must be numbers");
          rule.edges.push_back(e.get<double>());
        }
      }
      rules.push_back(std::move(rule));
    }
    return CanonRuleSet(std::move(rules));
  }

  const std::vector<CanonRule>& rules() const noexcept { return rules_; }

  const CanonRule& match(std::string_view config_id) const {
    const CanonRule* found = nullptr;
    for (const auto& rule : rules_) {
      if (!rule.matches(config_id)) continue;
      if (found) {
        throw Error(ErrorKind::AmbiguousRule,
                    std::string(config_id) + " matches " + found->prefix + " and " + rule.prefix);
      }
      found = &rule;
    }
    if (!found) throw Error(ErrorKind::NoRuleMatch, std::string(config_id));
    return *found;
  }

 private:
  void check() const {
    for (const auto& rule : rules_) {
      if (rule.prefix.empty()) throw Error(ErrorKind::InvalidRuleSet, "empty prefix");
      if (rule.action != RuleAction::bucket_percentage) {
        if (!rule.edges.empty()) {
          throw Error(ErrorKind::InvalidRuleSet, rule.prefix + ": edges only apply to bucket_percentage");
        }
        continue;
      }
      const auto& e = rule.edges;
      if (e.size() < 2 || e.front() != 0.0 || e.back() != 100.0) {
        throw Error(ErrorKind::InvalidRuleSet, rule.prefix + ": edges must start at 0 and end at 100");
      }
      if (std::adjacent_find(e.begin(), e.end(), std::greater_equal<>()) != e.end()) {
        throw Error(ErrorKind::InvalidRuleSet, rule.prefix + ": edges must be strictly ascending");
      }
    }
  }

  std::vector<CanonRule> rules_;
};

/// Maps a raw configuration id to its canonical family id. Layer indices are
/// always dropped; the matched rule's action decides the rest. Applying it to
/// its own output is a no-op.
inline std::string canonicalize(std::string_view config_id, const CanonRuleSet& rules) {
  const CanonRule& rule = rules.match(config_id);
  if (rule.action == RuleAction::toggle_only) return rule.prefix;

  // The prefix may itself contain '_', so only tokenize what follows it.
  const std::string_view rest =
      config_id.size() > rule.prefix.size() ? config_id.substr(rule.prefix.size() + 1) : std::string_view{};
  std::vector<std::string> tokens =
      rest.empty() ? std::vector<std::string>{} : detail::strip_layers(detail::split_tokens(rest), config_id);
  auto malformed = [&](const std::string& why) {
    return Error(ErrorKind::MalformedConfig, std::string(config_id) + ": " + why);
  };

  switch (rule.action) {
    case RuleAction::strip_layer_index:
    case RuleAction::keep_category:
    case RuleAction::toggle_only:
      break;
    case RuleAction::bucket_percentage: {
      auto pct = std::find(tokens.begin(), tokens.end(), "pct");
      if (pct == tokens.end() || pct + 1 == tokens.end()) throw malformed("no pct_<value> token");
      const auto value = detail::parse_number(*(pct + 1));
      if (!value) throw malformed("percentage '" + *(pct + 1) + "' is not a number");
      const auto& edges = rule.edges;
      // Already a bucket label `pct_<lo>_<hi>` over consecutive edges.
      if (pct + 2 != tokens.end()) {
        if (auto hi = detail::parse_number(*(pct + 2))) {
          auto lo_it = std::find(edges.begin(), edges.end(), *value);
          if (lo_it != edges.end() && lo_it + 1 != edges.end() && *(lo_it + 1) == *hi) {
            *(pct + 1) = detail::format_number(*value);
            *(pct + 2) = detail::format_number(*hi);
            break;
          }
        }
      }
      if (!(*value > edges.front() && *value <= edges.back())) {
        throw malformed("percentage outside (" + detail::format_number(edges.front()) + ", " +
                        detail::format_number(edges.back()) + "]");
      }
      // Bucket (lo, hi] containing the value.
      const auto hi_it = std::lower_bound(edges.begin() + 1, edges.end(), *value);
      *(pct + 1) = detail::format_number(*(hi_it - 1)) + "_" + detail::format_number(*hi_it);
      break;
    }
    case RuleAction::keep_factor: {
      auto factor = std::find(tokens.begin(), tokens.end(), "factor");
      if (factor == tokens.end() || factor + 1 == tokens.end()) throw malformed("no factor_<value> token");
      const auto value = detail::parse_number(*(factor + 1));
      if (!value || *value <= 0.0) throw malformed("factor '" + *(factor + 1) + "' is not a positive number");
      *(factor + 1) = detail::format_number(*value);
      break;
    }
  }
  tokens.insert(tokens.begin(), rule.prefix);
  return detail::join_tokens(tokens);
}

// ---------------------------------------------------------------------------
// Quadrants and hit rates

struct QuadrantThresholds {
  std::string dataset_id;
  double median_iq = 0.0;
  double median_eq = 0.0;

  friend bool operator==(const QuadrantThresholds&, const QuadrantThresholds&) = default;
};

/// Even count: mean of the two middle values.
inline double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyDataset, "median of no values");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2.0;
}

/// Medians over every mutant of `dataset_id`, pooled across its subjects.
/// The EQ median only sees mutants whose EQ is defined.
inline QuadrantThresholds compute_thresholds(const std::vector<MutantQuality>& qualities,
                                             const std::string& dataset_id) {
  std::vector<double> iq;
  std::vector<double> eq;
  for (const auto& q : qualities) {
    if (q.dataset_id != dataset_id) continue;
    iq.push_back(q.iq);
    if (q.eq) eq.push_back(*q.eq);
  }
  if (iq.empty()) throw Error(ErrorKind::EmptyDataset, dataset_id);
  if (eq.empty()) throw Error(ErrorKind::NoEqValues, dataset_id);
  return {dataset_id, median(std::move(iq)), median(std::move(eq))};
}

/// First letter is the IQ side, second the EQ side.
enum class Quadrant { HH, HL, LH, LL };

constexpr std::string_view to_string(Quadrant q) noexcept {
  switch (q) {
    case Quadrant::HH: return "HH";
    case Quadrant::HL: return "HL";
    case Quadrant::LH: return "LH";
    case Quadrant::LL: return "LL";
  }
  return "?";
}

inline Quadrant label_quadrant(const MutantQuality& q, const QuadrantThresholds& th) {
  if (!q.eq) throw Error(ErrorKind::EqUndefined, q.subject_id + "/" + q.config_id);
  const bool high_iq = q.iq >= th.median_iq;
  const bool high_eq = *q.eq >= th.median_eq;
  if (high_iq) return high_eq ? Quadrant::HH : Quadrant::HL;
  return high_eq ? Quadrant::LH : Quadrant::LL;
}

/// Per-dataset thresholds for every dataset present, keyed by dataset_id.
inline std::map<std::string, QuadrantThresholds> dataset_thresholds(const std::vector<MutantQuality>& qualities) {
  std::set<std::string> datasets;
  for (const auto& q : qualities) datasets.insert(q.dataset_id);
  std::map<std::string, QuadrantThresholds> out;
  for (const auto& d : datasets) out.emplace(d, compute_thresholds(qualities, d));
  return out;
}

struct LabeledMutant {
  std::string family_id;
  Quadrant quadrant;
};

/// Labels every EQ-defined mutant against its own dataset's thresholds.
/// Mutants without EQ cannot be placed in a quadrant and are skipped.
inline std::vector<LabeledMutant> label_corpus(const std::vector<MutantQuality>& qualities,
                                               const std::map<std::string, QuadrantThresholds>& thresholds) {
  std::vector<LabeledMutant> out;
  for (const auto& q : qualities) {
    if (!q.eq) continue;
    out.push_back({q.family_id, label_quadrant(q, thresholds.at(q.dataset_id))});
  }
  return out;
}

inline std::map<std::string, FamilyStats> family_hit_rates(const std::vector<LabeledMutant>& labeled) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts;  // total, HH
  for (const auto& m : labeled) {
    auto& [total, hh] = counts[m.family_id];
    ++total;
    if (m.quadrant == Quadrant::HH) ++hh;
  }
  std::map<std::string, FamilyStats> out;
  for (const auto& [family, c] : counts) out.emplace(family, FamilyStats::from_counts(family, c.first, c.second));
  return out;
}

// ---------------------------------------------------------------------------
// Selection

struct SelectionReport {
  double tau = 0.25;
  bool strict_exceeds = false;  // hit_rate > tau instead of >=
  std::int64_t families_total = 0;
  std::int64_t families_retained = 0;
  std::set<std::string> retained_ids;
  std::map<std::string, FamilyStats> families;
  std::vector<QuadrantThresholds> thresholds;  // selection datasets, for reference

  friend bool operator==(const SelectionReport&, const SelectionReport&) = default;
};

inline bool retains(const FamilyStats& s, double tau, bool strict_exceeds) {
  return strict_exceeds ? s.hit_rate > tau : s.hit_rate >= tau;
}

inline SelectionReport select_families(const std::map<std::string, FamilyStats>& stats, double tau,
                                       bool strict_exceeds = false) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorKind::InvalidTau, detail::format_number(tau));
  SelectionReport report;
  report.tau = tau;
  report.strict_exceeds = strict_exceeds;
  report.families = stats;
  report.families_total = static_cast<std::int64_t>(stats.size());
  for (const auto& [family, s] : stats) {
    if (retains(s, tau, strict_exceeds)) report.retained_ids.insert(family);
  }
  report.families_retained = static_cast<std::int64_t>(report.retained_ids.size());
  return report;
}

/// Thresholds per dataset, local labels, pooled hit rates, then selection.
inline SelectionReport select_from_qualities(const std::vector<MutantQuality>& qualities, double tau,
                                             bool strict_exceeds = false) {
  const auto thresholds = dataset_thresholds(qualities);
  auto report = select_families(family_hit_rates(label_corpus(qualities, thresholds)), tau, strict_exceeds);
  for (const auto& [d, th] : thresholds) report.thresholds.push_back(th);
  return report;
}

inline double reduction_ratio(std::int64_t before, std::int64_t after) {
  if (before < 1 || after < 0 || after > before) {
    throw Error(ErrorKind::InvalidCounts, "before=" + std::to_string(before) + " after=" + std::to_string(after));
  }
  return 1.0 - static_cast<double>(after) / static_cast<double>(before);
}

// ---------------------------------------------------------------------------
// Held-out validation

struct RelativeChanges {
  std::optional<double> median_iq;
  std::optional<double> median_eq;
  std::optional<double> hh;

  friend bool operator==(const RelativeChanges&, const RelativeChanges&) = default;
};

struct ValidationReport {
  std::int64_t mutants_before = 0;
  std::int64_t mutants_after = 0;
  double reduction_ratio = 0.0;
  std::optional<double> median_iq_before;
  std::optional<double> median_iq_after;
  std::optional<double> median_eq_before;
  std::optional<double> median_eq_after;
  std::optional<double> hh_before;
  std::optional<double> hh_after;
  RelativeChanges relative_changes;
  std::vector<std::string> warnings;  // e.g. EmptyAfterSet
  std::vector<QuadrantThresholds> thresholds;  // frozen from the full holdout baseline

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

namespace detail {

struct SetSummary {
  std::optional<double> median_iq;
  std::optional<double> median_eq;
  std::optional<double> hh;
};

inline SetSummary summarize(const std::vector<const MutantQuality*>& set,
                            const std::map<std::string, QuadrantThresholds>& thresholds) {
  SetSummary s;
  std::vector<double> iq;
  std::vector<double> eq;
  std::int64_t hh = 0;
  for (const auto* q : set) {
    iq.push_back(q->iq);
    if (!q->eq) continue;
    eq.push_back(*q->eq);
    if (label_quadrant(*q, thresholds.at(q->dataset_id)) == Quadrant::HH) ++hh;
  }
  if (!iq.empty()) s.median_iq = median(iq);
  if (!eq.empty()) {
    s.median_eq = median(eq);
    s.hh = static_cast<double>(hh) / static_cast<double>(eq.size());
  }
  return s;
}

inline std::optional<double> relative_change(std::optional<double> before, std::optional<double> after) {
  if (!before || !after || *before == 0.0) return std::nullopt;
  return (*after - *before) / *before;
}

}  // namespace detail

/// Compares the full holdout corpus with the subset whose family is retained.
/// Quadrant thresholds come from the full holdout and are used for both sides.
inline ValidationReport validate_holdout(const std::vector<MutantQuality>& holdout,
                                         const std::set<std::string>& retained) {
  if (holdout.empty()) throw Error(ErrorKind::EmptyHoldout, "no holdout mutants");
  const auto thresholds = dataset_thresholds(holdout);

  std::vector<const MutantQuality*> before;
  std::vector<const MutantQuality*> after;
  for (const auto& q : holdout) {
    before.push_back(&q);
    if (retained.count(q.family_id)) after.push_back(&q);
  }

  ValidationReport r;
  r.mutants_before = static_cast<std::int64_t>(before.size());
  r.mutants_after = static_cast<std::int64_t>(after.size());
  r.reduction_ratio = reduction_ratio(r.mutants_before, r.mutants_after);
  for (const auto& [d, th] : thresholds) r.thresholds.push_back(th);

  const auto b = detail::summarize(before, thresholds);
  r.median_iq_before = b.median_iq;
  r.median_eq_before = b.median_eq;
  r.hh_before = b.hh;
  if (after.empty()) {
    r.warnings.push_back("EmptyAfterSet");
    return r;
  }
  const auto a = detail::summarize(after, thresholds);
  r.median_iq_after = a.median_iq;
  r.median_eq_after = a.median_eq;
  r.hh_after = a.hh;
  r.relative_changes = {detail::relative_change(b.median_iq, a.median_iq),
                        detail::relative_change(b.median_eq, a.median_eq), detail::relative_change(b.hh, a.hh)};
  return r;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline std::optional<double> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

inline nlohmann::ordered_json thresholds_json(const std::vector<QuadrantThresholds>& ths) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& th : ths) {
    nlohmann::ordered_json t;
    t["dataset_id"] = th.dataset_id;
    t["median_iq"] = th.median_iq;
    t["median_eq"] = th.median_eq;
    arr.push_back(std::move(t));
  }
  return arr;
}

inline std::vector<QuadrantThresholds> thresholds_from(const nlohmann::json& j) {
  std::vector<QuadrantThresholds> out;
  if (!j.contains("thresholds")) return out;
  for (const auto& t : j["thresholds"]) {
    out.push_back({t.at("dataset_id").get<std::string>(), t.at("median_iq").get<double>(),
                   t.at("median_eq").get<double>()});
  }
  return out;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const SelectionReport& r) {
  nlohmann::ordered_json j;
  j["tau"] = r.tau;
  j["strict_exceeds"] = r.strict_exceeds;
  j["families_total"] = r.families_total;
  j["families_retained"] = r.families_retained;
  j["retained_ids"] = r.retained_ids;
  auto families = nlohmann::ordered_json::array();
  for (const auto& [id, s] : r.families) {
    nlohmann::ordered_json f;
    f["family_id"] = s.family_id;
    f["mutant_count"] = s.mutant_count;
    f["high_high_count"] = s.high_high_count;
    f["hit_rate"] = s.hit_rate;
    families.push_back(std::move(f));
  }
  j["families"] = std::move(families);
  j["thresholds"] = detail::thresholds_json(r.thresholds);
  return j;
}

inline SelectionReport selection_from_json(const nlohmann::json& j) {
  try {
    SelectionReport r;
    r.tau = j.at("tau").get<double>();
    r.strict_exceeds = j.value("strict_exceeds", false);
    r.families_total = j.at("families_total").get<std::int64_t>();
    r.families_retained = j.at("families_retained").get<std::int64_t>();
    for (const auto& id : j.at("retained_ids")) r.retained_ids.insert(id.get<std::string>());
    for (const auto& f : j.at("families")) {
      FamilyStats s{f.at("family_id").get<std::string>(), f.at("mutant_count").get<std::int64_t>(),
                    f.at("high_high_count").get<std::int64_t>(), f.at("hit_rate").get<double>()};
      r.families.emplace(s.family_id, s);
    }
    r.thresholds = detail::thresholds_from(j);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedLine, std::string("selection report: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const ValidationReport& r) {
  nlohmann::ordered_json j;
  j["mutants_before"] = r.mutants_before;
  j["mutants_after"] = r.mutants_after;
  j["reduction_ratio"] = r.reduction_ratio;
  j["median_iq_before"] = detail::optional_json(r.median_iq_before);
  j["median_iq_after"] = detail::optional_json(r.median_iq_after);
  j["median_eq_before"] = detail::optional_json(r.median_eq_before);
  j["median_eq_after"] = detail::optional_json(r.median_eq_after);
  j["hh_before"] = detail::optional_json(r.hh_before);
  j["hh_after"] = detail::optional_json(r.hh_after);
  nlohmann::ordered_json rel;
  rel["median_iq"] = detail::optional_json(r.relative_changes.median_iq);
  rel["median_eq"] = detail::optional_json(r.relative_changes.median_eq);
  rel["hh"] = detail::optional_json(r.relative_changes.hh);
  j["relative_changes"] = std::move(rel);
  j["warnings"] = r.warnings;
  j["thresholds"] = detail::thresholds_json(r.thresholds);
  return j;
}

inline ValidationReport validation_from_json(const nlohmann::json& j) {
  try {
    ValidationReport r;
    r.mutants_before = j.at("mutants_before").get<std::int64_t>();
    r.mutants_after = j.at("mutants_after").get<std::int64_t>();
    r.reduction_ratio = j.at("reduction_ratio").get<double>();
    r.median_iq_before = detail::optional_from(j, "median_iq_before");
    r.median_iq_after = detail::optional_from(j, "median_iq_after");
    r.median_eq_before = detail::optional_from(j, "median_eq_before");
    r.median_eq_after = detail::optional_from(j, "median_eq_after");
    r.hh_before = detail::optional_from(j, "hh_before");
    r.hh_after = detail::optional_from(j, "hh_after");
    const auto& rel = j.at("relative_changes");
    r.relative_changes = {detail::optional_from(rel, "median_iq"), detail::optional_from(rel, "median_eq"),
                          detail::optional_from(rel, "hh")};
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.thresholds = detail::thresholds_from(j);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedLine, std::string("validation report: ") + e.what());
  }
}

}  // namespace mutqual
