#pragma once

// Command-line entry point: validate, analyze, select, holdout, synth, report.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mutqual/error.hpp"
#include "mutqual/ingest.hpp"
#include "mutqual/pipeline.hpp"
#include "mutqual/quality_table.hpp"
#include "mutqual/report.hpp"
#include "mutqual/selection.hpp"
#include "mutqual/synth.hpp"

namespace mutqual::cli {

inline constexpr const char* kVersion = "mutqual 1.0.0";

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::MalformedLine, path + ": " + e.what());
  }
}

inline CanonRuleSet load_rules(const std::string& path) {
  if (path.empty()) return CanonRuleSet::defaults();
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path);
  return CanonRuleSet::parse(in);
}

inline std::vector<MutantQuality> load_qualities(const std::string& path, const CanonRuleSet& rules) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path);
  auto qualities = read_quality_csv(in);
  for (auto& q : qualities) {
    if (q.family_id.empty()) q.family_id = canonicalize(q.config_id, rules);
  }
  return qualities;
}

inline std::vector<PredictionRecord> load_logs(const std::vector<std::string>& paths, LogFormat format) {
  std::vector<std::vector<PredictionRecord>> sources;
  for (const auto& p : paths) sources.push_back(parse_log_file(p, format));
  return merge_logs(std::move(sources));
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  report::write_text_file(path, j.dump(2) + "\n");
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Probabilistic quality analysis and configuration selection for deep-learning mutants", "mutqual"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  const std::vector<std::string> formats = {"jsonl", "csv"};

  // validate
  std::vector<std::string> validate_in;
  std::string validate_format = "jsonl";
  auto* validate = app.add_subcommand("validate", "Parse and group prediction logs, reporting the first violation");
  validate->add_option("--in", validate_in, "Prediction log(s)")->required();
  validate->add_option("--format", validate_format, "Log format")->check(CLI::IsMember(formats));

  // analyze
  std::vector<std::string> analyze_in;
  std::string analyze_format = "jsonl";
  std::string analyze_out;
  std::string analyze_rules;
  std::string dump_dir;
  int jobs = 1;
  auto* analyze = app.add_subcommand("analyze", "Compute per-mutant S_m, IQ and EQ into a quality CSV");
  analyze->add_option("--in", analyze_in, "Prediction log(s)")->required();
  analyze->add_option("--format", analyze_format, "Log format")->check(CLI::IsMember(formats));
  analyze->add_option("--out", analyze_out, "Quality CSV")->required();
  analyze->add_option("--rules", analyze_rules, "Canonicalization rule file (JSONL)");
  analyze->add_option("--dump-matrices", dump_dir, "Directory for execution-matrix CSVs");
  analyze->add_option("--jobs", jobs, "Subjects analyzed in parallel")->check(CLI::PositiveNumber);

  // select
  std::string select_in;
  std::string select_out;
  std::string select_rules;
  double tau = 0.25;
  bool strict = false;
  auto* select = app.add_subcommand("select", "Select configuration families from selection-dataset qualities");
  select->add_option("--in", select_in, "Quality CSV of the selection datasets")->required();
  select->add_option("--out", select_out, "SelectionReport JSON")->required();
  select->add_option("--tau", tau, "Hit-rate threshold");
  select->add_flag("--strict-exceeds", strict, "Retain only hit_rate > tau");
  select->add_option("--rules", select_rules, "Rule file for rows without family_id");

  // holdout
  std::string holdout_in;
  std::string holdout_selection;
  std::string holdout_out;
  std::string holdout_rules;
  auto* holdout = app.add_subcommand("holdout", "Validate a selection on a held-out quality CSV");
  holdout->add_option("--in", holdout_in, "Quality CSV of the held-out dataset")->required();
  holdout->add_option("--selection", holdout_selection, "SelectionReport JSON")->required();
  holdout->add_option("--out", holdout_out, "ValidationReport JSON")->required();
  holdout->add_option("--rules", holdout_rules, "Rule file for rows without family_id");

  // synth
  std::string synth_spec;
  std::string synth_out;
  std::string synth_format = "jsonl";
  std::optional<std::uint64_t> seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic prediction log from a scenario");
  synth->add_option("--spec", synth_spec, "ScenarioSpec JSON")->required();
  synth->add_option("--out", synth_out, "Output log")->required();
  synth->add_option("--format", synth_format, "Log format")->check(CLI::IsMember(formats));
  synth->add_option("--seed", seed, "Override the scenario seed");

  // report
  std::string report_in;
  std::string report_selection;
  std::string report_out;
  std::string report_rules;
  auto* rep = app.add_subcommand("report", "Render SVG figures from a quality CSV");
  rep->add_option("--in", report_in, "Quality CSV")->required();
  rep->add_option("--selection", report_selection, "SelectionReport JSON (enables threshold-sweep figures)");
  rep->add_option("--out", report_out, "Output directory")->required();
  rep->add_option("--rules", report_rules, "Rule file for rows without family_id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*validate) {
      const auto groups = group_runs(detail::load_logs(validate_in, parse_log_format(validate_format)));
      for (const auto& [key, runs] : groups) {
        out << key.first << '/' << key.second << ": n=" << runs.n << " tests=" << runs.test_count()
            << " mutants=" << runs.mutants.size() << " faulty=" << (runs.faulty ? "yes" : "no") << '\n';
      }
      out << "ok: " << groups.size() << " subject(s)\n";
    } else if (*analyze) {
      const CanonRuleSet rules = detail::load_rules(analyze_rules);
      AnalyzeOptions options;
      options.rules = &rules;
      options.jobs = jobs;
      if (!dump_dir.empty()) {
        std::filesystem::create_directories(dump_dir);
        options.dump_matrices = dump_dir;
      }
      const auto groups = group_runs(detail::load_logs(analyze_in, parse_log_format(analyze_format)));
      report::emit_quality_csv(mutqual::analyze(groups, options), analyze_out);
    } else if (*select) {
      const auto qualities = detail::load_qualities(select_in, detail::load_rules(select_rules));
      const auto sel = select_from_qualities(qualities, tau, strict);
      detail::write_json(select_out, to_json(sel));
      out << "retained " << sel.families_retained << " of " << sel.families_total << " families\n";
    } else if (*holdout) {
      const auto qualities = detail::load_qualities(holdout_in, detail::load_rules(holdout_rules));
      const auto sel = selection_from_json(detail::read_json(holdout_selection));
      const auto v = validate_holdout(qualities, sel.retained_ids);
      detail::write_json(holdout_out, to_json(v));
      out << "mutants " << v.mutants_before << " -> " << v.mutants_after << " (RR=" << format_real(v.reduction_ratio)
          << ")\n";
      for (const auto& w : v.warnings) err << "warning: " << w << '\n';
    } else if (*synth) {
      auto spec = synth::spec_from_json(detail::read_json(synth_spec));
      if (seed) spec.seed = *seed;
      std::ofstream file(synth_out, std::ios::binary);
      if (!file) throw Error(ErrorKind::IoFailure, "cannot write " + synth_out);
      synth::generate(spec, file, parse_log_format(synth_format));
      if (!file) throw Error(ErrorKind::IoFailure, "write failed: " + synth_out);
    } else if (*rep) {
      const auto qualities = detail::load_qualities(report_in, detail::load_rules(report_rules));
      std::optional<SelectionReport> sel;
      if (!report_selection.empty()) sel = selection_from_json(detail::read_json(report_selection));
      for (const auto& path : report::emit_figures(qualities, sel, report_out)) out << path.string() << '\n';
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: IoFailure(" << e.what() << ")\n";
    return 1;
  }
  return 0;
}

}  // namespace mutqual::cli
