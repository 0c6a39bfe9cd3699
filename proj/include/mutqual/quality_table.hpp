#pragma once

// Quality table CSV: dataset_id,subject_id,config_id,family_id,s_m,iq,eq
// with 12 significant digits and an empty eq cell when EQ is undefined.

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "mutqual/domain.hpp"
#include "mutqual/error.hpp"
#include "mutqual/ingest.hpp"
#include "mutqual/selection.hpp"

namespace mutqual {

inline constexpr std::string_view kQualityHeader = "dataset_id,subject_id,config_id,family_id,s_m,iq,eq";

inline std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

inline double parse_real(const std::string& text, const char* field) {
  auto v = detail::parse_number(text);
  if (!v) throw Error(ErrorKind::MalformedLine, std::string(field) + " '" + text + "' is not a number");
  return *v;
}

inline void write_quality_csv(std::ostream& out, const std::vector<MutantQuality>& qualities) {
  out << kQualityHeader << '\n';
  for (const auto& q : qualities) {
    out << csv::escape(q.dataset_id) << ',' << csv::escape(q.subject_id) << ',' << csv::escape(q.config_id)
        << ',' << csv::escape(q.family_id) << ',' << format_real(q.s_m) << ',' << format_real(q.iq) << ','
        << (q.eq ? format_real(*q.eq) : "") << '\n';
  }
}

inline std::vector<MutantQuality> read_quality_csv(std::istream& in) {
  std::vector<MutantQuality> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line_no == 1) {
      if (line != kQualityHeader) {
        throw Error(ErrorKind::MalformedLine, "line 1: quality header must be " + std::string(kQualityHeader));
      }
      continue;
    }
    if (line.empty()) continue;
    try {
      const auto f = csv::split(line);
      if (f.size() != 7) throw Error(ErrorKind::MalformedLine, "expected 7 fields, found " + std::to_string(f.size()));
      MutantQuality q{f[0], f[1], f[2], f[3], parse_real(f[4], "s_m"), parse_real(f[5], "iq"), std::nullopt};
      if (!f[6].empty()) q.eq = parse_real(f[6], "eq");
      out.push_back(std::move(q));
    } catch (const Error& e) {
      throw e.located("line " + std::to_string(line_no));
    }
  }
  if (line_no == 0) throw Error(ErrorKind::MalformedLine, "line 1: missing header row");
  return out;
}

/// The values a reader of the CSV would see: each real passed through its
/// 12-digit text form.
inline MutantQuality as_written(MutantQuality q) {
  auto snap = [](double v) { return *detail::parse_number(format_real(v)); };
  q.s_m = snap(q.s_m);
  q.iq = snap(q.iq);
  if (q.eq) q.eq = snap(*q.eq);
  return q;
}

}  // namespace mutqual
