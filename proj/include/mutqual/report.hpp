#pragma once

// Report artifacts: the quality CSV and SVG figures (per-operator box plots
// of IQ and EQ, IQ-EQ quadrant scatter, retained mutants and relative
// quality change across hit-rate thresholds).

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mutqual/domain.hpp"
#include "mutqual/error.hpp"
#include "mutqual/quality_table.hpp"
#include "mutqual/selection.hpp"

namespace mutqual::report {

namespace fs = std::filesystem;

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoFailure, "write failed: " + path.string());
}

inline void emit_quality_csv(const std::vector<MutantQuality>& qualities, const fs::path& path) {
  std::ostringstream out;
  write_quality_csv(out, qualities);
  write_text_file(path, out.str());
}

/// Operator id of a raw config: the text before the first '_'.
inline std::string operator_id(const std::string& config_id) {
  return config_id.substr(0, config_id.find('_'));
}

struct QuadrantCounts {
  std::int64_t hh = 0, hl = 0, lh = 0, ll = 0;
  std::int64_t total() const { return hh + hl + lh + ll; }
  friend bool operator==(const QuadrantCounts&, const QuadrantCounts&) = default;
};

/// Tallies of label_quadrant over the EQ-defined mutants of one dataset.
inline QuadrantCounts quadrant_counts(const std::vector<MutantQuality>& qualities, const QuadrantThresholds& th) {
  QuadrantCounts c;
  for (const auto& q : qualities) {
    if (q.dataset_id != th.dataset_id || !q.eq) continue;
    switch (label_quadrant(q, th)) {
      case Quadrant::HH: ++c.hh; break;
      case Quadrant::HL: ++c.hl; break;
      case Quadrant::LH: ++c.lh; break;
      case Quadrant::LL: ++c.ll; break;
    }
  }
  return c;
}

struct BoxStats {
  double q1 = 0, median = 0, q3 = 0, whisker_lo = 0, whisker_hi = 0;
  std::vector<double> outliers;
};

/// Quartiles by linear interpolation between order statistics; whiskers
/// reach the most extreme values within 1.5 IQR.
inline BoxStats box_stats(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorKind::EmptyDataset, "box plot of no values");
  std::sort(v.begin(), v.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  BoxStats b;
  b.q1 = quantile(0.25);
  b.median = quantile(0.5);
  b.q3 = quantile(0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_lo = b.q1;
  b.whisker_hi = b.q3;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
    } else {
      b.whisker_lo = std::min(b.whisker_lo, x);
      b.whisker_hi = std::max(b.whisker_hi, x);
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// SVG

struct Style {
  double width = 720, height = 420;
  double margin_left = 70, margin_right = 30, margin_top = 40, margin_bottom = 70;
  const char* font = "sans-serif";
  const char* box_fill = "#9ecae1";
  const char* stroke = "#333333";
  const char* point_fill = "#3182bd";
  const char* median_line = "#d62728";
  const char* grid = "#dddddd";
  std::array<const char*, 3> series = {"#1f77b4", "#ff7f0e", "#2ca02c"};
};

inline const Style kStyle{};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

class Svg {
 public:
  Svg(double width, double height) {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
         << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
         << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
         << "\" fill=\"white\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const char* color, double w = 1, bool dashed = false) {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
         << "\" stroke=\"" << color << "\" stroke-width=\"" << num(w) << '"'
         << (dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
  }
  void rect(double x, double y, double w, double h, const char* fill, const char* stroke) {
    out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
         << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
  }
  void circle(double x, double y, double r, const char* fill, double opacity = 1.0) {
    out_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r) << "\" fill=\"" << fill
         << "\" fill-opacity=\"" << num(opacity) << "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
    out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) out_ << (i ? " " : "") << num(pts[i].first) << ',' << num(pts[i].second);
    out_ << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, const char* anchor = "middle", double size = 12,
            double rotate = 0) {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"" << kStyle.font
         << "\" font-size=\"" << num(size) << "\" text-anchor=\"" << anchor << '"';
    if (rotate != 0) out_ << " transform=\"rotate(" << num(rotate) << ' ' << num(x) << ' ' << num(y) << ")\"";
    out_ << '>' << xml_escape(s) << "</text>\n";
  }
  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

/// Plot area mapping data coordinates to SVG coordinates.
struct Frame {
  double x0, x1, y0, y1;  // data ranges
  double left = kStyle.margin_left;
  double right = kStyle.width - kStyle.margin_right;
  double top = kStyle.margin_top;
  double bottom = kStyle.height - kStyle.margin_bottom;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (right - left); }
  double py(double y) const { return bottom - (y - y0) / (y1 - y0) * (bottom - top); }
};

inline void draw_y_axis(Svg& svg, const Frame& f, const std::string& label, int ticks = 5) {
  for (int i = 0; i <= ticks; ++i) {
    const double v = f.y0 + (f.y1 - f.y0) * i / ticks;
    svg.line(f.left, f.py(v), f.right, f.py(v), kStyle.grid);
    svg.text(f.left - 8, f.py(v) + 4, num(v), "end", 11);
  }
  svg.line(f.left, f.top, f.left, f.bottom, kStyle.stroke);
  svg.line(f.left, f.bottom, f.right, f.bottom, kStyle.stroke);
  svg.text(18, (f.top + f.bottom) / 2, label, "middle", 13, -90);
}

inline std::string box_plot_svg(const std::string& title, const std::string& metric,
                                const std::map<std::string, std::vector<double>>& groups) {
  Svg svg(kStyle.width, kStyle.height);
  Frame f{0, static_cast<double>(std::max<std::size_t>(groups.size(), 1)), 0, 1};
  svg.text(kStyle.width / 2, 24, title, "middle", 15);
  draw_y_axis(svg, f, metric);
  const double slot = (f.right - f.left) / f.x1;
  double i = 0;
  for (const auto& [op, values] : groups) {
    const BoxStats b = box_stats(values);
    const double cx = f.px(i + 0.5);
    const double half = std::min(slot * 0.3, 20.0);
    svg.line(cx, f.py(b.whisker_lo), cx, f.py(b.q1), kStyle.stroke);
    svg.line(cx, f.py(b.q3), cx, f.py(b.whisker_hi), kStyle.stroke);
    svg.line(cx - half / 2, f.py(b.whisker_lo), cx + half / 2, f.py(b.whisker_lo), kStyle.stroke);
    svg.line(cx - half / 2, f.py(b.whisker_hi), cx + half / 2, f.py(b.whisker_hi), kStyle.stroke);
    svg.rect(cx - half, f.py(b.q3), 2 * half, std::max(f.py(b.q1) - f.py(b.q3), 0.5), kStyle.box_fill, kStyle.stroke);
    svg.line(cx - half, f.py(b.median), cx + half, f.py(b.median), kStyle.median_line, 2);
    for (double o : b.outliers) svg.circle(cx, f.py(o), 2.5, kStyle.stroke, 0.6);
    svg.text(cx, f.bottom + 16, op, "end", 11, -45);
    svg.text(cx, f.top - 4, "n=" + std::to_string(values.size()), "middle", 9);
    i += 1;
  }
  return svg.finish();
}

inline std::string quadrant_scatter_svg(const std::string& dataset, const std::vector<MutantQuality>& qualities,
                                        const QuadrantThresholds& th) {
  Svg svg(kStyle.width, kStyle.height);
  Frame f{0, 1, 0, 1};
  f.right = kStyle.width - 190;
  svg.text((f.left + f.right) / 2, 24, dataset + ": IQ vs EQ", "middle", 15);
  draw_y_axis(svg, f, "EQ");
  for (int i = 0; i <= 5; ++i) svg.text(f.px(i / 5.0), f.bottom + 18, num(i / 5.0), "middle", 11);
  svg.text((f.left + f.right) / 2, f.bottom + 40, "IQ", "middle", 13);
  for (const auto& q : qualities) {
    if (q.dataset_id != dataset || !q.eq) continue;
    svg.circle(f.px(q.iq), f.py(*q.eq), 3, kStyle.point_fill, 0.6);
  }
  svg.line(f.px(th.median_iq), f.top, f.px(th.median_iq), f.bottom, kStyle.median_line, 1.5, true);
  svg.line(f.left, f.py(th.median_eq), f.right, f.py(th.median_eq), kStyle.median_line, 1.5, true);
  const QuadrantCounts c = quadrant_counts(qualities, th);
  const double lx = f.right + 20;
  svg.text(lx, f.top + 10, "median IQ = " + format_real(th.median_iq), "start", 11);
  svg.text(lx, f.top + 28, "median EQ = " + format_real(th.median_eq), "start", 11);
  svg.text(lx, f.top + 56, "High-High: " + std::to_string(c.hh), "start", 12);
  svg.text(lx, f.top + 74, "High-Low: " + std::to_string(c.hl), "start", 12);
  svg.text(lx, f.top + 92, "Low-High: " + std::to_string(c.lh), "start", 12);
  svg.text(lx, f.top + 110, "Low-Low: " + std::to_string(c.ll), "start", 12);
  svg.text(lx, f.top + 128, "total: " + std::to_string(c.total()), "start", 12);
  return svg.finish();
}

/// Retained set at `tau` from the per-family statistics of a selection report.
inline std::set<std::string> retained_at(const SelectionReport& selection, double tau) {
  return select_families(selection.families, tau, selection.strict_exceeds).retained_ids;
}

inline std::vector<double> report_taus(const SelectionReport& selection) {
  std::set<double> taus = {0.20, 0.25, 0.30, selection.tau};
  return {taus.begin(), taus.end()};
}

inline std::string retained_bar_svg(const std::vector<MutantQuality>& qualities, const SelectionReport& selection) {
  const auto taus = report_taus(selection);
  const auto baseline = static_cast<double>(qualities.size());
  std::vector<double> kept;
  for (double tau : taus) {
    const auto retained = retained_at(selection, tau);
    kept.push_back(static_cast<double>(std::count_if(qualities.begin(), qualities.end(),
                                                     [&](const auto& q) { return retained.count(q.family_id) > 0; })));
  }
  Svg svg(kStyle.width, kStyle.height);
  Frame f{0, static_cast<double>(taus.size()), 0, std::max(baseline, 1.0) * 1.1};
  svg.text(kStyle.width / 2, 24, "Mutants retained by hit-rate threshold", "middle", 15);
  draw_y_axis(svg, f, "mutants");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double cx = f.px(static_cast<double>(i) + 0.5);
    const double w = (f.right - f.left) / static_cast<double>(taus.size()) * 0.5;
    svg.rect(cx - w / 2, f.py(kept[i]), w, f.py(0) - f.py(kept[i]), kStyle.box_fill, kStyle.stroke);
    svg.text(cx, f.py(kept[i]) - 6, std::to_string(static_cast<long long>(kept[i])), "middle", 11);
    svg.text(cx, f.bottom + 18, "tau=" + format_real(taus[i]), "middle", 11);
  }
  svg.line(f.left, f.py(baseline), f.right, f.py(baseline), kStyle.median_line, 1.5, true);
  svg.text(f.right, f.py(baseline) - 6, "baseline " + std::to_string(qualities.size()), "end", 11);
  return svg.finish();
}

inline std::string relative_change_svg(const std::vector<MutantQuality>& qualities, const SelectionReport& selection) {
  const auto taus = report_taus(selection);
  std::array<std::vector<std::optional<double>>, 3> series;
  for (double tau : taus) {
    const auto v = validate_holdout(qualities, retained_at(selection, tau));
    series[0].push_back(v.relative_changes.median_iq);
    series[1].push_back(v.relative_changes.median_eq);
    series[2].push_back(v.relative_changes.hh);
  }
  double extent = 0.1;
  for (const auto& s : series) {
    for (const auto& v : s) {
      if (v) extent = std::max(extent, std::abs(*v));
    }
  }
  extent = std::ceil(extent * 10.0) / 10.0;
  Svg svg(kStyle.width, kStyle.height);
  Frame f{0, static_cast<double>(taus.size()), -extent, extent};
  f.right = kStyle.width - 170;
  svg.text((f.left + f.right) / 2, 24, "Relative change after selection", "middle", 15);
  draw_y_axis(svg, f, "relative change", 4);
  svg.line(f.left, f.py(0), f.right, f.py(0), kStyle.stroke, 1, true);
  const std::array<const char*, 3> names = {"median IQ", "median EQ", "High-High share"};
  for (std::size_t s = 0; s < series.size(); ++s) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < taus.size(); ++i) {
      if (!series[s][i]) continue;
      pts.emplace_back(f.px(static_cast<double>(i) + 0.5), f.py(*series[s][i]));
      svg.circle(pts.back().first, pts.back().second, 3.5, kStyle.series[s]);
    }
    if (pts.size() > 1) svg.polyline(pts, kStyle.series[s]);
    svg.line(f.right + 20, f.top + 10 + 20.0 * s, f.right + 40, f.top + 10 + 20.0 * s, kStyle.series[s], 2);
    svg.text(f.right + 46, f.top + 14 + 20.0 * s, names[s], "start", 12);
  }
  for (std::size_t i = 0; i < taus.size(); ++i) {
    svg.text(f.px(static_cast<double>(i) + 0.5), f.bottom + 18, "tau=" + format_real(taus[i]), "middle", 11);
  }
  return svg.finish();
}

inline std::string file_stem(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return out;
}

/// Writes all figures into `out_dir` and returns their paths in write order.
/// Threshold-sweep figures are only produced when a selection report is given.
inline std::vector<fs::path> emit_figures(const std::vector<MutantQuality>& qualities,
                                          const std::optional<SelectionReport>& selection, const fs::path& out_dir) {
  if (qualities.empty()) throw Error(ErrorKind::EmptyDataset, "no mutants to plot");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + out_dir.string());

  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& svg) {
    written.push_back(out_dir / name);
    write_text_file(written.back(), svg);
  };

  std::set<std::string> datasets;
  for (const auto& q : qualities) datasets.insert(q.dataset_id);
  for (const auto& d : datasets) {
    std::map<std::string, std::vector<double>> iq_groups;
    std::map<std::string, std::vector<double>> eq_groups;
    for (const auto& q : qualities) {
      if (q.dataset_id != d) continue;
      iq_groups[operator_id(q.config_id)].push_back(q.iq);
      if (q.eq) eq_groups[operator_id(q.config_id)].push_back(*q.eq);
    }
    const std::string stem = file_stem(d);
    emit(stem + "_iq_by_operator.svg", box_plot_svg(d + ": IQ by operator", "IQ", iq_groups));
    if (eq_groups.empty()) continue;
    emit(stem + "_eq_by_operator.svg", box_plot_svg(d + ": EQ by operator", "EQ", eq_groups));
    emit(stem + "_quadrants.svg", quadrant_scatter_svg(d, qualities, compute_thresholds(qualities, d)));
  }
  if (selection) {
    emit("retained_by_tau.svg", retained_bar_svg(qualities, *selection));
    std::set<std::string> with_eq;
    for (const auto& q : qualities) {
      if (q.eq) with_eq.insert(q.dataset_id);
    }
    if (with_eq == datasets) emit("relative_change_by_tau.svg", relative_change_svg(qualities, *selection));
  }
  return written;
}

}  // namespace mutqual::report
