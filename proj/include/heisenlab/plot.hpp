#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "heisenlab/error.hpp"
#include "heisenlab/timeseries.hpp"

namespace heisenlab {

/// One polyline on a figure.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::string annotation;
  bool log_y = false;
  bool equal_aspect = false;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Values below this are drawn at the floor on logarithmic axes.
inline constexpr double kLogFloor = 1e-18;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      const double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
      lo -= d;
      hi += d;
    } else {
      const double d = 0.05 * (hi - lo);
      lo -= d;
      hi += d;
    }
  }
};

}  // namespace detail

/// Renders a line chart as a standalone SVG document.
inline std::string render_svg(const Figure& fig) {
  const double width = 720, height = 480, left = 80, right = 20, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  auto ty = [&](double v) { return fig.log_y ? std::log10(std::max(v, detail::kLogFloor)) : v; };

  detail::Range xr, yr;
  for (const auto& s : fig.series) {
    if (s.x.size() != s.y.size())
      throw InvalidArgument("plot: series '" + s.label + "' has mismatched lengths");
    for (double v : s.x)
      if (std::isfinite(v)) xr.add(v);
    for (double v : s.y)
      if (std::isfinite(v)) yr.add(ty(v));
  }
  if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo))
    throw InvalidArgument("plot: nothing to draw in '" + fig.title + "'");
  xr.pad();
  yr.pad();
  if (fig.equal_aspect) {
    const double sx = (xr.hi - xr.lo) / pw, sy = (yr.hi - yr.lo) / ph;
    if (sx > sy) {
      const double mid = 0.5 * (yr.lo + yr.hi), half = 0.5 * sx * ph;
      yr = {mid - half, mid + half};
    } else {
      const double mid = 0.5 * (xr.lo + xr.hi), half = 0.5 * sy * pw;
      xr = {mid - half, mid + half};
    }
  }
  auto px = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double v) { return top + ph - (ty(v) - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       detail::svg_escape(fig.title) + "</text>\n";
  o += "<rect x=\"" + detail::short_num(left) + "\" y=\"" + detail::short_num(top) +
       "\" width=\"" + detail::short_num(pw) + "\" height=\"" + detail::short_num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xr.lo + (xr.hi - xr.lo) * k / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * k / 4.0;
    const double gx = left + pw * k / 4.0, gy = top + ph - ph * k / 4.0;
    o += "<line x1=\"" + detail::short_num(gx) + "\" y1=\"" + detail::short_num(top) +
         "\" x2=\"" + detail::short_num(gx) + "\" y2=\"" + detail::short_num(top + ph) +
         "\" stroke=\"#ddd\"/>\n";
    o += "<line x1=\"" + detail::short_num(left) + "\" y1=\"" + detail::short_num(gy) +
         "\" x2=\"" + detail::short_num(left + pw) + "\" y2=\"" + detail::short_num(gy) +
         "\" stroke=\"#ddd\"/>\n";
    o += "<text x=\"" + detail::short_num(gx) + "\" y=\"" + detail::short_num(top + ph + 16) +
         "\" text-anchor=\"middle\">" + detail::short_num(fx) + "</text>\n";
    const std::string ylab = fig.log_y ? "1e" + detail::short_num(fy) : detail::short_num(fy);
    o += "<text x=\"" + detail::short_num(left - 6) + "\" y=\"" + detail::short_num(gy + 4) +
         "\" text-anchor=\"end\">" + ylab + "</text>\n";
  }
  o += "<text x=\"" + detail::short_num(left + pw / 2) + "\" y=\"" +
       detail::short_num(height - 16) + "\" text-anchor=\"middle\">" +
       detail::svg_escape(fig.x_label) + "</text>\n";
  o += "<text x=\"16\" y=\"" + detail::short_num(top + ph / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       detail::short_num(top + ph / 2) + ")\">" + detail::svg_escape(fig.y_label) +
       "</text>\n";

  for (std::size_t s = 0; s < fig.series.size(); ++s) {
    const PlotSeries& ser = fig.series[s];
    std::string pts;
    for (std::size_t k = 0; k < ser.x.size(); ++k) {
      if (!std::isfinite(ser.x[k]) || !std::isfinite(ser.y[k])) continue;
      pts += detail::short_num(px(ser.x[k])) + "," + detail::short_num(py(ser.y[k])) + " ";
    }
    o += "<polyline fill=\"none\" stroke=\"" + ser.color + "\" stroke-width=\"1.6\"";
    if (ser.dashed) o += " stroke-dasharray=\"6 4\"";
    o += " points=\"" + pts + "\"/>\n";
    const double ly = top + 16 + 16.0 * static_cast<double>(s);
    o += "<line x1=\"" + detail::short_num(left + pw - 150) + "\" y1=\"" +
         detail::short_num(ly - 4) + "\" x2=\"" + detail::short_num(left + pw - 120) +
         "\" y2=\"" + detail::short_num(ly - 4) + "\" stroke=\"" + ser.color + "\"" +
         (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    o += "<text x=\"" + detail::short_num(left + pw - 114) + "\" y=\"" +
         detail::short_num(ly) + "\">" + detail::svg_escape(ser.label) + "</text>\n";
  }
  if (!fig.annotation.empty())
    o += "<text x=\"" + detail::short_num(left + 8) + "\" y=\"" + detail::short_num(top + 16) +
         "\">" + detail::svg_escape(fig.annotation) + "</text>\n";
  o += "</svg>\n";
  return o;
}

/// Writes to a sibling temporary file, then renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move output into place at '" + path.string() + "'");
  }
}

/**
 * Comparison plots for a run: one overlay of quantum mean and classical
 * position per dof, the position gaps against time, and for planar field
 * or rotating-frame runs the orbit in the plane. Returns the file names
 * written into `out_dir`.
 */
inline std::vector<std::string> emit_plots(const nlohmann::json& report, const TimeSeries& ts,
                                           const std::filesystem::path& out_dir,
                                           const std::string& stem) {
  if (ts.size() == 0) throw InvalidArgument("plot: empty time grid");
  const std::size_t dofs = report.at("scenario").at("dofs").get<std::size_t>();
  const std::string kind = report.at("scenario").at("kind").get<std::string>();
  const std::vector<std::string> palette{"#1f77b4", "#d62728", "#2ca02c"};
  std::vector<std::string> written;
  auto save = [&](const std::string& name, const Figure& fig) {
    write_file_atomic(out_dir / name, render_svg(fig));
    written.push_back(name);
  };

  for (std::size_t i = 0; i < dofs; ++i) {
    const std::string idx = std::to_string(i);
    Figure f;
    f.title = stem + ": position q" + idx;
    f.x_label = "t";
    f.y_label = "q" + idx;
    f.series.push_back({"quantum <q" + idx + ">", ts.times(), ts.channel("mean_q_" + idx),
                        palette[0], false});
    f.series.push_back({"classical q" + idx, ts.times(), ts.channel("classical_q_" + idx),
                        palette[1], true});
    const auto& g = ts.channel("gap_" + idx);
    f.annotation = "max gap = " + detail::short_num(*std::max_element(g.begin(), g.end()));
    save(stem + "_q" + idx + ".svg", f);
  }

  Figure gap;
  gap.title = stem + ": quantum-classical gap";
  gap.x_label = "t";
  gap.y_label = "|<q> - q_classical|";
  gap.log_y = true;
  for (std::size_t i = 0; i < dofs; ++i) {
    const std::string idx = std::to_string(i);
    gap.series.push_back({"gap q" + idx, ts.times(), ts.channel("gap_" + idx),
                          palette[i % palette.size()], false});
  }
  save(stem + "_gap.svg", gap);

  if ((kind == "em" || kind == "rotating") && dofs >= 2) {
    Figure orbit;
    orbit.title = stem + ": orbit";
    orbit.x_label = "q0";
    orbit.y_label = "q1";
    orbit.equal_aspect = true;
    orbit.series.push_back(
        {"quantum mean", ts.channel("mean_q_0"), ts.channel("mean_q_1"), palette[0], false});
    orbit.series.push_back({"classical", ts.channel("classical_q_0"),
                            ts.channel("classical_q_1"), palette[1], true});
    save(stem + "_orbit.svg", orbit);
  }
  return written;
}

}  // namespace heisenlab
