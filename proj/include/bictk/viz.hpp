#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "io.hpp"

namespace bictk::viz {

enum class PlotKind { heatmap, gene_plot, cluster_plot };

inline PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "heatmap") return PlotKind::heatmap;
  if (s == "gene_plot" || s == "geneplot") return PlotKind::gene_plot;
  if (s == "cluster_plot" || s == "clusterplot") return PlotKind::cluster_plot;
  throw ParameterError("unknown plot kind '" + s + "' (valid: heatmap, gene_plot, cluster_plot)");
}

inline const char* to_string(PlotKind k) {
  switch (k) {
    case PlotKind::heatmap: return "heatmap";
    case PlotKind::gene_plot: return "gene_plot";
    case PlotKind::cluster_plot: return "cluster_plot";
  }
  return "?";
}

struct RenderSpec {
  PlotKind kind = PlotKind::heatmap;
  std::optional<std::size_t> bicluster;  // unset = whole matrix
  std::string colormap = "bwr";
  int width = 800;
  int height = 600;
  bool highlight = false;
};

struct Rgb {
  double r, g, b;
};

// Maps a value to a color. "bwr" is blue-white-red diverging around the
// matrix mean; "gray" and "viridis" are linear over [min, max].
class ColorMap {
 public:
  ColorMap(std::string name, double lo, double mid, double hi)
      : name_(std::move(name)), lo_(lo), mid_(mid), hi_(hi) {
    if (name_ != "bwr" && name_ != "gray" && name_ != "viridis")
      throw ParameterError("unknown colormap '" + name_ + "' (valid: bwr, gray, viridis)");
  }

  std::string hex(double v) const {
    const Rgb c = rgb(v);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", channel(c.r), channel(c.g), channel(c.b));
    return buf;
  }

  Rgb rgb(double v) const {
    if (name_ == "bwr") {
      if (v < mid_ && lo_ < mid_) {
        const double t = (mid_ - v) / (mid_ - lo_);
        return {1.0 - t, 1.0 - t, 1.0};
      }
      if (v > mid_ && hi_ > mid_) {
        const double t = (v - mid_) / (hi_ - mid_);
        return {1.0, 1.0 - t, 1.0 - t};
      }
      return {1.0, 1.0, 1.0};
    }
    const double t = hi_ > lo_ ? (v - lo_) / (hi_ - lo_) : 0.5;
    if (name_ == "gray") return {t, t, t};
    // Piecewise-linear approximation through five viridis anchors.
    static const Rgb anchors[] = {{0.267, 0.005, 0.329},
                                  {0.229, 0.322, 0.546},
                                  {0.128, 0.567, 0.551},
                                  {0.369, 0.789, 0.383},
                                  {0.993, 0.906, 0.144}};
    const double pos = std::clamp(t, 0.0, 1.0) * 4.0;
    const int k = std::min(3, static_cast<int>(pos));
    const double f = pos - k;
    const Rgb& a = anchors[k];
    const Rgb& b = anchors[k + 1];
    return {a.r + f * (b.r - a.r), a.g + f * (b.g - a.g), a.b + f * (b.b - a.b)};
  }

 private:
  static int channel(double x) {
    return static_cast<int>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
  }
  std::string name_;
  double lo_, mid_, hi_;
};

namespace detail {

inline std::string num(double v) { return bictk::detail::format_double(v); }

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline void open_svg(std::ostringstream& o, const RenderSpec& spec, const char* kind) {
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
    << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height
    << "\" data-kind=\"" << kind << "\">\n";
}

inline void check_spec(const ExpressionMatrix& m, const BiclusterSet& s, const RenderSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0)
    throw ValidationError("render dimensions must be positive");
  if (m.rows() == 0 || m.cols() == 0) throw ValidationError("cannot render an empty matrix");
  if (spec.bicluster && *spec.bicluster >= s.size()) {
    throw ValidationError("bicluster index " + std::to_string(*spec.bicluster) +
                          " out of range (set has " + std::to_string(s.size()) + ")");
  }
  validate_set(s, m);
}

// Selected indices first (in their order), then the rest ascending.
inline IndexList front_order(const IndexList& front, std::size_t n) {
  IndexList out = front;
  std::vector<char> used(n, 0);
  for (auto i : front) used[i] = 1;
  for (std::size_t i = 0; i < n; ++i)
    if (!used[i]) out.push_back(i);
  return out;
}

}  // namespace detail

// Heat map of the whole matrix, or of one bicluster's submatrix. With
// highlight, the bicluster's rows and columns move to the top-left and the
// block is outlined.
inline std::string render_heatmap(const ExpressionMatrix& m, const BiclusterSet& s,
                                  const RenderSpec& spec) {
  detail::check_spec(m, s, spec);
  IndexList rows, cols;
  std::optional<Bicluster> outline;
  if (spec.bicluster && spec.highlight) {
    const Bicluster& b = s.biclusters[*spec.bicluster];
    rows = detail::front_order(b.rows, m.rows());
    cols = detail::front_order(b.cols, m.cols());
    outline = b;
  } else if (spec.bicluster) {
    rows = s.biclusters[*spec.bicluster].rows;
    cols = s.biclusters[*spec.bicluster].cols;
  } else {
    rows = detail::front_order({}, m.rows());
    cols = detail::front_order({}, m.cols());
  }

  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  std::size_t count = 0;
  for (auto i : rows)
    for (auto j : cols)
      if (!m.missing()(i, j)) {
        lo = std::min(lo, m(i, j));
        hi = std::max(hi, m(i, j));
        sum += m(i, j);
        ++count;
      }
  if (count == 0) lo = hi = sum = 0.0;
  const ColorMap cmap(spec.colormap, lo, count ? sum / static_cast<double>(count) : 0.0, hi);

  const double cw = static_cast<double>(spec.width) / static_cast<double>(cols.size());
  const double ch = static_cast<double>(spec.height) / static_cast<double>(rows.size());
  std::ostringstream o;
  detail::open_svg(o, spec, "heatmap");
  o << "<title>heat map</title>\n";
  for (std::size_t p = 0; p < rows.size(); ++p) {
    for (std::size_t q = 0; q < cols.size(); ++q) {
      const auto i = rows[p], j = cols[q];
      const bool miss = m.missing()(i, j);
      o << "<rect class=\"cell\" data-row=\"" << i << "\" data-col=\"" << j << "\" x=\""
        << detail::num(static_cast<double>(q) * cw) << "\" y=\""
        << detail::num(static_cast<double>(p) * ch) << "\" width=\"" << detail::num(cw)
        << "\" height=\"" << detail::num(ch) << "\" fill=\""
        << (miss ? std::string("#cccccc") : cmap.hex(m(i, j))) << "\""
        << (miss ? " data-missing=\"true\"" : "") << "/>\n";
    }
  }
  if (outline) {
    o << "<rect class=\"outline\" data-id=\"" << *spec.bicluster << "\" x=\"0\" y=\"0\" width=\""
      << detail::num(static_cast<double>(outline->cols.size()) * cw) << "\" height=\""
      << detail::num(static_cast<double>(outline->rows.size()) * ch)
      << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

// One polyline per bicluster row across the bicluster's columns (parallel
// coordinates), with the column labels along the x axis.
inline std::string render_gene_plot(const ExpressionMatrix& m, const BiclusterSet& s,
                                    const RenderSpec& spec) {
  detail::check_spec(m, s, spec);
  if (s.size() == 0) throw ValidationError("gene plot needs a bicluster; the set is empty");
  const Bicluster& b = s.biclusters[spec.bicluster.value_or(0)];
  const Matrix sub = extract_submatrix(m, b);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index k = 0; k < sub.size(); ++k)
    if (std::isfinite(sub(k))) {
      lo = std::min(lo, sub(k));
      hi = std::max(hi, sub(k));
    }
  const double margin = 40.0;
  const double w = std::max(1.0, spec.width - 2 * margin);
  const double h = std::max(1.0, spec.height - 2 * margin);
  const auto x_of = [&](std::size_t q) {
    return b.cols.size() > 1
               ? margin + w * static_cast<double>(q) / static_cast<double>(b.cols.size() - 1)
               : margin + w / 2;
  };
  const auto y_of = [&](double v) { return hi > lo ? margin + (hi - v) / (hi - lo) * h : margin + h / 2; };

  std::ostringstream o;
  detail::open_svg(o, spec, "gene_plot");
  o << "<title>gene plot</title>\n";
  o << "<line class=\"axis\" x1=\"" << detail::num(margin) << "\" y1=\""
    << detail::num(margin + h) << "\" x2=\"" << detail::num(margin + w) << "\" y2=\""
    << detail::num(margin + h) << "\" stroke=\"#000000\"/>\n";
  for (std::size_t q = 0; q < b.cols.size(); ++q) {
    o << "<text class=\"axis-label\" x=\"" << detail::num(x_of(q)) << "\" y=\""
      << detail::num(margin + h + 16) << "\" text-anchor=\"middle\" font-size=\"10\">"
      << detail::escape(m.col_ids()[b.cols[q]]) << "</text>\n";
  }
  for (std::size_t p = 0; p < b.rows.size(); ++p) {
    o << "<polyline class=\"gene\" data-row=\"" << b.rows[p] << "\" data-label=\""
      << detail::escape(m.row_ids()[b.rows[p]]) << "\" fill=\"none\" stroke=\"#1f77b4\" points=\"";
    bool first = true;
    for (std::size_t q = 0; q < b.cols.size(); ++q) {
      const double v = sub(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
      if (!std::isfinite(v)) continue;
      o << (first ? "" : " ") << detail::num(x_of(q)) << ',' << detail::num(y_of(v));
      first = false;
    }
    o << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

// Membership overview: the matrix outline with each bicluster's row/column
// extent as a translucent rectangle. Where two rectangles intersect, an
// overlap rectangle lists both identifiers.
inline std::string render_cluster_plot(const ExpressionMatrix& m, const BiclusterSet& s,
                                       const RenderSpec& spec) {
  detail::check_spec(m, s, spec);
  const double legend_h = 14.0 * static_cast<double>(s.size());
  const double plot_h = std::max(1.0, spec.height - legend_h);
  const double cw = static_cast<double>(spec.width) / static_cast<double>(m.cols());
  const double ch = plot_h / static_cast<double>(m.rows());
  struct Box {
    double x0, y0, x1, y1;
  };
  std::vector<Box> boxes;
  for (const auto& b : s.biclusters) {
    boxes.push_back({static_cast<double>(b.cols.front()) * cw,
                     static_cast<double>(b.rows.front()) * ch,
                     static_cast<double>(b.cols.back() + 1) * cw,
                     static_cast<double>(b.rows.back() + 1) * ch});
  }
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream o;
  detail::open_svg(o, spec, "cluster_plot");
  o << "<title>cluster plot</title>\n";
  o << "<rect class=\"matrix\" x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\""
    << detail::num(plot_h) << "\" fill=\"#f4f4f4\" stroke=\"#000000\"/>\n";
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const Box& b = boxes[k];
    o << "<rect class=\"bicluster\" data-id=\"" << k << "\" x=\"" << detail::num(b.x0)
      << "\" y=\"" << detail::num(b.y0) << "\" width=\"" << detail::num(b.x1 - b.x0)
      << "\" height=\"" << detail::num(b.y1 - b.y0) << "\" fill=\"" << palette[k % 10]
      << "\" fill-opacity=\"0.35\" stroke=\"" << palette[k % 10] << "\"/>\n";
  }
  for (std::size_t k = 0; k < boxes.size(); ++k)
    for (std::size_t l = k + 1; l < boxes.size(); ++l) {
      const double x0 = std::max(boxes[k].x0, boxes[l].x0);
      const double y0 = std::max(boxes[k].y0, boxes[l].y0);
      const double x1 = std::min(boxes[k].x1, boxes[l].x1);
      const double y1 = std::min(boxes[k].y1, boxes[l].y1);
      if (x1 <= x0 || y1 <= y0) continue;
      o << "<rect class=\"overlap\" data-ids=\"" << k << ' ' << l << "\" x=\"" << detail::num(x0)
        << "\" y=\"" << detail::num(y0) << "\" width=\"" << detail::num(x1 - x0)
        << "\" height=\"" << detail::num(y1 - y0)
        << "\" fill=\"none\" stroke=\"#000000\" stroke-dasharray=\"4 2\"/>\n";
    }
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& b = s.biclusters[k];
    o << "<text class=\"legend\" data-id=\"" << k << "\" x=\"4\" y=\""
      << detail::num(plot_h + 12.0 + 14.0 * static_cast<double>(k)) << "\" font-size=\"11\" fill=\""
      << palette[k % 10] << "\">bicluster " << k << ": " << b.rows.size() << " x "
      << b.cols.size() << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline std::string render(const ExpressionMatrix& m, const BiclusterSet& s,
                          const RenderSpec& spec) {
  switch (spec.kind) {
    case PlotKind::heatmap: return render_heatmap(m, s, spec);
    case PlotKind::gene_plot: return render_gene_plot(m, s, spec);
    case PlotKind::cluster_plot: return render_cluster_plot(m, s, spec);
  }
  return {};
}

}  // namespace bictk::viz
