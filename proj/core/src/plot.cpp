#include "kshift/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace kshift {

namespace {

struct SeriesPoint {
  double n = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

struct Panel {
  std::string title;
  std::string empirical_label;
  std::string bound_label;
  std::vector<SeriesPoint> empirical;
  std::vector<double> bound;  // aligned with empirical, pre-scaling
  double scale = 1.0;
  bool degenerate = false;
};

std::string fmt(double v, const char* f = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

class SvgCanvas {
 public:
  SvgCanvas(double width, double height) : width_(width), height_(height) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
         << "\" height=\"" << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_
         << "\">\n";
    out_ << "<rect width=\"" << width_ << "\" height=\"" << height_
         << "\" fill=\"white\"/>\n";
  }

  void comment(const std::string& text) { out_ << "<!-- " << text << " -->\n"; }

  void line(double x1, double y1, double x2, double y2, const std::string& style) {
    out_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
         << "\" y2=\"" << fmt(y2) << "\" " << style << "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& style) {
    out_ << "<polyline fill=\"none\" " << style << " points=\"";
    for (const auto& [x, y] : pts) out_ << fmt(x) << "," << fmt(y) << " ";
    out_ << "\"/>\n";
  }

  void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& style) {
    out_ << "<polygon " << style << " points=\"";
    for (const auto& [x, y] : pts) out_ << fmt(x) << "," << fmt(y) << " ";
    out_ << "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& style) {
    out_ << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << r << "\" "
         << style << "/>\n";
  }

  void text(double x, double y, const std::string& s, const std::string& style) {
    out_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" " << style << ">" << s
         << "</text>\n";
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  double width_, height_;
  std::ostringstream out_;
};

constexpr double kW = 720, kH = 540;
constexpr double kL = 80, kR = 24, kT = 48, kB = 64;

void render_panel(const Panel& panel, const std::string& path) {
  SvgCanvas svg(kW, kH);
  svg.comment("panel: " + panel.title);

  {
    std::ostringstream meta;
    meta << "series " << panel.empirical_label << " (n, mean, sd):";
    for (const auto& p : panel.empirical)
      meta << " (" << fmt(p.n) << ", " << fmt(p.mean, "%.10g") << ", "
           << fmt(p.sd, "%.10g") << ")";
    svg.comment(meta.str());
  }
  {
    std::ostringstream meta;
    meta << "series " << panel.bound_label << " scale=" << fmt(panel.scale, "%.10g")
         << " (n, scaled value):";
    for (std::size_t i = 0; i < panel.bound.size(); ++i)
      meta << " (" << fmt(panel.empirical[i].n) << ", "
           << fmt(panel.bound[i] * panel.scale, "%.10g") << ")";
    svg.comment(meta.str());
  }

  svg.text(kL, kT - 18, panel.title, "font-family=\"sans-serif\" font-size=\"16\"");

  if (panel.degenerate) {
    svg.text(kL, kH / 2,
             "degenerate axis: all values are zero; nothing to plot on a log scale",
             "font-family=\"sans-serif\" font-size=\"14\" fill=\"#aa3311\"");
    std::ofstream file(path, std::ios::binary);
    if (!file) throw DataError("emit_plots: cannot write " + path);
    file << svg.finish();
    return;
  }

  // Log-log window over positive plotted values.
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (std::size_t i = 0; i < panel.empirical.size(); ++i) {
    const auto& p = panel.empirical[i];
    if (p.mean > 0.0) {
      ymin = std::min(ymin, p.mean);
      ymax = std::max(ymax, p.mean);
    }
    const double hi = p.mean + p.sd;
    if (hi > 0.0) ymax = std::max(ymax, hi);
    const double scaled = panel.bound[i] * panel.scale;
    if (scaled > 0.0) {
      ymin = std::min(ymin, scaled);
      ymax = std::max(ymax, scaled);
    }
  }
  const double floor_y = ymin / 10.0;
  const double xmin = panel.empirical.front().n, xmax = panel.empirical.back().n;

  const double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
  const double ly0 = std::log10(floor_y), ly1 = std::log10(ymax) + 0.1;
  auto X = [&](double n) {
    return kL + (std::log10(n) - lx0) / std::max(lx1 - lx0, 1e-12) * (kW - kL - kR);
  };
  auto Y = [&](double v) {
    const double lv = std::log10(std::max(v, floor_y));
    return kH - kB - (lv - ly0) / std::max(ly1 - ly0, 1e-12) * (kH - kT - kB);
  };

  // Frame and ticks.
  svg.line(kL, kT, kL, kH - kB, "stroke=\"black\" stroke-width=\"1\"");
  svg.line(kL, kH - kB, kW - kR, kH - kB, "stroke=\"black\" stroke-width=\"1\"");
  for (const auto& p : panel.empirical) {
    const double x = X(p.n);
    svg.line(x, kH - kB, x, kH - kB + 5, "stroke=\"black\" stroke-width=\"1\"");
    svg.text(x - 12, kH - kB + 20, fmt(p.n, "%.0f"),
             "font-family=\"sans-serif\" font-size=\"11\"");
  }
  svg.text(kW / 2 - 10, kH - kB + 40, "n", "font-family=\"sans-serif\" font-size=\"13\"");
  for (int e = static_cast<int>(std::floor(ly0)); e <= static_cast<int>(std::ceil(ly1)); ++e) {
    const double v = std::pow(10.0, e);
    if (v < floor_y || v > std::pow(10.0, ly1)) continue;
    const double y = Y(v);
    svg.line(kL - 5, y, kL, y, "stroke=\"black\" stroke-width=\"1\"");
    svg.text(kL - 52, y + 4, "1e" + std::to_string(e),
             "font-family=\"sans-serif\" font-size=\"11\"");
  }

  // +/- 1 std band.
  std::vector<std::pair<double, double>> band;
  for (const auto& p : panel.empirical) band.emplace_back(X(p.n), Y(p.mean + p.sd));
  for (auto it = panel.empirical.rbegin(); it != panel.empirical.rend(); ++it)
    band.emplace_back(X(it->n), Y(std::max(it->mean - it->sd, floor_y)));
  svg.polygon(band, "fill=\"#4477cc\" fill-opacity=\"0.18\" stroke=\"none\"");

  // Empirical mean.
  std::vector<std::pair<double, double>> emp;
  for (const auto& p : panel.empirical) emp.emplace_back(X(p.n), Y(p.mean));
  svg.polyline(emp, "stroke=\"#225599\" stroke-width=\"2\"");
  for (const auto& [x, y] : emp) svg.circle(x, y, 3.0, "fill=\"#225599\"");

  // Scaled bound overlay.
  std::vector<std::pair<double, double>> bnd;
  for (std::size_t i = 0; i < panel.bound.size(); ++i)
    bnd.emplace_back(X(panel.empirical[i].n), Y(panel.bound[i] * panel.scale));
  svg.polyline(bnd, "stroke=\"#cc3311\" stroke-width=\"2\" stroke-dasharray=\"7,4\"");

  // Legend.
  const double lx = kW - kR - 250, ly = kT + 10;
  svg.line(lx, ly, lx + 28, ly, "stroke=\"#225599\" stroke-width=\"2\"");
  svg.text(lx + 34, ly + 4, panel.empirical_label,
           "font-family=\"sans-serif\" font-size=\"12\"");
  svg.line(lx, ly + 20, lx + 28, ly + 20,
           "stroke=\"#cc3311\" stroke-width=\"2\" stroke-dasharray=\"7,4\"");
  svg.text(lx + 34, ly + 24, panel.bound_label + " (x " + fmt(panel.scale, "%.3g") + ")",
           "font-family=\"sans-serif\" font-size=\"12\"");
  svg.text(lx + 34, ly + 44, "band: mean +/- 1 std over seeds",
           "font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\"");

  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("emit_plots: cannot write " + path);
  file << svg.finish();
}

Panel build_panel(const std::map<Index, std::vector<double>>& emp_by_n,
                  const std::map<Index, std::vector<double>>& bound_by_n,
                  const std::string& title, const std::string& emp_label,
                  const std::string& bound_label) {
  Panel panel;
  panel.title = title;
  panel.empirical_label = emp_label;
  panel.bound_label = bound_label;
  for (const auto& [n, values] : emp_by_n) {
    SeriesPoint p;
    p.n = static_cast<double>(n);
    p.mean = mean_of(values);
    p.sd = sd_of(values, p.mean);
    panel.empirical.push_back(p);
    panel.bound.push_back(mean_of(bound_by_n.at(n)));
  }
  const double emp_last = panel.empirical.back().mean;
  const double bound_last = panel.bound.back();
  panel.scale = (emp_last > 0.0 && bound_last > 0.0) ? emp_last / bound_last : 1.0;

  bool any_positive = false;
  for (const auto& p : panel.empirical)
    if (p.mean > 0.0) any_positive = true;
  panel.degenerate = !any_positive;
  return panel;
}

}  // namespace

std::vector<std::string> emit_plots(const std::vector<SweepRecord>& records,
                                    const std::string& path_prefix) {
  if (records.empty()) throw DataError("emit_plots: no records");
  std::set<Index> distinct_n;
  for (const auto& r : records) distinct_n.insert(r.n);
  if (distinct_n.size() < 2)
    throw DataError("emit_plots: need records spanning at least 2 training sizes");

  std::set<double> decays;
  for (const auto& r : records) decays.insert(r.decay_a);

  std::vector<std::string> written;
  for (double a : decays) {
    std::map<Index, std::vector<double>> var_by_n, var_bound_by_n, bias_by_n,
        bias_bound_by_n;
    for (const auto& r : records) {
      if (r.decay_a != a) continue;
      var_by_n[r.n].push_back(r.variance);
      // The overlay tracks the capacity-controlled term; the residual is a
      // constant in n and would flatten the curve.
      var_bound_by_n[r.n].push_back(r.bound_variance_dominated);
      bias_by_n[r.n].push_back(r.bias_sq);
      bias_bound_by_n[r.n].push_back(r.bound_bias_in + r.bound_bias_iw);
    }
    if (var_by_n.size() < 2)
      throw DataError("emit_plots: fewer than 2 training sizes for decay " + fmt(a));

    const std::string tag = fmt(a, "%g");
    {
      Panel p = build_panel(var_by_n, var_bound_by_n, "variance vs n (a = " + tag + ")",
                            "empirical variance", "scaled V");
      const std::string path = path_prefix + "variance_a" + tag + ".svg";
      render_panel(p, path);
      written.push_back(path);
    }
    {
      Panel p = build_panel(bias_by_n, bias_bound_by_n, "bias^2 vs n (a = " + tag + ")",
                            "empirical bias^2", "scaled B");
      const std::string path = path_prefix + "bias_a" + tag + ".svg";
      render_panel(p, path);
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace kshift
