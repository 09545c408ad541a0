#include "fairsteer_cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "fairsteer/bayes.hpp"
#include "fairsteer/error.hpp"
#include "fairsteer/gaussian.hpp"

namespace fairsteer::cli {

namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 260.0;
constexpr double kMarginL = 50.0;
constexpr double kMarginT = 50.0;
constexpr double kGap = 50.0;
constexpr double kNoteH = 90.0;

const char* const kClassColor[2] = {"#1f77b4", "#d62728"};
const char* const kGroupDash[2] = {"", " stroke-dasharray=\"6 3\""};

std::string num(double v, const char* f = "%.3f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const FairDistribution& panel_dist(const InterventionResult& r, const std::string& label) {
  return label == "before" ? r.original : r.steered;
}

}  // namespace

CurveSet density_curves(const InterventionResult& r, std::size_t points) {
  if (!r.original.is_binary_univariate()) throw Error(ErrorCode::InvalidArgument, "density curves need univariate input");
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "need at least two curve points");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* d : {&r.original, &r.steered}) {
    for (const auto& g : d->subgroups()) {
      lo = std::min(lo, g.mean() - 5.0 * g.stddev());
      hi = std::max(hi, g.mean() + 5.0 * g.stddev());
    }
  }
  CurveSet set;
  for (const char* label : {"before", "after"}) {
    CurvePanel p;
    p.label = label;
    const auto& dist = panel_dist(r, p.label);
    for (std::size_t k = 0; k < points; ++k) {
      const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
      p.x.push_back(x);
      p.density.push_back({gaussian_pdf(x, dist.subgroup(0, 0)), gaussian_pdf(x, dist.subgroup(1, 0)),
                           gaussian_pdf(x, dist.subgroup(0, 1)), gaussian_pdf(x, dist.subgroup(1, 1))});
    }
    set.panels.push_back(std::move(p));
  }
  return set;
}

std::string curves_csv(const CurveSet& curves) {
  std::string out = "panel,x,p00,p10,p01,p11\n";
  for (const auto& p : curves.panels) {
    for (std::size_t k = 0; k < p.x.size(); ++k) {
      out += p.label + "," + num(p.x[k], "%.17g");
      for (double v : p.density[k]) out += "," + num(v, "%.17g");
      out += "\n";
    }
  }
  return out;
}

CurveSet parse_curves_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "panel,x,p00,p10,p01,p11") {
    throw Error(ErrorCode::ParseError, "curves CSV header mismatch");
  }
  CurveSet set;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string label, cell;
    std::getline(ls, label, ',');
    double vals[5];
    for (double& v : vals) {
      if (!std::getline(ls, cell, ',')) throw Error(ErrorCode::ParseError, "short curves CSV row");
      v = std::stod(cell);
    }
    if (set.panels.empty() || set.panels.back().label != label) set.panels.push_back({label, {}, {}});
    auto& p = set.panels.back();
    p.x.push_back(vals[0]);
    p.density.push_back({vals[1], vals[2], vals[3], vals[4]});
  }
  return set;
}

double PlotFrame::px(double x) const { return left + (x - x_lo) / (x_hi - x_lo) * width; }
double PlotFrame::py(double y) const { return top + height - y / y_hi * height; }

std::vector<PlotFrame> layout(const CurveSet& curves) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, ymax = 0.0;
  for (const auto& p : curves.panels) {
    for (std::size_t k = 0; k < p.x.size(); ++k) {
      lo = std::min(lo, p.x[k]);
      hi = std::max(hi, p.x[k]);
      for (double v : p.density[k]) ymax = std::max(ymax, v);
    }
  }
  std::vector<PlotFrame> frames;
  for (std::size_t i = 0; i < curves.panels.size(); ++i) {
    frames.push_back({lo, hi, ymax * 1.1, kMarginL + static_cast<double>(i) * (kPanelW + kGap), kMarginT, kPanelW,
                      kPanelH});
  }
  return frames;
}

std::string render_svg(std::string_view curves_csv_text, const InterventionResult& r, double threshold,
                       const std::string& title) {
  const CurveSet curves = parse_curves_csv(curves_csv_text);
  const auto frames = layout(curves);
  const double total_w = kMarginL + static_cast<double>(frames.size()) * (kPanelW + kGap);
  const double total_h = kMarginT + kPanelH + kNoteH + 20.0;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(total_w, "%.0f") << "\" height=\""
      << num(total_h, "%.0f") << "\" viewBox=\"0 0 " << num(total_w, "%.0f") << ' ' << num(total_h, "%.0f")
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kMarginL << "\" y=\"24\" font-size=\"15\">" << title << " (t = " << num(threshold, "%.2f")
      << ")</text>\n";

  for (std::size_t i = 0; i < curves.panels.size(); ++i) {
    const auto& p = curves.panels[i];
    const auto& f = frames[i];
    const auto& dist = panel_dist(r, p.label);
    svg << "<g id=\"panel-" << p.label << "\">\n"
        << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.width) << "\" height=\""
        << num(f.height) << "\" fill=\"none\" stroke=\"#888\"/>\n"
        << "<text x=\"" << num(f.left + 4) << "\" y=\"" << num(f.top + 14) << "\">" << p.label << "</text>\n";
    svg << "<text x=\"" << num(f.left) << "\" y=\"" << num(f.top + f.height + 14) << "\">" << num(f.x_lo, "%.2f")
        << "</text>\n<text x=\"" << num(f.left + f.width - 30) << "\" y=\"" << num(f.top + f.height + 14) << "\">"
        << num(f.x_hi, "%.2f") << "</text>\n";

    for (std::size_t c = 0; c < 4; ++c) {
      const std::size_t cls = c % 2;
      const std::size_t grp = c / 2;
      svg << "<polyline class=\"density\" data-cell=\"" << cls << grp << "\" fill=\"none\" stroke=\"" << kClassColor[cls]
          << "\" stroke-width=\"1.5\"" << kGroupDash[grp] << " points=\"";
      for (std::size_t k = 0; k < p.x.size(); ++k) {
        svg << (k ? " " : "") << num(f.px(p.x[k])) << ',' << num(f.py(p.density[k][c]));
      }
      svg << "\"/>\n";
    }

    const auto regions = decision_regions(dist, threshold);
    for (std::size_t grp = 0; grp < 2; ++grp) {
      for (const auto& iv : regions.per_group[grp]) {
        for (double b : {iv.lo, iv.hi}) {
          if (!std::isfinite(b) || b < f.x_lo || b > f.x_hi) continue;
          svg << "<line class=\"threshold\" data-group=\"" << grp << "\" x1=\"" << num(f.px(b)) << "\" y1=\""
              << num(f.top) << "\" x2=\"" << num(f.px(b)) << "\" y2=\"" << num(f.top + f.height)
              << "\" stroke=\"#333\"" << kGroupDash[grp] << "/>\n";
        }
      }
    }

    const auto rep = fairness_report(dist, threshold);
    double y = f.top + f.height + 34;
    const auto note = [&](const std::string& s) {
      svg << "<text x=\"" << num(f.left) << "\" y=\"" << num(y) << "\">" << s << "</text>\n";
      y += 16;
    };
    note("BE = " + num(rep.bayes_error, "%.4f") + "   ΔDP = " + num(rep.delta_dp, "%.4f") +
         "   ΔEO = " + num(rep.delta_eo, "%.4f"));
    if (p.label == "after") {
      note("KL = " + num(r.divergences.kl, "%.5f") +
           (r.divergences.js ? "   JS = " + num(*r.divergences.js, "%.5f") : std::string()));
      if (r.gamma_star) note("γ* = " + num(*r.gamma_star, "%.6f"));
    }
    svg << "</g>\n";
  }
  svg << "<text x=\"" << kMarginL << "\" y=\"" << num(total_h - 8) << "\" fill=\"#555\">"
      << "solid: group 0, dashed: group 1; blue: class 0, red: class 1; vertical rules: decision boundaries</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fairsteer::cli
