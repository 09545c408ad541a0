#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fairsteer/steer_univariate.hpp"

namespace fairsteer::cli {

inline constexpr std::size_t kCurvePoints = 512;

// Densities of the four subgroups, columns ordered 00, 10, 01, 11 (class, group).
struct CurvePanel {
  std::string label;  // "before" | "after"
  std::vector<double> x;
  std::vector<std::array<double, 4>> density;
};

struct CurveSet {
  std::vector<CurvePanel> panels;
};

[[nodiscard]] CurveSet density_curves(const InterventionResult& r, std::size_t points = kCurvePoints);

/// panel,x,p00,p10,p01,p11
[[nodiscard]] std::string curves_csv(const CurveSet& curves);
[[nodiscard]] CurveSet parse_curves_csv(std::string_view text);

struct PlotFrame {
  double x_lo, x_hi, y_hi;
  double left, top, width, height;  // pixel box of one panel

  [[nodiscard]] double px(double x) const;
  [[nodiscard]] double py(double y) const;
};

/// Frames for each panel, laid out side by side.
[[nodiscard]] std::vector<PlotFrame> layout(const CurveSet& curves);

/// SVG drawn from curves CSV text plus threshold markers and an annotation block.
[[nodiscard]] std::string render_svg(std::string_view curves_csv_text, const InterventionResult& r, double threshold,
                                     const std::string& title);

}  // namespace fairsteer::cli
