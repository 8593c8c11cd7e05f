#pragma once

#include <string>
#include <vector>

namespace baselab {

struct SvgAxes {
  std::string title;
  std::string xLabel;
  std::string yLabel;
};

// Self-contained scatter SVG; optionally draws the y = x reference line.
std::string renderScatterSvg(const SvgAxes& axes, const std::vector<double>& x,
                             const std::vector<double>& y, bool identityLine);

struct LossCurve {
  std::string label;
  std::vector<double> values;  // one entry per epoch
};

std::string renderLossCurvesSvg(const SvgAxes& axes, const std::vector<LossCurve>& curves);

}  // namespace baselab
