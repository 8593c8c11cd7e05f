#include "baselab/svg.hpp"

#include <algorithm>
#include <cmath>

#include "baselab/common.hpp"

namespace baselab {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 20.0;
constexpr double kTop = 44.0;
constexpr double kBottom = 56.0;

struct Scale {
  double lo = 0.0;
  double hi = 1.0;
  double pixelLo = 0.0;
  double pixelHi = 1.0;

  double operator()(double v) const {
    return pixelLo + (v - lo) / (hi - lo) * (pixelHi - pixelLo);
  }
};

std::pair<double, double> paddedRange(const std::vector<double>& values) {
  double lo = values[0];
  double hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) {
    lo -= 1.0;
    hi += 1.0;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi};
}

// Tick step of the form {1, 2, 5} * 10^m close to range/4.
double niceStep(double range) {
  const double raw = range / 4.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  double nice = 10.0;
  if (frac <= 1.5) {
    nice = 1.0;
  } else if (frac <= 3.5) {
    nice = 2.0;
  } else if (frac <= 7.5) {
    nice = 5.0;
  }
  return nice * mag;
}

std::vector<double> ticksFor(double lo, double hi) {
  const double step = niceStep(hi - lo);
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  while (t <= hi + step * 1e-9) {
    ticks.push_back(t == 0.0 ? 0.0 : t);  // normalize -0
    t += step;
  }
  return ticks;
}

std::string xmlEscape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string px(double v) { return fmtFixed(v, 2); }

void openSvg(std::string& out, const SvgAxes& axes, const Scale& sx, const Scale& sy) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" +
         px(kHeight) + "\" viewBox=\"0 0 " + px(kWidth) + " " + px(kHeight) + "\">\n";
  out += "<rect width=\"" + px(kWidth) + "\" height=\"" + px(kHeight) + "\" fill=\"white\"/>\n";
  out += "<text x=\"" + px(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         xmlEscape(axes.title) + "</text>\n";

  // frame
  out += "<rect x=\"" + px(kLeft) + "\" y=\"" + px(kTop) + "\" width=\"" +
         px(kWidth - kLeft - kRight) + "\" height=\"" + px(kHeight - kTop - kBottom) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ticksFor(sx.lo, sx.hi)) {
    const double X = sx(t);
    out += "<line x1=\"" + px(X) + "\" y1=\"" + px(kHeight - kBottom) + "\" x2=\"" + px(X) +
           "\" y2=\"" + px(kHeight - kBottom + 6) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + px(X) + "\" y=\"" + px(kHeight - kBottom + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmtSig3(t) +
           "</text>\n";
  }
  for (double t : ticksFor(sy.lo, sy.hi)) {
    const double Y = sy(t);
    out += "<line x1=\"" + px(kLeft - 6) + "\" y1=\"" + px(Y) + "\" x2=\"" + px(kLeft) +
           "\" y2=\"" + px(Y) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + px(kLeft - 9) + "\" y=\"" + px(Y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmtSig3(t) +
           "</text>\n";
  }

  out += "<text x=\"" + px(kLeft + (kWidth - kLeft - kRight) / 2) + "\" y=\"" +
         px(kHeight - 14) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         xmlEscape(axes.xLabel) + "</text>\n";
  out += "<text x=\"18\" y=\"" + px(kTop + (kHeight - kTop - kBottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " +
         px(kTop + (kHeight - kTop - kBottom) / 2) + ")\">" + xmlEscape(axes.yLabel) +
         "</text>\n";
}

}  // namespace

std::string renderScatterSvg(const SvgAxes& axes, const std::vector<double>& x,
                             const std::vector<double>& y, bool identityLine) {
  if (x.empty() || x.size() != y.size()) {
    raise(ErrorKind::InvalidArgument, "scatter needs matching non-empty coordinate lists");
  }
  // Shared range keeps the identity line at 45 degrees.
  std::vector<double> all = x;
  all.insert(all.end(), y.begin(), y.end());
  const auto [lo, hi] = paddedRange(all);
  Scale sx{lo, hi, kLeft, kWidth - kRight};
  Scale sy{lo, hi, kHeight - kBottom, kTop};

  std::string out;
  openSvg(out, axes, sx, sy);
  if (identityLine) {
    out += "<line x1=\"" + px(sx(lo)) + "\" y1=\"" + px(sy(lo)) + "\" x2=\"" + px(sx(hi)) +
           "\" y2=\"" + px(sy(hi)) + "\" stroke=\"#888888\" stroke-dasharray=\"5,4\"/>\n";
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    out += "<circle cx=\"" + px(sx(x[i])) + "\" cy=\"" + px(sy(y[i])) +
           "\" r=\"3\" fill=\"#1f6fb4\" fill-opacity=\"0.75\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string renderLossCurvesSvg(const SvgAxes& axes, const std::vector<LossCurve>& curves) {
  if (curves.empty()) raise(ErrorKind::InvalidArgument, "no curves to plot");
  std::size_t maxEpochs = 0;
  std::vector<double> values;
  for (const auto& curve : curves) {
    if (curve.values.empty()) raise(ErrorKind::InvalidArgument, "empty loss curve");
    maxEpochs = std::max(maxEpochs, curve.values.size());
    values.insert(values.end(), curve.values.begin(), curve.values.end());
  }
  const auto [yLo, yHi] = paddedRange(values);
  const double xHi = static_cast<double>(maxEpochs);
  Scale sx{maxEpochs == 1 ? 0.0 : 1.0, maxEpochs == 1 ? 2.0 : xHi, kLeft, kWidth - kRight};
  Scale sy{yLo, yHi, kHeight - kBottom, kTop};

  static const char* colors[] = {"#1f6fb4", "#d1495b", "#3a7d44", "#7a5195"};
  std::string out;
  openSvg(out, axes, sx, sy);
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = colors[c % 4];
    std::string pts;
    for (std::size_t e = 0; e < curves[c].values.size(); ++e) {
      if (e) pts += ' ';
      pts += px(sx(static_cast<double>(e + 1))) + "," + px(sy(curves[c].values[e]));
    }
    out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    for (std::size_t e = 0; e < curves[c].values.size(); ++e) {
      out += "<circle cx=\"" + px(sx(static_cast<double>(e + 1))) + "\" cy=\"" +
             px(sy(curves[c].values[e])) + "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
    }
    // legend
    const double ly = kTop + 16.0 + 18.0 * static_cast<double>(c);
    out += "<line x1=\"" + px(kWidth - kRight - 150) + "\" y1=\"" + px(ly) + "\" x2=\"" +
           px(kWidth - kRight - 126) + "\" y2=\"" + px(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + px(kWidth - kRight - 120) + "\" y=\"" + px(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + xmlEscape(curves[c].label) +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace baselab
