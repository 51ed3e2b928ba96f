#include "ddso/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ddso/csv.hpp"

namespace ddso {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string escape(const std::string& s) {
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

}  // namespace

std::string render_svg_lines(const std::vector<SvgSeries>& series, const SvgOptions& opt) {
  if (series.empty()) throw std::invalid_argument("render_svg_lines: no series");
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const SvgSeries& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size())
      throw std::invalid_argument("render_svg_lines: series '" + s.label + "' is malformed");
    if (!s.band_lo.empty() &&
        (s.band_lo.size() != s.x.size() || s.band_hi.size() != s.x.size()))
      throw std::invalid_argument("render_svg_lines: band size mismatch in '" + s.label + "'");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      double lo = s.band_lo.empty() ? s.y[i] : s.band_lo[i];
      double hi = s.band_hi.empty() ? s.y[i] : s.band_hi[i];
      if (opt.log_y && (lo <= 0.0 || s.y[i] <= 0.0))
        throw std::domain_error("render_svg_lines: log scale with nonpositive value");
      y_min = std::min(y_min, lo);
      y_max = std::max(y_max, hi);
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;

  const double ml = 62, mr = 16, mt = 34, mb = 46;
  const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;
  const auto ty = [&](double v) {
    const double t = opt.log_y ? (std::log(v) - std::log(y_min)) / (std::log(y_max) - std::log(y_min))
                               : (v - y_min) / (y_max - y_min);
    return mt + ph * (1.0 - t);
  };
  const auto tx = [&](double v) { return ml + pw * (v - x_min) / (x_max - x_min); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" viewBox=\"0 0 " << opt.width << " " << opt.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty()) {
    svg << "<text x=\"" << opt.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << escape(opt.title) << "</text>\n";
  }
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
  // ticks
  for (int k = 0; k <= 4; ++k) {
    const double fx = x_min + (x_max - x_min) * k / 4.0;
    svg << "<line x1=\"" << tx(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << tx(fx) << "\" y2=\""
        << mt + ph + 4 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << tx(fx) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(fx)
        << "</text>\n";
    const double fy = opt.log_y ? y_min * std::pow(y_max / y_min, k / 4.0)
                                : y_min + (y_max - y_min) * k / 4.0;
    svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << ty(fy) << "\" x2=\"" << ml << "\" y2=\""
        << ty(fy) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << ml - 7 << "\" y=\"" << ty(fy) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << num(std::round(fy * 1e4) / 1e4) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opt.height - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape(opt.x_label) << "</text>\n"
      << "<text x=\"14\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 14 " << mt + ph / 2 << ")\">" << escape(opt.y_label)
      << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const SvgSeries& sr = series[s];
    const char* color = kPalette[s % 6];
    if (!sr.band_lo.empty()) {
      svg << "<path d=\"M";
      for (std::size_t i = 0; i < sr.x.size(); ++i)
        svg << (i ? " L" : "") << num(tx(sr.x[i])) << " " << num(ty(sr.band_hi[i]));
      for (std::size_t i = sr.x.size(); i-- > 0;)
        svg << " L" << num(tx(sr.x[i])) << " " << num(ty(sr.band_lo[i]));
      svg << " Z\" fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < sr.x.size(); ++i)
      svg << (i ? " " : "") << num(tx(sr.x[i])) << "," << num(ty(sr.y[i]));
    svg << "\"/>\n";
    // legend entry
    const double ly = mt + 8 + 16.0 * static_cast<double>(s);
    svg << "<line x1=\"" << ml + pw - 110 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw - 90
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << ml + pw - 84 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(sr.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_svg_lines(const std::vector<SvgSeries>& series, const SvgOptions& options,
                    const std::string& path) {
  write_file(path, render_svg_lines(series, options));
}

}  // namespace ddso
