#pragma once

// CSV and SVG emission. Numbers are written in the shortest form that
// round-trips to the same double, so identical runs give identical bytes.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "pvobs/errors.hpp"

namespace pvobs::io {

[[nodiscard]] inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
      : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    bool first = true;
    for (auto h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... cells) {
    static_assert(sizeof...(Ts) > 0);
    if (sizeof...(Ts) != columns_) throw Error("CSV row width does not match the header");
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }

  std::ofstream out_;
  std::size_t columns_;
};

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
};

/// 256-step ramp through five viridis anchors (#440154, #3b528b, #21918c,
/// #5ec962, #fde725); `t` in [0,1] is quantised to 1/255 before interpolation.
[[nodiscard]] inline Rgb color_ramp(double t) {
  static constexpr std::array<Rgb, 5> kAnchors{
      {{0x44, 0x01, 0x54}, {0x3b, 0x52, 0x8b}, {0x21, 0x91, 0x8c}, {0x5e, 0xc9, 0x62}, {0xfd, 0xe7, 0x25}}};
  const int step = static_cast<int>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
  const double pos = step / 255.0 * (kAnchors.size() - 1);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(pos), kAnchors.size() - 2);
  const double w = pos - static_cast<double>(k);
  const auto mix = [&](int a, int b) { return static_cast<int>(std::lround(a + w * (b - a))); };
  return {mix(kAnchors[k].r, kAnchors[k + 1].r), mix(kAnchors[k].g, kAnchors[k + 1].g),
          mix(kAnchors[k].b, kAnchors[k + 1].b)};
}

[[nodiscard]] inline std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

/// A rectangular cell [x0,x1] x [y0,y1] in data coordinates; NaN values are
/// drawn in light grey.
struct HeatCell {
  double x0, x1, y0, y1, value;
};

struct HeatmapSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string value_label;
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  double v_min = 0.0, v_max = 1.0;
};

inline void write_heatmap_svg(const std::filesystem::path& path, const HeatmapSpec& spec,
                              const std::vector<HeatCell>& cells) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 110, kTop = 40, kBottom = 50;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - spec.x_min) / (spec.x_max - spec.x_min) * pw; };
  const auto py = [&](double y) { return kTop + ph - (y - spec.y_min) / (spec.y_max - spec.y_min) * ph; };
  const double span = spec.v_max > spec.v_min ? spec.v_max - spec.v_min : 1.0;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << spec.title << "</text>\n";
  for (const auto& c : cells) {
    const double x0 = px(c.x0), x1 = px(c.x1), y0 = py(c.y1), y1 = py(c.y0);
    const std::string fill = std::isnan(c.value) ? "#dddddd" : hex(color_ramp((c.value - spec.v_min) / span));
    out << "<rect x=\"" << format_number(x0) << "\" y=\"" << format_number(y0) << "\" width=\""
        << format_number(x1 - x0) << "\" height=\"" << format_number(y1 - y0) << "\" fill=\"" << fill
        << "\" stroke=\"" << fill << "\" stroke-width=\"0.3\"/>\n";
  }
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = spec.x_min + (spec.x_max - spec.x_min) * k / 4.0;
    const double fy = spec.y_min + (spec.y_max - spec.y_min) * k / 4.0;
    out << "<text x=\"" << format_number(px(fx)) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">"
        << format_number(std::round(fx * 1000) / 1000) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << format_number(py(fy) + 4) << "\" text-anchor=\"end\">"
        << format_number(std::round(fy * 1000) / 1000) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">" << spec.x_label
      << "</text>\n";
  out << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << spec.y_label << "</text>\n";

  // Colour bar.
  const double bx = kW - kRight + 20, bw = 18;
  for (int k = 0; k < 256; ++k) {
    const double y = kTop + ph - (k + 1) * ph / 256.0;
    out << "<rect x=\"" << bx << "\" y=\"" << format_number(y) << "\" width=\"" << bw << "\" height=\""
        << format_number(ph / 256.0 + 0.2) << "\" fill=\"" << hex(color_ramp(k / 255.0)) << "\"/>\n";
  }
  out << "<rect x=\"" << bx << "\" y=\"" << kTop << "\" width=\"" << bw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = spec.v_min + span * k / 4.0;
    out << "<text x=\"" << bx + bw + 4 << "\" y=\"" << format_number(kTop + ph - ph * k / 4.0 + 4) << "\">"
        << format_number(std::round(v * 1000) / 1000) << "</text>\n";
  }
  out << "<text transform=\"translate(" << kW - 8 << "," << kTop + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << spec.value_label << "</text>\n";
  out << "</svg>\n";
}

}  // namespace pvobs::io
