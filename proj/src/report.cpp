#include "segfuse/report.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "segfuse/error.hpp"

namespace segfuse {

namespace {

constexpr const char* kSpokeNames[4] = {"1 - DICE", "RAVD", "ASSD", "MSSD"};

// Fixed palette so repeated runs draw identical files.
constexpr const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::array<double, 4> spoke_values(const MetricVector& m) {
  return {1.0 - m[0], m[1], m[2], m[3]};
}

std::string escape_xml(const std::string& s) {
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

std::string f3(double v) { return format_fixed(v, 3); }

}  // namespace

GlyphLayout glyph_layout(const MethodMeans& means) {
  if (means.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "a glyph plot needs at least two methods");
  }
  GlyphLayout layout;
  std::array<double, 4> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& [method, m] : means) {
    const auto v = spoke_values(m);
    for (int s = 0; s < 4; ++s) {
      lo[s] = std::min(lo[s], v[s]);
      hi[s] = std::max(hi[s], v[s]);
    }
  }
  for (int s = 0; s < 4; ++s) {
    if (!(hi[s] > lo[s])) {
      layout.warnings.push_back(std::string("DegenerateScale: ") + kSpokeNames[s] +
                                " is constant across methods, all radii set to 0.1");
    }
  }
  for (const auto& [method, m] : means) {
    GlyphEntry entry{method, {}};
    const auto v = spoke_values(m);
    for (int s = 0; s < 4; ++s) {
      entry.radii[s] = hi[s] > lo[s] ? kGlyphMinRadius + (kGlyphMaxRadius - kGlyphMinRadius) *
                                                            (v[s] - lo[s]) / (hi[s] - lo[s])
                                     : kGlyphMinRadius;
    }
    layout.entries.push_back(std::move(entry));
  }
  return layout;
}

// Spokes are 90 degrees apart, so each triangle contributes r_k r_{k+1} / 2.
double glyph_area(const std::array<double, 4>& radii) {
  double area = 0.0;
  for (int s = 0; s < 4; ++s) area += radii[s] * radii[(s + 1) % 4];
  return 0.5 * area;
}

std::string render_glyph_svg(const GlyphLayout& layout, const std::string& title) {
  constexpr double kSize = 480.0, kCentre = 240.0, kScale = 170.0;
  // Spoke directions: up, right, down, left.
  constexpr double dx[4] = {0.0, 1.0, 0.0, -1.0};
  constexpr double dy[4] = {-1.0, 0.0, 1.0, 0.0};
  const double legend_height = 20.0 * static_cast<double>(layout.entries.size());

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f3(kSize) + "\" height=\"" +
         f3(kSize + legend_height + 10.0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<title>" + escape_xml(title) + "</title>\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + f3(kCentre) + "\" y=\"20.000\" text-anchor=\"middle\" font-size=\"14\">" +
         escape_xml(title) + "</text>\n";

  for (double ring : {0.1, 0.55, 1.0}) {
    std::string pts;
    for (int s = 0; s < 4; ++s) {
      pts += f3(kCentre + dx[s] * ring * kScale) + "," + f3(kCentre + dy[s] * ring * kScale) + " ";
    }
    pts.pop_back();
    svg += "<polygon points=\"" + pts + "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
  }
  for (int s = 0; s < 4; ++s) {
    const double x = kCentre + dx[s] * kScale, y = kCentre + dy[s] * kScale;
    svg += "<line x1=\"" + f3(kCentre) + "\" y1=\"" + f3(kCentre) + "\" x2=\"" + f3(x) +
           "\" y2=\"" + f3(y) + "\" stroke=\"#888888\"/>\n";
    const double lx = kCentre + dx[s] * (kScale + 22.0), ly = kCentre + dy[s] * (kScale + 22.0) + 4.0;
    svg += "<text x=\"" + f3(lx) + "\" y=\"" + f3(ly) + "\" text-anchor=\"middle\">" +
           escape_xml(kSpokeNames[s]) + "</text>\n";
  }

  for (std::size_t e = 0; e < layout.entries.size(); ++e) {
    const GlyphEntry& entry = layout.entries[e];
    const char* colour = kPalette[e % std::size(kPalette)];
    std::string pts;
    for (int s = 0; s < 4; ++s) {
      pts += f3(kCentre + dx[s] * entry.radii[s] * kScale) + "," +
             f3(kCentre + dy[s] * entry.radii[s] * kScale) + " ";
    }
    pts.pop_back();
    svg += "<polygon points=\"" + pts + "\" fill=\"" + colour + "\" fill-opacity=\"0.15\" stroke=\"" +
           colour + "\" stroke-width=\"2\"><title>" + escape_xml(entry.method) + " area " +
           format_fixed(glyph_area(entry.radii), 4) + "</title></polygon>\n";
    const double ly = kSize + 20.0 * static_cast<double>(e);
    svg += "<rect x=\"20.000\" y=\"" + f3(ly - 10.0) + "\" width=\"12\" height=\"12\" fill=\"" + colour +
           "\"/>\n";
    svg += "<text x=\"40.000\" y=\"" + f3(ly) + "\">" + escape_xml(entry.method) + " (area " +
           format_fixed(glyph_area(entry.radii), 4) + ")</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

OverfitMatrix overfit_matrix(const MethodMeans& train, const MethodMeans& test) {
  OverfitMatrix matrix;
  for (const auto& [method, train_means] : train) {
    const auto it = test.find(method);
    if (it == test.end()) continue;
    matrix.methods.push_back(method);
    std::array<OverfitCell, 4> row;
    for (int m = 0; m < 4; ++m) row[m].magnitude = train_means[m] - it->second[m];
    matrix.rows.push_back(row);
  }
  if (matrix.rows.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no method appears in both train and test means");
  }
  for (int m = 0; m < 4; ++m) {
    const double sign = higher_is_better(kAllMetrics[m]) ? 1.0 : -1.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& row : matrix.rows) {
      lo = std::min(lo, sign * row[m].magnitude);
      hi = std::max(hi, sign * row[m].magnitude);
    }
    if (!(hi > lo)) {
      matrix.warnings.push_back(std::string("DegenerateScale: overfitting of ") +
                                std::string(to_string(kAllMetrics[m])) + " is constant across methods");
    }
    for (auto& row : matrix.rows) {
      row[m].color_value = hi > lo ? (sign * row[m].magnitude - lo) / (hi - lo) : 0.0;
    }
  }
  return matrix;
}

std::array<double, 3> overfit_color(double t) {
  constexpr double kFloor = 0.6682;
  t = std::clamp(t, 0.0, 1.0);
  if (t <= 0.5) {
    const double c = kFloor + (1.0 - kFloor) * (t / 0.5);
    return {1.0, c, c};
  }
  const double c = 1.0 - (1.0 - kFloor) * ((t - 0.5) / 0.5);
  return {c, c, 1.0};
}

std::string render_overfit_html(const OverfitMatrix& matrix, const std::string& title) {
  const auto hex = [](double channel) {
    static constexpr char digits[] = "0123456789abcdef";
    const int v = static_cast<int>(std::lround(channel * 255.0));
    return std::string{digits[v / 16], digits[v % 16]};
  };
  std::string html;
  html += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>" + escape_xml(title) +
          "</title>\n";
  html += "<style>table{border-collapse:collapse;font-family:sans-serif}"
          "td,th{border:1px solid #999;padding:4px 10px;text-align:right}</style>\n";
  html += "</head>\n<body>\n<h1>" + escape_xml(title) + "</h1>\n";
  html += "<p>Training value minus testing value. Each column is scaled separately; "
          "red marks the least overfitting and blue the most.</p>\n";
  html += "<table>\n<tr><th></th>";
  for (Metric m : kAllMetrics) html += "<th>" + std::string(to_string(m)) + "</th>";
  html += "</tr>\n";
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    html += "<tr><th>" + escape_xml(matrix.methods[r]) + "</th>";
    for (const OverfitCell& cell : matrix.rows[r]) {
      const auto c = overfit_color(cell.color_value);
      html += "<td style=\"background:#" + hex(c[0]) + hex(c[1]) + hex(c[2]) + "\">" +
              format_fixed(cell.magnitude, 4) + "</td>";
    }
    html += "</tr>\n";
  }
  html += "</table>\n";
  for (const auto& w : matrix.warnings) html += "<p>" + escape_xml(w) + "</p>\n";
  html += "</body>\n</html>\n";
  return html;
}

}  // namespace segfuse
