#pragma once

#include <array>
#include <string>
#include <vector>

#include "segfuse/io.hpp"
#include "segfuse/metrics.hpp"

namespace segfuse {

// ---------------------------------------------------------------------------
// Glyph plot
// ---------------------------------------------------------------------------

inline constexpr double kGlyphMinRadius = 0.1;
inline constexpr double kGlyphMaxRadius = 1.0;

/// Spokes in order [1 - DICE, RAVD, ASSD, MSSD]; smaller is better on all.
struct GlyphEntry {
  std::string method;
  std::array<double, 4> radii{};
};

struct GlyphLayout {
  std::vector<GlyphEntry> entries;
  /// One line per constant metric column (DegenerateScale).
  std::vector<std::string> warnings;
};

/// Per spoke, linear min-max scaling of the methods' means to [0.1, 1].
/// A constant column puts every method at 0.1 and adds a warning. Needs at
/// least two methods.
GlyphLayout glyph_layout(const MethodMeans& means);

/// Shoelace area of the closed polygon through the spoke endpoints.
double glyph_area(const std::array<double, 4>& radii);

std::string render_glyph_svg(const GlyphLayout& layout, const std::string& title);

// ---------------------------------------------------------------------------
// Overfitting matrix
// ---------------------------------------------------------------------------

struct OverfitCell {
  /// Train minus test.
  double magnitude = 0.0;
  /// Column-normalised severity, 0 = least overfitting, 1 = most.
  double color_value = 0.0;
};

struct OverfitMatrix {
  std::vector<std::string> methods;
  std::vector<std::array<OverfitCell, 4>> rows;
  std::vector<std::string> warnings;
};

/// Methods present in both tables. Severity is the magnitude for DICE and
/// its negation for the lower-is-better metrics.
OverfitMatrix overfit_matrix(const MethodMeans& train, const MethodMeans& test);

/// Diverging ramp: 0 -> red (1, .6682, .6682), 0.5 -> white,
/// 1 -> blue (.6682, .6682, 1). Returns the three channels in [0, 1].
std::array<double, 3> overfit_color(double color_value);

std::string render_overfit_html(const OverfitMatrix& matrix, const std::string& title);

}  // namespace segfuse
