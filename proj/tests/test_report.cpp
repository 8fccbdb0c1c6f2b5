#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "published_tables.hpp"
#include "segfuse/error.hpp"
#include "segfuse/report.hpp"

using namespace segfuse;

namespace {

MethodMeans to_means(const std::vector<published::MeansRow>& rows, bool ensembles_only) {
  MethodMeans out;
  for (const auto& r : rows) {
    const bool is_ensemble = std::find(published::kEnsembles.begin(), published::kEnsembles.end(), r.method) !=
                             published::kEnsembles.end();
    if (!ensembles_only || is_ensemble) out[r.method] = r.values;
  }
  return out;
}

}  // namespace

TEST_CASE("glyph radii span [0.1, 1] per spoke") {
  const MethodMeans means = {
      {"a", {0.9, 5.0, 1.0, 10.0}},
      {"b", {0.8, 1.0, 3.0, 30.0}},
      {"c", {0.85, 3.0, 2.0, 20.0}},
  };
  const GlyphLayout layout = glyph_layout(means);
  CHECK(layout.warnings.empty());
  REQUIRE(layout.entries.size() == 3);
  CHECK(layout.entries[0].method == "a");
  const auto& a = layout.entries[0].radii;
  const auto& b = layout.entries[1].radii;
  const auto& c = layout.entries[2].radii;
  CHECK(a[0] == doctest::Approx(0.1));
  CHECK(b[0] == doctest::Approx(1.0));
  CHECK(a[1] == doctest::Approx(1.0));
  CHECK(b[1] == doctest::Approx(0.1));
  for (int s = 0; s < 4; ++s) CHECK(c[s] == doctest::Approx(0.55));
  CHECK(glyph_area(c) == doctest::Approx(4 * 0.55 * 0.55 / 2));
}

TEST_CASE("glyph edge cases") {
  CHECK_THROWS_AS(glyph_layout(MethodMeans{{"a", {0.9, 1, 1, 1}}}), Error);
  const GlyphLayout layout = glyph_layout({{"a", {0.9, 1, 1, 1}}, {"b", {0.9, 2, 1, 1}}});
  CHECK(layout.warnings.size() == 3);
  for (const auto& w : layout.warnings) CHECK(w.rfind("DegenerateScale", 0) == 0);
  CHECK(layout.entries[0].radii[0] == 0.1);
  CHECK(layout.entries[1].radii[1] == doctest::Approx(1.0));
  CHECK(glyph_area({0.1, 0.1, 0.1, 0.1}) == doctest::Approx(0.02));
  CHECK(glyph_area({1, 1, 1, 1}) == doctest::Approx(2.0));
}

TEST_CASE("published ensemble means: majority vote draws the smallest glyph") {
  const GlyphLayout layout = glyph_layout(to_means(published::kChaosTest, true));
  REQUIRE(layout.entries.size() == 4);
  const auto smallest = std::min_element(layout.entries.begin(), layout.entries.end(),
                                         [](const GlyphEntry& x, const GlyphEntry& y) {
                                           return glyph_area(x.radii) < glyph_area(y.radii);
                                         });
  CHECK(smallest->method == "majority");
}

TEST_CASE("svg rendering is deterministic and labelled") {
  const GlyphLayout layout = glyph_layout(to_means(published::kChaosTest, true));
  const std::string a = render_glyph_svg(layout, "CHAOS <test>");
  CHECK(a == render_glyph_svg(layout, "CHAOS <test>"));
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("CHAOS &lt;test&gt;") != std::string::npos);
  for (const auto& e : published::kEnsembles) CHECK(a.find(e + " (area") != std::string::npos);
}

TEST_CASE("colour ramp endpoints") {
  const auto red = overfit_color(0.0), white = overfit_color(0.5), blue = overfit_color(1.0);
  CHECK(red == std::array<double, 3>{1.0, 0.6682, 0.6682});
  CHECK(white == std::array<double, 3>{1.0, 1.0, 1.0});
  CHECK(blue[0] == doctest::Approx(0.6682));
  CHECK(blue[2] == 1.0);
  CHECK(overfit_color(-3.0) == red);
}

TEST_CASE("overfit matrix reproduces the published cell colours") {
  for (const auto* rows : {&published::kChaosOverfit, &published::kIrcadOverfit}) {
    // Feed the magnitudes as train values against a zero test table.
    MethodMeans train, test;
    for (const auto& r : *rows) {
      train[r.method] = r.magnitude;
      test[r.method] = {0, 0, 0, 0};
    }
    const OverfitMatrix m = overfit_matrix(train, test);
    CHECK(m.warnings.empty());
    for (std::size_t i = 0; i < m.methods.size(); ++i) {
      const auto& row = *std::find_if(rows->begin(), rows->end(),
                                      [&](const auto& r) { return r.method == m.methods[i]; });
      for (int k = 0; k < 4; ++k) {
        CAPTURE(m.methods[i]);
        CAPTURE(k);
        CHECK(m.rows[i][k].magnitude == row.magnitude[k]);
        const auto rgb = overfit_color(m.rows[i][k].color_value);
        for (int ch = 0; ch < 3; ++ch) CHECK(std::abs(rgb[ch] - row.colour[k][ch]) <= 0.01);
      }
    }
  }
}

TEST_CASE("overfit matrix edge cases") {
  CHECK_THROWS_AS(overfit_matrix({{"a", {1, 1, 1, 1}}}, {{"b", {1, 1, 1, 1}}}), Error);
  const OverfitMatrix m = overfit_matrix({{"a", {0.9, 1, 1, 1}}, {"b", {0.8, 1, 1, 1}}},
                                         {{"a", {0.8, 2, 2, 2}}, {"b", {0.8, 2, 2, 2}}, {"c", {0, 0, 0, 0}}});
  CHECK(m.methods == std::vector<std::string>{"a", "b"});
  CHECK(m.warnings.size() == 3);
  CHECK(m.rows[0][0].color_value == 1.0);
  CHECK(m.rows[1][0].color_value == 0.0);
  CHECK(m.rows[0][0].magnitude == doctest::Approx(0.1));
  const std::string html = render_overfit_html(m, "t");
  CHECK(html == render_overfit_html(m, "t"));
  CHECK(html.find("background:#aaaaff") != std::string::npos);
}
