#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "tvr/dataset_io.hpp"

namespace tvr {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kCanvasPx = 400.0;

constexpr std::array<const char*, 8> kFill = {"#575757", "#ad2323", "#2a4bd7", "#1d6914",
                                              "#814a19", "#8126c0", "#29d0d0", "#ffee33"};

std::string fmt(double v) {
  char buf[32];
  // Normalise -0.00 so identical geometry prints identically.
  if (std::fabs(v) < 0.005) v = 0.0;
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Projector {
  double cos_t;
  double sin_t;
  double half_extent;  // plane units shown on each side of the origin
  double scale;        // px per plane unit

  std::pair<double, double> operator()(double x, double y) const {
    const double rx = x * cos_t - y * sin_t;
    const double ry = x * sin_t + y * cos_t;
    return {(rx + half_extent) * scale, (half_extent - ry) * scale};
  }
};

// Regular polygon points (plane units, centred at cx, cy) in canvas space.
std::string polygon_points(const Projector& p, double cx, double cy, double radius, int sides,
                           double phase) {
  std::string out;
  for (int k = 0; k < sides; ++k) {
    const double a = phase + 2.0 * kPi * k / sides;
    const auto [px, py] = p(cx + radius * std::cos(a), cy + radius * std::sin(a));
    if (k > 0) out += ' ';
    out += fmt(px) + "," + fmt(py);
  }
  return out;
}

std::string stroke_attrs(Material m, bool inner) {
  switch (m) {
    case Material::kRubber: return R"(stroke="#000000" stroke-width="1.5")";
    case Material::kMetal: return R"(stroke="#000000" stroke-width="1.5" stroke-dasharray="4 2")";
    case Material::kGlass:
      return inner ? R"(stroke="#ffffff" stroke-width="1")" : R"(stroke="#000000" stroke-width="4")";
  }
  return {};
}

std::string glyph(const Projector& p, const ObjectState& o, double radius, Material stroke_as,
                  bool inner, bool fill) {
  const std::string fill_attr = fill ? std::string("fill=\"") + kFill[static_cast<std::size_t>(o.color)] + "\""
                                     : std::string("fill=\"none\"");
  const double x = o.position.x;
  const double y = o.position.y;
  switch (o.shape) {
    case Shape::kSphere: {
      const auto [cx, cy] = p(x, y);
      return "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" + fmt(radius * p.scale) +
             "\" " + fill_attr + " " + stroke_attrs(stroke_as, inner) + "/>";
    }
    case Shape::kCube:
      // Square inscribed in the collision disc.
      return "<polygon points=\"" + polygon_points(p, x, y, radius, 4, kPi / 4.0) + "\" " +
             fill_attr + " " + stroke_attrs(stroke_as, inner) + "/>";
    case Shape::kCylinder:
      return "<polygon points=\"" + polygon_points(p, x, y, radius, 6, 0.0) + "\" " + fill_attr +
             " " + stroke_attrs(stroke_as, inner) + "/>";
  }
  return {};
}

}  // namespace

double view_rotation_degrees(View v) {
  switch (v) {
    case View::kLeft: return -30.0;
    case View::kCenter: return 0.0;
    case View::kRight: return 30.0;
  }
  return 0.0;
}

std::string render_schematic(const SceneGraph& scene, View view) {
  const PlaneConfig& cfg = scene.config();
  const double theta = view_rotation_degrees(view) * kPi / 180.0;
  const double half = cfg.visible_bound * 1.5;
  const Projector p{std::cos(theta), std::sin(theta), half, kCanvasPx / (2.0 * half)};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" "
         "viewBox=\"0 0 400 400\" data-view=\"";
  svg += to_string(view);
  svg += "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"400\" height=\"400\" fill=\"#f4f4f4\"/>\n";

  const double b = cfg.visible_bound;
  std::string outline;
  const std::array<std::pair<double, double>, 4> corners = {{{-b, -b}, {b, -b}, {b, b}, {-b, b}}};
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const auto [px, py] = p(corners[i].first, corners[i].second);
    if (i > 0) outline += ' ';
    outline += fmt(px) + "," + fmt(py);
  }
  svg += "<polygon class=\"visible-area\" points=\"" + outline +
         "\" fill=\"#ffffff\" stroke=\"#888888\" stroke-width=\"1\"/>\n";

  for (const auto& o : scene.objects()) {
    if (!is_visible(o.position, cfg)) continue;
    const double r = cfg.radius(o.size);
    const auto [cx, cy] = p(o.position.x, o.position.y);
    svg += "<g class=\"glyph\" data-id=\"" + std::to_string(o.id) + "\" data-size=\"" +
           std::string(to_string(o.size)) + "\" data-color=\"" + std::string(to_string(o.color)) +
           "\" data-shape=\"" + std::string(to_string(o.shape)) + "\" data-material=\"" +
           std::string(to_string(o.material)) + "\" data-cx=\"" + fmt(cx) + "\" data-cy=\"" +
           fmt(cy) + "\">\n";
    svg += glyph(p, o, r, o.material, false, true) + "\n";
    if (o.material == Material::kGlass) svg += glyph(p, o, r, o.material, true, false) + "\n";
    svg += "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(cy + 4.0) +
           "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#000000\">" + std::to_string(o.id) +
           "</text>\n";
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace tvr
