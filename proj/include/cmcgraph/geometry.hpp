#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmcgraph/errors.hpp"
#include "cmcgraph/report.hpp"

namespace cmc {

struct Vec2 {
  double x = 0;
  double y = 0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Circle {
  Vec2 center;
  double radius = 1;
};

/// A multiply connected round domain: an outer circle with m >= 1 disjoint
/// circular holes strictly inside it. `n` is the ambient dimension (the
/// planar circle centers generalize to spheres centered on a common plane;
/// all gap computations stay planar). The planar solver requires n == 2.
struct DomainSpec {
  int n = 2;
  Circle outer;
  std::vector<Circle> holes;
};

inline void validate(const DomainSpec& d) {
  if (d.n < 2) throw malformed_domain("domain: n must be >= 2");
  if (!(d.outer.radius > 0))
    throw malformed_domain("domain: outer radius must be > 0");
  if (d.holes.empty())
    throw malformed_domain("domain: at least one hole is required");
  for (std::size_t i = 0; i < d.holes.size(); ++i) {
    const auto& hi = d.holes[i];
    if (!(hi.radius > 0))
      throw malformed_domain("domain: hole " + std::to_string(i) +
                             " has non-positive radius");
    if (!(distance(hi.center, d.outer.center) + hi.radius < d.outer.radius))
      throw malformed_domain("domain: hole " + std::to_string(i) +
                             " is not strictly inside the outer circle");
    for (std::size_t j = i + 1; j < d.holes.size(); ++j) {
      const auto& hj = d.holes[j];
      if (!(distance(hi.center, hj.center) > hi.radius + hj.radius))
        throw malformed_domain("domain: holes " + std::to_string(i) + " and " +
                               std::to_string(j) + " overlap or touch");
    }
  }
}

/// Derived boundary quantities. Component ids: 0 = outer circle,
/// 1..m = holes in listing order.
struct BoundaryGeometry {
  double H_inf = 0;       ///< inf of mean curvature w.r.t. the inward normal
  double reach_outer = 0;
  std::vector<double> reach_holes;
  double reach = 0;        ///< min over all components
  double inj_radius = 0;   ///< two-sided tube width from the whole boundary
  double circumradius = 0; ///< radius of the smallest disk containing the domain
};

inline BoundaryGeometry boundary_geometry(const DomainSpec& d) {
  validate(d);
  const std::size_t m = d.holes.size();
  BoundaryGeometry g;

  // Gap from the outer circle to hole i, and between hole pairs.
  auto gap_outer = [&](std::size_t i) {
    return d.outer.radius - distance(d.holes[i].center, d.outer.center) -
           d.holes[i].radius;
  };
  auto gap_holes = [&](std::size_t i, std::size_t j) {
    return distance(d.holes[i].center, d.holes[j].center) - d.holes[i].radius -
           d.holes[j].radius;
  };

  // Outer component: inward tube limited by the nearest hole, focal cap at
  // the center radius.
  double ro = d.outer.radius;
  for (std::size_t i = 0; i < m; ++i) ro = std::min(ro, gap_outer(i));
  g.reach_outer = ro;

  // Hole components bend away from their outward tube, so there is no focal
  // cap; the tube is limited by the outer circle and the other holes.
  double min_gap = d.outer.radius;
  g.reach_holes.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double ri = gap_outer(i);
    min_gap = std::min(min_gap, ri);
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) {
        ri = std::min(ri, gap_holes(i, j));
        min_gap = std::min(min_gap, gap_holes(i, j));
      }
    g.reach_holes[i] = ri;
  }

  g.reach = g.reach_outer;
  for (double ri : g.reach_holes) g.reach = std::min(g.reach, ri);

  // One-sided tubes of width t from all components stay pairwise disjoint
  // up to half the minimal gap; the outer focal radius caps it.
  g.inj_radius = std::min(d.outer.radius, 0.5 * min_gap);

  g.circumradius = d.outer.radius;

  double min_hole_radius = d.holes[0].radius;
  for (const auto& h : d.holes) min_hole_radius = std::min(min_hole_radius, h.radius);
  g.H_inf = -1.0 / min_hole_radius;
  return g;
}

inline int component_count(const DomainSpec& d) {
  return 1 + static_cast<int>(d.holes.size());
}

inline double component_reach(const DomainSpec& d, const BoundaryGeometry& g,
                              int component) {
  if (component == 0) return g.reach_outer;
  return g.reach_holes.at(static_cast<std::size_t>(component - 1));
}

/// Exact Laplacian of the distance-to-component function at distance s
/// along the normal, for round components in R^n:
///   hole of radius Ri:  (n-1)/(Ri + s)
///   outer circle:      -(n-1)/(Ro - s)
/// Both are bounded above by (n-1)*c with c = 1/min_i Ri.
inline double dist_laplacian(const DomainSpec& d, int component, double s) {
  validate(d);
  if (component < 0 || component >= component_count(d))
    throw config_error("dist_laplacian: unknown component id " +
                       std::to_string(component));
  const BoundaryGeometry g = boundary_geometry(d);
  const double reach = component_reach(d, g, component);
  if (!(s >= 0) || !(s < reach))
    throw math_error("dist_laplacian: s = " + format_g17(s) +
                     " outside [0, reach) with reach = " + format_g17(reach));
  if (component == 0) return -(d.n - 1) / (d.outer.radius - s);
  return (d.n - 1) / (d.holes[static_cast<std::size_t>(component - 1)].radius + s);
}

struct NearestBoundary {
  double dist = 0;
  int component = 0;
};

/// Distance from a point of the closed domain to the nearest boundary
/// circle. Ties are broken toward the smallest component id.
inline NearestBoundary signed_distance(const DomainSpec& d, Vec2 z) {
  validate(d);
  const double tol = 1e-12 * d.outer.radius;
  double best = d.outer.radius - distance(z, d.outer.center);
  if (best < -tol)
    throw math_error("signed_distance: point lies outside the outer circle");
  int best_id = 0;
  for (std::size_t i = 0; i < d.holes.size(); ++i) {
    const double di = distance(z, d.holes[i].center) - d.holes[i].radius;
    if (di < -tol)
      throw math_error("signed_distance: point lies inside hole " +
                       std::to_string(i));
    if (di < best) {
      best = di;
      best_id = static_cast<int>(i) + 1;
    }
  }
  return {std::max(best, 0.0), best_id};
}

// ---------------------------------------------------------------------------
// JSON serialization (schema version 1):
//   {"format": 1, "n": 2,
//    "outer": {"center": [x, y], "radius": r},
//    "holes": [{"center": [x, y], "radius": r}, ...]}
// ---------------------------------------------------------------------------

inline DomainSpec domain_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("format") && j.at("format").get<int>() != 1)
      throw config_error("domain json: unsupported format version");
    auto circle = [](const nlohmann::json& c) {
      Circle out;
      out.center = {c.at("center").at(0).get<double>(),
                    c.at("center").at(1).get<double>()};
      out.radius = c.at("radius").get<double>();
      return out;
    };
    DomainSpec d;
    d.n = j.value("n", 2);
    d.outer = circle(j.at("outer"));
    for (const auto& h : j.at("holes")) d.holes.push_back(circle(h));
    validate(d);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("domain json: ") + e.what());
  }
}

inline DomainSpec domain_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("domain json: ") + e.what());
  }
  return domain_from_json(j);
}

inline Json domain_to_json(const DomainSpec& d) {
  auto circle = [](const Circle& c) {
    Json j = Json::object();
    Json center = Json::array();
    center.push_back(c.center.x);
    center.push_back(c.center.y);
    j["center"] = std::move(center);
    j["radius"] = c.radius;
    return j;
  };
  Json j = Json::object();
  j["format"] = 1;
  j["n"] = d.n;
  j["outer"] = circle(d.outer);
  Json holes = Json::array();
  for (const auto& h : d.holes) holes.push_back(circle(h));
  j["holes"] = std::move(holes);
  return j;
}

}  // namespace cmc
