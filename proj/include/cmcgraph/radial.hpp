#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cmcgraph/errors.hpp"
#include "cmcgraph/report.hpp"

namespace cmc {

/// Rotationally symmetric Dirichlet problem on an annulus (or disk when
/// r_inner == 0): u(r_outer) = 0, u(r_inner) = h >= 0, curvature H >= 0.
struct RadialProblem {
  int n = 2;
  double H = 0;
  double r_inner = 0;
  double r_outer = 1;
  double h = 0;
};

struct RadialSample {
  double r = 0;
  double u = 0;
  double du = 0;
};

/// First-integral profile: r^{n-1} u' / sqrt(1 + u'^2) = flux - H r^n.
struct RadialProfile {
  double flux = 0;
  std::vector<RadialSample> samples;
  double achieved_h = 0;
  bool graph_valid = true;
  double max_attainable = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

namespace radial_detail {

inline double flux_fn(int n, double H, double c0, double r) {
  return c0 - H * std::pow(r, n);
}

/// u'(r) for flux constant c0; +/-inf where the graph condition saturates.
inline double slope(int n, double H, double c0, double r) {
  const double A = std::pow(r, n - 1);
  const double q = flux_fn(n, H, c0, r);
  double rad = (A - q) * (A + q);
  if (rad <= 0) rad = std::numeric_limits<double>::min();
  return q / std::sqrt(rad);
}

inline boost::math::quadrature::tanh_sinh<double>& integrator() {
  thread_local boost::math::quadrature::tanh_sinh<double> q(15);
  return q;
}

/// integral of -u' over [a, b]; tanh-sinh absorbs the inverse-square-root
/// endpoint singularities of near-critical fluxes.
inline double drop(int n, double H, double c0, double a, double b) {
  if (a == b) return 0.0;
  auto f = [=](double r) { return -slope(n, H, c0, r); };
  double err = 0, l1 = 0;
  const double v = integrator().integrate(f, a, b, 1e-13, &err, &l1);
  if (!std::isfinite(v))
    throw numeric_error("radial quadrature diverged on [" + format_g17(a) +
                        ", " + format_g17(b) + "]");
  return v;
}

/// Admissible flux range [lo, hi] for which |flux - H r^n| <= r^{n-1}
/// throughout the annulus (the graph condition; equality only at endpoints).
inline std::pair<double, double> flux_bracket(int n, double H, double ri,
                                              double ro) {
  auto g = [&](double r) { return H * std::pow(r, n) - std::pow(r, n - 1); };
  const double lo = std::max(g(ri), g(ro));
  const double hi = H * std::pow(ri, n) + std::pow(ri, n - 1);
  return {lo, hi};
}

}  // namespace radial_detail

/// Boundary drop u(r_inner) - u(r_outer) produced by a given flux constant;
/// strictly decreasing in the flux (which is what makes bisection work).
inline double radial_height_for_flux(int n, double H, double r_inner,
                                     double r_outer, double c0) {
  return radial_detail::drop(n, H, c0, r_inner, r_outer);
}

/// Largest height h for which the annulus still carries a graph solution,
/// attained at the lower end of the admissible flux range (where the profile
/// leaves the inner boundary vertically).
inline double max_attainable_height(int n, double H, double r_inner,
                                    double r_outer) {
  if (n < 2) throw config_error("max_attainable_height: n must be >= 2");
  if (!(r_inner > 0) || !(r_outer > r_inner))
    throw config_error("max_attainable_height: need 0 < r_inner < r_outer");
  if (!(H >= 0)) throw config_error("max_attainable_height: H must be >= 0");
  const auto [lo, hi] = radial_detail::flux_bracket(n, H, r_inner, r_outer);
  if (!(lo < hi))
    throw math_error("max_attainable_height: no admissible flux (H too large "
                     "for this annulus)");
  return radial_height_for_flux(n, H, r_inner, r_outer, lo);
}

namespace radial_detail {

inline void fill_samples(RadialProfile& out, int n, double H, double c0,
                         double ri, double ro, int n_samples) {
  out.samples.resize(static_cast<std::size_t>(n_samples));
  const int last = n_samples - 1;
  for (int k = 0; k <= last; ++k) {
    const double r = ri + (ro - ri) * k / last;
    out.samples[static_cast<std::size_t>(k)].r = r;
    out.samples[static_cast<std::size_t>(k)].du = slope(n, H, c0, r);
  }
  // Accumulate from the outer boundary so u(r_outer) = 0 exactly.
  out.samples[static_cast<std::size_t>(last)].u = 0.0;
  for (int k = last - 1; k >= 0; --k) {
    const auto& hi = out.samples[static_cast<std::size_t>(k + 1)];
    out.samples[static_cast<std::size_t>(k)].u =
        hi.u + drop(n, H, c0, out.samples[static_cast<std::size_t>(k)].r, hi.r);
  }
  out.achieved_h = out.samples.front().u;
}

}  // namespace radial_detail

/// Solves the rotationally symmetric problem by monotone bisection on the
/// flux constant. When no flux achieves the requested height, the extremal
/// profile is returned with graph_valid = false and the attainable maximum.
inline RadialProfile solve_radial(const RadialProblem& p, double tol = 1e-10,
                                  int n_samples = 513) {
  using namespace radial_detail;
  if (!(tol > 0)) throw config_error("solve_radial: tol must be > 0");
  if (n_samples < 2) throw config_error("solve_radial: n_samples must be >= 2");
  if (p.n < 2) throw config_error("solve_radial: n must be >= 2");
  if (!(p.r_inner >= 0) || !(p.r_outer > p.r_inner))
    throw config_error("solve_radial: need 0 <= r_inner < r_outer");
  if (!(p.h >= 0)) throw config_error("solve_radial: h must be >= 0");
  if (!(p.H >= 0)) throw config_error("solve_radial: H must be >= 0");

  RadialProfile out;

  if (p.r_inner == 0.0) {
    // Disk: regularity at the center pins the flux to zero and the problem
    // prescribes only the outer boundary value.
    if (p.h != 0.0)
      throw config_error(
          "solve_radial: a disk prescribes only the outer boundary value; "
          "set h = 0");
    if (p.H * p.r_outer > 1.0 + 1e-12) {
      out.graph_valid = false;
      out.note = "no graph over the disk: H * r_outer > 1";
      return out;
    }
    out.flux = 0.0;
    fill_samples(out, p.n, p.H, 0.0, p.r_inner, p.r_outer, n_samples);
    out.graph_valid = true;
    return out;
  }

  const auto [lo, hi] = flux_bracket(p.n, p.H, p.r_inner, p.r_outer);
  if (!(lo < hi)) {
    out.graph_valid = false;
    out.note = "no admissible flux: annulus carries no graphs at this H";
    return out;
  }
  const double h_star = radial_height_for_flux(p.n, p.H, p.r_inner, p.r_outer, lo);
  out.max_attainable = h_star;

  if (p.h == 0.0 && p.H == 0.0) {
    out.flux = 0.0;
    fill_samples(out, p.n, 0.0, 0.0, p.r_inner, p.r_outer, n_samples);
    return out;
  }

  if (p.h > h_star + tol) {
    out.flux = lo;
    fill_samples(out, p.n, p.H, lo, p.r_inner, p.r_outer, n_samples);
    out.graph_valid = false;
    out.note = "requested height exceeds the attainable maximum " +
               format_g17(h_star);
    return out;
  }

  // height(flux) decreases from h_star at `lo`; bisect for the target.
  double a = lo, b = hi;
  double ha = h_star;
  for (int it = 0; it < 200 && (b - a) > 0; ++it) {
    const double mid = 0.5 * (a + b);
    const double hm = radial_height_for_flux(p.n, p.H, p.r_inner, p.r_outer, mid);
    if (std::abs(hm - p.h) <= 0.25 * tol) {
      a = b = mid;
      ha = hm;
      break;
    }
    if (hm >= p.h) {
      a = mid;
      ha = hm;
    } else {
      b = mid;
    }
    if ((b - a) <= 1e-16 * std::max({1.0, std::abs(a), std::abs(b)})) break;
  }
  out.flux = a;
  fill_samples(out, p.n, p.H, out.flux, p.r_inner, p.r_outer, n_samples);
  out.graph_valid = true;
  if (std::abs(out.achieved_h - p.h) > std::max(tol, 1e-12) * std::max(1.0, p.h))
    out.note = "bisection stopped at height " + format_g17(out.achieved_h);
  (void)ha;
  return out;
}

/// CSV profile export, columns r,u,du.
inline void write_profile_csv(std::ostream& os, const RadialProfile& p) {
  os << "r,u,du\n";
  for (const auto& s : p.samples)
    os << format_g17(s.r) << ',' << format_g17(s.u) << ',' << format_g17(s.du)
       << '\n';
}

inline Json profile_summary_json(const RadialProfile& p) {
  Json j = Json::object();
  j["flux"] = p.flux;
  j["achieved_h"] = p.achieved_h;
  j["graph_valid"] = p.graph_valid;
  j["max_attainable"] = p.max_attainable;
  j["samples"] = static_cast<std::int64_t>(p.samples.size());
  if (!p.note.empty()) j["note"] = p.note;
  return j;
}

}  // namespace cmc
