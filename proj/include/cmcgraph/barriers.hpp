#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmcgraph/constants.hpp"
#include "cmcgraph/errors.hpp"
#include "cmcgraph/geometry.hpp"

namespace cmc {

/// Parameters of the distance-composed supersolution family
///   psi(s) = (1/b) [acosh(alpha + b s) - acosh(alpha)],
///   b = lambda (mu + n H (1 + lambda)),  1 < alpha < lambda,
/// valid on the boundary collar of width
///   epsilon = min{reach, (lambda - alpha) / b}.
struct BarrierParams {
  int n = 2;
  double H = 0;       ///< prescribed mean curvature, >= 0
  double mu = 1;      ///< (n-1) * |inf boundary mean curvature|
  double alpha = kDefaultAlpha;
  double lambda = 0;  ///< defaults to delta() in make_barrier_params
  double reach = 1;

  double B() const { return mu + n * H; }
  double b() const { return lambda * (mu + n * H * (1.0 + lambda)); }
  double epsilon() const { return std::min(reach, (lambda - alpha) / b()); }
};

inline BarrierParams make_barrier_params(int n, double H, double mu,
                                         double reach,
                                         double alpha = kDefaultAlpha,
                                         double lambda = 0) {
  if (lambda == 0) lambda = delta();
  if (n < 2) throw config_error("barrier: n must be >= 2");
  if (!(H >= 0)) throw config_error("barrier: H must be >= 0");
  if (!(mu > 0)) throw config_error("barrier: mu must be > 0");
  if (!(reach > 0)) throw config_error("barrier: reach must be > 0");
  if (!(alpha > 1) || !(lambda > alpha))
    throw config_error("barrier: need 1 < alpha < lambda");
  BarrierParams p{n, H, mu, alpha, lambda, reach};
  // b = B lambda + nH lambda^2 > B alpha + nH alpha^2 holds automatically for
  // lambda > alpha > 0; checked to guard against degenerate rounding.
  if (!(p.b() > p.B() * alpha + n * H * alpha * alpha))
    throw numeric_error("barrier: slope constant not above its alpha value");
  return p;
}

namespace detail {
inline void check_barrier_s(const BarrierParams& p, double s) {
  const double eps = p.epsilon();
  if (!(s >= 0) || s > eps * (1.0 + 1e-12))
    throw math_error("barrier: s = " + format_g17(s) + " outside [0, epsilon] with epsilon = " +
                     format_g17(eps));
}
}  // namespace detail

inline double psi(const BarrierParams& p, double s) {
  detail::check_barrier_s(p, s);
  const double b = p.b();
  return (acosh_log(p.alpha + b * s) - acosh_log(p.alpha)) / b;
}

/// psi'(s) = 1 / sqrt(u^2 - 1), u = alpha + b s  (using a b = 1).
inline double psi_prime(const BarrierParams& p, double s) {
  detail::check_barrier_s(p, s);
  const double u = p.alpha + p.b() * s;
  return 1.0 / std::sqrt((u - 1.0) * (u + 1.0));
}

/// psi''(s) = -b u / (u^2 - 1)^{3/2}.
inline double psi_second(const BarrierParams& p, double s) {
  detail::check_barrier_s(p, s);
  const double u = p.alpha + p.b() * s;
  const double w = (u - 1.0) * (u + 1.0);
  return -p.b() * u / (w * std::sqrt(w));
}

/// The supersolution inequality's left-hand side
///   psi'' + (psi' + psi'^3) * delta_d + n H (1 + psi'^2)^{3/2}
/// at distance s with the supplied Laplacian-of-distance value. The barrier
/// is admissible where this is <= 0.
inline double radial_residual(const BarrierParams& p, double delta_d, double s) {
  const double u = p.alpha + p.b() * s;
  const double w = (u - 1.0) * (u + 1.0);  // u^2 - 1
  const double w32 = w * std::sqrt(w);
  // psi'' = -b u / w^{3/2}; psi' + psi'^3 = u^2 / w^{3/2};
  // (1 + psi'^2)^{3/2} = u^3 / w^{3/2}
  return (-p.b() * u + delta_d * u * u + p.n * p.H * u * u * u) / w32;
}

/// Reduced quadratic in s whose non-positivity is the sufficient condition
/// behind the collar width epsilon (with the worst-case constant bound
/// delta_d <= mu):
///   n H b^2 s^2 + b (2 n H alpha + B) s + B alpha + n H alpha^2 - b.
inline double reduced_quadratic(const BarrierParams& p, double s) {
  const double b = p.b();
  const double nH = p.n * p.H;
  return nH * b * b * s * s + b * (2.0 * nH * p.alpha + p.B()) * s +
         p.B() * p.alpha + nH * p.alpha * p.alpha - b;
}

/// Positive root of the reduced quadratic (its constant term is negative for
/// valid parameters, so exactly one positive root exists).
inline double reduced_quadratic_root(const BarrierParams& p) {
  const double b = p.b();
  const double nH = p.n * p.H;
  const double qa = nH * b * b;
  const double qb = b * (2.0 * nH * p.alpha + p.B());
  const double qc = p.B() * p.alpha + nH * p.alpha * p.alpha - b;
  if (qa == 0.0) return -qc / qb;
  const double disc = qb * qb - 4.0 * qa * qc;
  // qc < 0 ensures disc > qb^2; the stable form avoids cancellation.
  return (-qb + std::sqrt(disc)) / (2.0 * qa);
}

struct BarrierCertificate {
  BarrierParams params;
  int component = 0;
  int grid_size = 0;
  double max_residual = 0;
  bool certified = false;
  double psi_at_epsilon = 0;
  bool exact_delta_d = true;
  /// First s > 0 where the residual changes sign along the extended ray
  /// (diagnostic; +inf when none is found within the scanned range).
  double first_sign_change = std::numeric_limits<double>::infinity();
};

/// Grid certification of the barrier over [0, epsilon] for one boundary
/// component, using the exact round-boundary Laplacian of distance (or the
/// conservative constant bound mu when exact_delta_d is false). The extended
/// scan past epsilon locates the first residual sign change by bisection.
inline BarrierCertificate certify_barrier(const BarrierParams& p,
                                          const DomainSpec& d, int component,
                                          int grid_size = 10000,
                                          bool exact_delta_d = true) {
  validate(d);
  if (component < 0 || component >= component_count(d))
    throw config_error("certify_barrier: unknown component id " +
                       std::to_string(component));
  if (grid_size < 2) throw config_error("certify_barrier: grid_size must be >= 2");
  const BoundaryGeometry g = boundary_geometry(d);
  const double comp_reach = component_reach(d, g, component);
  const double eps = p.epsilon();
  if (comp_reach < eps * (1.0 - 1e-12))
    throw math_error(
        "certify_barrier: component reach " + format_g17(comp_reach) +
        " is below the collar width " + format_g17(eps) +
        "; shrink the lambda - alpha gap");

  auto delta_d = [&](double s) {
    if (!exact_delta_d) return p.mu;  // (n-1)c worst case
    if (component == 0) return -(d.n - 1) / (d.outer.radius - s);
    return (d.n - 1) /
           (d.holes[static_cast<std::size_t>(component - 1)].radius + s);
  };

  BarrierCertificate cert;
  cert.params = p;
  cert.component = component;
  cert.grid_size = grid_size;
  cert.exact_delta_d = exact_delta_d;
  cert.psi_at_epsilon = psi(p, eps);

  double max_res = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid_size; ++k) {
    const double s = eps * k / (grid_size - 1);
    max_res = std::max(max_res, radial_residual(p, delta_d(s), s));
  }
  cert.max_residual = max_res;
  cert.certified = max_res <= kCertTolerance;

  // Extended diagnostic scan: up to 10x epsilon, capped for the outer
  // component where the exact formula blows up at the focal radius.
  double s_max = 10.0 * eps;
  if (exact_delta_d && component == 0)
    s_max = std::min(s_max, 0.999 * d.outer.radius);
  auto res = [&](double s) { return radial_residual(p, delta_d(s), s); };
  const int scan = 4 * grid_size;
  double prev_s = 0.0, prev_r = res(0.0);
  for (int k = 1; k <= scan; ++k) {
    const double s = s_max * k / scan;
    const double rk = res(s);
    if (prev_r <= 0.0 && rk > 0.0) {
      double lo = prev_s, hi = s;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (res(mid) <= 0.0 ? lo : hi) = mid;
      }
      cert.first_sign_change = 0.5 * (lo + hi);
      break;
    }
    prev_s = s;
    prev_r = rk;
  }
  return cert;
}

/// Height of the constant-curvature cap over a ball of radius RB <= 1/H:
/// H RB^2 / (1 + sqrt(1 - (H RB)^2)).
inline double spherical_cap_height(double H, double radius_bound) {
  if (!(H >= 0)) throw config_error("spherical_cap_height: H must be >= 0");
  if (!(radius_bound > 0))
    throw config_error("spherical_cap_height: radius_bound must be > 0");
  const double hr = H * radius_bound;
  if (hr > 1.0 + 1e-15)
    throw math_error(
        "spherical_cap_height: H * radius_bound > 1, no cap graph exists "
        "(requires radius_bound <= 1/H)");
  const double clamped = std::min(hr, 1.0);
  return H * radius_bound * radius_bound /
         (1.0 + std::sqrt(1.0 - clamped * clamped));
}

inline Json certificate_to_json(const BarrierCertificate& c) {
  Json j = Json::object();
  j["component"] = c.component;
  j["n"] = c.params.n;
  j["H"] = c.params.H;
  j["mu"] = c.params.mu;
  j["alpha"] = c.params.alpha;
  j["lambda"] = c.params.lambda;
  j["reach"] = c.params.reach;
  j["b"] = c.params.b();
  j["epsilon"] = c.params.epsilon();
  j["grid_size"] = c.grid_size;
  j["exact_delta_d"] = c.exact_delta_d;
  j["max_residual"] = c.max_residual;
  j["certified"] = c.certified;
  j["psi_at_epsilon"] = c.psi_at_epsilon;
  j["first_sign_change"] = c.first_sign_change;
  return j;
}

}  // namespace cmc
