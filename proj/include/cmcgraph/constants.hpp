#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmcgraph/errors.hpp"
#include "cmcgraph/report.hpp"

namespace cmc {

/// Default offset above 1 for the barrier shape parameter alpha.
inline constexpr double kDefaultAlphaOffset = 1e-3;
inline constexpr double kDefaultAlpha = 1.0 + kDefaultAlphaOffset;

/// Residual threshold below which a grid certification counts as passed.
inline constexpr double kCertTolerance = 1e-12;

/// acosh through the log form log(x + sqrt(x^2-1)). Arguments that are
/// analytically >= 1 but land just below from rounding are clamped to 1.
template <class Real>
Real acosh_log(Real x) {
  using std::log;
  using std::sqrt;
  if (x < Real(1)) {
    if (x < Real(1) - Real(1e-12)) throw math_error("acosh_log: argument < 1");
    x = Real(1);
  }
  return log(x + sqrt((x - Real(1)) * (x + Real(1))));
}

/// Unique root x > 1 of x = cosh(x / sqrt(x^2 - 1)), located by bisection
/// on [1.5, 2.5] followed by one guarded Newton polish. The root is also
/// the global maximizer of acosh(t)/t over t > 1.
template <class Real>
Real delta_root(Real tol) {
  using std::cosh;
  using std::pow;
  using std::sinh;
  using std::sqrt;
  auto g = [](Real x) { return x - cosh(x / sqrt(x * x - Real(1))); };
  Real lo(1.5), hi(2.5);
  if (!(g(lo) < Real(0)) || !(g(hi) > Real(0)))
    throw numeric_error("delta_root: [1.5, 2.5] does not bracket a sign change");
  while (hi - lo > tol) {
    Real mid = (lo + hi) / Real(2);
    (g(mid) < Real(0) ? lo : hi) = mid;
  }
  Real x = (lo + hi) / Real(2);
  // g'(x) = 1 + sinh(x/sqrt(x^2-1)) / (x^2-1)^{3/2} > 0
  Real w = x * x - Real(1);
  Real gp = Real(1) + sinh(x / sqrt(w)) / (w * sqrt(w));
  Real step = g(x) / gp;
  if (x - step > lo && x - step < hi) x -= step;
  return x;
}

/// Cached double-precision value of the root above (~1.8102).
inline double delta() {
  static const double d = delta_root<double>(1e-13);
  return d;
}

struct DeltaConstant {
  double value;     ///< the root, in (1.8, 1.82)
  double residual;  ///< |value - cosh(value/sqrt(value^2-1))|
};

inline DeltaConstant solve_delta() {
  const double v = delta();
  return {v, std::abs(v - std::cosh(v / std::sqrt(v * v - 1.0)))};
}

/// acosh(1 + del*mu_eff*width) / (del*mu_eff): the barrier height reached
/// over a collar of the given width with effective curvature scale mu_eff.
template <class Real>
Real height_gain(Real mu_eff, Real width, Real del) {
  return acosh_log(Real(1) + del * mu_eff * width) / (del * mu_eff);
}

// ---------------------------------------------------------------------------
// Minimal case (H = 0)
// ---------------------------------------------------------------------------

struct MinimalHeightBound {
  double tau;
  double h_max;
  bool degenerate;  ///< set when H_inf_abs == 0 (mean-convex-or-flat boundary)
};

/// Height bound for the minimal equation over a domain with reach `reach`
/// and inf boundary mean curvature -H_inf_abs.
///
/// tau   = min{reach, (delta-1) / (delta (n-1) H_inf_abs)}
/// h_max = acosh(1 + tau delta (n-1) H_inf_abs) / (delta (n-1) H_inf_abs)
///
/// At H_inf_abs == 0 the bound has no finite limit (the restriction
/// disappears); the reach is returned as a conservative value with the
/// degenerate flag set.
inline MinimalHeightBound minimal_height_bound(int n, double H_inf_abs,
                                               double reach) {
  if (n < 2) throw config_error("minimal_height_bound: n must be >= 2");
  if (!(reach > 0)) throw config_error("minimal_height_bound: reach must be > 0");
  if (!(H_inf_abs >= 0))
    throw config_error("minimal_height_bound: H_inf_abs must be >= 0");
  if (H_inf_abs == 0.0) return {reach, reach, true};
  const double del = delta();
  const double mu = (n - 1) * H_inf_abs;
  const double tau = std::min(reach, (del - 1.0) / (del * mu));
  return {tau, height_gain(mu, tau, del), false};
}

// ---------------------------------------------------------------------------
// CMC case (H > 0 admissible below the constant C)
// ---------------------------------------------------------------------------

template <class Real>
Real cmc_sigma(int n, Real mu, Real radius_bound, Real reach, Real del) {
  using std::min;
  return min(reach,
             (del - Real(1)) / (del * (mu + (Real(n) / radius_bound) * (del + Real(1)))));
}

/// The admissible-curvature constant C(n, mu, radius_bound, sigma):
///
///          2 delta mu acosh(1 + delta mu sigma)
///   C = -------------------------------------------------------------
///       [acosh(1 + delta(mu + (n/RB)(1+delta)) sigma)]^2
///       + mu delta^2 RB (mu RB + 2n(1+delta))
///       + delta n (1+delta) [delta n (1+delta) - 2 acosh(1 + delta mu sigma)]
template <class Real>
Real cmc_C(int n, Real mu, Real radius_bound, Real sigma, Real del) {
  const Real one(1);
  const Real a1 = acosh_log(one + del * mu * sigma);
  const Real a2 =
      acosh_log(one + del * (mu + (Real(n) / radius_bound) * (one + del)) * sigma);
  const Real nd = Real(n) * del * (one + del);
  const Real den = a2 * a2 +
                   mu * del * del * radius_bound *
                       (mu * radius_bound + Real(2 * n) * (one + del)) +
                   nd * (nd - Real(2) * a1);
  return Real(2) * del * mu * a1 / den;
}

/// h_H(n, mu, H, radius_bound, sigma): barrier height minus the cap height.
template <class Real>
Real cmc_height(int n, Real mu, Real H, Real radius_bound, Real sigma, Real del) {
  using std::sqrt;
  const Real one(1);
  const Real k = mu + Real(n) * H * (one + del);
  const Real hr = H * radius_bound;
  return height_gain(k, sigma, del) -
         H * radius_bound * radius_bound / (one + sqrt(one - hr * hr));
}

struct CmcConstant {
  double sigma;
  double C;
};

inline CmcConstant cmc_constant_C(int n, double mu, double radius_bound,
                                  double reach) {
  if (n < 2) throw config_error("cmc_constant_C: n must be >= 2");
  if (!(radius_bound > 0))
    throw config_error("cmc_constant_C: radius_bound must be > 0");
  if (!(reach > 0)) throw config_error("cmc_constant_C: reach must be > 0");
  if (!(mu >= 0)) throw config_error("cmc_constant_C: mu must be >= 0");
  if (mu == 0.0)
    throw degenerate_error(
        "cmc_constant_C: mu = 0 (mean-convex-or-flat boundary); C -> 0 in this "
        "limit and no positive H is certified");
  const double del = delta();
  const double sigma = cmc_sigma(n, mu, radius_bound, reach, del);
  return {sigma, cmc_C(n, mu, radius_bound, sigma, del)};
}

/// Maximal certified boundary height for curvature H in [0, C).
inline double cmc_height_bound(int n, double mu, double H, double radius_bound,
                               double reach) {
  const CmcConstant cc = cmc_constant_C(n, mu, radius_bound, reach);
  if (!(H >= 0)) throw config_error("cmc_height_bound: H must be >= 0");
  if (H >= cc.C)
    throw math_error("cmc_height_bound: H out of range, must be < C = " +
                     format_g17(cc.C));
  return cmc_height(n, mu, H, radius_bound, cc.sigma, delta());
}

/// Collar width rho = min{reach, (delta-1)/(delta(mu + nH(1+delta)))} (the
/// limiting barrier width as alpha -> 1, lambda -> delta).
inline double rho_width(int n, double mu, double H, double reach) {
  const double del = delta();
  return std::min(reach, (del - 1.0) / (del * (mu + n * H * (1.0 + del))));
}

// ---------------------------------------------------------------------------
// Log-form comparison bound (competing minimal-case estimate)
// ---------------------------------------------------------------------------

struct ArsBound {
  double B;
  double eps_bar;
  double bound;
  bool r_prime_branch;  ///< true when eps_bar = r_prime (the other min branch)
};

/// B = 6(1+r')(n-1)H_inf_abs, eps_bar = min{r', 1/(2B)}; returns
/// B^{-1} log(1 + B eps_bar).
inline ArsBound ars_comparison_bound(int n, double H_inf_abs, double r_prime) {
  if (n < 2) throw config_error("ars_comparison_bound: n must be >= 2");
  if (!(H_inf_abs > 0))
    throw config_error("ars_comparison_bound: H_inf_abs must be > 0");
  if (!(r_prime > 0))
    throw config_error("ars_comparison_bound: r_prime must be > 0");
  const double B = 6.0 * (1.0 + r_prime) * (n - 1) * H_inf_abs;
  const double eps_bar = std::min(r_prime, 1.0 / (2.0 * B));
  return {B, eps_bar, std::log1p(B * eps_bar) / B, r_prime <= 1.0 / (2.0 * B)};
}

// ---------------------------------------------------------------------------
// Aggregate report
// ---------------------------------------------------------------------------

struct BoundsReport {
  int n = 2;
  double H = 0;
  double H_inf_abs = 0;
  double mu = 0;            ///< (n-1) * H_inf_abs
  double reach = 0;         ///< R
  double radius_bound = 0;  ///< circumradius of the domain
  double inj_radius = 0;    ///< r (one-sided tube width from the whole boundary)
  double delta = 0;
  double tau = 0;
  double sigma = 0;
  double rho = 0;
  double epsilon = 0;  ///< barrier collar width at the default (alpha, lambda)
  double C = 0;
  double h_max_minimal = 0;
  double h_H = 0;
  double ars_bound = 0;
  bool tau_reach_branch = false;    ///< tau hit the reach in its min{}
  bool sigma_reach_branch = false;
  bool rho_reach_branch = false;
  bool ars_r_prime_branch = false;
  bool degenerate = false;
};

/// All closed-form constants for one (domain, H) pair. Requires H < C.
inline BoundsReport compute_bounds(int n, double H_inf_abs, double H,
                                   double reach, double radius_bound,
                                   double inj_radius) {
  BoundsReport r;
  r.n = n;
  r.H = H;
  r.H_inf_abs = H_inf_abs;
  r.mu = (n - 1) * H_inf_abs;
  r.reach = reach;
  r.radius_bound = radius_bound;
  r.inj_radius = inj_radius;
  r.delta = delta();

  const auto mh = minimal_height_bound(n, H_inf_abs, reach);
  r.tau = mh.tau;
  r.h_max_minimal = mh.h_max;
  r.degenerate = mh.degenerate;
  r.tau_reach_branch = r.tau >= reach;

  const auto cc = cmc_constant_C(n, r.mu, radius_bound, reach);
  r.sigma = cc.sigma;
  r.C = cc.C;
  r.sigma_reach_branch = r.sigma >= reach;
  r.h_H = cmc_height_bound(n, r.mu, H, radius_bound, reach);

  r.rho = rho_width(n, r.mu, H, reach);
  r.rho_reach_branch = r.rho >= reach;

  const double del = r.delta;
  const double b = del * (r.mu + n * H * (1.0 + del));
  r.epsilon = std::min(reach, (del - kDefaultAlpha) / b);

  const auto ars = ars_comparison_bound(n, H_inf_abs, inj_radius);
  r.ars_bound = ars.bound;
  r.ars_r_prime_branch = ars.r_prime_branch;
  return r;
}

}  // namespace cmc
