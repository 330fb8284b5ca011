#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "cmcgraph/barriers.hpp"
#include "cmcgraph/errors.hpp"
#include "cmcgraph/geometry.hpp"

namespace cmc {

/// Piecewise-linear triangulation. Node tags: 0 interior, 1 outer boundary,
/// 2+i for hole i. Triangles are counterclockwise.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> tags;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
};

inline double triangle_area(const Mesh& m, int t) {
  const auto& tri = m.triangles[static_cast<std::size_t>(t)];
  const Vec2 a = m.nodes[static_cast<std::size_t>(tri[0])];
  const Vec2 b = m.nodes[static_cast<std::size_t>(tri[1])];
  const Vec2 c = m.nodes[static_cast<std::size_t>(tri[2])];
  return 0.5 * cross(b - a, c - a);
}

inline void check_mesh(const Mesh& m, double area_floor = 0.0) {
  if (m.num_nodes() < 3) throw config_error("mesh: fewer than 3 nodes");
  if (m.tags.size() != m.nodes.size())
    throw config_error("mesh: tag count does not match node count");
  for (int t = 0; t < m.num_triangles(); ++t) {
    for (int v : m.triangles[static_cast<std::size_t>(t)])
      if (v < 0 || v >= m.num_nodes())
        throw config_error("mesh: triangle " + std::to_string(t) +
                           " references node " + std::to_string(v));
    const double area = triangle_area(m, t);
    if (!(area > area_floor))
      throw config_error("mesh: triangle " + std::to_string(t) +
                         " has non-positive or degenerate area " +
                         format_g17(area));
  }
}

/// Smallest interior angle over all triangles, in degrees.
inline double mesh_min_angle(const Mesh& m) {
  double min_angle = 180.0;
  for (const auto& tri : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = m.nodes[static_cast<std::size_t>(tri[k])];
      const Vec2 a = m.nodes[static_cast<std::size_t>(tri[(k + 1) % 3])] - p;
      const Vec2 b = m.nodes[static_cast<std::size_t>(tri[(k + 2) % 3])] - p;
      const double ang =
          std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0));
      min_angle = std::min(min_angle, ang * 180.0 / M_PI);
    }
  }
  return min_angle;
}

/// Structured polar triangulation of a concentric annulus. Eccentric or
/// multi-hole domains must come in through the mesh import format.
inline Mesh mesh_annulus(const DomainSpec& d, double target_edge) {
  validate(d);
  if (d.n != 2) throw config_error("mesh_annulus: planar meshing requires n = 2");
  if (!(target_edge > 0))
    throw config_error("mesh_annulus: target_edge must be > 0");
  if (d.holes.size() != 1 ||
      distance(d.holes[0].center, d.outer.center) > 1e-12 * d.outer.radius)
    throw config_error(
        "mesh_annulus: only concentric annuli are meshed natively; import a "
        "mesh for general domains");
  const double ri = d.holes[0].radius;
  const double ro = d.outer.radius;
  const int nrad = std::max<int>(1, std::lround((ro - ri) / target_edge));
  const int ntheta =
      std::max<int>(8, std::lround(M_PI * (ri + ro) / target_edge));

  Mesh m;
  m.nodes.reserve(static_cast<std::size_t>((nrad + 1) * ntheta));
  m.tags.reserve(m.nodes.capacity());
  for (int k = 0; k <= nrad; ++k) {
    const double r = ri + (ro - ri) * k / nrad;
    for (int j = 0; j < ntheta; ++j) {
      const double th = 2.0 * M_PI * j / ntheta;
      m.nodes.push_back(d.outer.center + Vec2{r * std::cos(th), r * std::sin(th)});
      m.tags.push_back(k == 0 ? 2 : (k == nrad ? 1 : 0));
    }
  }
  m.triangles.reserve(static_cast<std::size_t>(2 * nrad * ntheta));
  auto id = [&](int k, int j) { return k * ntheta + (j % ntheta); };
  for (int k = 0; k < nrad; ++k)
    for (int j = 0; j < ntheta; ++j) {
      const int a = id(k, j), b = id(k, j + 1), c = id(k + 1, j + 1),
                e = id(k + 1, j);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({a, c, e});
    }
  check_mesh(m);
  return m;
}

// ---------------------------------------------------------------------------
// Mesh text format:
//   nodes N
//   x y tag          (N lines)
//   triangles M
//   i j k            (M lines, 0-based, counterclockwise)
// ---------------------------------------------------------------------------

inline Mesh read_mesh(std::istream& in) {
  Mesh m;
  std::string kw;
  std::size_t count = 0;
  if (!(in >> kw) || kw != "nodes" || !(in >> count))
    throw config_error("mesh: expected 'nodes N' header");
  m.nodes.resize(count);
  m.tags.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    if (!(in >> m.nodes[i].x >> m.nodes[i].y >> m.tags[i]))
      throw config_error("mesh: bad node line " + std::to_string(i));
  if (!(in >> kw) || kw != "triangles" || !(in >> count))
    throw config_error("mesh: expected 'triangles M' header");
  m.triangles.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    if (!(in >> m.triangles[i][0] >> m.triangles[i][1] >> m.triangles[i][2]))
      throw config_error("mesh: bad triangle line " + std::to_string(i));
  check_mesh(m);
  return m;
}

inline void write_mesh(std::ostream& os, const Mesh& m) {
  os << "nodes " << m.num_nodes() << '\n';
  for (int i = 0; i < m.num_nodes(); ++i)
    os << format_g17(m.nodes[static_cast<std::size_t>(i)].x) << ' '
       << format_g17(m.nodes[static_cast<std::size_t>(i)].y) << ' '
       << m.tags[static_cast<std::size_t>(i)] << '\n';
  os << "triangles " << m.num_triangles() << '\n';
  for (const auto& t : m.triangles)
    os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

/// Dirichlet data: 0 on the outer boundary, h on every hole boundary.
inline double boundary_phi(int tag, double h) { return tag >= 2 ? h : 0.0; }

namespace fem_detail {

struct TriGeom {
  std::array<Vec2, 3> grad;  // P1 basis gradients
  double area = 0;
};

inline TriGeom tri_geom(const Mesh& m, int t) {
  const auto& tri = m.triangles[static_cast<std::size_t>(t)];
  const Vec2 p0 = m.nodes[static_cast<std::size_t>(tri[0])];
  const Vec2 p1 = m.nodes[static_cast<std::size_t>(tri[1])];
  const Vec2 p2 = m.nodes[static_cast<std::size_t>(tri[2])];
  TriGeom g;
  g.area = 0.5 * cross(p1 - p0, p2 - p0);
  if (!(g.area > 0))
    throw config_error("mesh: degenerate triangle " + std::to_string(t) +
                       " during assembly");
  const double s = 1.0 / (2.0 * g.area);
  auto perp = [](Vec2 v) { return Vec2{-v.y, v.x}; };
  g.grad[0] = s * perp(p2 - p1);
  g.grad[1] = s * perp(p0 - p2);
  g.grad[2] = s * perp(p1 - p0);
  return g;
}

}  // namespace fem_detail

/// Gradient of the P1 field on each triangle; returns the mesh maximum.
inline double max_gradient(const Mesh& m, const std::vector<double>& u) {
  double g = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto geom = fem_detail::tri_geom(m, t);
    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
    Vec2 grad{0, 0};
    for (int k = 0; k < 3; ++k)
      grad = grad + u[static_cast<std::size_t>(tri[k])] * geom.grad[k];
    g = std::max(g, norm(grad));
  }
  return g;
}

/// Nodal residual of the weak form: interior rows carry
///   sum_T area [ (grad u . grad chi_i)/W - n H / 3 ],  W = sqrt(1+|grad u|^2),
/// boundary rows carry the Dirichlet mismatch u_i - t phi_i. Planar graphs,
/// so n = 2.
inline std::vector<double> assemble_residual(const Mesh& m,
                                             const std::vector<double>& u,
                                             double H, double t, double h) {
  if (u.size() != m.nodes.size())
    throw config_error("assemble_residual: field size does not match mesh");
  std::vector<double> r(u.size(), 0.0);
  const double nH = 2.0 * H;
  for (int ti = 0; ti < m.num_triangles(); ++ti) {
    const auto geom = fem_detail::tri_geom(m, ti);
    const auto& tri = m.triangles[static_cast<std::size_t>(ti)];
    Vec2 g{0, 0};
    for (int k = 0; k < 3; ++k)
      g = g + u[static_cast<std::size_t>(tri[k])] * geom.grad[k];
    const double W = std::sqrt(1.0 + dot(g, g));
    for (int k = 0; k < 3; ++k)
      r[static_cast<std::size_t>(tri[k])] +=
          geom.area * (dot(g, geom.grad[k]) / W - nH / 3.0);
  }
  for (std::size_t i = 0; i < u.size(); ++i)
    if (m.tags[i] != 0) r[i] = u[i] - t * boundary_phi(m.tags[i], h);
  return r;
}

struct SolverConfig {
  double dt_init = 0.1;
  double dt_min = 1e-6;
  double dt_growth = 1.5;
  int easy_iters = 4;       ///< grow the step after solves cheaper than this
  int max_newton = 25;
  int max_backtrack = 30;
  double tol = 1e-12;       ///< sup-norm residual target
  std::uint64_t perturb_seed = 0;
  double perturb_amp = 0;   ///< warm-start noise amplitude (uniqueness probes)
};

struct SolutionField {
  std::vector<double> u;
  double t = 0;
  double residual_norm = 0;
  int newton_iters = 0;
};

struct ContinuationStep {
  double t = 0;
  int newton_iters = 0;
  double residual_norm = 0;
  double max_grad = 0;
};

struct ContinuationTrace {
  std::vector<ContinuationStep> steps;
  bool converged_to_t1 = false;
  double failure_t = std::numeric_limits<double>::quiet_NaN();
  std::string failure_reason;
  std::vector<std::vector<double>> newton_histories;  ///< per accepted step
};

namespace fem_detail {

struct NewtonResult {
  bool ok = false;
  int iters = 0;
  double residual_norm = 0;
  std::vector<double> history;
  std::string reason;
};

class P1Solver {
 public:
  P1Solver(const Mesh& m, double H, double h) : mesh_(m), H_(H), h_(h) {
    index_.assign(m.nodes.size(), -1);
    for (std::size_t i = 0; i < m.nodes.size(); ++i)
      if (m.tags[i] == 0) index_[i] = n_int_++;
    geom_.reserve(static_cast<std::size_t>(m.num_triangles()));
    for (int t = 0; t < m.num_triangles(); ++t) geom_.push_back(tri_geom(m, t));
  }

  int interior_count() const { return n_int_; }

  void set_boundary(std::vector<double>& u, double t) const {
    for (std::size_t i = 0; i < u.size(); ++i)
      if (mesh_.tags[i] != 0) u[i] = t * boundary_phi(mesh_.tags[i], h_);
  }

  Eigen::VectorXd interior_residual(const std::vector<double>& u) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n_int_);
    const double nH = 2.0 * H_;
    for (int ti = 0; ti < mesh_.num_triangles(); ++ti) {
      const auto& geom = geom_[static_cast<std::size_t>(ti)];
      const auto& tri = mesh_.triangles[static_cast<std::size_t>(ti)];
      Vec2 g{0, 0};
      for (int k = 0; k < 3; ++k)
        g = g + u[static_cast<std::size_t>(tri[k])] * geom.grad[k];
      const double W = std::sqrt(1.0 + dot(g, g));
      for (int k = 0; k < 3; ++k) {
        const int row = index_[static_cast<std::size_t>(tri[k])];
        if (row >= 0)
          r[row] += geom.area * (dot(g, geom.grad[k]) / W - nH / 3.0);
      }
    }
    return r;
  }

  /// Energy-Hessian Newton matrix on the interior block:
  ///   J_ij = sum_T area [ (grad chi_j . grad chi_i)/W
  ///                       - (g . grad chi_i)(g . grad chi_j)/W^3 ].
  Eigen::SparseMatrix<double> jacobian(const std::vector<double>& u) const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(mesh_.num_triangles()) * 9);
    for (int ti = 0; ti < mesh_.num_triangles(); ++ti) {
      const auto& geom = geom_[static_cast<std::size_t>(ti)];
      const auto& tri = mesh_.triangles[static_cast<std::size_t>(ti)];
      Vec2 g{0, 0};
      for (int k = 0; k < 3; ++k)
        g = g + u[static_cast<std::size_t>(tri[k])] * geom.grad[k];
      const double W2 = 1.0 + dot(g, g);
      const double W = std::sqrt(W2);
      for (int a = 0; a < 3; ++a) {
        const int row = index_[static_cast<std::size_t>(tri[a])];
        if (row < 0) continue;
        const double ga = dot(g, geom.grad[a]);
        for (int b = 0; b < 3; ++b) {
          const int col = index_[static_cast<std::size_t>(tri[b])];
          if (col < 0) continue;
          const double gb = dot(g, geom.grad[b]);
          trips.emplace_back(
              row, col,
              geom.area * (dot(geom.grad[a], geom.grad[b]) / W - ga * gb / (W2 * W)));
        }
      }
    }
    Eigen::SparseMatrix<double> J(n_int_, n_int_);
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
  }

  /// Damped Newton on the interior unknowns; boundary values must already be
  /// set on `u`. Backtracks by halving until the 2-norm decreases.
  NewtonResult newton(std::vector<double>& u, const SolverConfig& cfg) {
    NewtonResult res;
    Eigen::VectorXd r = interior_residual(u);
    res.history.push_back(r.lpNorm<Eigen::Infinity>());
    for (int it = 0; it < cfg.max_newton; ++it) {
      if (res.history.back() <= cfg.tol) {
        res.ok = true;
        res.iters = it;
        res.residual_norm = res.history.back();
        return res;
      }
      Eigen::SparseMatrix<double> J = jacobian(u);
      if (!analyzed_) {
        llt_.analyzePattern(J);
        analyzed_ = true;
      }
      llt_.factorize(J);
      if (llt_.info() != Eigen::Success) {
        res.reason = "linear-solve breakdown";
        res.iters = it;
        res.residual_norm = res.history.back();
        return res;
      }
      Eigen::VectorXd step = llt_.solve(-r);
      const double rn0 = r.norm();
      double scale = 1.0;
      bool accepted = false;
      std::vector<double> trial(u);
      for (int bt = 0; bt <= cfg.max_backtrack; ++bt) {
        trial = u;
        for (std::size_t i = 0; i < u.size(); ++i)
          if (index_[i] >= 0) trial[i] += scale * step[index_[i]];
        Eigen::VectorXd rt = interior_residual(trial);
        if (rt.norm() < rn0) {
          u = trial;
          r = rt;
          accepted = true;
          break;
        }
        scale *= 0.5;
      }
      if (!accepted) {
        res.reason = "line search stalled";
        res.iters = it + 1;
        res.residual_norm = res.history.back();
        return res;
      }
      res.history.push_back(r.lpNorm<Eigen::Infinity>());
    }
    res.ok = res.history.back() <= cfg.tol;
    res.iters = cfg.max_newton;
    res.residual_norm = res.history.back();
    if (!res.ok) res.reason = "newton iteration limit";
    return res;
  }

 private:
  const Mesh& mesh_;
  double H_;
  double h_;
  int n_int_ = 0;
  std::vector<int> index_;
  std::vector<TriGeom> geom_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
  bool analyzed_ = false;
};

}  // namespace fem_detail

/// Parameter continuation in t for Q_{tH}(u_t) = 0, u_t|boundary = t phi,
/// from the trivial solution at t = 0 to t = 1. Each target is solved by
/// damped Newton warm-started from the previous solution; failed steps halve
/// the increment, and falling below dt_min produces a failure certificate
/// with the last reachable t.
inline std::pair<SolutionField, ContinuationTrace> continuation_solve(
    const Mesh& m, const DomainSpec& d, double h, double H,
    const SolverConfig& cfg = {}) {
  validate(d);
  check_mesh(m);
  if (d.n != 2) throw config_error("continuation_solve: requires n = 2");
  if (!(h >= 0)) throw config_error("continuation_solve: h must be >= 0");
  if (!(H >= 0)) throw config_error("continuation_solve: H must be >= 0");
  const int max_tag = 1 + static_cast<int>(d.holes.size());
  bool has_outer = false;
  for (int tag : m.tags) {
    if (tag < 0 || tag > max_tag)
      throw config_error("continuation_solve: mesh tag " + std::to_string(tag) +
                         " does not match the domain components");
    has_outer = has_outer || tag == 1;
  }
  if (!has_outer)
    throw config_error("continuation_solve: mesh has no outer boundary nodes");

  fem_detail::P1Solver solver(m, H, h);
  SolutionField sol;
  sol.u.assign(m.nodes.size(), 0.0);
  ContinuationTrace trace;
  trace.steps.push_back({0.0, 0, 0.0, 0.0});
  trace.newton_histories.push_back({0.0});

  std::mt19937_64 rng(cfg.perturb_seed);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);

  double t = 0.0;
  double dt = cfg.dt_init;
  while (t < 1.0) {
    const double tn = std::min(1.0, t + dt);
    std::vector<double> un = sol.u;
    solver.set_boundary(un, tn);
    if (cfg.perturb_amp > 0)
      for (std::size_t i = 0; i < un.size(); ++i)
        if (m.tags[i] == 0) un[i] += cfg.perturb_amp * noise(rng);
    auto res = solver.newton(un, cfg);
    if (res.ok) {
      t = tn;
      sol.u = std::move(un);
      sol.t = t;
      sol.residual_norm = res.residual_norm;
      sol.newton_iters = res.iters;
      trace.steps.push_back({t, res.iters, res.residual_norm, max_gradient(m, sol.u)});
      trace.newton_histories.push_back(std::move(res.history));
      if (res.iters < cfg.easy_iters) dt *= cfg.dt_growth;
    } else {
      dt *= 0.5;
      if (dt < cfg.dt_min) {
        trace.converged_to_t1 = false;
        trace.failure_t = t;
        trace.failure_reason = "minimum continuation step underflow (" +
                               res.reason + ") at t = " + format_g17(t);
        return {sol, trace};
      }
    }
  }
  trace.converged_to_t1 = true;
  return {sol, trace};
}

/// Largest ratio r_{k+1} / r_k^2 over Newton tail pairs with r_k < 1e-3;
/// NaN when the history has no such pair.
inline double fit_quadratic_kappa(const std::vector<double>& history) {
  double kappa = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k + 1 < history.size(); ++k) {
    if (history[k] < 1e-3 && history[k] > 0 && history[k + 1] > 0) {
      const double c = history[k + 1] / (history[k] * history[k]);
      if (std::isnan(kappa) || c > kappa) kappa = c;
    }
  }
  return kappa;
}

// ---------------------------------------------------------------------------
// Barrier comparison on the discrete solution
// ---------------------------------------------------------------------------

struct ComparisonReport {
  int nodes_checked = 0;
  int violations = 0;
  double max_violation = 0;
  std::vector<int> violation_nodes;  ///< first few offending node ids
};

/// Per-node bound fields for the collar barriers: upper[i] is the minimum of
/// anchor + psi(dist) over every component whose collar contains node i
/// (NaN = unconstrained), lower[i] = 0. Anchors: 0 on the outer collar,
/// t*h on hole collars.
inline std::pair<std::vector<double>, std::vector<double>> build_barrier_fields(
    const Mesh& m, const DomainSpec& d, double h, double t, double H,
    double alpha = kDefaultAlpha) {
  validate(d);
  const BoundaryGeometry g = boundary_geometry(d);
  const double mu = (d.n - 1) * std::abs(g.H_inf);
  const BarrierParams params = make_barrier_params(d.n, H, mu, g.reach, alpha);
  const double eps = params.epsilon();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> upper(m.nodes.size(), nan);
  std::vector<double> lower(m.nodes.size(), 0.0);
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    const Vec2 z = m.nodes[i];
    for (int comp = 0; comp < component_count(d); ++comp) {
      const double s =
          comp == 0
              ? d.outer.radius - distance(z, d.outer.center)
              : distance(z, d.holes[static_cast<std::size_t>(comp - 1)].center) -
                    d.holes[static_cast<std::size_t>(comp - 1)].radius;
      if (s < -1e-9 * d.outer.radius || s > eps) continue;
      const double anchor = comp == 0 ? 0.0 : t * h;
      const double bound = anchor + psi(params, std::clamp(s, 0.0, eps));
      if (std::isnan(upper[i]) || bound < upper[i]) upper[i] = bound;
    }
  }
  return {upper, lower};
}

/// Checks lower <= u <= upper nodally (NaN bounds are skipped) with slack
/// `tol`; reports rather than throws.
inline ComparisonReport verify_comparison(const std::vector<double>& u,
                                          const std::vector<double>& upper,
                                          const std::vector<double>& lower,
                                          double tol) {
  if (upper.size() != u.size() || lower.size() != u.size())
    throw config_error("verify_comparison: field sizes do not match");
  ComparisonReport rep;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double excess = 0;
    bool constrained = false;
    if (!std::isnan(upper[i])) {
      excess = std::max(excess, u[i] - upper[i]);
      constrained = true;
    }
    if (!std::isnan(lower[i])) {
      excess = std::max(excess, lower[i] - u[i]);
      constrained = true;
    }
    if (!constrained) continue;
    ++rep.nodes_checked;
    if (excess > tol) {
      ++rep.violations;
      if (rep.violation_nodes.size() < 16)
        rep.violation_nodes.push_back(static_cast<int>(i));
    }
    rep.max_violation = std::max(rep.max_violation, excess);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline Json trace_to_json(const ContinuationTrace& tr) {
  Json j = Json::object();
  Json steps = Json::array();
  for (const auto& s : tr.steps) {
    Json step = Json::object();
    step["t"] = s.t;
    step["newton_iters"] = s.newton_iters;
    step["residual_norm"] = s.residual_norm;
    step["max_grad"] = s.max_grad;
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  j["converged_to_t1"] = tr.converged_to_t1;
  j["failure_t"] = tr.failure_t;
  j["failure_reason"] = tr.failure_reason;
  return j;
}

/// CSV solution export, columns x,y,tag,u.
inline void write_solution_csv(std::ostream& os, const Mesh& m,
                               const std::vector<double>& u) {
  os << "x,y,tag,u\n";
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    os << format_g17(m.nodes[i].x) << ',' << format_g17(m.nodes[i].y) << ','
       << m.tags[i] << ',' << format_g17(u[i]) << '\n';
}

}  // namespace cmc
