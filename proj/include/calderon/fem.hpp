// P1 finite elements for div((1 + (eta-1)chi) grad u) = 0 on the square,
// with Dirichlet data or mean-zero Neumann flux. The interface-conforming
// meshes carry the conductivity jump exactly, so piecewise-constant
// per-triangle gradients are the right object for the max|grad u| metric.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "calderon/geometry.hpp"

namespace calderon {

struct solve_error : std::runtime_error {
  double last_residual;
  explicit solve_error(const std::string& msg, double res)
      : std::runtime_error(msg), last_residual(res) {}
};

// Symmetric stiffness matrix in compressed-row layout plus right-hand side
// and the list of constrained nodes with prescribed values.
struct SparseSystem {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> values;
  std::vector<double> rhs;
  std::vector<int> constrained;
  std::vector<double> constrained_values;
  bool singular = false;  // pure Neumann: constant nullspace, solve in the mean-zero gauge

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += values[k] * x[col_idx[k]];
      y[i] = s;
    }
  }
  double entry(int i, int j) const {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      if (col_idx[k] == j) return values[k];
    return 0.0;
  }
};

namespace detail {

inline void element_stiffness(const Vec2& a, const Vec2& b, const Vec2& c, double gamma,
                              double area_floor, double ke[3][3]) {
  double area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  if (area < area_floor)
    throw std::runtime_error("assemble_stiffness: degenerate triangle (area " +
                             std::to_string(area) + ")");
  // grad phi_i = perp(opposite edge) / (2 area)
  Vec2 grads[3] = {{(b.y - c.y), (c.x - b.x)}, {(c.y - a.y), (a.x - c.x)}, {(a.y - b.y), (b.x - a.x)}};
  for (auto& v : grads) v = v * (1.0 / (2.0 * area));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) ke[i][j] = gamma * area * grads[i].dot(grads[j]);
}

}  // namespace detail

// Per-triangle conductivity gamma = eta above the interface, 1 below.
inline std::vector<double> conductivity_layout(const Mesh& mesh, double eta) {
  std::vector<double> gamma(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t)
    gamma[t] = mesh.region_tags[t] == Region::above_interface ? eta : 1.0;
  return gamma;
}

// Assembles the P1 stiffness matrix. Multi-threaded accumulation uses one
// value array per thread over a shared sparsity pattern, merged in thread
// order; results agree with the sequential sum up to roundoff.
inline SparseSystem assemble_stiffness(const Mesh& mesh, double eta, int n_threads = 1) {
  if (!(eta > 0)) throw std::invalid_argument("assemble_stiffness: eta must be positive");
  const int n = mesh.n_vertices();
  const double side = 2.0 * mesh.half_side;
  const double area_floor = 1e-14 * side * side;
  std::vector<double> gamma = conductivity_layout(mesh, eta);

  // sparsity pattern
  std::vector<std::vector<int>> cols(n);
  for (const auto& tri : mesh.triangles)
    for (int i : tri)
      for (int j : tri) cols[i].push_back(j);
  SparseSystem sys;
  sys.n = n;
  sys.row_ptr.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& c = cols[i];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    sys.row_ptr[i + 1] = sys.row_ptr[i] + static_cast<int>(c.size());
  }
  sys.col_idx.resize(sys.row_ptr[n]);
  for (int i = 0; i < n; ++i)
    std::copy(cols[i].begin(), cols[i].end(), sys.col_idx.begin() + sys.row_ptr[i]);
  sys.rhs.assign(n, 0.0);

  auto entry_slot = [&](int i, int j) {
    auto beg = sys.col_idx.begin() + sys.row_ptr[i];
    auto end = sys.col_idx.begin() + sys.row_ptr[i + 1];
    return static_cast<int>(std::lower_bound(beg, end, j) - sys.col_idx.begin());
  };

  n_threads = std::max(1, n_threads);
  std::vector<std::vector<double>> partial(n_threads,
                                           std::vector<double>(sys.col_idx.size(), 0.0));
  auto work = [&](int tid) {
    const int nt = mesh.n_triangles();
    int lo = static_cast<int>(static_cast<long long>(nt) * tid / n_threads);
    int hi = static_cast<int>(static_cast<long long>(nt) * (tid + 1) / n_threads);
    double ke[3][3];
    for (int t = lo; t < hi; ++t) {
      const auto& tri = mesh.triangles[t];
      detail::element_stiffness(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                mesh.vertices[tri[2]], gamma[t], area_floor, ke);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) partial[tid][entry_slot(tri[i], tri[j])] += ke[i][j];
    }
  };
  if (n_threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int tid = 0; tid < n_threads; ++tid) pool.emplace_back(work, tid);
    for (auto& th : pool) th.join();
  }
  sys.values.assign(sys.col_idx.size(), 0.0);
  for (int tid = 0; tid < n_threads; ++tid)
    for (std::size_t k = 0; k < sys.values.size(); ++k) sys.values[k] += partial[tid][k];
  return sys;
}

// Symmetric elimination of Dirichlet nodes: the lift moves to the right-hand
// side, constrained rows become the identity with prescribed values.
inline void apply_dirichlet(SparseSystem& sys, const Mesh& mesh,
                            const std::function<double(Vec2)>& trace) {
  std::vector<char> is_constrained(sys.n, 0);
  std::vector<double> value(sys.n, 0.0);
  for (int v = 0; v < sys.n; ++v) {
    if (mesh.boundary_markers[v] != BoundaryMarker::interior) {
      is_constrained[v] = 1;
      value[v] = trace(mesh.vertices[v]);
      sys.constrained.push_back(v);
      sys.constrained_values.push_back(value[v]);
    }
  }
  for (int i = 0; i < sys.n; ++i) {
    if (is_constrained[i]) continue;
    for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k) {
      int j = sys.col_idx[k];
      if (is_constrained[j]) {
        sys.rhs[i] -= sys.values[k] * value[j];
        sys.values[k] = 0.0;
      }
    }
  }
  for (int i = 0; i < sys.n; ++i) {
    if (!is_constrained[i]) continue;
    for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k)
      sys.values[k] = (sys.col_idx[k] == i) ? 1.0 : 0.0;
    sys.rhs[i] = value[i];
  }
}

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double residual = 0;
};

// Jacobi-preconditioned conjugate gradients. For singular (pure Neumann)
// systems the iterates are kept in the mean-zero subspace.
inline CgResult solve_cg(const SparseSystem& sys, double tol = 1e-10, int max_iters = 50000) {
  if (!(tol > 0) || tol > 1e-4)
    throw std::invalid_argument("solve_cg: tol must lie in (0, 1e-4]");
  const int n = sys.n;
  CgResult out;
  out.x.assign(n, 0.0);
  // constrained rows are identity rows; seeding them keeps their residual at
  // zero so the prescribed values are carried exactly
  for (std::size_t k = 0; k < sys.constrained.size(); ++k)
    out.x[sys.constrained[k]] = sys.constrained_values[k];

  std::vector<double> diag(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double d = sys.entry(i, i);
    if (!(d > 0)) throw solve_error("solve_cg: nonpositive diagonal entry", 0.0);
    diag[i] = d;
  }
  auto project = [&](std::vector<double>& v) {
    if (!sys.singular) return;
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    for (double& vi : v) vi -= mean;
  };

  std::vector<double> r(n), Ax0(n);
  sys.multiply(out.x, Ax0);
  for (int i = 0; i < n; ++i) r[i] = sys.rhs[i] - Ax0[i];
  project(r);
  double bnorm = std::sqrt(
      std::inner_product(sys.rhs.begin(), sys.rhs.end(), sys.rhs.begin(), 0.0));
  if (bnorm == 0.0) bnorm = 1.0;
  double r0 = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
  if (r0 == 0.0) return out;

  std::vector<double> z(n), p(n), Ap(n);
  for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  project(z);
  p = z;
  double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);

  for (int it = 1; it <= max_iters; ++it) {
    sys.multiply(p, Ap);
    double pAp = std::inner_product(p.begin(), p.end(), Ap.begin(), 0.0);
    if (!(pAp > 0)) throw solve_error("solve_cg: matrix not positive definite on search space", 0.0);
    double alpha = rz / pAp;
    for (int i = 0; i < n; ++i) {
      out.x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    project(r);
    double rnorm = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
    out.iterations = it;
    out.residual = rnorm / bnorm;
    if (out.residual <= tol) return out;
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    project(z);
    double rz_next = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw solve_error("solve_cg: no convergence after " + std::to_string(max_iters) +
                        " iterations (relative residual " + std::to_string(out.residual) + ")",
                    out.residual);
}

namespace detail {

// Boundary edges (both endpoints on a common side line of the square),
// listed once each in deterministic triangle order.
inline std::vector<std::array<int, 2>> boundary_edges(const Mesh& mesh) {
  const double H = mesh.half_side;
  const double tol = 1e-12 * H;
  auto side_code = [&](const Vec2& p) {
    int code = 0;
    if (std::abs(p.y + H) <= tol) code |= 1;
    if (std::abs(p.x - H) <= tol) code |= 2;
    if (std::abs(p.y - H) <= tol) code |= 4;
    if (std::abs(p.x + H) <= tol) code |= 8;
    return code;
  };
  std::vector<std::array<int, 2>> edges;
  std::map<std::pair<int, int>, int> seen;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int i = tri[e], j = tri[(e + 1) % 3];
      if ((side_code(mesh.vertices[i]) & side_code(mesh.vertices[j])) == 0) continue;
      auto k = std::make_pair(std::min(i, j), std::max(i, j));
      if (seen.emplace(k, 1).second) edges.push_back({i, j});
    }
  }
  return edges;
}

}  // namespace detail

// Assembles the Neumann load from the flux density g and solves the singular
// system in the mean-zero gauge. Rejects incompatible data (the boundary
// integral of g must vanish).
inline CgResult solve_neumann(SparseSystem& sys, const Mesh& mesh,
                              const std::function<double(Vec2)>& flux, double tol = 1e-10,
                              int max_iters = 50000) {
  auto edges = detail::boundary_edges(mesh);
  // two-point Gauss per edge: exact for linear flux densities, and the
  // quadrature points stay inside the edge where the normal is well defined
  const double tq[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  double integral = 0, scale = 0;
  for (const auto& e : edges) {
    const Vec2& a = mesh.vertices[e[0]];
    const Vec2& b = mesh.vertices[e[1]];
    double len = (b - a).norm();
    for (double t : tq) {
      double g = flux(a + t * (b - a));
      integral += 0.5 * len * g;
      scale += 0.5 * len * std::abs(g);
      sys.rhs[e[0]] += 0.5 * len * g * (1.0 - t);
      sys.rhs[e[1]] += 0.5 * len * g * t;
    }
  }
  if (std::abs(integral) > 1e-10 * std::max(1.0, scale)) {
    std::ostringstream msg;
    msg << "solve_neumann: incompatible flux, boundary integral " << integral;
    throw std::invalid_argument(msg.str());
  }
  sys.singular = true;
  CgResult res = solve_cg(sys, tol, max_iters);
  double mean = std::accumulate(res.x.begin(), res.x.end(), 0.0) / sys.n;
  for (double& v : res.x) v -= mean;
  return res;
}

// ---------------------------------------------------------------------------
// Solution container and post-processing
// ---------------------------------------------------------------------------

struct BoundaryCondition {
  enum class Kind { dirichlet, neumann } kind = Kind::dirichlet;
  std::string description;
};

struct FemSolution {
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> u;          // nodal values
  std::vector<Vec2> gradients;    // per-triangle constant gradient
  std::vector<double> conductivity;
  BoundaryCondition bc;
  int iterations = 0;
  double residual = 0;
};

inline std::vector<Vec2> gradient_field(const Mesh& mesh, const std::vector<double>& u) {
  std::vector<Vec2> grads(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& a = mesh.vertices[tri[0]];
    const Vec2& b = mesh.vertices[tri[1]];
    const Vec2& c = mesh.vertices[tri[2]];
    double area2 = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    Vec2 ga{(b.y - c.y), (c.x - b.x)}, gb{(c.y - a.y), (a.x - c.x)}, gc{(a.y - b.y), (b.x - a.x)};
    grads[t] = (1.0 / area2) * (u[tri[0]] * ga + u[tri[1]] * gb + u[tri[2]] * gc);
  }
  return grads;
}

inline FemSolution solve_dirichlet_problem(std::shared_ptr<const Mesh> mesh, double eta,
                                           const std::function<double(Vec2)>& trace,
                                           double tol = 1e-10, int max_iters = 50000,
                                           int n_threads = 1) {
  SparseSystem sys = assemble_stiffness(*mesh, eta, n_threads);
  apply_dirichlet(sys, *mesh, trace);
  CgResult res = solve_cg(sys, tol, max_iters);
  FemSolution sol;
  sol.mesh = mesh;
  sol.u = std::move(res.x);
  sol.gradients = gradient_field(*mesh, sol.u);
  sol.conductivity = conductivity_layout(*mesh, eta);
  sol.bc = {BoundaryCondition::Kind::dirichlet, "dirichlet"};
  sol.iterations = res.iterations;
  sol.residual = res.residual;
  return sol;
}

inline FemSolution solve_neumann_problem(std::shared_ptr<const Mesh> mesh, double eta,
                                         const std::function<double(Vec2)>& flux,
                                         double tol = 1e-10, int max_iters = 50000,
                                         int n_threads = 1) {
  SparseSystem sys = assemble_stiffness(*mesh, eta, n_threads);
  CgResult res = solve_neumann(sys, *mesh, flux, tol, max_iters);
  FemSolution sol;
  sol.mesh = mesh;
  sol.u = std::move(res.x);
  sol.gradients = gradient_field(*mesh, sol.u);
  sol.conductivity = conductivity_layout(*mesh, eta);
  sol.bc = {BoundaryCondition::Kind::neumann, "neumann"};
  sol.iterations = res.iterations;
  sol.residual = res.residual;
  return sol;
}

struct Window {
  Vec2 lo, hi;
  bool contains(const Vec2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
};

inline double max_gradient(const FemSolution& sol) {
  double m = -1.0;
  for (const Vec2& g : sol.gradients) m = std::max(m, g.norm());
  if (m < 0) throw std::runtime_error("max_gradient: empty gradient field");
  return m;
}

inline double max_gradient(const FemSolution& sol, Region region) {
  double m = -1.0;
  const Mesh& mesh = *sol.mesh;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    if (mesh.region_tags[t] == region) m = std::max(m, sol.gradients[t].norm());
  if (m < 0) throw std::runtime_error("max_gradient: empty region");
  return m;
}

inline double max_gradient(const FemSolution& sol, const Window& win) {
  double m = -1.0;
  const Mesh& mesh = *sol.mesh;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    if (win.contains(mesh.centroid(t))) m = std::max(m, sol.gradients[t].norm());
  if (m < 0) throw std::runtime_error("max_gradient: empty window");
  return m;
}

// Area-weighted average of |grad u| over B_r(center). Triangle clipping is
// approximated by centroid-in-ball membership with full-area weights.
inline double local_gradient_average(const FemSolution& sol, Vec2 center, double r) {
  const Mesh& mesh = *sol.mesh;
  const double H = mesh.half_side;
  if (center.x - r < -H || center.x + r > H || center.y - r < -H || center.y + r > H)
    throw std::invalid_argument("local_gradient_average: ball exits the domain");
  double num = 0, den = 0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if ((mesh.centroid(t) - center).norm() > r) continue;
    double a = mesh.signed_area(t);
    num += a * sol.gradients[t].norm();
    den += a;
  }
  if (den == 0) throw std::runtime_error("local_gradient_average: no triangle centroid in ball");
  return num / den;
}

struct TraceSample {
  double arc = 0;
  double value = 0;
  Vec2 point;
};

// Discrete NtD trace along the requested boundary segment(s), ordered
// counterclockwise starting at the bottom edge.
inline std::vector<TraceSample> boundary_trace(const FemSolution& sol,
                                               const std::vector<BoundaryMarker>& segment) {
  if (sol.bc.kind != BoundaryCondition::Kind::neumann)
    throw std::invalid_argument("boundary_trace: solution must come from a Neumann solve");
  for (BoundaryMarker m : segment)
    if (m == BoundaryMarker::interior)
      throw std::invalid_argument("boundary_trace: unknown boundary marker");
  const Mesh& mesh = *sol.mesh;
  std::vector<TraceSample> out;
  double offset = 0;
  const BoundaryMarker ccw[4] = {BoundaryMarker::bottom, BoundaryMarker::right,
                                 BoundaryMarker::top, BoundaryMarker::left};
  for (BoundaryMarker m : ccw) {
    bool wanted = false;
    for (BoundaryMarker s : segment) wanted |= (s == m);
    if (!wanted) continue;
    std::vector<int> ids;
    for (int v = 0; v < mesh.n_vertices(); ++v)
      if (mesh.boundary_markers[v] == m) ids.push_back(v);
    auto dir_key = [&](int v) {
      const Vec2& p = mesh.vertices[v];
      switch (m) {
        case BoundaryMarker::bottom: return p.x;
        case BoundaryMarker::right: return p.y;
        case BoundaryMarker::top: return -p.x;
        default: return -p.y;
      }
    };
    std::sort(ids.begin(), ids.end(), [&](int a, int b) { return dir_key(a) < dir_key(b); });
    double prev_key = ids.empty() ? 0 : dir_key(ids.front());
    double arc = 0;
    for (int v : ids) {
      arc += dir_key(v) - prev_key;
      prev_key = dir_key(v);
      out.push_back({offset + arc, sol.u[v], mesh.vertices[v]});
    }
    offset += 2.0 * mesh.half_side;
  }
  return out;
}

inline double solution_energy(const FemSolution& sol) {
  const Mesh& mesh = *sol.mesh;
  double e = 0;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    e += sol.conductivity[t] * mesh.signed_area(t) * sol.gradients[t].dot(sol.gradients[t]);
  return e;
}

// ---------------------------------------------------------------------------
// Solution export: "nv nt" header, nv lines "x y u", nt lines "gx gy tag".
// ---------------------------------------------------------------------------

inline void write_solution(const FemSolution& sol, std::ostream& os) {
  const Mesh& mesh = *sol.mesh;
  char buf[160];
  os << mesh.n_vertices() << " " << mesh.n_triangles() << "\n";
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", mesh.vertices[v].x, mesh.vertices[v].y,
                  sol.u[v]);
    os << buf;
  }
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %d\n", sol.gradients[t].x, sol.gradients[t].y,
                  static_cast<int>(mesh.region_tags[t]));
    os << buf;
  }
}

inline void write_solution(const FemSolution& sol, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_solution: cannot open " + path);
  write_solution(sol, os);
}

struct SolutionData {
  std::vector<Vec2> points;
  std::vector<double> u;
  std::vector<Vec2> gradients;
  std::vector<Region> tags;
};

inline SolutionData read_solution(std::istream& is) {
  SolutionData data;
  int nv = 0, nt = 0;
  if (!(is >> nv >> nt)) throw std::runtime_error("read_solution: bad header");
  data.points.resize(nv);
  data.u.resize(nv);
  data.gradients.resize(nt);
  data.tags.resize(nt);
  for (int v = 0; v < nv; ++v)
    if (!(is >> data.points[v].x >> data.points[v].y >> data.u[v]))
      throw std::runtime_error("read_solution: bad vertex line");
  for (int t = 0; t < nt; ++t) {
    int tag;
    if (!(is >> data.gradients[t].x >> data.gradients[t].y >> tag))
      throw std::runtime_error("read_solution: bad gradient line");
    data.tags[t] = static_cast<Region>(tag);
  }
  return data;
}

inline SolutionData read_solution(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_solution: cannot open " + path);
  return read_solution(is);
}

}  // namespace calderon
