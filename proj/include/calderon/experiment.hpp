// Experiment harness: the K-sweep with log-log regression for the
// Holder-growth exponent mu, solver convergence studies against the disk
// oracle, and the partial-boundary two-inclusion comparison.

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "calderon/analysis.hpp"
#include "calderon/fem.hpp"
#include "calderon/geometry.hpp"

namespace calderon {

// ---------------------------------------------------------------------------
// Log-log least squares
// ---------------------------------------------------------------------------

struct Regression {
  double mu = 0;  // slope of log(value) on log(K)
  double intercept = 0;
  double r_squared = 1;
};

inline Regression fit_loglog(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw std::invalid_argument("fit_loglog: need at least 2 pairs");
  const int n = static_cast<int>(pairs.size());
  double sx = 0, sy = 0;
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    if (!(pairs[i].first > 0) || !(pairs[i].second > 0))
      throw std::invalid_argument("fit_loglog: values must be positive");
    xs[i] = std::log(pairs[i].first);
    ys[i] = std::log(pairs[i].second);
    sx += xs[i];
    sy += ys[i];
  }
  double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  Regression r;
  r.mu = sxy / sxx;
  r.intercept = my - r.mu * mx;
  r.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return r;
}

// ---------------------------------------------------------------------------
// K-sweep experiment
// ---------------------------------------------------------------------------

inline std::vector<double> default_k_values() {
  std::vector<double> ks(10);
  for (int j = 0; j < 10; ++j) ks[j] = std::pow(1.5, j);
  return ks;
}

inline std::pair<int, int> mesh_counts_for_level(int level) {
  int scale = 1 << (level - 1);
  return {64 * scale, 48 * scale};
}

struct SweepSettings {
  InterfaceKind family = InterfaceKind::parabolic;
  std::vector<double> K_values = default_k_values();
  int mesh_level = 2;
  double eta = 2.0;
  double hyperbola_a = 1.0;
  double half_side = 5.0;
  double grading = 1.2;
  std::function<double(Vec2)> dirichlet = [](Vec2 p) { return 2.0 * p.x + 3.0 * p.y; };
  double cg_tol = 1e-10;
  int cg_max_iters = 200000;
  int threads = 1;
};

struct SweepRecord {
  std::string family;
  std::vector<double> K_values;
  std::vector<double> max_grads;
  std::vector<int> solve_iters;
  std::vector<double> runtime_ms;
  std::vector<int> n_vertices;
  std::vector<int> n_triangles;
  int mesh_level = 1;
  double eta = 2.0;
  Regression regression;

  std::vector<std::pair<double, double>> pairs() const {
    std::vector<std::pair<double, double>> p(K_values.size());
    for (std::size_t i = 0; i < K_values.size(); ++i) p[i] = {K_values[i], max_grads[i]};
    return p;
  }
};

inline InterfaceSpec sweep_spec(const SweepSettings& s, double K) {
  switch (s.family) {
    case InterfaceKind::parabolic: return InterfaceSpec::parabola(K, s.half_side);
    case InterfaceKind::hyperbolic: return InterfaceSpec::hyperbola(s.hyperbola_a, K, s.half_side);
    default:
      throw std::invalid_argument("run_sweep: family must be parabolic or hyperbolic");
  }
}

// Runs the sweep: per K, generate the conforming mesh, solve the Dirichlet
// problem, record max_Q |grad u|. Entries are independent jobs; results are
// assembled in K-order regardless of completion order.
inline SweepRecord run_sweep(const SweepSettings& settings) {
  if (settings.family != InterfaceKind::parabolic && settings.family != InterfaceKind::hyperbolic)
    throw std::invalid_argument("run_sweep: family must be parabolic or hyperbolic");
  for (std::size_t i = 1; i < settings.K_values.size(); ++i)
    if (!(settings.K_values[i] > settings.K_values[i - 1]))
      throw std::invalid_argument("run_sweep: K_values must be strictly increasing");

  auto [n_h, n_v] = mesh_counts_for_level(settings.mesh_level);
  SweepRecord rec;
  rec.family = kind_name(settings.family);
  rec.K_values = settings.K_values;
  rec.mesh_level = settings.mesh_level;
  rec.eta = settings.eta;
  const int n = static_cast<int>(settings.K_values.size());
  rec.max_grads.assign(n, 0.0);
  rec.solve_iters.assign(n, 0);
  rec.runtime_ms.assign(n, 0.0);
  rec.n_vertices.assign(n, 0);
  rec.n_triangles.assign(n, 0);

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      auto t0 = std::chrono::steady_clock::now();
      try {
        InterfaceSpec spec = sweep_spec(settings, settings.K_values[i]);
        auto mesh = std::make_shared<Mesh>(generate_mesh(spec, n_h, n_v, settings.grading));
        FemSolution sol = solve_dirichlet_problem(mesh, settings.eta, settings.dirichlet,
                                                  settings.cg_tol, settings.cg_max_iters);
        rec.max_grads[i] = max_gradient(sol);
        rec.solve_iters[i] = sol.iterations;
        rec.n_vertices[i] = mesh->n_vertices();
        rec.n_triangles[i] = mesh->n_triangles();
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        failure = "run_sweep: K = " + std::to_string(settings.K_values[i]) + ": " + e.what();
        return;
      }
      auto t1 = std::chrono::steady_clock::now();
      rec.runtime_ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
  };

  int n_workers = std::max(1, std::min(settings.threads, n));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error(failure);

  rec.regression = fit_loglog(rec.pairs());
  return rec;
}

inline bool nondecreasing_within(const std::vector<double>& values, double rel_tol) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[i - 1] * (1.0 - rel_tol)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Convergence study against the disk oracle
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  int level = 1;
  int n_vertices = 0;
  double l2_error = 0;      // relative nodal (mass-lumped) L2 error
  double energy_error = 0;  // absolute energy-norm error
  double l2_rate = 0;       // observed rate vs the previous level
  double energy_rate = 0;
  bool saturated = false;   // errors at the roundoff floor (unit contrast)
};

inline std::vector<ConvergenceRow> convergence_study(double radius, double eta, int levels,
                                                     double half_side = 5.0,
                                                     double cg_tol = 1e-12) {
  if (levels < 3) throw std::invalid_argument("convergence_study: levels >= 3 required");
  CircleOracle oracle = circle_exact_solution(radius, eta, {1.0, 0.0});
  InterfaceSpec spec = InterfaceSpec::circle(radius, {0, 0}, half_side);

  std::vector<ConvergenceRow> rows;
  auto mesh = std::make_shared<Mesh>(generate_mesh(spec, 16, 12, 1.3));
  for (int level = 1; level <= levels; ++level) {
    FemSolution sol = solve_dirichlet_problem(
        mesh, eta, [&](Vec2 p) { return oracle.u_exterior(p); }, cg_tol, 400000);

    double num = 0, den = 0, energy = 0;
    for (int t = 0; t < mesh->n_triangles(); ++t) {
      double w = mesh->signed_area(t) / 3.0;
      for (int v : mesh->triangles[t]) {
        double exact = oracle.u(mesh->vertices[v]);
        double d = sol.u[v] - exact;
        num += w * d * d;
        den += w * exact * exact;
      }
      Vec2 gd = sol.gradients[t] - oracle.grad(mesh->centroid(t));
      energy += sol.conductivity[t] * mesh->signed_area(t) * gd.dot(gd);
    }
    ConvergenceRow row;
    row.level = level;
    row.n_vertices = mesh->n_vertices();
    row.l2_error = std::sqrt(num / den);
    row.energy_error = std::sqrt(energy);
    row.saturated = row.l2_error < 1e-10;
    if (level > 1 && !row.saturated && !rows.back().saturated) {
      row.l2_rate = std::log2(rows.back().l2_error / row.l2_error);
      row.energy_rate = std::log2(rows.back().energy_error / row.energy_error);
    }
    rows.push_back(row);
    if (level < levels) mesh = std::make_shared<Mesh>(refine_mesh(*mesh, spec));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Two-inclusion partial-boundary comparison
// ---------------------------------------------------------------------------

struct CompareResult {
  double l2_diff = 0;
  double max_diff = 0;
  int trace_samples = 0;
};

namespace detail {

inline bool on_marker_side(const Vec2& p, BoundaryMarker m, double H) {
  const double tol = 1e-9 * H;
  switch (m) {
    case BoundaryMarker::bottom: return std::abs(p.y + H) <= tol;
    case BoundaryMarker::top: return std::abs(p.y - H) <= tol;
    case BoundaryMarker::left: return std::abs(p.x + H) <= tol;
    case BoundaryMarker::right: return std::abs(p.x - H) <= tol;
    default: return false;
  }
}

// Discrete mean-zero projection of the flux within the gamma0 support, using
// the same edge quadrature as the Neumann load so compatibility is exact.
inline std::function<double(Vec2)> project_flux(const Mesh& mesh,
                                                const std::function<double(Vec2)>& g,
                                                const std::vector<BoundaryMarker>& gamma0) {
  const double H = mesh.half_side;
  auto in_gamma0 = [gamma0, H](const Vec2& p) {
    for (BoundaryMarker m : gamma0)
      if (on_marker_side(p, m, H)) return true;
    return false;
  };
  auto edges = boundary_edges(mesh);
  const double tq[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  double integral = 0, length = 0;
  for (const auto& e : edges) {
    const Vec2& a = mesh.vertices[e[0]];
    const Vec2& b = mesh.vertices[e[1]];
    double len = (b - a).norm();
    for (double t : tq) {
      Vec2 p = a + t * (b - a);
      if (!in_gamma0(p)) continue;
      integral += 0.5 * len * g(p);
      length += 0.5 * len;
    }
  }
  double shift = length > 0 ? integral / length : 0.0;
  return [g, in_gamma0, shift](Vec2 p) { return in_gamma0(p) ? g(p) - shift : 0.0; };
}

inline std::vector<double> resample_trace(const std::vector<TraceSample>& trace, int m) {
  std::vector<double> out(m);
  double s0 = trace.front().arc, s1 = trace.back().arc;
  std::size_t k = 0;
  for (int i = 0; i < m; ++i) {
    double s = s0 + (s1 - s0) * i / (m - 1);
    while (k + 2 < trace.size() && trace[k + 1].arc < s) ++k;
    double t = (s - trace[k].arc) / (trace[k + 1].arc - trace[k].arc);
    out[i] = trace[k].value + t * (trace[k + 1].value - trace[k].value);
  }
  return out;
}

}  // namespace detail

// Solves the Neumann problem for both inclusions with the same gamma0 flux
// and returns norms of the NtD trace difference on gamma0, resampled onto a
// common arc grid.
inline CompareResult compare_inclusions(const InterfaceSpec& spec_D,
                                        const InterfaceSpec& spec_Dtilde, double eta,
                                        double eta_tilde, const std::function<double(Vec2)>& g,
                                        const std::vector<BoundaryMarker>& gamma0,
                                        int n_h = 16, int n_v = 12, double cg_tol = 1e-11) {
  for (const InterfaceSpec* s : {&spec_D, &spec_Dtilde}) {
    if (s->kind != InterfaceKind::cap && s->kind != InterfaceKind::circular)
      throw std::invalid_argument("compare_inclusions: closed inclusions required");
    double H = s->domain_half_side;
    double margin = 0.05 * H;
    if (s->kind == InterfaceKind::cap) {
      double xc = std::sqrt(s->cap_height / s->K);
      if (std::abs(s->center.x) + xc > H - margin ||
          s->center.y + s->cap_height > H - margin || s->center.y < -H + margin)
        throw std::invalid_argument("compare_inclusions: cap overlaps the boundary");
    } else if (s->radius + s->center.norm() > H - margin) {
      throw std::invalid_argument("compare_inclusions: disk overlaps the boundary");
    }
  }

  auto solve_one = [&](const InterfaceSpec& spec, double contrast) {
    auto mesh = std::make_shared<Mesh>(generate_mesh(spec, n_h, n_v, 1.3));
    auto flux = detail::project_flux(*mesh, g, gamma0);
    FemSolution sol = solve_neumann_problem(mesh, contrast, flux, cg_tol, 400000);
    return boundary_trace(sol, gamma0);
  };
  auto trace_a = solve_one(spec_D, eta);
  auto trace_b = solve_one(spec_Dtilde, eta_tilde);

  const int m = 1024;
  auto ua = detail::resample_trace(trace_a, m);
  auto ub = detail::resample_trace(trace_b, m);
  CompareResult res;
  res.trace_samples = m;
  double acc = 0;
  for (int i = 0; i < m; ++i) {
    double d = ua[i] - ub[i];
    acc += d * d;
    res.max_diff = std::max(res.max_diff, std::abs(d));
  }
  res.l2_diff = std::sqrt(acc / m);
  return res;
}

// ---------------------------------------------------------------------------
// CSV emission (schema: family,K,mesh_level,n_vertices,n_triangles,max_grad,
// solve_iters,runtime_ms; summary: family,mu,intercept,r_squared)
// ---------------------------------------------------------------------------

inline std::string sweep_csv(const SweepRecord& rec) {
  std::string out = "family,K,mesh_level,n_vertices,n_triangles,max_grad,solve_iters,runtime_ms\n";
  char buf[256];
  for (std::size_t i = 0; i < rec.K_values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%d,%d,%d,%.17g,%d,%.0f\n", rec.family.c_str(),
                  rec.K_values[i], rec.mesh_level, rec.n_vertices[i], rec.n_triangles[i],
                  rec.max_grads[i], rec.solve_iters[i], rec.runtime_ms[i]);
    out += buf;
  }
  return out;
}

inline std::string sweep_summary_csv_row(const SweepRecord& rec) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", rec.family.c_str(),
                rec.regression.mu, rec.regression.intercept, rec.regression.r_squared);
  return std::string(buf);
}

}  // namespace calderon
