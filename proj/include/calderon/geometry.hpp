// Interface families, curvature admissibility checks, and interface-conforming
// triangulations of the square computational domain.
//
// Two mesh constructions are used:
//   * graph interfaces (parabolic, hyperbolic): sheared structured grid whose
//     middle row of nodes sits exactly on the curve x2 = w(x1), so the
//     interface is a grid polyline by construction;
//   * closed inclusions (circular, cap): radial rings around an interior star
//     center, with one ring exactly on the inclusion boundary and outer rings
//     blending to the square perimeter.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace calderon {

struct Vec2 {
  double x = 0, y = 0;
  Vec2() = default;
  Vec2(double xx, double yy) : x(xx), y(yy) {}
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};
inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

enum class InterfaceKind { parabolic, hyperbolic, circular, cap };

inline const char* kind_name(InterfaceKind k) {
  switch (k) {
    case InterfaceKind::parabolic: return "parabolic";
    case InterfaceKind::hyperbolic: return "hyperbolic";
    case InterfaceKind::circular: return "circular";
    case InterfaceKind::cap: return "cap";
  }
  return "?";
}

// Parametric description of one interface/inclusion. K is the curvature
// parameter swept in experiments; note that the apex Taylor coefficient of
// w is K for parabolas but K/2 for hyperbolas (and 1/(2a) for circles) --
// admissibility reports carry the effective coefficient separately.
struct InterfaceSpec {
  InterfaceKind kind = InterfaceKind::parabolic;
  double K = 1.0;               // curvature parameter (1/length)
  double A = 1.0;               // hyperbola slope (hyperbolic only)
  double radius = 1.0;          // disk radius (circular only)
  double cap_height = 2.0;      // cap closing height above apex (cap only)
  double domain_half_side = 5.0;
  Vec2 center{0, 0};            // apex location (circular: disk center)

  void validate() const {
    if (!(domain_half_side > 0)) throw std::invalid_argument("domain_half_side must be positive");
    switch (kind) {
      case InterfaceKind::parabolic:
        if (K < 0) throw std::invalid_argument("parabolic K must be >= 0");
        break;
      case InterfaceKind::hyperbolic:
        if (!(K > 0)) throw std::invalid_argument("hyperbolic K must be positive");
        if (!(A > 0)) throw std::invalid_argument("hyperbolic A must be positive");
        break;
      case InterfaceKind::circular:
        if (!(radius > 0) || !(radius < domain_half_side))
          throw std::invalid_argument("circular radius must satisfy 0 < a < domain_half_side");
        break;
      case InterfaceKind::cap:
        if (!(K > 0)) throw std::invalid_argument("cap K must be positive");
        if (!(cap_height > 0)) throw std::invalid_argument("cap_height must be positive");
        break;
    }
  }

  static InterfaceSpec parabola(double K, double half_side = 5.0) {
    InterfaceSpec s;
    s.kind = InterfaceKind::parabolic;
    s.K = K;
    s.domain_half_side = half_side;
    return s;
  }
  static InterfaceSpec hyperbola(double A, double K, double half_side = 5.0) {
    InterfaceSpec s;
    s.kind = InterfaceKind::hyperbolic;
    s.A = A;
    s.K = K;
    s.domain_half_side = half_side;
    return s;
  }
  static InterfaceSpec circle(double a, Vec2 center = {0, 0}, double half_side = 5.0) {
    InterfaceSpec s;
    s.kind = InterfaceKind::circular;
    s.radius = a;
    s.K = 1.0 / (2.0 * a);  // apex Taylor coefficient of the lower semicircle
    s.center = center;
    s.domain_half_side = half_side;
    return s;
  }
  static InterfaceSpec cap_inclusion(double K, double height, Vec2 apex, double half_side = 5.0) {
    InterfaceSpec s;
    s.kind = InterfaceKind::cap;
    s.K = K;
    s.cap_height = height;
    s.center = apex;
    s.domain_half_side = half_side;
    return s;
  }
};

// Lower-boundary curve value w(x1). Total on the reals: the circular profile
// is clamped to the apex ordinate outside the disk width.
inline double eval_interface(const InterfaceSpec& spec, double x1) {
  switch (spec.kind) {
    case InterfaceKind::parabolic:
      return spec.K * x1 * x1;
    case InterfaceKind::hyperbolic: {
      double c = spec.A / spec.K;
      return spec.A * std::sqrt(x1 * x1 + c * c);
    }
    case InterfaceKind::circular: {
      double dx = x1 - spec.center.x;
      double a = spec.radius;
      if (std::abs(dx) >= a) return spec.center.y;
      return spec.center.y - std::sqrt(a * a - dx * dx);
    }
    case InterfaceKind::cap: {
      double dx = x1 - spec.center.x;
      return spec.center.y + spec.K * dx * dx;
    }
  }
  return 0.0;
}

struct InterfaceDerivatives {
  double slope = 0;              // w'(x1)
  double second_derivative = 0;  // w''(x1)
  double apex_curvature = 0;     // |w''|/(1+w'^2)^{3/2} at the apex
};

inline InterfaceDerivatives interface_derivatives(const InterfaceSpec& spec, double x1) {
  InterfaceDerivatives d;
  switch (spec.kind) {
    case InterfaceKind::parabolic:
      d.slope = 2.0 * spec.K * x1;
      d.second_derivative = 2.0 * spec.K;
      d.apex_curvature = 2.0 * spec.K;
      break;
    case InterfaceKind::hyperbolic: {
      double c = spec.A / spec.K;
      double r = std::sqrt(x1 * x1 + c * c);
      d.slope = spec.A * x1 / r;
      d.second_derivative = spec.A * c * c / (r * r * r);
      d.apex_curvature = spec.K;  // w''(0) = A/(A/K)
      break;
    }
    case InterfaceKind::circular: {
      double dx = x1 - spec.center.x;
      double a = spec.radius;
      double s = a * a - dx * dx;
      if (s <= 0) s = std::numeric_limits<double>::min();
      double r = std::sqrt(s);
      d.slope = dx / r;
      d.second_derivative = a * a / (r * r * r);
      d.apex_curvature = 1.0 / a;
      break;
    }
    case InterfaceKind::cap:
      d.slope = 2.0 * spec.K * (x1 - spec.center.x);
      d.second_derivative = 2.0 * spec.K;
      d.apex_curvature = 2.0 * spec.K;
      break;
  }
  return d;
}

// Apex abscissa of the profile (the minimum of w).
inline double apex_abscissa(const InterfaceSpec& spec) {
  switch (spec.kind) {
    case InterfaceKind::parabolic:
    case InterfaceKind::hyperbolic:
      return 0.0;
    default:
      return spec.center.x;
  }
}

// ---------------------------------------------------------------------------
// Admissibility (pinching of the shifted profile between K- x^2 and K+ x^2)
// ---------------------------------------------------------------------------

struct AdmissibilityParams {
  double L = 0;        // smallest L with K+ - K- <= L K^(1-delta)
  double M = 1;
  double delta = 1;
  double K_minus = 0;
  double K_plus = 0;
  double b = 0;        // sampling window sqrt(M)/K (swept K)
  double h = 0;        // window height 1/K (swept K)
  double effective_coefficient = 0;  // apex Taylor coefficient w''(0)/2
  bool admissible = false;
  std::string note;
};

// Shifts the profile so the apex sits at the origin and samples w~(x)/x^2
// over 0 < |x| < b = sqrt(M)/K. K-, K+ are the sampled extrema; the pinching
// checks run against the family's effective Taylor coefficient, which differs
// from the swept K for hyperbolas (K/2) and circles (1/(2a)).
inline AdmissibilityParams check_admissibility(const InterfaceSpec& spec, double M,
                                               int n_samples, double delta = 1.0) {
  spec.validate();
  if (n_samples < 100) throw std::invalid_argument("check_admissibility: n_samples >= 100 required");
  if (!(M >= 1.0)) throw std::invalid_argument("check_admissibility: M >= 1 required");
  if (!(spec.K > 0)) throw std::invalid_argument("check_admissibility: K must be positive");

  AdmissibilityParams p;
  p.M = M;
  p.delta = delta;
  p.b = std::sqrt(M) / spec.K;
  p.h = 1.0 / spec.K;

  double limit = spec.domain_half_side;
  if (spec.kind == InterfaceKind::circular) limit = spec.radius;
  if (p.b > limit)
    throw std::runtime_error("check_admissibility: sampling window b exceeds the profile domain");

  const double x0 = apex_abscissa(spec);
  const double w0 = eval_interface(spec, x0);
  double kmin = std::numeric_limits<double>::infinity();
  double kmax = -kmin;
  for (int j = 1; j <= n_samples; ++j) {
    double dx = p.b * static_cast<double>(j) / n_samples;
    for (double s : {-dx, dx}) {
      double ratio = (eval_interface(spec, x0 + s) - w0) / (s * s);
      kmin = std::min(kmin, ratio);
      kmax = std::max(kmax, ratio);
    }
  }
  p.K_minus = kmin;
  p.K_plus = kmax;
  p.effective_coefficient = interface_derivatives(spec, x0).second_derivative / 2.0;

  const double keff = p.effective_coefficient;
  // 1e-9 slack plus the cancellation floor of (w(x)-w0)/x^2 at the smallest
  // sample, which dominates when the apex ordinate w0 is far from zero
  const double x_min = p.b / n_samples;
  const double cancel_floor =
      32.0 * std::numeric_limits<double>::epsilon() *
      (std::abs(w0) + std::abs(eval_interface(spec, x0 + x_min))) / (x_min * x_min);
  const double slack = std::max(1e-9 * std::max(1.0, keff), cancel_floor);
  bool positive = p.K_minus > 0;
  bool pinched = (keff >= p.K_minus - slack) && (keff <= p.K_plus + slack);
  bool ratio_ok = positive && (p.K_minus / keff >= 1.0 / M - slack) &&
                  (p.K_plus / keff <= M + slack);
  p.admissible = positive && pinched && ratio_ok;
  p.L = (p.K_plus - p.K_minus) / std::pow(keff, 1.0 - delta);

  std::ostringstream note;
  note << "effective coefficient " << keff << " (swept K " << spec.K << ")";
  if (!positive) note << "; K- <= 0";
  if (!pinched) note << "; effective coefficient outside [K-,K+]";
  if (positive && !ratio_ok) note << "; K+/-/K outside [1/M, M]";
  p.note = note.str();
  return p;
}

// ---------------------------------------------------------------------------
// Mesh
// ---------------------------------------------------------------------------

enum class Region : int { below_interface = 0, above_interface = 1 };
enum class BoundaryMarker : int { interior = 0, left = 1, right = 2, top = 3, bottom = 4 };

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Region> region_tags;
  std::vector<BoundaryMarker> boundary_markers;
  std::vector<std::array<int, 2>> interface_edges;
  double half_side = 5.0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  double signed_area(int t) const {
    const Vec2& a = vertices[triangles[t][0]];
    const Vec2& b = vertices[triangles[t][1]];
    const Vec2& c = vertices[triangles[t][2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  }
  Vec2 centroid(int t) const {
    const Vec2& a = vertices[triangles[t][0]];
    const Vec2& b = vertices[triangles[t][1]];
    const Vec2& c = vertices[triangles[t][2]];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
  }
  double total_area() const {
    double s = 0;
    for (int t = 0; t < n_triangles(); ++t) s += signed_area(t);
    return s;
  }
};

// Signed inclusion indicator: positive on the above_interface (inclusion)
// side. For graph families this is x2 - w(x1); for closed inclusions it is an
// inside test against the exact curve.
inline double inside_indicator(const InterfaceSpec& spec, const Vec2& p) {
  switch (spec.kind) {
    case InterfaceKind::parabolic:
    case InterfaceKind::hyperbolic:
      return p.y - eval_interface(spec, p.x);
    case InterfaceKind::circular:
      return spec.radius - (p - spec.center).norm();
    case InterfaceKind::cap: {
      double below_top = (spec.center.y + spec.cap_height) - p.y;
      double above_curve = p.y - eval_interface(spec, p.x);
      return std::min(below_top, above_curve);
    }
  }
  return 0;
}

namespace detail {

// Partition [0, span] into n intervals with first width ~ d_target growing
// geometrically, ratio capped at ratio_cap. Returns the n cumulative offsets
// (the last equals span exactly).
inline std::vector<double> graded_partition(double span, int n, double d_target,
                                            double ratio_cap) {
  std::vector<double> cum(n);
  if (n <= 0) return cum;
  double d = std::min(d_target, span / n);
  double g = 1.0;
  if (d * n < span * (1.0 - 1e-12) && ratio_cap > 1.0 + 1e-12) {
    // solve d (g^n - 1)/(g - 1) = span for g > 1 by bisection
    auto total = [&](double gg) {
      double s = 0, step = d;
      for (int i = 0; i < n; ++i) {
        s += step;
        step *= gg;
      }
      return s;
    };
    double lo = 1.0, hi = ratio_cap;
    if (total(hi) < span) {
      // ratio cap reached: keep the cap and stretch the first width
      g = ratio_cap;
      double geom = (std::pow(g, n) - 1.0) / (g - 1.0);
      d = span / geom;
    } else {
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (total(mid) < span ? lo : hi) = mid;
      }
      g = hi;
    }
  }
  double s = 0, step = d;
  for (int i = 0; i < n; ++i) {
    s += step;
    cum[i] = s;
    step *= g;
  }
  // remove accumulation drift so the far end is exact
  double scale = span / cum[n - 1];
  for (double& c : cum) c *= scale;
  cum[n - 1] = span;
  return cum;
}

inline BoundaryMarker classify_boundary(const Vec2& p, double H) {
  const double tol = 1e-12 * H;
  if (std::abs(p.y + H) <= tol) return BoundaryMarker::bottom;
  if (std::abs(p.y - H) <= tol) return BoundaryMarker::top;
  if (std::abs(p.x + H) <= tol) return BoundaryMarker::left;
  if (std::abs(p.x - H) <= tol) return BoundaryMarker::right;
  return BoundaryMarker::interior;
}

inline void push_triangle(Mesh& mesh, int a, int b, int c) {
  if (a == b || b == c || a == c) return;
  mesh.triangles.push_back({a, b, c});
}

// Sheared structured grid for graph interfaces. The abscissa ladder marches
// geometrically away from the apex (first step ~ min(1/(4K), side/(2 n_v)))
// under a shear cap that keeps the interface rise per cell comparable to the
// local near-interface row height; without the cap, cells hugging a steep
// interface fail the maximum-angle condition and their P1 gradients are
// unusable. Near-interface row heights grow linearly with the distance from
// the apex. Columns where w >= top collapse their above part onto the top
// edge; the exit abscissa where w crosses the top is placed exactly so
// conformity holds up to the crossing.
inline Mesh generate_graph_mesh(const InterfaceSpec& spec, int n_h, int n_v, double grading) {
  const double H = spec.domain_half_side;
  const double side = 2.0 * H;
  const double K = spec.K;

  // resolution scales; both halve when n_v doubles
  const double ref = 48.0 / n_v;
  const double dy0 =
      std::min(K > 0 ? ref / (4.0 * K) : side, side / (2.0 * n_v));
  const double q_row = 12.0 / n_v;           // near-interface row height ~ q_row |x|
  const double step_max = 2.0 * side / n_h;  // far-field abscissa cap

  // exit abscissa: w(x) = H
  double x_exit = -1.0;
  if (spec.kind == InterfaceKind::parabolic && K > 0 && H / K < H * H)
    x_exit = std::sqrt(H / K);
  if (spec.kind == InterfaceKind::hyperbolic) {
    double c = spec.A / spec.K;
    double q = (H / spec.A) * (H / spec.A) - c * c;
    if (q > 0 && std::sqrt(q) < H) x_exit = std::sqrt(q);
  }

  auto dy_first = [&](double x) {
    return std::max(dy0, std::min(q_row * std::abs(x), side / (2.0 * n_v)));
  };

  std::vector<double> xs{0.0};
  double geom = dy0;
  while (xs.back() < H - 1e-12 * H) {
    double x = xs.back();
    double cap_shear = 1e300;
    if (x_exit < 0 || x < x_exit) {
      double slope = std::abs(interface_derivatives(spec, x).slope);
      cap_shear = std::max(2.0 * dy_first(x) / std::max(slope, 0.25), dy0);
    }
    double dx = std::min({geom, step_max, cap_shear});
    xs.push_back(std::min(x + dx, H));
    geom = std::min(dx * grading, step_max);
  }
  if (xs.size() >= 2 && xs.back() - xs[xs.size() - 2] < 0.2 * dy0) {
    xs.erase(xs.end() - 2);  // merge a sliver column against the right edge
  }
  if (x_exit > 0 && x_exit < H) {
    // place the crossing exactly, replacing the nearest ladder point
    std::size_t nearest = 0;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i)
      if (std::abs(xs[i] - x_exit) < std::abs(xs[nearest] - x_exit)) nearest = i;
    if (nearest > 0 && nearest + 1 < xs.size())
      xs[nearest] = x_exit;
    else
      xs.insert(std::upper_bound(xs.begin(), xs.end(), x_exit), x_exit);
  }
  std::sort(xs.begin(), xs.end());

  std::vector<double> abscissae;
  for (auto it = xs.rbegin(); it != xs.rend(); ++it)
    if (*it > 0) abscissae.push_back(-*it);
  for (double x : xs) abscissae.push_back(x);

  const int n_cols = static_cast<int>(abscissae.size());
  const int rows = 2 * n_v + 1;

  Mesh mesh;
  mesh.half_side = H;
  std::vector<std::vector<int>> col_nodes(n_cols);
  std::vector<bool> on_curve(n_cols, false);

  for (int i = 0; i < n_cols; ++i) {
    double x = abscissae[i];
    double w = eval_interface(spec, x);
    double y_int = std::min(w, H);
    on_curve[i] = (w <= H + 1e-12 * H);
    double dy_target = dy_first(x);

    std::vector<int>& col = col_nodes[i];
    col.assign(rows, -1);

    // below part: interface node downwards to -H
    std::vector<double> below = graded_partition(y_int + H, n_v, dy_target, grading);
    // above part: interface node upwards to +H. Thin spans near the exit get
    // fewer real rows (never thinner than ~dy_target); the remaining row
    // indices merge into the top vertex.
    double span_above = H - y_int;
    int n_real = 0;
    std::vector<double> above;
    if (span_above > 1e-14 * H) {
      n_real = std::min(n_v, std::max(1, static_cast<int>(std::ceil(span_above / dy_target))));
      above = graded_partition(span_above, n_real, dy_target, grading);
    }

    auto add_vertex = [&](const Vec2& p) {
      mesh.vertices.push_back(p);
      return static_cast<int>(mesh.vertices.size()) - 1;
    };

    for (int j = 0; j < n_v; ++j) col[j] = add_vertex({x, y_int - below[n_v - 1 - j]});
    col[n_v] = add_vertex({x, y_int});
    for (int j = 1; j <= n_v; ++j) {
      if (j <= n_real)
        col[n_v + j] = add_vertex({x, y_int + above[j - 1]});
      else
        col[n_v + j] = col[n_v + n_real];  // merged at the top (or at the
                                           // interface node when collapsed)
    }
  }

  for (int i = 0; i + 1 < n_cols; ++i) {
    for (int j = 0; j + 1 < rows; ++j) {
      int a = col_nodes[i][j], b = col_nodes[i + 1][j];
      int c = col_nodes[i + 1][j + 1], d = col_nodes[i][j + 1];
      push_triangle(mesh, a, b, c);
      push_triangle(mesh, a, c, d);
    }
    if (on_curve[i] && on_curve[i + 1]) {
      int u = col_nodes[i][n_v], v = col_nodes[i + 1][n_v];
      if (u != v) mesh.interface_edges.push_back({u, v});
    }
  }

  mesh.boundary_markers.resize(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    mesh.boundary_markers[v] = classify_boundary(mesh.vertices[v], H);
  mesh.region_tags.resize(mesh.triangles.size());
  for (int t = 0; t < mesh.n_triangles(); ++t)
    mesh.region_tags[t] = inside_indicator(spec, mesh.centroid(t)) > 0
                              ? Region::above_interface
                              : Region::below_interface;
  return mesh;
}

// Star center for the radial construction (any interior point of the convex
// inclusion works; rays from it cross the boundary exactly once).
inline Vec2 star_center(const InterfaceSpec& spec) {
  if (spec.kind == InterfaceKind::circular) return spec.center;
  return {spec.center.x, spec.center.y + 0.5 * spec.cap_height};
}

// First crossing of the ray s + t*dir (t > 0) with the inclusion boundary.
inline Vec2 ray_inclusion_crossing(const InterfaceSpec& spec, const Vec2& s, Vec2 dir) {
  double n = dir.norm();
  dir = dir * (1.0 / n);
  if (spec.kind == InterfaceKind::circular) {
    // s is the disk center
    return s + spec.radius * dir;
  }
  // cap: parabola y = cy + K (x-cx)^2 closed by the segment y = cy + cap_h
  const double cx = spec.center.x, cy = spec.center.y;
  const double K = spec.K, hcap = spec.cap_height;
  const double xc = std::sqrt(hcap / K);
  double best = std::numeric_limits<double>::infinity();
  // parabola branch
  double qa = K * dir.x * dir.x;
  double qb = 2.0 * K * (s.x - cx) * dir.x - dir.y;
  double qc = K * (s.x - cx) * (s.x - cx) - (s.y - cy);
  if (std::abs(qa) < 1e-300) {
    if (std::abs(qb) > 0) {
      double t = -qc / qb;
      if (t > 0) best = std::min(best, t);
    }
  } else {
    double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0) {
      double sq = std::sqrt(disc);
      for (double t : {(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)})
        if (t > 1e-14) best = std::min(best, t);
    }
  }
  // closing segment
  if (dir.y > 1e-300) {
    double t = (cy + hcap - s.y) / dir.y;
    double x = s.x + t * dir.x;
    if (t > 1e-14 && std::abs(x - cx) <= xc * (1 + 1e-12)) best = std::min(best, t);
  }
  if (!std::isfinite(best))
    throw std::runtime_error("ray_inclusion_crossing: ray misses the cap boundary");
  return s + best * dir;
}

inline Mesh generate_radial_mesh(const InterfaceSpec& spec, int n_h, int n_v, double grading) {
  const double H = spec.domain_half_side;
  const Vec2 s = star_center(spec);

  // perimeter targets: n_h intervals per side, CCW from (-H,-H); cap corner
  // directions are inserted so the junctions are ring vertices.
  std::vector<Vec2> perimeter;
  auto side_points = [&](Vec2 from, Vec2 to) {
    for (int i = 0; i < n_h; ++i) {
      double t = static_cast<double>(i) / n_h;
      perimeter.push_back(from + t * (to - from));
    }
  };
  side_points({-H, -H}, {H, -H});
  side_points({H, -H}, {H, H});
  side_points({H, H}, {-H, H});
  side_points({-H, H}, {-H, -H});

  auto ray_to_perimeter = [&](Vec2 dir) {
    // scale the direction until it hits the square boundary
    double tx = dir.x > 0 ? (H - s.x) / dir.x : (dir.x < 0 ? (-H - s.x) / dir.x : 1e300);
    double ty = dir.y > 0 ? (H - s.y) / dir.y : (dir.y < 0 ? (-H - s.y) / dir.y : 1e300);
    double t = std::min(tx, ty);
    return s + t * dir;
  };
  if (spec.kind == InterfaceKind::cap) {
    double xc = std::sqrt(spec.cap_height / spec.K);
    for (double sx : {-xc, xc}) {
      Vec2 corner{spec.center.x + sx, spec.center.y + spec.cap_height};
      perimeter.push_back(ray_to_perimeter(corner - s));
    }
  }
  auto angle_of = [&](const Vec2& p) { return std::atan2(p.y - s.y, p.x - s.x); };
  std::sort(perimeter.begin(), perimeter.end(),
            [&](const Vec2& a, const Vec2& b) { return angle_of(a) < angle_of(b); });
  perimeter.erase(std::unique(perimeter.begin(), perimeter.end(),
                              [&](const Vec2& a, const Vec2& b) {
                                return std::abs(angle_of(a) - angle_of(b)) < 1e-12;
                              }),
                  perimeter.end());

  const int n_rays = static_cast<int>(perimeter.size());
  const int n_inner = std::max(2, n_v / 3);
  const int n_outer = std::max(2, n_v);

  Mesh mesh;
  mesh.half_side = H;
  mesh.vertices.push_back(s);
  // rings[j][k]: j = 1..n_inner are inside (ring n_inner on the curve),
  // then n_outer rings blending to the perimeter. Outer rings share one
  // graded fraction table so consecutive rings stay nested along every ray.
  std::vector<Vec2> curve_pts(n_rays);
  double mean_span = 0, mean_inner = 0;
  for (int k = 0; k < n_rays; ++k) {
    curve_pts[k] = ray_inclusion_crossing(spec, s, perimeter[k] - s);
    mean_span += (perimeter[k] - curve_pts[k]).norm();
    mean_inner += (curve_pts[k] - s).norm();
  }
  mean_span /= n_rays;
  mean_inner /= n_rays;
  std::vector<double> frac =
      graded_partition(1.0, n_outer, mean_inner / n_inner / mean_span, grading);

  std::vector<std::vector<int>> rings(n_inner + n_outer, std::vector<int>(n_rays));
  for (int k = 0; k < n_rays; ++k) {
    const Vec2& q = curve_pts[k];
    for (int j = 1; j <= n_inner; ++j) {
      double t = static_cast<double>(j) / n_inner;
      mesh.vertices.push_back(s + t * (q - s));
      rings[j - 1][k] = static_cast<int>(mesh.vertices.size()) - 1;
    }
    for (int j = 0; j < n_outer; ++j) {
      Vec2 p = (j + 1 == n_outer) ? perimeter[k] : q + frac[j] * (perimeter[k] - q);
      mesh.vertices.push_back(p);
      rings[n_inner + j][k] = static_cast<int>(mesh.vertices.size()) - 1;
    }
  }

  for (int k = 0; k < n_rays; ++k) {
    int k2 = (k + 1) % n_rays;
    push_triangle(mesh, 0, rings[0][k], rings[0][k2]);
    for (int j = 0; j + 1 < n_inner + n_outer; ++j) {
      // ccw sector quad: inner ray k, outer ray k, outer ray k2, inner ray k2
      int a = rings[j][k], b = rings[j + 1][k];
      int c = rings[j + 1][k2], d = rings[j][k2];
      push_triangle(mesh, a, b, c);
      push_triangle(mesh, a, c, d);
    }
  }
  for (int k = 0; k < n_rays; ++k)
    mesh.interface_edges.push_back({rings[n_inner - 1][k], rings[n_inner - 1][(k + 1) % n_rays]});

  mesh.boundary_markers.resize(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    mesh.boundary_markers[v] = classify_boundary(mesh.vertices[v], H);
  mesh.region_tags.resize(mesh.triangles.size());
  for (int t = 0; t < mesh.n_triangles(); ++t)
    mesh.region_tags[t] = inside_indicator(spec, mesh.centroid(t)) > 0
                              ? Region::above_interface
                              : Region::below_interface;
  return mesh;
}

}  // namespace detail

inline Mesh generate_mesh(const InterfaceSpec& spec, int n_horizontal, int n_vertical,
                          double grading = 1.3) {
  spec.validate();
  if (n_horizontal < 2 || n_vertical < 2)
    throw std::invalid_argument("generate_mesh: n_horizontal, n_vertical >= 2 required");
  if (!(grading >= 1.0)) throw std::invalid_argument("generate_mesh: grading >= 1 required");
  switch (spec.kind) {
    case InterfaceKind::parabolic:
    case InterfaceKind::hyperbolic:
      return detail::generate_graph_mesh(spec, n_horizontal, n_vertical, grading);
    case InterfaceKind::circular:
    case InterfaceKind::cap:
      return detail::generate_radial_mesh(spec, n_horizontal, n_vertical, grading);
  }
  throw std::logic_error("unreachable");
}

// Snap a point that should lie on the interface polyline onto the exact
// curve. Graph families and the cap parabola snap vertically; circles snap
// radially; points on the cap closing segment snap onto the segment.
inline Vec2 snap_to_interface(const InterfaceSpec& spec, const Vec2& p, bool on_cap_segment = false) {
  switch (spec.kind) {
    case InterfaceKind::parabolic:
    case InterfaceKind::hyperbolic:
      return {p.x, eval_interface(spec, p.x)};
    case InterfaceKind::circular: {
      Vec2 d = p - spec.center;
      double n = d.norm();
      if (n == 0) return spec.center + Vec2{spec.radius, 0};
      return spec.center + (spec.radius / n) * d;
    }
    case InterfaceKind::cap: {
      if (on_cap_segment) {
        double xc = std::sqrt(spec.cap_height / spec.K);
        double x = std::clamp(p.x, spec.center.x - xc, spec.center.x + xc);
        return {x, spec.center.y + spec.cap_height};
      }
      return {p.x, eval_interface(spec, p.x)};
    }
  }
  return p;
}

// Uniform red refinement; midpoints of interface edges are re-snapped onto
// the exact curve, children inherit their parent's region tag.
inline Mesh refine_mesh(const Mesh& mesh, const InterfaceSpec& spec) {
  Mesh out;
  out.half_side = mesh.half_side;
  out.vertices = mesh.vertices;

  std::map<std::pair<int, int>, int> midpoint;
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };

  std::map<std::pair<int, int>, bool> is_interface;
  for (const auto& e : mesh.interface_edges) is_interface[key(e[0], e[1])] = true;

  const double seg_tol = 1e-9 * mesh.half_side;
  auto on_segment = [&](const Vec2& v) {
    return spec.kind == InterfaceKind::cap &&
           std::abs(v.y - (spec.center.y + spec.cap_height)) <= seg_tol;
  };

  auto mid = [&](int a, int b) {
    auto k = key(a, b);
    auto it = midpoint.find(k);
    if (it != midpoint.end()) return it->second;
    Vec2 m = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    if (is_interface.count(k)) {
      bool seg = on_segment(mesh.vertices[a]) && on_segment(mesh.vertices[b]);
      m = snap_to_interface(spec, m, seg);
    }
    out.vertices.push_back(m);
    int id = static_cast<int>(out.vertices.size()) - 1;
    midpoint[k] = id;
    return id;
  };

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    int a = mesh.triangles[t][0], b = mesh.triangles[t][1], c = mesh.triangles[t][2];
    int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    Region tag = mesh.region_tags[t];
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({ab, b, bc});
    out.triangles.push_back({ca, bc, c});
    out.triangles.push_back({ab, bc, ca});
    for (int i = 0; i < 4; ++i) out.region_tags.push_back(tag);
  }

  for (const auto& e : mesh.interface_edges) {
    int m = midpoint.at(key(e[0], e[1]));
    out.interface_edges.push_back({e[0], m});
    out.interface_edges.push_back({m, e[1]});
  }

  out.boundary_markers.resize(out.vertices.size());
  for (std::size_t v = 0; v < out.vertices.size(); ++v)
    out.boundary_markers[v] = detail::classify_boundary(out.vertices[v], out.half_side);
  return out;
}

struct MeshQuality {
  double min_angle_deg = 0;
  double max_aspect = 0;  // longest edge / shortest edge
};

inline MeshQuality mesh_quality(const Mesh& mesh) {
  MeshQuality q;
  q.min_angle_deg = 180.0;
  q.max_aspect = 1.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Vec2& a = mesh.vertices[mesh.triangles[t][0]];
    const Vec2& b = mesh.vertices[mesh.triangles[t][1]];
    const Vec2& c = mesh.vertices[mesh.triangles[t][2]];
    double la = (c - b).norm(), lb = (a - c).norm(), lc = (b - a).norm();
    double lmin = std::min({la, lb, lc}), lmax = std::max({la, lb, lc});
    q.max_aspect = std::max(q.max_aspect, lmax / lmin);
    auto angle = [](const Vec2& u, const Vec2& v) {
      double cosv = u.dot(v) / (u.norm() * v.norm());
      return std::acos(std::clamp(cosv, -1.0, 1.0)) * 180.0 / M_PI;
    };
    q.min_angle_deg = std::min({q.min_angle_deg, angle(b - a, c - a), angle(a - b, c - b),
                                angle(a - c, b - c)});
  }
  return q;
}

// ---------------------------------------------------------------------------
// ASCII mesh format: "nv nt" header, nv lines "x y marker", nt lines
// "i j k tag" (0-based, tag 0 = below, 1 = above). Interface edges are not
// part of the exchange format.
// ---------------------------------------------------------------------------

inline void write_mesh(const Mesh& mesh, std::ostream& os) {
  char buf[128];
  os << mesh.n_vertices() << " " << mesh.n_triangles() << "\n";
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %d\n", mesh.vertices[v].x, mesh.vertices[v].y,
                  static_cast<int>(mesh.boundary_markers[v]));
    os << buf;
  }
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    os << mesh.triangles[t][0] << " " << mesh.triangles[t][1] << " " << mesh.triangles[t][2]
       << " " << static_cast<int>(mesh.region_tags[t]) << "\n";
  }
}

inline void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_mesh: cannot open " + path);
  write_mesh(mesh, os);
}

inline Mesh read_mesh(std::istream& is) {
  Mesh mesh;
  int nv = 0, nt = 0;
  if (!(is >> nv >> nt)) throw std::runtime_error("read_mesh: bad header");
  mesh.vertices.resize(nv);
  mesh.boundary_markers.resize(nv);
  for (int v = 0; v < nv; ++v) {
    int marker;
    if (!(is >> mesh.vertices[v].x >> mesh.vertices[v].y >> marker))
      throw std::runtime_error("read_mesh: bad vertex line");
    mesh.boundary_markers[v] = static_cast<BoundaryMarker>(marker);
  }
  mesh.triangles.resize(nt);
  mesh.region_tags.resize(nt);
  for (int t = 0; t < nt; ++t) {
    int tag;
    if (!(is >> mesh.triangles[t][0] >> mesh.triangles[t][1] >> mesh.triangles[t][2] >> tag))
      throw std::runtime_error("read_mesh: bad triangle line");
    mesh.region_tags[t] = static_cast<Region>(tag);
  }
  return mesh;
}

inline Mesh read_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_mesh: cannot open " + path);
  return read_mesh(is);
}

}  // namespace calderon
