// Analytic machinery around the high-curvature transmission window: CGO test
// functions exp(xi.x) with xi.xi = 0, the window integral identity
//   (eta-1) int_{D_{b,h}} grad u . grad u0 = int_{dS} (eta dnu u_i - dnu u_e) u0
//                                            - (u_i - u_e) dnu u0,
// its I0..I4 split, the K-decay bound terms, and the disk-inclusion analytic
// solution used as the harmonically extendable exterior field.

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "calderon/geometry.hpp"
#include "calderon/quadrature.hpp"

namespace calderon {

using Cd = Cplx<double>;

// Rigid motion carrying the apex to the local origin with the interior
// normal along +e2. Rotation given by its cosine/sine pair.
struct Frame {
  Vec2 origin{0, 0};
  double c = 1.0, s = 0.0;
  Vec2 to_local(const Vec2& p) const {
    Vec2 d = p - origin;
    return {c * d.x + s * d.y, -s * d.x + c * d.y};
  }
  Vec2 to_global(const Vec2& local) const {
    return {origin.x + c * local.x - s * local.y, origin.y + s * local.x + c * local.y};
  }
  Vec2 rotate_to_local(const Vec2& v) const { return {c * v.x + s * v.y, -s * v.x + c * v.y}; }
};

// ---------------------------------------------------------------------------
// CGO solutions u0 = exp(xi . x), xi = i tau v_hat - tau e2
// ---------------------------------------------------------------------------

struct CgoParams {
  double tau = 1.0;
  Vec2 v_hat{1, 0};  // tangential unit vector, local frame
  Cd xi1, xi2;       // complex frequency vector components
  Frame frame;
};

// v_hat is the normalized tangential projection of grad u_i at the apex; the
// fallback e1 covers the gradient parallel to the normal. A vanishing
// gradient leaves the direction undefined and is rejected.
inline CgoParams make_cgo(const Vec2& grad_at_p, double tau, const Frame& frame = {}) {
  if (!(tau > 0)) throw std::invalid_argument("make_cgo: tau must be positive");
  double gnorm = grad_at_p.norm();
  if (gnorm == 0.0)
    throw std::invalid_argument("make_cgo: zero gradient, tangential direction undefined");
  Vec2 g = frame.rotate_to_local(grad_at_p);
  CgoParams p;
  p.tau = tau;
  p.frame = frame;
  double tangential = g.x;  // g - (g.e2) e2 in the local frame
  if (std::abs(tangential) < 1e-12 * gnorm)
    p.v_hat = {1.0, 0.0};
  else
    p.v_hat = {tangential > 0 ? 1.0 : -1.0, 0.0};
  p.xi1 = Cd(0.0, tau * p.v_hat.x);
  p.xi2 = Cd(-tau, tau * p.v_hat.y);
  return p;
}

inline Cd xi_dot_xi(const CgoParams& p) { return p.xi1 * p.xi1 + p.xi2 * p.xi2; }

inline Cd xi_dot(const CgoParams& p, const Vec2& local) {
  return local.x * p.xi1 + local.y * p.xi2;
}

// exp(xi . x) in the local frame; the exponent guard rejects arguments whose
// real part would overflow.
inline Cd eval_cgo(const CgoParams& p, const Vec2& x_global) {
  Cd e = xi_dot(p, p.frame.to_local(x_global));
  if (e.re > 700.0) throw std::overflow_error("eval_cgo: exponent exceeds overflow guard");
  return cexp(e);
}

// ---------------------------------------------------------------------------
// I0 closed form (n = 2): (1/tau) sqrt(pi/(tau K)) exp(-tau/(4K))
// ---------------------------------------------------------------------------

inline Cd i0_closed_form(const CgoParams& p, double K) {
  if (!(K > 0)) throw std::invalid_argument("i0_closed_form: K must be positive");
  double tau = p.tau;
  double log_mag = -std::log(tau) + 0.5 * (std::log(M_PI) - std::log(tau * K)) - tau / (4.0 * K);
  // exponentials via log-space so large tau/(4K) underflows gracefully
  return Cd(std::exp(log_mag), 0.0);
}

// ---------------------------------------------------------------------------
// Region quadrature
// ---------------------------------------------------------------------------

struct RegionSpec {
  enum class Kind { paraboloid_above, slab, profile_window } kind = Kind::slab;
  double K = 1.0;                       // paraboloid coefficient
  double h = 0.0;                       // window height
  double b = 0.0;                       // window half-width (profile_window)
  std::function<double(double)> w;      // local profile, w(0) = 0 (profile_window)
  double decay_rate = 0.0;              // required for the unbounded paraboloid
  static RegionSpec paraboloid(double K, double decay_rate) {
    RegionSpec r;
    r.kind = Kind::paraboloid_above;
    r.K = K;
    r.decay_rate = decay_rate;
    return r;
  }
  static RegionSpec slab_below(double K, double h) {
    RegionSpec r;
    r.kind = Kind::slab;
    r.K = K;
    r.h = h;
    return r;
  }
  static RegionSpec window(std::function<double(double)> w, double b, double h) {
    RegionSpec r;
    r.kind = Kind::profile_window;
    r.w = std::move(w);
    r.b = b;
    r.h = h;
    return r;
  }
};

// Tensorized adaptive quadrature mapped to the curved region. The unbounded
// paraboloid region is truncated where the exp(-decay_rate y) tail falls
// below the tolerance.
template <class F>
Cd region_quadrature(const F& integrand, const RegionSpec& region, double tol) {
  QuadOptions outer{tol, 4096};
  switch (region.kind) {
    case RegionSpec::Kind::paraboloid_above: {
      if (!(region.decay_rate > 0))
        throw std::invalid_argument("region_quadrature: paraboloid region needs a decay rate");
      double ymax = (60.0 + std::abs(std::log(tol))) / region.decay_rate + 1.0 / (4.0 * region.K);
      double xmax = std::sqrt(ymax / region.K);
      auto ylo = [&](double x) { return region.K * x * x; };
      auto yhi = [&](double) { return ymax; };
      return integrate_strip<double, Cd>(integrand, -xmax, xmax, ylo, yhi, outer);
    }
    case RegionSpec::Kind::slab: {
      double xmax = std::sqrt(region.h / region.K);
      auto ylo = [&](double x) { return region.K * x * x; };
      auto yhi = [&](double) { return region.h; };
      return integrate_strip<double, Cd>(integrand, -xmax, xmax, ylo, yhi, outer);
    }
    case RegionSpec::Kind::profile_window: {
      auto ylo = [&](double x) { return region.w(x); };
      auto yhi = [&](double) { return region.h; };
      return integrate_strip<double, Cd>(integrand, -region.b, region.b, ylo, yhi, outer);
    }
  }
  throw std::logic_error("unreachable");
}

// I0 by quadrature in extended precision. The value sits a factor
// exp(-tau/(4K)) below the integrand scale, so the oscillatory cancellation
// in x must be resolved far beyond double roundoff; quadruple precision keeps
// the check honest for tau/(4K) up to the underflow guard (~30).
inline Cd i0_quadrature(const CgoParams& p, double K, double tol = 1e-8) {
  using R = f128;
  R tau(p.tau), vk(K);
  R ymax = (R(60.0) + R(std::abs(std::log(tol)))) / tau + R(1.0) / (R(4.0) * vk);
  R xmax = sqrt(ymax / vk);
  double vx = p.v_hat.x;
  auto f = [&](R x, R y) {
    return cexp(Cplx<R>(R(0) - tau * y, tau * R(vx) * x));
  };
  QuadOptions outer{tol, 8192};
  QuadOptions inner{1e-26, 8192};
  Cplx<R> v = integrate_strip<R, Cplx<R>>(
      f, R(0) - xmax, xmax, [&](R x) { return vk * x * x; }, [&](R) { return ymax; }, outer,
      inner);
  return Cd(static_cast<double>(v.re), static_cast<double>(v.im));
}

// ---------------------------------------------------------------------------
// Disk-inclusion analytic transmission solution
// ---------------------------------------------------------------------------

// Background field g0.x plus the disk response; interior field is uniform.
// The exterior expression is harmonic everywhere except the disk center, so
// it doubles as the harmonic extension of u_e into any window avoiding the
// center (the extension hypothesis realized constructively).
struct CircleOracle {
  double radius = 1.0;
  double eta = 2.0;
  Vec2 g0{1, 0};
  Vec2 center{0, 0};

  double contrast_coeff() const { return (1.0 - eta) / (1.0 + eta); }

  double u_interior(const Vec2& x) const {
    Vec2 d = x - center;
    return 2.0 / (1.0 + eta) * g0.dot(d);
  }
  double u_exterior(const Vec2& x) const {
    Vec2 d = x - center;
    double r2 = d.dot(d);
    return g0.dot(d) + contrast_coeff() * radius * radius * g0.dot(d) / r2;
  }
  Vec2 grad_interior(const Vec2&) const { return 2.0 / (1.0 + eta) * g0; }
  Vec2 grad_exterior(const Vec2& x) const {
    Vec2 d = x - center;
    double r2 = d.dot(d);
    double ca2 = contrast_coeff() * radius * radius;
    // grad of g0.d/|d|^2 = g0/|d|^2 - 2 (g0.d) d/|d|^4
    return g0 + (ca2 / r2) * g0 - (2.0 * ca2 * g0.dot(d) / (r2 * r2)) * d;
  }
  bool inside(const Vec2& x) const { return (x - center).norm() <= radius; }
  double u(const Vec2& x) const { return inside(x) ? u_interior(x) : u_exterior(x); }
  Vec2 grad(const Vec2& x) const { return inside(x) ? grad_interior(x) : grad_exterior(x); }

  Vec2 apex() const { return {center.x, center.y - radius}; }
  Frame apex_frame() const { return Frame{apex(), 1.0, 0.0}; }
  // apex-centred lower-boundary profile, clamped outside the disk width
  double profile(double x_local) const {
    if (std::abs(x_local) >= radius) return radius;
    return radius - std::sqrt(radius * radius - x_local * x_local);
  }
};

inline CircleOracle circle_exact_solution(double a, double eta, const Vec2& g0,
                                          const Vec2& center = {0, 0}) {
  if (!(a > 0)) throw std::invalid_argument("circle_exact_solution: radius must be positive");
  if (!(eta > 0)) throw std::invalid_argument("circle_exact_solution: eta must be positive");
  CircleOracle o;
  o.radius = a;
  o.eta = eta;
  o.g0 = g0;
  o.center = center;
  return o;
}

// ---------------------------------------------------------------------------
// Five-term split of the window identity applied to a CGO test function
// ---------------------------------------------------------------------------

struct ITermReport {
  Cd I0_closed, I0_quad, I1, I2, I3, I4;
  double tau = 0, K = 0, K_minus = 0, K_plus = 0, h = 0, b = 0;
  int n = 2;
  double identity_residual = 0;  // | grad.xi (I0-I1-I2) + I3 - I4/(eta-1) | / scale
};

namespace detail {

// 1D adaptive line integral of a complex integrand over [t0, t1]
template <class F>
Cd line_quadrature(const F& f, double t0, double t1, double tol) {
  QuadOptions opts{tol, 4096};
  return integrate_1d<double, Cd>(f, t0, t1, opts);
}

}  // namespace detail

// Boundary integral over dS = boundary of D_{b,h} minus the interface part:
// the top segment y = h and, when the profile stays below h at |x| = b, the
// two lateral segments x = +-b. Fields and normals in the local frame.
template <class Value, class Dnu>
Cd integrate_dS(const Value& value, const Dnu& dnu_value, double b, double h,
                const std::function<double(double)>& w, double tol) {
  // top extent: clamp to the profile crossing w(x) = h
  double x_top = b;
  if (w(b) >= h) {
    double lo = 0, hi = b;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (w(mid) < h ? lo : hi) = mid;
    }
    x_top = 0.5 * (lo + hi);
  }
  Cd total = detail::line_quadrature(
      [&](double x) { return dnu_value(Vec2{x, h}, Vec2{0, 1}, value); }, -x_top, x_top, tol);
  if (w(b) < h) {
    for (double side : {-1.0, 1.0}) {
      Vec2 nu{side, 0};
      total += detail::line_quadrature(
          [&](double y) { return dnu_value(Vec2{side * b, y}, nu, value); }, w(b), h, tol);
    }
  }
  return total;
}

// Computes the five terms of the identity split for the circle oracle at its
// apex window. The report echoes the window parameters and the pinching
// constants sampled over (0, b).
inline ITermReport compute_i_terms(const CircleOracle& oracle, const CgoParams& params,
                                   double b, double h, double tol = 1e-8) {
  if (!(h < oracle.radius))
    throw std::invalid_argument("compute_i_terms: window must exclude the disk center (h < a)");
  const double a = oracle.radius;
  const double K = 1.0 / (2.0 * a);  // effective curvature coefficient at the apex
  const Frame frame = oracle.apex_frame();
  const Vec2 p = oracle.apex();

  ITermReport rep;
  rep.tau = params.tau;
  rep.K = K;
  rep.h = h;
  rep.b = b;
  double kmin = 1e300, kmax = -1e300;
  for (int j = 1; j <= 2000; ++j) {
    double x = b * j / 2000.0;
    double r = oracle.profile(x) / (x * x);
    kmin = std::min(kmin, r);
    kmax = std::max(kmax, r);
  }
  rep.K_minus = kmin;
  rep.K_plus = kmax;

  auto w = [&](double x) { return oracle.profile(x); };
  auto cgo_local = [&](double x, double y) { return cexp(xi_dot(params, {x, y})); };

  rep.I0_closed = i0_closed_form(params, K);
  // beyond the underflow guard the quadrature route is cancellation-limited
  // even in quadruple precision; the report carries NaN there
  if (params.tau / (4.0 * K) <= 40.0)
    rep.I0_quad = i0_quadrature(params, K, tol);
  else
    rep.I0_quad = Cd(std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN());

  // I1: paraboloid above height h
  {
    double ymax = (60.0 + std::abs(std::log(tol))) / params.tau + h;
    double xmax = std::sqrt(ymax / K);
    auto ylo = [&](double x) { return std::max(h, K * x * x); };
    auto yhi = [&](double) { return ymax; };
    QuadOptions outer{tol, 4096};
    rep.I1 = integrate_strip<double, Cd>(cgo_local, -xmax, xmax, ylo, yhi, outer);
  }
  // I2: slab minus window
  rep.I2 = region_quadrature(cgo_local, RegionSpec::slab_below(K, h), tol) -
           region_quadrature(cgo_local, RegionSpec::window(w, b, h), tol);
  // I3: vanishes identically for the uniform interior field; integrated anyway
  {
    Vec2 gp = oracle.grad_interior(p);
    auto f = [&](double x, double y) {
      Vec2 gx = oracle.grad_interior(frame.to_global({x, y}));
      Cd coeff = (gx.x - gp.x) * params.xi1 + (gx.y - gp.y) * params.xi2;
      return coeff * cgo_local(x, y);
    };
    rep.I3 = region_quadrature(f, RegionSpec::window(w, b, h), tol);
  }
  // I4: transmission boundary integral over dS with the oracle fields
  {
    auto value = [&](const Vec2& local) { return cgo_local(local.x, local.y); };
    auto integrand = [&](const Vec2& local, const Vec2& nu, const auto& val) {
      Vec2 g = frame.to_global(local);
      double flux_jump = oracle.eta * oracle.grad_interior(g).dot(nu) -
                         oracle.grad_exterior(g).dot(nu);
      double value_jump = oracle.u_interior(g) - oracle.u_exterior(g);
      Cd u0 = val(local);
      Cd dnu_u0 = (nu.x * params.xi1 + nu.y * params.xi2) * u0;
      return flux_jump * u0 - value_jump * dnu_u0;
    };
    rep.I4 = integrate_dS(value, integrand, b, h, w, tol);
  }

  Vec2 gp_local = frame.rotate_to_local(oracle.grad_interior(p));
  Cd grad_xi = gp_local.x * params.xi1 + gp_local.y * params.xi2;
  Cd residual = grad_xi * (rep.I0_closed - rep.I1 - rep.I2) + rep.I3 -
                (1.0 / (oracle.eta - 1.0)) * rep.I4;
  // residual relative to the largest participating term; at large tau the
  // identity relates exponentially small combinations of far larger terms
  double scale = std::max({vnorm(grad_xi * rep.I0_closed), vnorm(grad_xi * rep.I1),
                           vnorm(grad_xi * rep.I2), vnorm(rep.I3),
                           vnorm((1.0 / (oracle.eta - 1.0)) * rep.I4), 1e-300});
  rep.identity_residual = vnorm(residual) / scale;
  return rep;
}

// ---------------------------------------------------------------------------
// Integral identity residual for a general harmonic test function
// ---------------------------------------------------------------------------

struct HarmonicTest {
  std::function<Cd(Vec2)> value;          // local frame
  std::function<std::array<Cd, 2>(Vec2)> gradient;
  bool stencil_checked = false;  // polynomials and CGOs are harmonic by construction
  std::string name;
};

inline HarmonicTest harmonic_constant() {
  HarmonicTest t;
  t.value = [](Vec2) { return Cd(1.0, 0.0); };
  t.gradient = [](Vec2) { return std::array<Cd, 2>{Cd(0, 0), Cd(0, 0)}; };
  t.stencil_checked = true;
  t.name = "1";
  return t;
}

inline HarmonicTest harmonic_coordinate() {
  HarmonicTest t;
  t.value = [](Vec2 p) { return Cd(p.x, 0.0); };
  t.gradient = [](Vec2) { return std::array<Cd, 2>{Cd(1, 0), Cd(0, 0)}; };
  t.stencil_checked = true;
  t.name = "x1";
  return t;
}

inline HarmonicTest harmonic_cgo(const CgoParams& params) {
  HarmonicTest t;
  t.value = [params](Vec2 p) { return cexp(xi_dot(params, p)); };
  t.gradient = [params](Vec2 p) {
    Cd u = cexp(xi_dot(params, p));
    return std::array<Cd, 2>{params.xi1 * u, params.xi2 * u};
  };
  t.stencil_checked = true;
  t.name = "cgo";
  return t;
}

// 5-point stencil harmonicity check used for caller-supplied test functions.
inline double stencil_laplacian_residual(const HarmonicTest& u0, const Vec2& at, double step) {
  Cd lap = u0.value({at.x + step, at.y}) + u0.value({at.x - step, at.y}) +
           u0.value({at.x, at.y + step}) + u0.value({at.x, at.y - step}) -
           4.0 * u0.value(at);
  return vnorm(lap) / (step * step);
}

struct IdentityResult {
  Cd lhs, rhs;
  double residual = 0;  // |lhs-rhs| relative to the boundary-flux scale
};

// Evaluates both sides of the window identity by quadrature; the residual is
// normalized by the integral of the absolute boundary integrand so the
// all-zero cases (u0 = 1) report against the physical flux scale.
inline IdentityResult identity_residual(const CircleOracle& oracle, const HarmonicTest& u0,
                                        double b, double h, double tol = 1e-8) {
  if (!(h < oracle.radius))
    throw std::invalid_argument("identity_residual: window must exclude the disk center");
  const Frame frame = oracle.apex_frame();
  auto w = [&](double x) { return oracle.profile(x); };

  if (!u0.stencil_checked) {
    for (double x : {-0.3 * b, 0.0, 0.4 * b}) {
      double res = stencil_laplacian_residual(u0, {x, 0.5 * h}, 1e-4 * h);
      double scale = vnorm(u0.value({x, 0.5 * h})) + 1e-300;
      if (res > 1e-2 * scale / (h * h))
        throw std::invalid_argument("identity_residual: test function fails the stencil check");
    }
  }

  IdentityResult out;
  {
    auto f = [&](double x, double y) {
      Vec2 gi = oracle.grad_interior(frame.to_global({x, y}));
      auto g0 = u0.gradient({x, y});
      return gi.x * g0[0] + gi.y * g0[1];
    };
    out.lhs = (oracle.eta - 1.0) *
              region_quadrature(f, RegionSpec::window(w, b, h), tol);
  }
  double abs_scale = 0;
  {
    auto value = [&](const Vec2& local) { return u0.value(local); };
    auto integrand = [&](const Vec2& local, const Vec2& nu, const auto& val) {
      Vec2 g = frame.to_global(local);
      double flux_jump = oracle.eta * oracle.grad_interior(g).dot(nu) -
                         oracle.grad_exterior(g).dot(nu);
      double value_jump = oracle.u_interior(g) - oracle.u_exterior(g);
      auto grad0 = u0.gradient(local);
      Cd dnu_u0 = nu.x * grad0[0] + nu.y * grad0[1];
      return flux_jump * val(local) - value_jump * dnu_u0;
    };
    out.rhs = integrate_dS(value, integrand, b, h, w, tol);

    auto abs_integrand = [&](const Vec2& local, const Vec2& nu, const auto& val) {
      Vec2 g = frame.to_global(local);
      double flux_jump = oracle.eta * oracle.grad_interior(g).dot(nu) -
                         oracle.grad_exterior(g).dot(nu);
      double value_jump = oracle.u_interior(g) - oracle.u_exterior(g);
      auto grad0 = u0.gradient(local);
      Cd dnu_u0 = nu.x * grad0[0] + nu.y * grad0[1];
      return Cd(std::abs(flux_jump) * vnorm(val(local)) +
                    std::abs(value_jump) * vnorm(dnu_u0),
                0.0);
    };
    abs_scale = integrate_dS(value, abs_integrand, b, h, w, tol).re;
  }
  double scale = std::max({vnorm(out.lhs), vnorm(out.rhs), abs_scale, 1e-300});
  out.residual = vnorm(out.lhs - out.rhs) / scale;
  return out;
}

// ---------------------------------------------------------------------------
// Decay bound terms (n = 2, tau = 4 K ln K^rho, rho = min(alpha,delta)/2)
// ---------------------------------------------------------------------------

struct DecayBoundResult {
  std::array<double, 4> terms{};
  double total = 0;
  double envelope = 0;        // (ln K)^{3/2} K^{mu - min(alpha,delta)/2}
  double rho = 0;
  bool condition_met = false;  // mu < min(1, delta)/2
};

struct HolderNorms {
  double interior = 1.0;
  double exterior = 1.0;
};

inline DecayBoundResult decay_bound(double K, double mu, double alpha, double delta,
                                    const HolderNorms& norms = {}) {
  if (!(K > 1.0)) throw std::invalid_argument("decay_bound: K must exceed 1 (ln K > 0)");
  if (!(alpha > 0) || alpha > 1.0) throw std::invalid_argument("decay_bound: alpha in (0,1]");
  if (!(delta > 0) || delta > 1.0) throw std::invalid_argument("decay_bound: delta in (0,1]");
  DecayBoundResult r;
  r.rho = std::min(alpha, delta) / 2.0;
  const double lnK = std::log(K);
  auto kpow = [&](double e) { return std::exp(e * lnK); };
  const double ni = norms.interior;
  const double mixed = 0.5 * (norms.interior + norms.exterior);
  r.terms[0] = ni * std::sqrt(lnK) * kpow(mu - 3.0 * r.rho);
  r.terms[1] = ni * kpow(mu - delta + r.rho);
  r.terms[2] = ni * std::pow(lnK, 1.5) * kpow(mu - alpha + r.rho);
  r.terms[3] = mixed * std::pow(lnK, 1.5) * kpow(mu - alpha - 3.0 * r.rho);
  r.total = r.terms[0] + r.terms[1] + r.terms[2] + r.terms[3];
  r.envelope = mixed * std::pow(lnK, 1.5) * kpow(mu - std::min(alpha, delta) / 2.0);
  r.condition_met = mu < std::min(1.0, delta) / 2.0;
  return r;
}

}  // namespace calderon
