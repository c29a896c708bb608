// Adaptive Gauss-Legendre quadrature over intervals and curved strips.
//
// The integrator is templated on the real scalar type so that verification
// paths with severe cancellation (Fourier-type integrals whose value sits
// many orders of magnitude below the integrand scale) can run in extended
// precision. Gauss nodes are computed at runtime by Newton iteration on the
// Legendre recurrence, so node accuracy always matches the scalar type.

#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <quadmath.h>

namespace calderon {

// ---------------------------------------------------------------------------
// Extended-precision scalar (GCC __float128 behind value semantics)
// ---------------------------------------------------------------------------

struct f128 {
  __float128 v;
  f128() : v(0) {}
  f128(double d) : v(d) {}
  f128(int i) : v(i) {}
  explicit f128(__float128 q) : v(q) {}
  explicit operator double() const { return static_cast<double>(v); }

  f128 operator-() const { return f128(-v); }
  f128& operator+=(f128 o) { v += o.v; return *this; }
  f128& operator-=(f128 o) { v -= o.v; return *this; }
  f128& operator*=(f128 o) { v *= o.v; return *this; }
  f128& operator/=(f128 o) { v /= o.v; return *this; }

  friend f128 operator+(f128 a, f128 b) { return f128(a.v + b.v); }
  friend f128 operator-(f128 a, f128 b) { return f128(a.v - b.v); }
  friend f128 operator*(f128 a, f128 b) { return f128(a.v * b.v); }
  friend f128 operator/(f128 a, f128 b) { return f128(a.v / b.v); }
  friend bool operator<(f128 a, f128 b) { return a.v < b.v; }
  friend bool operator>(f128 a, f128 b) { return a.v > b.v; }
  friend bool operator<=(f128 a, f128 b) { return a.v <= b.v; }
  friend bool operator>=(f128 a, f128 b) { return a.v >= b.v; }
  friend bool operator==(f128 a, f128 b) { return a.v == b.v; }

  friend f128 exp(f128 a) { return f128(expq(a.v)); }
  friend f128 log(f128 a) { return f128(logq(a.v)); }
  friend f128 cos(f128 a) { return f128(cosq(a.v)); }
  friend f128 sin(f128 a) { return f128(sinq(a.v)); }
  friend f128 sqrt(f128 a) { return f128(sqrtq(a.v)); }
  friend f128 abs(f128 a) { return f128(fabsq(a.v)); }
};

template <class R>
struct real_traits {
  static R epsilon() { return std::numeric_limits<R>::epsilon(); }
};
template <>
struct real_traits<f128> {
  static f128 epsilon() { return f128(1.925929944387235853055977942584927e-34); }  // 2^-112
};

template <class R>
inline R rmax(R a, R b) { return a < b ? b : a; }

// ---------------------------------------------------------------------------
// Lightweight complex value (std::complex lacks math support for f128)
// ---------------------------------------------------------------------------

template <class R>
struct Cplx {
  R re{}, im{};
  Cplx() = default;
  Cplx(R r) : re(r), im(R(0)) {}
  Cplx(R r, R i) : re(r), im(i) {}

  Cplx& operator+=(const Cplx& o) { re += o.re; im += o.im; return *this; }
  Cplx& operator-=(const Cplx& o) { re -= o.re; im -= o.im; return *this; }

  friend Cplx operator+(Cplx a, const Cplx& b) { return a += b; }
  friend Cplx operator-(Cplx a, const Cplx& b) { return a -= b; }
  friend Cplx operator*(const Cplx& a, const Cplx& b) {
    return Cplx(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
  }
  friend Cplx operator*(R s, const Cplx& a) { return Cplx(s * a.re, s * a.im); }
  friend Cplx operator*(const Cplx& a, R s) { return s * a; }
};

// exp(a + ib) without std::exp(complex) so that f128 works too
template <class R>
inline Cplx<R> cexp(const Cplx<R>& z) {
  using std::exp; using std::cos; using std::sin;
  R m = exp(z.re);
  return Cplx<R>(m * cos(z.im), m * sin(z.im));
}

template <class R>
inline R vnorm(R x) { using std::abs; return abs(x); }
template <class R>
inline R vnorm(const Cplx<R>& z) {
  using std::abs;
  return abs(z.re) + abs(z.im);
}
template <class R>
inline double to_double(R x) { return static_cast<double>(x); }
template <class R>
inline double to_double(const Cplx<R>& z) { return static_cast<double>(z.re); }

// ---------------------------------------------------------------------------
// Gauss-Legendre rule on [-1,1], nodes by Newton on the Legendre recurrence
// ---------------------------------------------------------------------------

template <class R>
struct GlRule {
  std::vector<R> x, w;
};

template <class R>
GlRule<R> make_gl_rule(int n) {
  GlRule<R> rule;
  rule.x.assign(n, R(0));
  rule.w.assign(n, R(0));
  const R eps = real_traits<R>::epsilon();
  for (int i = 0; i < (n + 1) / 2; ++i) {
    R x = R(std::cos(M_PI * (i + 0.75) / (n + 0.5)));
    R dp = R(1);
    for (int it = 0; it < 200; ++it) {
      R p0 = R(1), p1 = x;
      for (int k = 2; k <= n; ++k) {
        R pk = (R(2 * k - 1) * x * p1 - R(k - 1) * p0) / R(k);
        p0 = p1;
        p1 = pk;
      }
      dp = R(n) * (x * p1 - p0) / (x * x - R(1));
      R step = p1 / dp;
      x -= step;
      using std::abs;
      if (abs(step) <= R(4) * eps * rmax(abs(x), R(1))) {
        // one clean-up pass so dp corresponds to the converged node
        R q0 = R(1), q1 = x;
        for (int k = 2; k <= n; ++k) {
          R qk = (R(2 * k - 1) * x * q1 - R(k - 1) * q0) / R(k);
          q0 = q1;
          q1 = qk;
        }
        dp = R(n) * (x * q1 - q0) / (x * x - R(1));
        break;
      }
    }
    R w = R(2) / ((R(1) - x * x) * dp * dp);
    rule.x[i] = -x;
    rule.w[i] = w;
    rule.x[n - 1 - i] = x;
    rule.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.x[n / 2] = R(0);
  return rule;
}

template <class R>
const GlRule<R>& gl_rule_16() {
  static const GlRule<R> rule = make_gl_rule<R>(16);
  return rule;
}

// ---------------------------------------------------------------------------
// Adaptive 1D integration (globally adaptive, worst-segment-first)
// ---------------------------------------------------------------------------

struct quad_error : std::runtime_error {
  double last_estimate;
  double previous_estimate;
  quad_error(const std::string& msg, double last, double prev)
      : std::runtime_error(msg), last_estimate(last), previous_estimate(prev) {}
};

struct QuadOptions {
  double rel_tol = 1e-10;
  int max_segments = 4096;
};

namespace detail {

template <class R, class V, class F>
void gl_apply(const F& f, R a, R b, V& integral, R& abs_integral) {
  const GlRule<R>& rule = gl_rule_16<R>();
  const R half = (b - a) / R(2);
  const R mid = (a + b) / R(2);
  integral = V{};
  abs_integral = R(0);
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    V fv = f(mid + half * rule.x[i]);
    integral += (half * rule.w[i]) * fv;
    abs_integral += half * rule.w[i] * vnorm(fv);
  }
}

template <class R, class V>
struct Segment {
  R a, b;
  V integral;      // two-panel value (better of the pair)
  R abs_integral;  // integral of |f|, for the roundoff floor
  R err;           // |one-panel - two-panel|
};

}  // namespace detail

// Integrates f over [a,b] to relative tolerance opts.rel_tol. V may be R or
// Cplx<R>. Refinement stops once the summed segment errors drop below the
// relative target or below the roundoff floor eps*int|f|; exceeding
// max_segments without meeting the target throws quad_error carrying the two
// most recent whole-interval estimates.
template <class R, class V, class F>
V integrate_1d(const F& f, R a, R b, const QuadOptions& opts = {}) {
  using Seg = detail::Segment<R, V>;
  if (!(a < b)) return V{};

  auto make_segment = [&](R lo, R hi) {
    Seg s;
    s.a = lo;
    s.b = hi;
    V whole;
    R abs_whole;
    detail::gl_apply(f, lo, hi, whole, abs_whole);
    V left, right;
    R abs_l, abs_r;
    R mid = (lo + hi) / R(2);
    detail::gl_apply(f, lo, mid, left, abs_l);
    detail::gl_apply(f, mid, hi, right, abs_r);
    s.integral = left + right;
    s.abs_integral = abs_l + abs_r;
    s.err = vnorm(whole - (left + right));
    return s;
  };

  std::vector<Seg> segs;
  segs.push_back(make_segment(a, b));

  const R eps = real_traits<R>::epsilon();
  const R rel = R(opts.rel_tol);
  double prev_total = to_double(segs[0].integral);

  for (;;) {
    V total{};
    R total_err(0), total_abs(0);
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].integral;
      total_err += segs[i].err;
      total_abs += segs[i].abs_integral;
      if (segs[worst].err < segs[i].err) worst = i;
    }
    R target = rmax(rel * vnorm(total), R(32) * eps * total_abs);
    if (total_err <= target) return total;
    if (static_cast<int>(segs.size()) >= opts.max_segments) {
      std::ostringstream msg;
      msg << "quadrature did not converge with " << segs.size()
          << " segments: estimate " << to_double(total) << ", previous "
          << prev_total;
      throw quad_error(msg.str(), to_double(total), prev_total);
    }
    prev_total = to_double(total);
    Seg old = segs[worst];
    R mid = (old.a + old.b) / R(2);
    segs[worst] = make_segment(old.a, mid);
    segs.push_back(make_segment(mid, old.b));
  }
}

// ---------------------------------------------------------------------------
// Curved strip { x0 < x < x1, ylo(x) < y < yhi(x) }
// ---------------------------------------------------------------------------

// Iterated form of a tensorized rule mapped to the strip: the outer adaptive
// pass in x integrates the inner adaptive integral across (ylo,yhi). The
// inner tolerance is exposed separately because cancellation in the outer
// variable may require inner results far more accurate than the overall
// relative target. Empty columns (ylo >= yhi) contribute zero.
template <class R, class V, class FXY, class YLo, class YHi>
V integrate_strip(const FXY& f, R x0, R x1, const YLo& ylo, const YHi& yhi,
                  const QuadOptions& outer_opts = {},
                  QuadOptions inner_opts = {.rel_tol = 0, .max_segments = 0}) {
  if (inner_opts.max_segments == 0) {
    inner_opts.rel_tol = outer_opts.rel_tol / 8;
    inner_opts.max_segments = outer_opts.max_segments;
  }
  auto column = [&](R x) -> V {
    R lo = ylo(x), hi = yhi(x);
    if (!(lo < hi)) return V{};
    auto g = [&](R y) { return f(x, y); };
    return integrate_1d<R, V>(g, lo, hi, inner_opts);
  };
  return integrate_1d<R, V>(column, x0, x1, outer_opts);
}

}  // namespace calderon
