#include "rieszlab/group.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rieszlab/quadrature.hpp"

namespace rieszlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::QuadratureFailure: return "quadrature-failure";
    case ErrorKind::BudgetExhausted: return "budget-exhausted";
    case ErrorKind::OrderExhausted: return "order-exhausted";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::StrategyDisagreement: return "strategy-disagreement";
    case ErrorKind::SearchFailure: return "search-failure";
    case ErrorKind::GridTooCoarse: return "grid-too-coarse";
  }
  return "unknown";
}

GroupPoint::GroupPoint(double x1, double x2, double a) : x1_(x1), x2_(x2), a_(a) {
  if (!std::isfinite(x1) || !std::isfinite(x2) || !std::isfinite(a)) {
    fail(ErrorKind::InvalidArgument, "group point coordinates must be finite");
  }
  if (!(a >= kMinHeight && a <= kMaxHeight)) {
    std::ostringstream os;
    os << "height a = " << a << " outside [1e-300, 1e300]";
    fail(ErrorKind::InvalidArgument, os.str());
  }
}

LogCoords to_log(const GroupPoint& p) { return {p.x1(), p.x2(), std::log(p.a())}; }

GroupPoint from_log(const LogCoords& q) { return {q.x1, q.x2, std::exp(q.u)}; }

GroupPoint multiply(const GroupPoint& p, const GroupPoint& q) {
  return {p.x1() + p.a() * q.x1(), p.x2() + p.a() * q.x2(), p.a() * q.a()};
}

GroupPoint inverse(const GroupPoint& p) { return {-p.x1() / p.a(), -p.x2() / p.a(), 1.0 / p.a()}; }

double arcosh1p(double t) {
  if (t < 0.0) {
    if (t > -1e-14) return 0.0;
    fail(ErrorKind::InvalidArgument, "arcosh argument below 1");
  }
  if (t < 1e-8) {
    // sqrt(2t) (1 - t/12 + 3 t^2 / 160)
    return std::sqrt(2.0 * t) * (1.0 - t / 12.0 + 3.0 * t * t / 160.0);
  }
  if (t > 1e8) {
    const double c = 1.0 + t;
    return std::log(c) + std::log1p(std::sqrt(1.0 - 1.0 / (c * c)));
  }
  return std::log1p(t + std::sqrt(t * (t + 2.0)));
}

namespace {

RadialData radial_from_t(double t) {
  RadialData d;
  d.cosh_minus_one = t;
  d.cosh_r = 1.0 + t;
  d.sinh_r = std::sqrt(t) * std::sqrt(t + 2.0);
  d.r = arcosh1p(t);
  return d;
}

}  // namespace

RadialData radial(const GroupPoint& p) {
  const double a = p.a();
  const double am1 = a - 1.0;
  const double sa = std::sqrt(a);
  const double y1 = p.x1() / sa;
  const double y2 = p.x2() / sa;
  const double t = 0.5 * (am1 * (am1 / a) + y1 * y1 + y2 * y2);
  // cosh r >= 1 by AM-GM; t is a sum of squares so this is structural.
  if (!(t >= 0.0)) fail(ErrorKind::NonFinite, "cosh r - 1 is not a nonnegative number");
  return radial_from_t(t);
}

double radius(const GroupPoint& p) { return radial(p).r; }

double distance(const GroupPoint& p, const GroupPoint& q) {
  // cosh d(p, q) - 1 = (|x_p - x_q|^2 + (a_p - a_q)^2) / (2 a_p a_q), i.e. the
  // defining formula evaluated at p^-1 q.
  const double s = std::sqrt(p.a()) * std::sqrt(q.a());
  const double d1 = (p.x1() - q.x1()) / s;
  const double d2 = (p.x2() - q.x2()) / s;
  const double da = (p.a() - q.a()) / s;
  const double t = 0.5 * (d1 * d1 + d2 * d2 + da * da);
  return arcosh1p(t);
}

double modular(const GroupPoint& p) { return 1.0 / (p.a() * p.a()); }

GroupPoint flow(FieldIndex i, double t) {
  switch (i.value()) {
    case 0: return {0.0, 0.0, std::exp(t)};
    case 1: return {t, 0.0, 1.0};
    default: return {0.0, t, 1.0};
  }
}

namespace {

double checked(double v) {
  if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "function is not finite at a stencil point");
  return v;
}

template <class Shift>
double central(const ScalarField& f, double h, Shift shift) {
  const double fp = checked(f(shift(h)));
  const double fm = checked(f(shift(-h)));
  return (fp - fm) / (2.0 * h);
}

template <class Shift>
double stencil(const ScalarField& f, const DerivativeOptions& opts, Shift shift) {
  if (!(opts.step >= 1e-7 && opts.step <= 1e-3)) {
    fail(ErrorKind::InvalidArgument, "finite-difference step must lie in [1e-7, 1e-3]");
  }
  const double d1 = central(f, opts.step, shift);
  if (!opts.richardson) return d1;
  const double d2 = central(f, 0.5 * opts.step, shift);
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

double field_derivative(FieldIndex i, const ScalarField& f, const GroupPoint& p,
                        DerivativeOptions opts) {
  return stencil(f, opts, [&](double h) { return multiply(p, flow(i, h)); });
}

double right_field_derivative(FieldIndex i, const ScalarField& f, const GroupPoint& p,
                              DerivativeOptions opts) {
  return stencil(f, opts, [&](double h) { return multiply(flow(i, h), p); });
}

double field_derivative_of_radius(FieldIndex i, const GroupPoint& p) {
  const RadialData d = radial(p);
  if (d.sinh_r == 0.0) fail(ErrorKind::Singular, "X_i r is undefined at the identity");
  switch (i.value()) {
    case 0: return (p.a() - d.cosh_r) / d.sinh_r;
    case 1: return p.x1() / d.sinh_r;
    default: return p.x2() / d.sinh_r;
  }
}

double ball_volume_closed_form(double r) { return kPi * (std::sinh(2.0 * r) - 2.0 * r); }

double ball_volume(double r, double tol) {
  if (!(r > 0.0)) fail(ErrorKind::InvalidArgument, "ball radius must be positive");
  // Disc of squared radius 2 e^u (cosh r - cosh u) at height u, |u| < r.
  const auto disc_area = [r](double u) {
    return kPi * 4.0 * std::exp(u) * std::sinh(0.5 * (r + u)) * std::sinh(0.5 * (r - u));
  };
  QuadOptions opts;
  opts.rel_tol = tol;
  opts.abs_tol = 0.0;
  const Estimate e = integrate1d(disc_area, -r, r, opts);
  if (!e.converged || e.error > tol * std::abs(e.value)) {
    fail(ErrorKind::QuadratureFailure, "ball volume error estimate exceeds tolerance");
  }
  return e.value;
}

double measure_local_equivalence_constant(int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  double c = 1.0;
  int taken = 0;
  while (taken < samples) {
    const LogCoords q{coord(rng), coord(rng), coord(rng)};
    const double e = std::sqrt(q.x1 * q.x1 + q.x2 * q.x2 + q.u * q.u);
    const double r = radius(from_log(q));
    if (r >= 1.0 || e == 0.0) continue;
    ++taken;
    c = std::max({c, r / e, e / r});
  }
  return c;
}

}  // namespace rieszlab
