#include "rieszlab/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace rieszlab {

namespace {

constexpr double kTwoPiSq = 2.0 * kPi * kPi;

RadialData nonsingular(const GroupPoint& p, const char* what) {
  const RadialData d = radial(p);
  if (d.r == 0.0) fail(ErrorKind::Singular, std::string(what) + " is singular at the identity");
  return d;
}

double coth(double r) { return 1.0 / std::tanh(r); }

// (sinh r + r cosh r) / (r^2 sinh^3 r)
double F(const RadialData& d) { return (1.0 + d.r * coth(d.r)) / (d.r * d.r * d.sinh_r * d.sinh_r); }

// (2 r^2 cosh^2 r + r^2 + 2 sinh^2 r + 3 r sinh r cosh r) / (r^3 sinh^5 r)
double G(const RadialData& d) {
  const double c = coth(d.r), r = d.r, s = d.sinh_r;
  return (2.0 * r * r * c * c + r * r / (s * s) + 2.0 + 3.0 * r * c) / (r * r * r * s * s * s);
}

double step_for(double r) { return std::clamp(r / 20.0, 1e-6, 1e-3); }

const SecondOrderShape& cached_shape(FieldIndex i, FieldIndex j) {
  static const std::array<SecondOrderShape, 9> shapes = [] {
    std::array<SecondOrderShape, 9> s;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) s[3 * a + b] = second_order_kernel(FieldIndex{a}, FieldIndex{b}, 12);
    return s;
  }();
  return shapes[3 * i.value() + j.value()];
}

}  // namespace

double heat_kernel(double t, const GroupPoint& p) {
  if (!(t > 0.0)) fail(ErrorKind::InvalidArgument, "heat kernel time must be positive");
  const RadialData d = radial(p);
  const double ratio = d.r < 1e-6 ? 1.0 - d.r * d.r / 6.0 : d.r / d.sinh_r;
  return 1.0 / (8.0 * std::pow(kPi, 1.5)) / p.a() * ratio * std::pow(t, -1.5) * std::exp(-d.r * d.r / (4.0 * t));
}

double kernel_U(const GroupPoint& p) {
  const RadialData d = nonsingular(p, "U");
  return 1.0 / kTwoPiSq / p.a() / (d.r * d.sinh_r);
}

double kernel_W(const GroupPoint& p) {
  const RadialData d = nonsingular(p, "W");
  return 1.0 / (4.0 * kPi) / p.a() / d.sinh_r;
}

double kernel_k(FieldIndex i, const GroupPoint& p) {
  const RadialData d = nonsingular(p, "k_i");
  const double a = p.a();
  if (i == 0) {
    const double x2 = p.x1() * p.x1() + p.x2() * p.x2();
    return -kernel_U(p) + 1.0 / kTwoPiSq * ((-1.0 + (1.0 + x2) / (a * a)) / 2.0) * F(d);
  }
  const double xi = i == 1 ? p.x1() : p.x2();
  return -1.0 / kTwoPiSq / a * xi * F(d);
}

double kernel_XW(FieldIndex i, const GroupPoint& p) {
  const RadialData d = nonsingular(p, "X_i W");
  const double a = p.a(), s = d.sinh_r, c = coth(d.r);
  if (i == 0) {
    const double x0r = (a - d.cosh_r) / s;
    return -1.0 / (4.0 * kPi) / a * (1.0 / s + c * x0r / s);
  }
  const double xi = i == 1 ? p.x1() : p.x2();
  return -1.0 / (4.0 * kPi) / a * xi * c / (s * s);
}

double kernel_X2k1(const GroupPoint& p) {
  const RadialData d = nonsingular(p, "X_2 k_1");
  return 1.0 / kTwoPiSq / p.a() * p.x1() * p.x2() * G(d);
}

double kernel_X0k0(const GroupPoint& p) {
  const RadialData d = nonsingular(p, "X_0 k_0");
  const double a = p.a();
  const double q = (1.0 + p.x1() * p.x1() + p.x2() * p.x2()) / (a * a);
  const double x0r = (a - d.cosh_r) / d.sinh_r;
  // [a - a^-1 - a^-1 |x|^2]^2 / 4 = (sinh r X_0 r)^2
  return 1.0 / kTwoPiSq *
         (1.0 / a / (d.r * d.sinh_r) + (1.0 - 3.0 * q) / 2.0 * F(d) + x0r * x0r / a * G(d) * d.sinh_r * d.sinh_r);
}

double integral_kernel(IntegralOp op, FieldIndex i, FieldIndex j, const GroupPoint& x, const GroupPoint& y) {
  if (x == y) fail(ErrorKind::Singular, "integral kernels are singular on the diagonal");
  switch (op) {
    case IntegralOp::R: return modular(y) * kernel_k(i, multiply(inverse(y), x));
    case IntegralOp::S: return -modular(x) * kernel_k(i, multiply(inverse(x), y));
    case IntegralOp::Sij: return modular(x) * kernel_kij(j, i, multiply(inverse(x), y));
  }
  return 0.0;
}

double kernel_kij_near(FieldIndex i, FieldIndex j, const GroupPoint& p) {
  const double r = nonsingular(p, "k_ij").r;
  const DerivativeOptions o{step_for(r), true};
  auto inner = [j, o](const GroupPoint& q) { return field_derivative(j, kernel_W, q, o); };
  return field_derivative(i, inner, p, o);
}

double kernel_kij_far(FieldIndex i, FieldIndex j, const GroupPoint& p, int K) {
  if (K == 12) return evaluate(cached_shape(i, j).kernel, p);
  return evaluate(second_order_kernel(i, j, K).kernel, p);
}

double kernel_kij(FieldIndex i, FieldIndex j, const GroupPoint& p, const KijOptions& opts) {
  const double r = nonsingular(p, "k_ij").r;
  const bool in_band = r >= opts.band_lo && r <= opts.band_hi;
  if (!in_band) {
    return r <= opts.crossover ? kernel_kij_near(i, j, p) : kernel_kij_far(i, j, p, opts.K);
  }
  const double near = kernel_kij_near(i, j, p);
  const double far = kernel_kij_far(i, j, p, opts.K);
  // Relative to the kernel's natural size W e^{-r}, so sign changes of k_ij
  // do not trigger false alarms.
  const double scale = std::max(std::abs(far), kernel_W(p) * std::exp(-r) * 1e-3);
  if (std::abs(near - far) > opts.tol * scale) {
    fail(ErrorKind::StrategyDisagreement, "near and far evaluations of k_ij disagree in the overlap band");
  }
  return r <= opts.crossover ? near : far;
}

double jump_constant(FieldIndex j) { return j == 0 ? -2.0 : 0.0; }

namespace {

// Value and one directional derivative.
struct Dual {
  double v, d;
};
Dual operator+(Dual x, Dual y) { return {x.v + y.v, x.d + y.d}; }
Dual operator-(Dual x, Dual y) { return {x.v - y.v, x.d - y.d}; }
Dual operator*(Dual x, Dual y) { return {x.v * y.v, x.d * y.v + x.v * y.d}; }
Dual operator/(Dual x, Dual y) { return {x.v / y.v, (x.d * y.v - x.v * y.d) / (y.v * y.v)}; }
Dual operator*(double c, Dual x) { return {c * x.v, c * x.d}; }
Dual operator+(double c, Dual x) { return {c + x.v, x.d}; }
Dual sqrt(Dual x) {
  const double s = std::sqrt(x.v);
  return {s, x.d / (2.0 * s)};
}

// X_i W written through t = cosh r - 1, so that it is algebraic in (x, a).
Dual xw_dual(FieldIndex i, Dual x1, Dual x2, Dual a) {
  const Dual am1 = a - Dual{1.0, 0.0};
  const Dual t = (am1 * am1 + x1 * x1 + x2 * x2) / (2.0 * a);
  const Dual s = sqrt(t * (2.0 + t));
  const Dual s3 = s * s * s;
  const Dual c{-1.0 / (4.0 * kPi), 0.0};
  if (i == 0) return c / a * (Dual{1.0, 0.0} / s + (1.0 + t) * (am1 - t) / s3);
  return c / a * (i == 1 ? x1 : x2) * (1.0 + t) / s3;
}

}  // namespace

double kernel_gij(FieldIndex i, FieldIndex j, const GroupPoint& p) {
  nonsingular(p, "g_ij");
  // X_j^r f(p) = d/dtau f(exp(tau X_j) p): translation in x_j, or dilation of (x, a).
  const double x1 = p.x1(), x2 = p.x2(), a = p.a();
  Dual d1{x1, 0.0}, d2{x2, 0.0}, da{a, 0.0};
  if (j == 0) {
    d1.d = x1;
    d2.d = x2;
    da.d = a;
  } else if (j == 1) {
    d1.d = 1.0;
  } else {
    d2.d = 1.0;
  }
  const Dual w = xw_dual(i, d1, d2, da);
  return -w.d + jump_constant(j) * w.v;
}

double cutoff(double s) {
  auto sigma = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  const double a = sigma(2.0 - s), b = sigma(s - 1.0);
  return a / (a + b);
}

ScalarField second_order(KernelFamily family, FieldIndex i, FieldIndex j) {
  switch (family) {
    case KernelFamily::k: return [i, j](const GroupPoint& p) { return kernel_kij(i, j, p); };
    case KernelFamily::g: return [i, j](const GroupPoint& p) { return kernel_gij(i, j, p); };
    case KernelFamily::l:
      return [i, j](const GroupPoint& p) { return modular(p) * kernel_kij(j, i, inverse(p)); };
  }
  return {};
}

ScalarField local_part(const ScalarField& kernel) {
  return [kernel](const GroupPoint& p) {
    const double c = cutoff(radius(p));
    return c == 0.0 ? 0.0 : c * kernel(p);
  };
}

ScalarField global_part(const ScalarField& kernel) {
  return [kernel](const GroupPoint& p) {
    const double c = 1.0 - cutoff(radius(p));
    return c == 0.0 ? 0.0 : c * kernel(p);
  };
}

double beta_local(const ScalarField& k, const Triple& X, const Triple& Y, double A0) {
  if (std::hypot(Y[0], Y[1], Y[2]) >= 2.0 * A0) fail(ErrorKind::InvalidArgument, "|Y| must be below 2 A0");
  if (X == Y) fail(ErrorKind::Singular, "beta is singular on the diagonal");
  const double et = std::exp(-Y[2]);
  return et * et * k(GroupPoint(et * (X[0] - Y[0]), et * (X[1] - Y[1]), std::exp(X[2] - Y[2])));
}

double Psi::operator()(double x1, double x2) const {
  const double q = 1.0 + x1 * x1 + x2 * x2;
  const double ma = std::pow(x1, m[1]) * std::pow(x2, m[2]);
  const double mb = std::pow(x1, n[1]) * std::pow(x2, n[2]);
  return c_alpha * alpha * ma / (q * q) + c_beta * beta * mb / (q * q * q);
}

double Psi::scaled(double a, double x1, double x2) const { return (*this)(x1 / a, x2 / a) / (a * a); }

Psi psi_ij(FieldIndex i, FieldIndex j, PsiNormalization norm) {
  const SecondOrderShape& s = cached_shape(i, j);
  Psi psi;
  psi.alpha = s.alpha.value() / kPi;
  psi.beta = s.beta.value() / kPi;
  psi.m = s.m;
  psi.n = s.n;
  if (norm == PsiNormalization::Halved) {
    psi.c_alpha = 0.25;
    psi.c_beta = 0.125;
  }
  return psi;
}

double Splitting::k_inf(const GroupPoint& p) const {
  const double c = 1.0 - cutoff(radius(p));
  return c == 0.0 ? 0.0 : c * kernel_kij(i, j, p);
}

double Splitting::k1(const GroupPoint& p) const { return p.a() <= 1.0 ? k_inf(p) : 0.0; }

double Splitting::k3(const GroupPoint& p) const {
  if (p.a() <= 1.0 || radius(p) <= 1.0) return 0.0;
  return psi.scaled(p.a(), p.x1(), p.x2());
}

double Splitting::k2(const GroupPoint& p) const {
  if (p.a() <= 1.0) return 0.0;
  return k_inf(p) - k3(p);
}

Splitting splitting(FieldIndex i, FieldIndex j, PsiNormalization norm) {
  return Splitting{i, j, psi_ij(i, j, norm)};
}

}  // namespace rieszlab
