#pragma once

// Closed-form kernels on G: heat kernel, U = Delta^{-1/2}, W = Delta^{-1},
// the first order Riesz kernels k_i = X_i U, second order kernels built on W,
// the smooth cutoff at the unit ball and the far-field splitting k^1 + k^2 + k^3.

#include <array>
#include <functional>

#include "rieszlab/group.hpp"
#include "rieszlab/term_algebra.hpp"

namespace rieszlab {

/// (8 pi^{3/2})^-1 delta^{1/2} (r / sinh r) t^{-3/2} exp(-r^2 / 4t).
double heat_kernel(double t, const GroupPoint& p);

/// (1 / 2 pi^2) delta^{1/2} / (r sinh r). Throws Singular at e.
double kernel_U(const GroupPoint& p);

/// (1 / 4 pi) delta^{1/2} / sinh r. Throws Singular at e.
double kernel_W(const GroupPoint& p);

/// k_i = X_i U.
double kernel_k(FieldIndex i, const GroupPoint& p);

/// X_i W in closed form.
double kernel_XW(FieldIndex i, const GroupPoint& p);

double kernel_X2k1(const GroupPoint& p);
double kernel_X0k0(const GroupPoint& p);

enum class IntegralOp { R, S, Sij };

/// R_i(x, y) = delta(y) k_i(y^-1 x), S_i(x, y) = -delta(x) k_i(x^-1 y),
/// S_ij(x, y) = delta(x) k_ji(x^-1 y). j is ignored for R and S.
double integral_kernel(IntegralOp op, FieldIndex i, FieldIndex j, const GroupPoint& x,
                       const GroupPoint& y);

struct KijOptions {
  double crossover = 3.0;
  double band_lo = 2.5;
  double band_hi = 3.5;
  double tol = 1e-3;
  int K = 12;
};

/// Nested central differences of W (near field).
double kernel_kij_near(FieldIndex i, FieldIndex j, const GroupPoint& p);
/// Series from the term engine (far field, r > 1).
double kernel_kij_far(FieldIndex i, FieldIndex j, const GroupPoint& p, int K = 12);
/// k_ij = X_i X_j W. Inside the overlap band both strategies run and a
/// mismatch above tol throws StrategyDisagreement.
double kernel_kij(FieldIndex i, FieldIndex j, const GroupPoint& p, const KijOptions& opts = {});

/// X_j delta(e): -2 for j = 0, else 0.
double jump_constant(FieldIndex j);

/// g_ij = -X_j^r X_i W + c_j X_i W.
double kernel_gij(FieldIndex i, FieldIndex j, const GroupPoint& p);

/// Smooth radial profile, 1 on [0, 1], 0 on [2, inf).
double cutoff(double s);

enum class KernelFamily { k, g, l };

/// Full kernel of R_ij (k), T_ij (g) or S_ij (l = delta * k_ji(x^-1)).
ScalarField second_order(KernelFamily family, FieldIndex i, FieldIndex j);
/// kernel * cutoff(r) and kernel * (1 - cutoff(r)).
ScalarField local_part(const ScalarField& kernel);
ScalarField global_part(const ScalarField& kernel);

using Triple = std::array<double, 3>;

/// delta(y) k(y^-1 x) with x = (x1, x2, e^s), y = (y1, y2, e^t). Throws
/// InvalidArgument unless |Y| < 2 A0.
double beta_local(const ScalarField& k, const Triple& X, const Triple& Y, double A0 = 1.0);

enum class PsiNormalization {
  // Leading behaviour of k^inf for a >= 1: e^{-r} ~ a^-1 (1 + |x / a|^2)^-1.
  Asymptotic,
  // The 1/4 and 1/8 prefactors, from cosh r ~ a (1 + |x / a|^2).
  Halved,
};

struct Psi {
  double alpha = 0.0;  // already divided by pi
  double beta = 0.0;
  Exponent m{0, 0, 0}, n{0, 0, 0};
  double c_alpha = 1.0, c_beta = 1.0;

  double operator()(double x1, double x2) const;
  /// a^-2 psi(x / a).
  double scaled(double a, double x1, double x2) const;
};

Psi psi_ij(FieldIndex i, FieldIndex j, PsiNormalization norm = PsiNormalization::Asymptotic);

/// k^inf = k_ij (1 - cutoff) split as k^1 (a <= 1), k^3 (r > 1, a > 1, from psi)
/// and k^2 = k^inf - k^1 - k^3.
struct Splitting {
  FieldIndex i{0}, j{0};
  Psi psi;

  double k_inf(const GroupPoint& p) const;
  double k1(const GroupPoint& p) const;
  double k2(const GroupPoint& p) const;
  double k3(const GroupPoint& p) const;
};

Splitting splitting(FieldIndex i, FieldIndex j, PsiNormalization norm = PsiNormalization::Asymptotic);

}  // namespace rieszlab
