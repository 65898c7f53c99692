#pragma once

// Deterministic adaptive integration. Everything on G is integrated in
// LogCoords (x1, x2, u = log a), where the right Haar measure is Lebesgue.

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rieszlab/errors.hpp"
#include "rieszlab/group.hpp"

namespace rieszlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  bool converged = true;

  Estimate& operator+=(const Estimate& o);
};

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 400;
};

/// Kahan-Babuska accumulator. Order of add() calls fixes the result.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class BudgetExhausted : public Error {
 public:
  BudgetExhausted(const std::string& what, Estimate partial)
      : Error(ErrorKind::BudgetExhausted, what), partial_(partial) {}
  const Estimate& partial() const { return partial_; }

 private:
  Estimate partial_;
};

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;
using Fn3 = std::function<double(double, double, double)>;

/// Adaptive Gauss-Kronrod (7/15) with global bisection of the worst panel.
/// Infinite endpoints are mapped by x = lo + t / (1 - t) (half line) or
/// x = t / (1 - t^2) (whole line). Never throws on budget; check converged.
Estimate integrate1d(const Fn1& f, double lo, double hi, const QuadOptions& opts = {});

/// Nested version for f(x, y) over x in [xlo, xhi], y in [ylo(x), yhi(x)].
Estimate integrate2d(const Fn2& f, double xlo, double xhi, const Fn1& ylo, const Fn1& yhi,
                     const QuadOptions& opts = {});

/// Axis-aligned box in LogCoords. Infinite u-bounds must be replaced by an
/// explicit truncation before integrating.
struct Box {
  double x1_lo, x1_hi;
  double x2_lo, x2_hi;
  double u_lo, u_hi;

  /// Lebesgue (= rho) volume.
  double volume() const;
  void validate() const;
};

/// Integrates f(x1, x2, u) over the box with respect to rho. Throws
/// BudgetExhausted (carrying the partial estimate) when the achieved error
/// exceeds the tolerance.
Estimate integrate(const Fn3& f, const Box& box, double tol);

/// Non-throwing variant.
Estimate integrate_box(const Fn3& f, const Box& box, const QuadOptions& opts);

/// Integral over {r_lo < r(x) < r_hi} (optionally also u in [u_lo, u_hi]) of
/// f(x1, x2, a) d rho, in the coordinates (u, r, theta). With
/// axisymmetric = true f is sampled at theta = 0 and multiplied by 2 pi.
struct ShellOptions {
  double r_lo = 0.0;
  double r_hi = 1.0;
  double u_lo = -kInf;
  double u_hi = kInf;
  bool axisymmetric = false;
  QuadOptions quad{};
};
Estimate integrate_shell(const std::function<double(const GroupPoint&)>& f, const ShellOptions& opts);

/// Cross-section of a region at fixed height u, in the (x1, x2) plane.
struct CrossSection {
  enum class Kind { Empty, Disc, Graph };
  Kind kind = Kind::Empty;
  // Disc: centre (c1, c2), radius.
  double c1 = 0.0, c2 = 0.0, radius = 0.0;
  // Graph: x1 in [x1_lo, x1_hi], x2 in [x2_lo(x1), x2_hi(x1)].
  double x1_lo = 0.0, x1_hi = 0.0;
  Fn1 x2_lo, x2_hi;
};

/// A region of G described by its u-extent and exact cross-sections, plus a
/// membership predicate that the cross-sections must agree with.
struct Region {
  std::string name;
  double u_lo = -kInf;
  double u_hi = kInf;
  std::function<CrossSection(double u)> section;
  std::function<bool(const GroupPoint&)> contains;
};

/// Integral of f over the cross-section of region at height u.
Estimate integrate_section(const Fn3& f, const Region& region, double u, const QuadOptions& opts);

/// Integral of f over region intersected with {u_lo < u < u_hi}.
Estimate integrate_region(const Fn3& f, const Region& region, double u_lo, double u_hi,
                          const QuadOptions& opts);

enum class GrowthModel { Log, LogLog, Bounded };
std::string to_string(GrowthModel m);

struct ScanPoint {
  double T = 0.0;
  double value = 0.0;
  double error = 0.0;
};

struct ModelFit {
  GrowthModel model = GrowthModel::Bounded;
  double intercept = 0.0;
  double slope = 0.0;
  double residual = 0.0;
};

/// Output of a divergence experiment: I(T_k) for increasing truncations plus
/// the fitted growth model. Bounded is chosen when I varies by less than 1 %
/// over the last decade of T; otherwise the better of log / loglog.
struct ScanReport {
  std::vector<ScanPoint> points;
  ModelFit best;
  ModelFit log_fit;
  ModelFit loglog_fit;
  double last_decade_variation = 0.0;

  bool monotone() const;
  std::string to_csv() const;
};

/// Truncated domain: integral of the weight between truncation levels.
using SlabIntegrator = std::function<Estimate(double T_lo, double T_hi)>;

/// Core scan: I(T_k) = sum of slabs (T_{k-1}, T_k], starting at T_start.
ScanReport scan_tail(const SlabIntegrator& slab, double T_start, std::span<const double> T_list);

/// Region truncated by a < T.
ScanReport scan_tail(const Fn3& weight, const Region& region, std::span<const double> T_list,
                     const QuadOptions& opts = {});

/// Least-squares fit of I = A + B g(T) for the log / loglog models.
ModelFit fit_model(GrowthModel m, std::span<const ScanPoint> pts);

/// Uniform 2D grid of samples; value(ix, iy) sits at origin + (ix dx, iy dy).
struct GridFunction {
  int nx = 0;
  int ny = 0;
  double dx = 1.0;
  double dy = 1.0;
  double x0 = 0.0;
  double y0 = 0.0;
  std::vector<double> values;

  double& at(int ix, int iy) { return values[static_cast<size_t>(iy) * nx + ix]; }
  double at(int ix, int iy) const { return values[static_cast<size_t>(iy) * nx + ix]; }
  double x(int ix) const { return x0 + ix * dx; }
  double y(int iy) const { return y0 + iy * dy; }
  double cell_area() const { return dx * dy; }
  double integral() const;
  double l2_norm() const;
};

GridFunction make_grid(int nx, int ny, double dx, double dy, double x0, double y0);

/// (psi_a * g)(x) = sum_y a^-2 psi((x - y)/a) g(y) dA, evaluated at the grid
/// nodes of g. The kernel is truncated at the radius where the |x|^-3 tail
/// carries less than tail_tol of its mass.
struct ConvolveOptions {
  double tail_tol = 1e-4;
  double decay_constant = 1.0;
};
GridFunction convolve2d(const Fn2& kernel, const GridFunction& g, double a,
                        const ConvolveOptions& opts = {});

/// Same, evaluated only at selected points.
double convolve2d_at(const Fn2& kernel, const GridFunction& g, double a, double x1, double x2,
                     const ConvolveOptions& opts = {});

/// RIESZLAB_THREADS when set, otherwise the hardware thread count.
int worker_count();

/// Evaluates f(i) for i in [0, n) on up to worker_count() threads and returns
/// the results in index order. Results do not depend on the thread count.
/// The first failing index's exception is rethrown.
std::vector<double> parallel_map(int n, const std::function<double(int)>& f);

}  // namespace rieszlab
