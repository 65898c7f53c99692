#include "rieszlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <queue>
#include <sstream>
#include <exception>
#include <thread>

#include <fftw3.h>

namespace rieszlab {

Estimate& Estimate::operator+=(const Estimate& o) {
  value += o.value;
  error += o.error;
  evaluations += o.evaluations;
  converged = converged && o.converged;
  return *this;
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

namespace {

// Kronrod abscissae and weights (15 points) with the embedded 7-point Gauss
// weights, from QUADPACK.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi;
  double value, aux, error;
  long index;  // creation order, breaks ties deterministically
};

struct PanelOrder {
  bool operator()(const Panel& a, const Panel& b) const {
    if (a.error != b.error) return a.error < b.error;
    return a.index > b.index;
  }
};

// f returns (integrand, auxiliary integrand); the auxiliary channel rides on
// the same nodes and is used for propagating inner error estimates.
template <class F>
Panel gk15(const F& f, double lo, double hi, long& evals) {
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const auto [fc, ac] = f(centre);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  double resabs = std::abs(resk);
  double auxk = ac * kWgk[7];
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const auto [f1, a1] = f(centre - dx);
    const auto [f2, a2] = f(centre + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    auxk += kWgk[j] * (a1 + a2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  evals += 15;
  const double mean = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));
  resasc *= std::abs(half);
  resabs *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = 2.220446049250313e-16;
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  if (!std::isfinite(resk)) err = std::numeric_limits<double>::infinity();
  return Panel{lo, hi, resk * half, auxk * half, err, 0};
}

template <class F>
Estimate adaptive(const F& f, double lo, double hi, const QuadOptions& opts, double* aux_out) {
  Estimate est;
  if (lo == hi) {
    if (aux_out) *aux_out = 0.0;
    return est;
  }
  long evals = 0;
  long next_index = 0;
  std::priority_queue<Panel, std::vector<Panel>, PanelOrder> heap;
  Panel first = gk15(f, lo, hi, evals);
  first.index = next_index++;
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  int subdivisions = 0;
  const auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
  while (total_err > target() && subdivisions < opts.max_subdivisions) {
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;  // interval below resolution
    heap.pop();
    Panel left = gk15(f, worst.lo, mid, evals);
    Panel right = gk15(f, mid, worst.hi, evals);
    left.index = next_index++;
    right.index = next_index++;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }
  // Final reduction in a fixed (left-to-right) panel order.
  std::vector<Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const Panel& a, const Panel& b) { return a.lo < b.lo; });
  CompensatedSum value, error, aux;
  for (const Panel& p : panels) {
    value.add(p.value);
    error.add(p.error);
    aux.add(p.aux);
  }
  est.value = value.value();
  est.error = error.value();
  est.evaluations = evals;
  est.converged = std::isfinite(est.value) && est.error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(est.value));
  if (aux_out) *aux_out = aux.value();
  return est;
}

// Wraps f with the variable change for infinite endpoints.
template <class F>
Estimate dispatch(const F& f, double lo, double hi, const QuadOptions& opts, double* aux_out) {
  if (std::isnan(lo) || std::isnan(hi)) fail(ErrorKind::InvalidArgument, "integration bound is NaN");
  if (lo > hi) {
    Estimate e = dispatch(f, hi, lo, opts, aux_out);
    e.value = -e.value;
    if (aux_out) *aux_out = -*aux_out;
    return e;
  }
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (!lo_inf && !hi_inf) return adaptive(f, lo, hi, opts, aux_out);
  using Pair = std::pair<double, double>;
  if (lo_inf && hi_inf) {
    // x = t / (1 - t^2)
    auto g = [&](double t) -> Pair {
      const double d = 1.0 - t * t;
      const double x = t / d;
      const double jac = (1.0 + t * t) / (d * d);
      if (!std::isfinite(x) || !std::isfinite(jac)) return {0.0, 0.0};
      auto [v, a] = f(x);
      return {v * jac, a * jac};
    };
    return adaptive(g, -1.0, 1.0, opts, aux_out);
  }
  // Half line: x = base + sign * t / (1 - t)
  const double base = lo_inf ? hi : lo;
  const double sign = lo_inf ? -1.0 : 1.0;
  auto g = [&, base, sign](double t) -> Pair {
    const double d = 1.0 - t;
    const double x = base + sign * t / d;
    const double jac = 1.0 / (d * d);
    if (!std::isfinite(x) || !std::isfinite(jac)) return {0.0, 0.0};
    auto [v, a] = f(x);
    return {v * jac, a * jac};
  };
  return adaptive(g, 0.0, 1.0, opts, aux_out);
}

}  // namespace

Estimate integrate1d(const Fn1& f, double lo, double hi, const QuadOptions& opts) {
  auto g = [&](double x) { return std::pair<double, double>{f(x), 0.0}; };
  return dispatch(g, lo, hi, opts, nullptr);
}

namespace {

QuadOptions inner_options(const QuadOptions& outer, double width) {
  QuadOptions in = outer;
  const double w = std::isfinite(width) ? std::max(width, 1.0) : 10.0;
  in.abs_tol = 0.25 * outer.abs_tol / w;
  in.rel_tol = 0.25 * outer.rel_tol;
  return in;
}

}  // namespace

Estimate integrate2d(const Fn2& f, double xlo, double xhi, const Fn1& ylo, const Fn1& yhi,
                     const QuadOptions& opts) {
  const QuadOptions in = inner_options(opts, xhi - xlo);
  long evals = 0;
  bool ok = true;
  auto outer = [&](double x) {
    const double a = ylo(x);
    const double b = yhi(x);
    if (!(b > a)) return std::pair<double, double>{0.0, 0.0};
    const Estimate e = integrate1d([&](double y) { return f(x, y); }, a, b, in);
    evals += e.evaluations;
    ok = ok && e.converged;
    return std::pair<double, double>{e.value, e.error};
  };
  double aux = 0.0;
  Estimate est = dispatch(outer, xlo, xhi, opts, &aux);
  est.error += std::abs(aux);
  est.evaluations = evals;
  est.converged = est.converged && ok;
  return est;
}

double Box::volume() const { return (x1_hi - x1_lo) * (x2_hi - x2_lo) * (u_hi - u_lo); }

void Box::validate() const {
  if (!(x1_lo < x1_hi && x2_lo < x2_hi && u_lo < u_hi)) {
    fail(ErrorKind::InvalidArgument, "box bounds must satisfy lower < upper");
  }
  if (std::isinf(u_lo) || std::isinf(u_hi)) {
    fail(ErrorKind::InvalidArgument, "infinite u-extent needs an explicit truncation");
  }
}

Estimate integrate_box(const Fn3& f, const Box& box, const QuadOptions& opts) {
  box.validate();
  const QuadOptions in = inner_options(opts, box.u_hi - box.u_lo);
  long evals = 0;
  bool ok = true;
  auto outer = [&](double u) {
    const Estimate e = integrate2d([&](double x1, double x2) { return f(x1, x2, u); }, box.x1_lo, box.x1_hi,
                                   [&](double) { return box.x2_lo; }, [&](double) { return box.x2_hi; }, in);
    evals += e.evaluations;
    ok = ok && e.converged;
    return std::pair<double, double>{e.value, e.error};
  };
  double aux = 0.0;
  Estimate est = dispatch(outer, box.u_lo, box.u_hi, opts, &aux);
  est.error += std::abs(aux);
  est.evaluations = evals;
  est.converged = est.converged && ok;
  return est;
}

Estimate integrate(const Fn3& f, const Box& box, double tol) {
  QuadOptions opts;
  opts.abs_tol = tol;
  opts.rel_tol = 0.0;
  opts.max_subdivisions = 200;
  const Estimate e = integrate_box(f, box, opts);
  if (!e.converged || e.error > tol) {
    std::ostringstream os;
    os << "achieved error " << e.error << " exceeds tolerance " << tol;
    throw BudgetExhausted(os.str(), e);
  }
  return e;
}

Estimate integrate_shell(const std::function<double(const GroupPoint&)>& f, const ShellOptions& so) {
  if (!(so.r_hi > so.r_lo) || so.r_lo < 0.0) fail(ErrorKind::InvalidArgument, "shell needs 0 <= r_lo < r_hi");
  const double u_lo = std::max(so.u_lo, -so.r_hi);
  const double u_hi = std::min(so.u_hi, so.r_hi);
  Estimate total;
  if (!(u_hi > u_lo)) return total;
  const QuadOptions in = inner_options(so.quad, u_hi - u_lo);
  const QuadOptions inner2 = inner_options(in, so.r_hi - so.r_lo);
  long evals = 0;
  bool ok = true;
  // At height u the sphere of radius r is the circle of squared radius
  // 2 e^u (cosh r - cosh u); s ds = e^u sinh r dr.
  auto at_r = [&](double u, double r) -> std::pair<double, double> {
    const double eu = std::exp(u);
    const double s2 = 4.0 * eu * std::sinh(0.5 * (r + u)) * std::sinh(0.5 * (r - u));
    const double s = std::sqrt(std::max(s2, 0.0));
    const double jac = eu * std::sinh(r);
    if (so.axisymmetric) return {2.0 * kPi * f(GroupPoint(s, 0.0, eu)) * jac, 0.0};
    const Estimate e = integrate1d(
        [&](double th) { return f(GroupPoint(s * std::cos(th), s * std::sin(th), eu)); }, 0.0, 2.0 * kPi, inner2);
    evals += e.evaluations;
    ok = ok && e.converged;
    return {e.value * jac, e.error * jac};
  };
  auto outer = [&](double u) -> std::pair<double, double> {
    const double r0 = std::max(std::abs(u), so.r_lo);
    if (!(so.r_hi > r0)) return {0.0, 0.0};
    double aux = 0.0;
    const Estimate e = dispatch([&](double r) { return at_r(u, r); }, r0, so.r_hi, in, &aux);
    evals += e.evaluations;
    ok = ok && e.converged;
    return {e.value, e.error + std::abs(aux)};
  };
  double aux = 0.0;
  total = dispatch(outer, u_lo, u_hi, so.quad, &aux);
  total.error += std::abs(aux);
  total.evaluations += evals;
  total.converged = total.converged && ok;
  return total;
}

Estimate integrate_section(const Fn3& f, const Region& region, double u, const QuadOptions& opts) {
  const CrossSection cs = region.section(u);
  switch (cs.kind) {
    case CrossSection::Kind::Empty: return {};
    case CrossSection::Kind::Disc: {
      if (!(cs.radius > 0.0)) return {};
      return integrate2d(
          [&](double s, double th) { return s * f(cs.c1 + s * std::cos(th), cs.c2 + s * std::sin(th), u); }, 0.0,
          cs.radius, [](double) { return 0.0; }, [](double) { return 2.0 * kPi; }, opts);
    }
    case CrossSection::Kind::Graph: {
      if (!(cs.x1_hi > cs.x1_lo)) return {};
      return integrate2d([&](double x1, double x2) { return f(x1, x2, u); }, cs.x1_lo, cs.x1_hi, cs.x2_lo, cs.x2_hi,
                         opts);
    }
  }
  return {};
}

Estimate integrate_region(const Fn3& f, const Region& region, double u_lo, double u_hi, const QuadOptions& opts) {
  const double lo = std::max(u_lo, region.u_lo);
  const double hi = std::min(u_hi, region.u_hi);
  if (!(hi > lo)) return {};
  const QuadOptions in = inner_options(opts, hi - lo);
  long evals = 0;
  bool ok = true;
  auto outer = [&](double u) {
    const Estimate e = integrate_section(f, region, u, in);
    evals += e.evaluations;
    ok = ok && e.converged;
    return std::pair<double, double>{e.value, e.error};
  };
  double aux = 0.0;
  Estimate est = dispatch(outer, lo, hi, opts, &aux);
  est.error += std::abs(aux);
  est.evaluations += evals;
  est.converged = est.converged && ok;
  return est;
}

std::string to_string(GrowthModel m) {
  switch (m) {
    case GrowthModel::Log: return "log";
    case GrowthModel::LogLog: return "loglog";
    case GrowthModel::Bounded: return "bounded";
  }
  return "unknown";
}

bool ScanReport::monotone() const {
  for (size_t k = 1; k < points.size(); ++k) {
    if (points[k].value < points[k - 1].value) return false;
  }
  return true;
}

std::string ScanReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "T,I,model,params\n";
  for (const ScanPoint& p : points) {
    os << p.T << ',' << p.value << ',' << to_string(best.model) << ",\"A=" << best.intercept << ";B=" << best.slope
       << ";residual=" << best.residual << "\"\n";
  }
  return os.str();
}

ModelFit fit_model(GrowthModel m, std::span<const ScanPoint> pts) {
  ModelFit fit;
  fit.model = m;
  const auto g = [m](double T) {
    return m == GrowthModel::Log ? std::log(T) : std::log(std::log(T));
  };
  const double n = static_cast<double>(pts.size());
  if (pts.size() < 2 || m == GrowthModel::Bounded) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const ScanPoint& p : pts) {
    const double x = g(p.T);
    sx += x;
    sy += p.value;
    sxx += x * x;
    sxy += x * p.value;
  }
  const double det = n * sxx - sx * sx;
  fit.slope = det != 0.0 ? (n * sxy - sx * sy) / det : 0.0;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (const ScanPoint& p : pts) {
    const double d = p.value - (fit.intercept + fit.slope * g(p.T));
    ss += d * d;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

ScanReport scan_tail(const SlabIntegrator& slab, double T_start, std::span<const double> T_list) {
  if (T_list.empty()) fail(ErrorKind::InvalidArgument, "scan needs at least one truncation");
  for (size_t k = 0; k < T_list.size(); ++k) {
    const double prev = k == 0 ? T_start : T_list[k - 1];
    if (!(T_list[k] > prev) || !(T_list[k] > 1.0)) {
      fail(ErrorKind::InvalidArgument, "truncations must be strictly increasing and exceed 1 and the start");
    }
  }
  ScanReport rep;
  CompensatedSum acc;
  double err = 0.0;
  double prev = T_start;
  for (double T : T_list) {
    const Estimate e = slab(prev, T);
    if (!e.converged) {
      std::ostringstream os;
      os << "slab (" << prev << ", " << T << "] did not converge (error " << e.error << ")";
      throw BudgetExhausted(os.str(), e);
    }
    acc.add(e.value);
    err += e.error;
    rep.points.push_back({T, acc.value(), err});
    prev = T;
  }
  rep.log_fit = fit_model(GrowthModel::Log, rep.points);
  rep.loglog_fit = fit_model(GrowthModel::LogLog, rep.points);
  // Variation per decade between the last point and the latest one at least a
  // decade below it.
  const ScanPoint& last = rep.points.back();
  const ScanPoint* ref = &rep.points.front();
  for (const ScanPoint& p : rep.points) {
    if (p.T <= last.T / 10.0) ref = &p;
  }
  if (ref != &last && last.value != 0.0) {
    const double decades = std::max(1.0, std::log10(last.T / ref->T));
    rep.last_decade_variation = std::abs(last.value - ref->value) / std::abs(last.value) / decades;
  } else {
    rep.last_decade_variation = last.value == 0.0 ? 0.0 : kInf;
  }
  if (rep.last_decade_variation < 0.01) {
    rep.best.model = GrowthModel::Bounded;
    rep.best.intercept = last.value;
    rep.best.slope = 0.0;
    rep.best.residual = rep.last_decade_variation;
  } else {
    rep.best = rep.loglog_fit.residual < rep.log_fit.residual ? rep.loglog_fit : rep.log_fit;
  }
  return rep;
}

ScanReport scan_tail(const Fn3& weight, const Region& region, std::span<const double> T_list,
                     const QuadOptions& opts) {
  if (!std::isfinite(region.u_lo)) fail(ErrorKind::InvalidArgument, "region needs a finite lower height");
  const double T_start = std::exp(region.u_lo);
  return scan_tail(
      [&](double lo, double hi) { return integrate_region(weight, region, std::log(lo), std::log(hi), opts); },
      T_start, T_list);
}

double GridFunction::integral() const {
  CompensatedSum s;
  for (double v : values) s.add(v);
  return s.value() * cell_area();
}

double GridFunction::l2_norm() const {
  CompensatedSum s;
  for (double v : values) s.add(v * v);
  return std::sqrt(s.value() * cell_area());
}

GridFunction make_grid(int nx, int ny, double dx, double dy, double x0, double y0) {
  if (nx <= 0 || ny <= 0 || !(dx > 0.0) || !(dy > 0.0)) fail(ErrorKind::InvalidArgument, "bad grid shape");
  GridFunction g;
  g.nx = nx;
  g.ny = ny;
  g.dx = dx;
  g.dy = dy;
  g.x0 = x0;
  g.y0 = y0;
  g.values.assign(static_cast<size_t>(nx) * ny, 0.0);
  return g;
}

namespace {

void check_resolution(const GridFunction& g, double a) {
  if (!(a > 0.0)) fail(ErrorKind::InvalidArgument, "scale a must be positive");
  if (g.values.size() != static_cast<size_t>(g.nx) * g.ny) fail(ErrorKind::ShapeMismatch, "grid storage size");
  if (std::max(g.dx, g.dy) > a) {
    std::ostringstream os;
    os << "grid spacing " << std::max(g.dx, g.dy) << " does not resolve kernel scale " << a;
    fail(ErrorKind::GridTooCoarse, os.str());
  }
}

// Radius beyond which a kernel decaying like c |x|^-3 carries less than tol of
// its mass; the |x|^-3 tail mass outside R is 2 pi c / R.
double truncation_radius(double a, const ConvolveOptions& opts) {
  return a * 2.0 * kPi * opts.decay_constant / opts.tail_tol;
}

}  // namespace

GridFunction convolve2d(const Fn2& kernel, const GridFunction& g, double a, const ConvolveOptions& opts) {
  check_resolution(g, a);
  const double R = truncation_radius(a, opts);
  // Linear convolution through a zero-padded FFT of size (2nx) x (2ny).
  const int mx = 2 * g.nx;
  const int my = 2 * g.ny;
  const size_t n = static_cast<size_t>(mx) * my;
  const size_t nh = static_cast<size_t>(mx) * (my / 2 + 1);
  std::vector<double> gk(n, 0.0), kk(n, 0.0), out(n, 0.0);
  std::vector<fftw_complex> G(nh), K(nh);
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) gk[static_cast<size_t>(ix) * my + iy] = g.at(ix, iy);
  }
  const double inv_a2 = 1.0 / (a * a);
  for (int ix = 0; ix < mx; ++ix) {
    const int sx = ix < g.nx ? ix : ix - mx;
    for (int iy = 0; iy < my; ++iy) {
      const int sy = iy < g.ny ? iy : iy - my;
      const double u = sx * g.dx;
      const double v = sy * g.dy;
      if (std::hypot(u, v) > R) continue;
      kk[static_cast<size_t>(ix) * my + iy] = inv_a2 * kernel(u / a, v / a);
    }
  }
  fftw_plan pg = fftw_plan_dft_r2c_2d(mx, my, gk.data(), G.data(), FFTW_ESTIMATE);
  fftw_plan pk = fftw_plan_dft_r2c_2d(mx, my, kk.data(), K.data(), FFTW_ESTIMATE);
  fftw_execute(pg);
  fftw_execute(pk);
  for (size_t i = 0; i < nh; ++i) {
    const double re = G[i][0] * K[i][0] - G[i][1] * K[i][1];
    const double im = G[i][0] * K[i][1] + G[i][1] * K[i][0];
    G[i][0] = re;
    G[i][1] = im;
  }
  fftw_plan pb = fftw_plan_dft_c2r_2d(mx, my, G.data(), out.data(), FFTW_ESTIMATE);
  fftw_execute(pb);
  fftw_destroy_plan(pg);
  fftw_destroy_plan(pk);
  fftw_destroy_plan(pb);
  GridFunction res = make_grid(g.nx, g.ny, g.dx, g.dy, g.x0, g.y0);
  const double scale = g.cell_area() / static_cast<double>(n);
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) res.at(ix, iy) = out[static_cast<size_t>(ix) * my + iy] * scale;
  }
  return res;
}

double convolve2d_at(const Fn2& kernel, const GridFunction& g, double a, double x1, double x2,
                     const ConvolveOptions& opts) {
  check_resolution(g, a);
  const double R = truncation_radius(a, opts);
  const double inv_a2 = 1.0 / (a * a);
  CompensatedSum acc;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const double v = g.at(ix, iy);
      if (v == 0.0) continue;
      const double u1 = x1 - g.x(ix);
      const double u2 = x2 - g.y(iy);
      if (std::hypot(u1, u2) > R) continue;
      acc.add(inv_a2 * kernel(u1 / a, u2 / a) * v);
    }
  }
  return acc.value() * g.cell_area();
}

int worker_count() {
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RIESZLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return hw;
}

std::vector<double> parallel_map(int n, const std::function<double(int)>& f) {
  std::vector<double> out(static_cast<size_t>(std::max(n, 0)));
  const int workers = std::min(worker_count(), std::max(n, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  // A failing job is rethrown after the join; the lowest index wins so the
  // reported error does not depend on scheduling.
  std::vector<std::exception_ptr> errors(out.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) {
        try {
          out[i] = f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace rieszlab
