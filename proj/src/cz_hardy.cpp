#include "rieszlab/cz_hardy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

#include "json.hpp"

namespace rieszlab {

namespace {

using json = nlohmann::json;

constexpr double kE2 = 7.38905609893065;  // e^2

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::InvalidArgument, std::string(what) + " must be positive");
}

// Distance from t to [lo, hi].
double gap(double t, double lo, double hi) { return t < lo ? lo - t : (t > hi ? t - hi : 0.0); }

double bump(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

json box_json(const Box& b) {
  return {{"x1", {b.x1_lo, b.x1_hi}}, {"x2", {b.x2_lo, b.x2_hi}}, {"u", {b.u_lo, b.u_hi}}};
}

}  // namespace

// ---------------------------------------------------------------- CZ sets

bool CZSet::contains(const GroupPoint& p) const {
  return std::abs(p.x1() - b1) <= L / 2 && std::abs(p.x2() - b2) <= L / 2 && p.a() >= a * std::exp(-r) &&
         p.a() <= a * std::exp(r);
}

Box CZSet::box() const {
  const double u = std::log(a);
  return Box{b1 - L / 2, b1 + L / 2, b2 - L / 2, b2 + L / 2, u - r, u + r};
}

bool is_cz_set(const CZSet& R) {
  require_positive(R.L, "L");
  require_positive(R.a, "a");
  require_positive(R.r, "r");
  // Relative slack so sets built at the lower bound are accepted.
  const double lo = R.r < 1.0 ? kE2 * R.a * R.r : R.a * std::exp(2.0 * R.r);
  const double hi = R.r < 1.0 ? std::exp(8.0) * R.a * R.r : R.a * std::exp(8.0 * R.r);
  return R.L >= lo * (1.0 - 1e-12) && R.L < hi;
}

double distance_to_set(const CZSet& R, const GroupPoint& p) {
  const double d1 = gap(p.x1(), R.b1 - R.L / 2, R.b1 + R.L / 2);
  const double d2 = gap(p.x2(), R.b2 - R.L / 2, R.b2 + R.L / 2);
  const double D2 = d1 * d1 + d2 * d2;
  const double a = p.a();
  const double b = std::clamp(std::sqrt(D2 + a * a), R.a * std::exp(-R.r), R.a * std::exp(R.r));
  return arcosh1p((D2 + (a - b) * (a - b)) / (2.0 * a * b));
}

bool dilated_contains(const CZSet& R, const GroupPoint& p) { return distance_to_set(R, p) < R.r; }

double dilated_section_radius2(const CZSet& R, double a) {
  // D^2 = max_b 2abc - (a - b)^2 over the height range, attained at b = a(1 + c) clamped.
  const double c = std::cosh(R.r) - 1.0;
  const double b = std::clamp(a * (1.0 + c), R.a * std::exp(-R.r), R.a * std::exp(R.r));
  return 2.0 * a * b * c - (a - b) * (a - b);
}

std::vector<double> dilated_height_breaks(const CZSet& R) {
  const double c = std::cosh(R.r) - 1.0;
  const double lo = std::log(R.a) - R.r, hi = std::log(R.a) + R.r;
  std::vector<double> cuts{lo - R.r, lo - std::log1p(c), hi - std::log1p(c), lo, hi, hi + R.r};
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

double dilated_measure(const CZSet& R, double tol) {
  // At height a the cross-section is the square fattened by D.
  auto area = [&](double u) {
    const double D2 = dilated_section_radius2(R, std::exp(u));
    if (D2 <= 0.0) return 0.0;
    return R.L * R.L + 4.0 * R.L * std::sqrt(D2) + kPi * D2;
  };
  // The profile has kinks where the clamp switches; split there.
  const std::vector<double> cuts = dilated_height_breaks(R);
  double total = 0.0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] > cuts[k]) total += integrate1d(area, cuts[k], cuts[k + 1], {tol, tol, 400}).value;
  }
  return total;
}

Estimate integrate_outside_section(const Fn3& f, const CZSet& R, double u, const OutsideOptions& o) {
  const double h = R.L / 2;
  auto zero = [](double) { return 0.0; };
  auto inf = [](double) { return kInf; };
  const double a = std::exp(u);
  const double D2 = dilated_section_radius2(R, a);
  const double D = D2 > 0.0 ? std::sqrt(D2) : 0.0;
  const double s = o.planar_scale ? o.planar_scale(a) : std::sqrt(a);
  Estimate tot;
  for (int k = 0; k < 4; ++k) {
    // Quarter turn k maps the top side to the other three.
    auto place = [&](double p, double q, double& x1, double& x2) {
      switch (k) {
        case 0: x1 = p, x2 = q; break;
        case 1: x1 = -q, x2 = p; break;
        case 2: x1 = -p, x2 = -q; break;
        default: x1 = q, x2 = -p;
      }
      x1 += R.b1;
      x2 += R.b2;
    };
    tot += integrate2d(
        [&](double p, double w) {
          double x1, x2;
          place(p, h + D + s * w, x1, x2);
          return f(x1, x2, u) * s;
        },
        -h, h, zero, inf, o.section);
    // Corner between side k and side k + 1, polar about the square's corner.
    tot += integrate2d(
        [&](double th, double w) {
          const double rho = D + s * w;
          double x1, x2;
          place(h + rho * std::cos(th), h + rho * std::sin(th), x1, x2);
          return f(x1, x2, u) * rho * s;
        },
        0.0, kPi / 2, zero, inf, o.section);
  }
  if (D2 <= 0.0) {
    tot += integrate2d([&](double x1, double x2) { return f(x1 + R.b1, x2 + R.b2, u); }, -h, h,
                       [h](double) { return -h; }, [h](double) { return h; }, o.section);
  }
  return tot;
}

Estimate integrate_outside_dilated(const Fn3& f, const CZSet& R, const OutsideOptions& o) {
  long evals = 0;
  bool ok = true;
  auto section = [&](double u) {
    const Estimate e = integrate_outside_section(f, R, u, o);
    evals += e.evaluations;
    ok = ok && e.converged;
    return e.value;
  };
  std::vector<double> cuts = dilated_height_breaks(R);
  cuts.front() = std::min(cuts.front(), std::log(R.a) - o.depth_below);
  cuts.back() = std::max(cuts.back(), std::log(R.a) + o.depth_above);
  Estimate total;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] > cuts[k]) total += integrate1d(section, cuts[k], cuts[k + 1], o.height);
  }
  total.evaluations += evals;
  total.converged = total.converged && ok;
  return total;
}

// ---------------------------------------------------------------- atoms

bool AtomPiece::contains(const GroupPoint& p) const {
  const double u = std::log(p.a());
  const double x2 = p.x2() - shear * p.a();
  return p.x1() >= box.x1_lo && p.x1() < box.x1_hi && x2 >= box.x2_lo && x2 < box.x2_hi && u >= box.u_lo &&
         u < box.u_hi;
}

double Atom::operator()(const GroupPoint& p) const {
  double v = 0.0;
  for (const auto& pc : pieces)
    if (pc.contains(p)) v += pc.coeff;
  const double u = std::log(p.a());
  for (const auto& s : separable) {
    if (u < s.u_lo || u >= s.u_hi) continue;
    if (std::abs(p.x1() - s.c1) > s.side / 2 || std::abs(p.x2() - s.c2) > s.side / 2) continue;
    v += s.coeff * s.planar(p.x1(), p.x2());
  }
  return v;
}

double Atom::integral() const {
  // Shears preserve Lebesgue measure in LogCoords.
  CompensatedSum s;
  for (const auto& pc : pieces) s.add(pc.coeff * pc.box.volume());
  for (const auto& sp : separable) s.add(sp.coeff * (sp.u_hi - sp.u_lo) * sp.planar_integral);
  return s.value();
}

namespace {

// Disjoint at every common height: the x2 intervals are affine in a, so
// checking both ends of the common height range suffices.
bool pieces_disjoint(const AtomPiece& p, const AtomPiece& q) {
  constexpr double tol = 1e-12;
  if (p.box.x1_hi <= q.box.x1_lo + tol || q.box.x1_hi <= p.box.x1_lo + tol) return true;
  const double u0 = std::max(p.box.u_lo, q.box.u_lo), u1 = std::min(p.box.u_hi, q.box.u_hi);
  if (u1 <= u0 + tol) return true;
  auto below = [tol](const AtomPiece& s, const AtomPiece& t, double a) {
    return s.box.x2_hi + s.shear * a <= t.box.x2_lo + t.shear * a + tol;
  };
  const double a0 = std::exp(u0), a1 = std::exp(u1);
  return (below(p, q, a0) && below(p, q, a1)) || (below(q, p, a0) && below(q, p, a1));
}

}  // namespace

double Atom::sup_norm() const {
  bool disjoint = separable.empty() || pieces.empty();
  for (size_t k = 0; k < pieces.size() && disjoint; ++k)
    for (size_t l = k + 1; l < pieces.size() && disjoint; ++l) disjoint = pieces_disjoint(pieces[k], pieces[l]);
  if (separable.size() > 1) disjoint = false;
  double sup = 0.0;
  for (const auto& pc : pieces) sup = disjoint ? std::max(sup, std::abs(pc.coeff)) : sup + std::abs(pc.coeff);
  for (const auto& sp : separable) {
    const double v = std::abs(sp.coeff) * sp.planar_sup;
    sup = disjoint ? std::max(sup, v) : sup + v;
  }
  return sup;
}

std::vector<std::string> AtomEvidence::failures() const {
  std::vector<std::string> f;
  if (!support_ok) f.push_back("support");
  if (!sup_ok) f.push_back("sup_norm");
  if (!mean_ok) f.push_back("mean_zero");
  return f;
}

AtomEvidence validate_atom(const Atom& f, double mean_tol) {
  AtomEvidence ev;
  try {
    const Box S = f.support.box();
    double margin = kInf;
    auto inside = [&](double lo, double hi, double slo, double shi) {
      margin = std::min({margin, lo - slo, shi - hi});
    };
    for (const auto& pc : f.pieces) {
      inside(pc.box.x1_lo, pc.box.x1_hi, S.x1_lo, S.x1_hi);
      inside(pc.box.u_lo, pc.box.u_hi, S.u_lo, S.u_hi);
      for (double u : {pc.box.u_lo, pc.box.u_hi}) {
        const double a = std::exp(u);
        inside(pc.box.x2_lo + pc.shear * a, pc.box.x2_hi + pc.shear * a, S.x2_lo, S.x2_hi);
      }
    }
    for (const auto& sp : f.separable) {
      inside(sp.u_lo, sp.u_hi, S.u_lo, S.u_hi);
      inside(sp.c1 - sp.side / 2, sp.c1 + sp.side / 2, S.x1_lo, S.x1_hi);
      inside(sp.c2 - sp.side / 2, sp.c2 + sp.side / 2, S.x2_lo, S.x2_hi);
    }
    ev.support_margin = margin;
    ev.support_ok = margin >= -1e-12;
    const double bound = 1.0 / f.support.measure();
    const double sup = f.sup_norm();
    ev.sup_margin = bound - sup;
    ev.sup_ok = sup <= bound * (1.0 + 1e-12);
    ev.mean = f.integral();
    ev.mean_ok = std::abs(ev.mean) <= mean_tol;
  } catch (const std::exception&) {
    // Reported through the flags, which stay false.
  }
  return ev;
}

// ---------------------------------------------------------------- kits

std::string to_string(KitKind k) {
  switch (k) {
    case KitKind::S1: return "S1";
    case KitKind::S0: return "S0";
    case KitKind::Sij: return "Sij";
  }
  return "?";
}

RegionFlags Kit::flags(const GroupPoint& p) const {
  return RegionFlags{outer.contains(p), middle.contains(p), inner.contains(p)};
}

double Kit::weight_at(const GroupPoint& p) const { return weight(p.x1(), p.x2(), std::log(p.a())); }

RegionSample region_weight(const Kit& kit, const GroupPoint& p) {
  RegionSample s;
  s.flags = kit.flags(p);
  s.weight = s.flags.outer ? kit.weight_at(p) : 0.0;
  return s;
}

namespace {

// {a > A, x1 > B a, |x2 / x1 - 1| < eps}
Region gamma_s1(const std::string& name, double A, double B, double eps) {
  Region g;
  g.name = name;
  g.u_lo = std::log(A);
  g.section = [B, eps](double u) {
    CrossSection c;
    c.kind = CrossSection::Kind::Graph;
    c.x1_lo = B * std::exp(u);
    c.x1_hi = kInf;
    c.x2_lo = [eps](double x1) { return (1.0 - eps) * x1; };
    c.x2_hi = [eps](double x1) { return (1.0 + eps) * x1; };
    return c;
  };
  g.contains = [A, B, eps](const GroupPoint& p) {
    return p.a() > A && p.x1() > B * p.a() && std::abs(p.x2() / p.x1() - 1.0) < eps;
  };
  return g;
}

// {a > A, |x|^2 < a^2 / k}
Region omega(const std::string& name, double A, double k) {
  Region g;
  g.name = name;
  g.u_lo = std::log(A);
  g.section = [k](double u) {
    CrossSection c;
    c.kind = CrossSection::Kind::Disc;
    c.radius = std::exp(u) / std::sqrt(k);
    return c;
  };
  g.contains = [A, k](const GroupPoint& p) {
    return p.a() > A && p.x1() * p.x1() + p.x2() * p.x2() < p.a() * p.a() / k;
  };
  return g;
}

// {a > A, |x_i / a - q_i| < e}
Region cone(const std::string& name, double A, double q1, double q2, double e) {
  Region g;
  g.name = name;
  g.u_lo = std::log(A);
  g.section = [q1, q2, e](double u) {
    const double a = std::exp(u);
    CrossSection c;
    c.kind = CrossSection::Kind::Graph;
    c.x1_lo = a * (q1 - e);
    c.x1_hi = a * (q1 + e);
    c.x2_lo = [a, q2, e](double) { return a * (q2 - e); };
    c.x2_hi = [a, q2, e](double) { return a * (q2 + e); };
    return c;
  };
  g.contains = [A, q1, q2, e](const GroupPoint& p) {
    return p.a() > A && std::abs(p.x1() / p.a() - q1) < e && std::abs(p.x2() / p.a() - q2) < e;
  };
  return g;
}

CZSet unit_cz_set() { return CZSet{0.0, 0.0, kE2 * std::log(2.0), 1.0, std::log(2.0)}; }

// rho(R)^-1 (1_E - 1_{E exp(sigma X)}) for X = X2 (shear) or X0 (lift).
Atom shifted_pair(const std::string& name, const CZSet& R, const Box& E, int field, double sigma) {
  Atom at;
  at.name = name;
  at.support = R;
  const double c = 1.0 / R.measure();
  at.pieces.push_back(AtomPiece{E, 0.0, c});
  AtomPiece shifted{E, 0.0, -c};
  if (field == 2) {
    shifted.shear = sigma;
  } else {
    shifted.box.u_lo += sigma;
    shifted.box.u_hi += sigma;
  }
  at.pieces.push_back(shifted);
  return at;
}

void verify_or_fail(const Kit& k) {
  const InclusionReport inc = check_inclusion(k, 2000, 7);
  if (inc.violations > 0) fail(ErrorKind::SearchFailure, to_string(k.kind) + " kit: sampled inclusion fails");
  const InclusionReport sh = check_shift(k, 2000, 11);
  if (sh.violations > 0) fail(ErrorKind::SearchFailure, to_string(k.kind) + " kit: sampled shift fails");
}

}  // namespace

Kit build_s1_kit(const KitOverrides& o) {
  const double A = o.A.value_or(10.0), B = o.B.value_or(10.0), eps = o.eps.value_or(0.5);
  require_positive(A, "A");
  require_positive(B, "B");
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::InvalidArgument, "eps must lie in (0, 1)");
  const double sigma = 0.25;
  // Gamma' -> Gamma under x2 += a tau, tau <= sigma: eps' + sigma / B' <= eps.
  const double eps1 = eps / 2.0;
  const double B1 = std::max(B, sigma / (eps - eps1));
  // Gamma'' E^-1 E -> Gamma': |d1| < a, |d2| < a/4, heights change by at most 2,
  // so B'' >= 2 B' + 1 and (eps'' + 5 / (4 B'')) / (1 - 1 / B'') < eps'.
  const double eps2 = eps1 / 2.0;
  double B2 = std::ceil(2.0 * B1 + 1.0);
  while ((eps2 + 1.25 / B2) / (1.0 - 1.0 / B2) >= eps1) B2 += 1.0;

  Kit k;
  k.kind = KitKind::S1;
  k.i = 1;
  k.params = {{"A", A}, {"B", B}, {"eps", eps}, {"B_prime", B1}, {"eps_prime", eps1},
              {"B_second", B2}, {"eps_second", eps2}, {"sigma", sigma}, {"tau", sigma}};
  k.outer = gamma_s1("Gamma", A, B, eps);
  k.middle = gamma_s1("Gamma'", A, B1, eps1);
  k.inner = gamma_s1("Gamma''", 2.0 * A, B2, eps2);
  k.weight = [](double x1, double, double u) {
    const double v = x1 * x1 * std::exp(-u);
    return 1.0 / (std::log(v) * v * v);
  };
  k.lower_kernel = kernel_X2k1;
  k.lower_sign = 1.0;
  k.E = Box{-0.5, 0.5, -0.25, 0.0, 0.0, std::log(2.0)};
  k.shift_field = 2;
  k.sigma = sigma;
  k.atom = shifted_pair("S1", unit_cz_set(), k.E, 2, sigma);
  verify_or_fail(k);
  return k;
}

Kit build_s0_kit(const KitOverrides& o) {
  const double A = o.A.value_or(10.0);
  require_positive(A, "A");
  if (A <= 1.0) fail(ErrorKind::InvalidArgument, "A must exceed 1 for Psi to be positive");
  const double sigma = std::log(2.0) / 2.0;
  Kit k;
  k.kind = KitKind::S0;
  k.i = 0;
  k.params = {{"A", A}, {"sigma", sigma}};
  k.outer = omega("Omega", A, 4.0);
  k.middle = omega("Omega'", std::sqrt(2.0) * A, 64.0);
  k.inner = k.middle;
  k.weight = [](double, double, double u) { return std::exp(-2.0 * u) / u; };
  k.lower_kernel = kernel_X0k0;
  k.lower_sign = sign_of(kernel_X0k0(GroupPoint(0.0, 0.0, 2.0 * A)));
  k.E = Box{-1.0 / 16, 1.0 / 16, -1.0 / 16, 1.0 / 16, 0.0, std::log(std::sqrt(2.0))};
  k.shift_field = 0;
  k.sigma = sigma;
  k.atom = shifted_pair("S0", unit_cz_set(), k.E, 0, sigma);
  verify_or_fail(k);
  return k;
}

Kit build_sij_kit(FieldIndex i, FieldIndex j, const KitOverrides& o) {
  auto shape = std::make_shared<const ThirdOrderShape>(third_derivative_X2(j, i));
  const double A = o.A.value_or(10.0);
  require_positive(A, "A");
  // |P| grows with |q|; the kernel itself behaves like a^-2 P(q, 1) / (1 + |q|^2)^4
  // on the ray x = q a, so that is what is maximised.
  auto profile = [&](double q1, double q2) {
    return shape->P(q1, q2, 1.0) / std::pow(1.0 + q1 * q1 + q2 * q2, 4);
  };
  double best = 0.0, q1 = 0.0, q2 = 0.0;
  for (int s = 1; s <= 200; ++s)
    for (int t = 1; t <= 200; ++t) {
      const double a1 = 0.01 * s, a2 = 0.01 * t;
      const double v = std::abs(profile(a1, a2));
      if (v > best) best = v, q1 = a1, q2 = a2;
    }
  if (!(best > 0.0)) fail(ErrorKind::SearchFailure, "P vanishes on the positive quadrant");
  const double Pq = shape->P(q1, q2, 1.0);
  auto good = [&](double e) {
    for (int s = 0; s <= 20; ++s)
      for (int t = 0; t <= 20; ++t) {
        const double v = shape->P(q1 - e + 0.1 * s * e, q2 - e + 0.1 * t * e, 1.0);
        if (!(v * sign_of(Pq) > std::abs(Pq) / 2.0)) return false;
      }
    return true;
  };
  double eps = 0.25;
  if (o.eps) {
    eps = *o.eps;
  } else if (!good(eps)) {
    double lo = 0.0, hi = eps;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (good(mid) ? lo : hi) = mid;
    }
    eps = lo;
  }
  if (!(eps > 0.0)) fail(ErrorKind::SearchFailure, "no admissible cone aperture");
  const double qmax = std::max(q1, q2);
  const double delta = eps / 16.0;
  const double beta = 1.0 + eps / (16.0 * (qmax + eps / 4.0));
  const double sigma = delta;

  Kit k;
  k.kind = KitKind::Sij;
  k.i = i;
  k.j = j;
  k.params = {{"A", A}, {"eps", eps}, {"q1", q1}, {"q2", q2}, {"P_q", Pq},
              {"delta", delta}, {"beta", beta}, {"sigma", sigma}, {"tau", sigma}};
  k.outer = cone("Gamma", A, q1, q2, eps);
  k.middle = cone("Gamma'", A, q1, q2, eps / 2.0);
  k.inner = cone("Gamma''", 2.0 * A, q1, q2, eps / 4.0);
  k.weight = [](double, double, double u) { return std::exp(-2.0 * u); };
  k.lower_kernel = [shape](const GroupPoint& p) { return evaluate(shape->kernel, p); };
  k.lower_sign = sign_of(Pq);
  k.E = Box{0.0, delta, -delta, 0.0, 0.0, std::log(beta)};
  k.shift_field = 2;
  k.sigma = sigma;
  // Heights [1, beta], x inside a square of side >= 3 delta around (delta/2, delta/2).
  const double r = std::log(beta) / 2.0, a = std::sqrt(beta);
  const CZSet R{delta / 2.0, delta / 2.0, std::max(kE2 * a * r, 3.0 * delta), a, r};
  if (!is_cz_set(R)) fail(ErrorKind::SearchFailure, "no admissible set around E");
  k.atom = shifted_pair("Sij", R, k.E, 2, sigma);
  verify_or_fail(k);
  return k;
}

std::vector<GroupPoint> sample_region(const Region& region, double a_max, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double u0 = region.u_lo, u1 = std::log(a_max);
  if (!(u1 > u0)) fail(ErrorKind::InvalidArgument, "a_max below the region");
  std::vector<GroupPoint> out;
  out.reserve(n);
  int guard = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++guard > 100 * n + 1000) fail(ErrorKind::SearchFailure, "cannot sample " + region.name);
    const double u = u0 + (u1 - u0) * U(rng);
    const CrossSection c = region.section(u);
    double x1 = 0.0, x2 = 0.0;
    if (c.kind == CrossSection::Kind::Disc) {
      const double rad = c.radius * std::sqrt(U(rng)), th = 2.0 * kPi * U(rng);
      x1 = c.c1 + rad * std::cos(th);
      x2 = c.c2 + rad * std::sin(th);
    } else if (c.kind == CrossSection::Kind::Graph) {
      // Unbounded sections are cut at ten times their inner edge.
      const double hi = std::isfinite(c.x1_hi) ? c.x1_hi : c.x1_lo + 10.0 * std::max(1.0, std::abs(c.x1_lo));
      x1 = c.x1_lo + (hi - c.x1_lo) * U(rng);
      const double lo2 = c.x2_lo(x1), hi2 = c.x2_hi(x1);
      x2 = lo2 + (hi2 - lo2) * U(rng);
    } else {
      continue;
    }
    const GroupPoint p(x1, x2, std::exp(u));
    if (region.contains(p)) out.push_back(p);
  }
  return out;
}

InclusionReport check_inclusion(const Kit& kit, int samples, std::uint64_t seed, double a_max) {
  const auto pts = sample_region(kit.inclusion_source(), a_max, samples, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto draw = [&] {
    const Box& b = kit.E;
    return from_log({b.x1_lo + (b.x1_hi - b.x1_lo) * U(rng), b.x2_lo + (b.x2_hi - b.x2_lo) * U(rng),
                     b.u_lo + (b.u_hi - b.u_lo) * U(rng)});
  };
  InclusionReport rep;
  for (const auto& p : pts) {
    const GroupPoint y = draw(), z = draw();
    const GroupPoint w = multiply(multiply(p, inverse(y)), z);
    ++rep.samples;
    if (!kit.inclusion_target().contains(w)) ++rep.violations;
  }
  return rep;
}

InclusionReport check_shift(const Kit& kit, int samples, std::uint64_t seed, double a_max) {
  const Region& src = kit.kind == KitKind::S0 ? kit.outer : kit.middle;
  const auto pts = sample_region(src, a_max, samples, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  InclusionReport rep;
  for (const auto& p : pts) {
    const double tau = kit.sigma * U(rng);
    const GroupPoint w = multiply(p, flow(FieldIndex{kit.shift_field}, tau));
    ++rep.samples;
    if (!kit.outer.contains(w)) ++rep.violations;
  }
  return rep;
}

LowerBoundReport check_lower_bound(const Kit& kit, int samples, std::uint64_t seed, double a_max) {
  const auto pts = sample_region(kit.outer, a_max, samples, seed);
  LowerBoundReport rep;
  rep.c_min = kInf;
  rep.c_max = 0.0;
  for (const auto& p : pts) {
    const double ratio = kit.lower_sign * kit.lower_kernel(p) / kit.weight_at(p);
    ++rep.samples;
    if (!(ratio > 0.0)) ++rep.violations;
    rep.c_min = std::min(rep.c_min, ratio);
    rep.c_max = std::max(rep.c_max, ratio);
  }
  return rep;
}

std::optional<double> closed_form_tail(const Kit& kit, double T) {
  const double A = kit.params.at("A");
  if (kit.kind == KitKind::S0) {
    const double a0 = std::sqrt(2.0) * A;
    if (T <= a0) return 0.0;
    return kPi / 64.0 * (std::log(std::log(T)) - std::log(std::log(a0)));
  }
  if (kit.kind == KitKind::Sij) {
    const double e = kit.params.at("eps");
    if (T <= 2.0 * A) return 0.0;
    return e * e / 4.0 * std::log(T / (2.0 * A));
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- h_N

std::string to_string(PhiKind k) {
  switch (k) {
    case PhiKind::OddX1: return "odd_x1";
    case PhiKind::OddX2: return "odd_x2";
    case PhiKind::EvenX1: return "even_x1";
    case PhiKind::EvenX2: return "even_x2";
    case PhiKind::OddOdd: return "odd_odd";
  }
  return "?";
}

double Phi::f1(double s) const {
  switch (kind) {
    case PhiKind::OddX1:
    case PhiKind::OddOdd: return s * bump(s);
    case PhiKind::EvenX1: return (s * s - c) * bump(s);
    default: return bump(s);
  }
}

double Phi::f2(double s) const {
  switch (kind) {
    case PhiKind::OddX2:
    case PhiKind::OddOdd: return s * bump(s);
    case PhiKind::EvenX2: return (s * s - c) * bump(s);
    default: return bump(s);
  }
}

double Phi::integral() const {
  const double i1 = integrate1d([this](double s) { return f1(s); }, -1.0, 1.0).value;
  const double i2 = integrate1d([this](double s) { return f2(s); }, -1.0, 1.0).value;
  return i1 * i2;
}

Phi make_phi(PhiKind kind) {
  Phi p;
  p.kind = kind;
  if (kind == PhiKind::EvenX1 || kind == PhiKind::EvenX2) {
    const QuadOptions q{1e-15, 1e-13, 400};
    const double m0 = integrate1d(bump, -1.0, 1.0, q).value;
    const double m2 = integrate1d([](double s) { return s * s * bump(s); }, -1.0, 1.0, q).value;
    p.c = m2 / m0;
  }
  return p;
}

double psi_phi_at_origin(const Psi& psi, const Phi& phi) {
  auto f = [&](double z1, double z2) { return psi(-z1, -z2) * phi(z1, z2); };
  auto lo = [](double) { return -1.0; };
  auto hi = [](double) { return 1.0; };
  return integrate2d(f, -1.0, 1.0, lo, hi, {1e-13, 1e-10, 400}).value;
}

Phi search_phi(const Psi& psi, double threshold) {
  for (PhiKind k : {PhiKind::OddX1, PhiKind::OddX2, PhiKind::EvenX1, PhiKind::EvenX2, PhiKind::OddOdd}) {
    const Phi phi = make_phi(k);
    if (std::abs(psi_phi_at_origin(psi, phi)) > threshold) return phi;
  }
  fail(ErrorKind::SearchFailure, "psi * phi(0) vanishes for every candidate");
}

namespace {

void check_hn_params(const HNParams& p) {
  if (p.N < 1 || p.p < 2 || p.q < 1) fail(ErrorKind::InvalidArgument, "h_N needs N >= 1, p >= 2, q >= 1");
  if (!(p.L > 1.0)) fail(ErrorKind::InvalidArgument, "h_N needs L > 1");
  if (!(p.N < std::log(p.L))) fail(ErrorKind::InvalidArgument, "h_N needs N < log L");
}

int level_kmax(const HNParams& p, int n) {
  const double X = (std::ldexp(p.L, p.q * n) - 1.0) / p.p;
  return static_cast<int>(std::ceil(X)) - 1;  // largest k with k < X
}

void check_phi(const Phi& phi) {
  if (std::abs(phi.integral()) > 1e-12) fail(ErrorKind::InvalidArgument, "phi must have integral zero");
}

}  // namespace

std::vector<std::int8_t> draw_signs(const HNParams& p, std::uint64_t seed) {
  check_hn_params(p);
  std::mt19937_64 rng(seed);
  std::vector<std::int8_t> s(static_cast<size_t>(HN::term_count_formula(p)));
  for (auto& v : s) v = (rng() >> 63) ? 1 : -1;
  return s;
}

HN::HN(const HNParams& params, const Phi& phi, std::uint64_t sign_seed)
    : HN(params, phi, draw_signs(params, sign_seed)) {}

HN::HN(const HNParams& params, const Phi& phi, std::vector<std::int8_t> signs)
    : par_(params), phi_(phi), signs_(std::move(signs)) {
  check_hn_params(par_);
  check_phi(phi_);
  size_t off = 0;
  for (int n = 0; n <= par_.N; ++n) {
    offsets_.push_back(off);
    const size_t side = 2 * static_cast<size_t>(kmax(n)) + 1;
    off += side * side;
  }
  if (signs_.size() != off) fail(ErrorKind::InvalidArgument, "sign sequence has the wrong length");
  for (auto s : signs_)
    if (s != 1 && s != -1) fail(ErrorKind::InvalidArgument, "signs must be +1 or -1");
}

int HN::kmax(int n) const { return level_kmax(par_, n); }

long HN::term_count() const { return static_cast<long>(signs_.size()); }

long HN::term_count_formula(const HNParams& p) {
  long total = 0;
  for (int n = 0; n <= p.N; ++n) {
    const long side = 2 * static_cast<long>(std::floor((std::ldexp(p.L, p.q * n) - 1.0) / p.p)) + 1;
    total += side * side;
  }
  return total;
}

size_t HN::level_offset(int n) const { return offsets_[n]; }

std::int8_t HN::sign(int n, int k1, int k2) const {
  const int km = kmax(n);
  if (std::abs(k1) > km || std::abs(k2) > km) fail(ErrorKind::InvalidArgument, "translate index out of range");
  const size_t side = 2 * static_cast<size_t>(km) + 1;
  return signs_[level_offset(n) + static_cast<size_t>(k1 + km) * side + static_cast<size_t>(k2 + km)];
}

double HN::operator()(double x1, double x2) const {
  double v = 0.0;
  for (int n = 0; n <= par_.N; ++n) {
    const double z1 = std::ldexp(x1, par_.q * n), z2 = std::ldexp(x2, par_.q * n);
    // Supports of distinct translates are disjoint (p >= 2): one candidate.
    const int k1 = static_cast<int>(std::lround(z1 / par_.p)), k2 = static_cast<int>(std::lround(z2 / par_.p));
    const int km = kmax(n);
    if (std::abs(k1) > km || std::abs(k2) > km) continue;
    const double w1 = z1 - par_.p * k1, w2 = z2 - par_.p * k2;
    if (std::abs(w1) >= 1.0 || std::abs(w2) >= 1.0) continue;
    v += sign(n, k1, k2) * phi_(w1, w2);
  }
  return v;
}

GridFunction HN::sample(const GridFunction& shape) const {
  const double h = std::ldexp(1.0, -par_.q * par_.N) / 4.0;
  if (shape.dx > h || shape.dy > h) fail(ErrorKind::GridTooCoarse, "grid does not resolve scale 2^{-qN}");
  GridFunction g = make_grid(shape.nx, shape.ny, shape.dx, shape.dy, shape.x0, shape.y0);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) g.at(ix, iy) = (*this)(g.x(ix), g.y(iy));
  return g;
}

double HN::l2_norm() const {
  const QuadOptions qo{1e-15, 1e-11, 200};
  auto sq = [](const Fn1& f) { return integrate1d([&](double s) { return f(s) * f(s); }, -1.0, 1.0, {1e-15, 1e-12, 200}).value; };
  const Fn1 F1 = [this](double s) { return phi_.f1(s); };
  const Fn1 F2 = [this](double s) { return phi_.f2(s); };
  const double n1 = sq(F1), n2 = sq(F2);
  const int p = par_.p;

  CompensatedSum total;
  for (int n = 0; n <= par_.N; ++n) {
    const size_t side = 2 * static_cast<size_t>(kmax(n)) + 1;
    total.add(static_cast<double>(side * side) * std::ldexp(n1 * n2, -2 * par_.q * n));
  }
  // Overlaps between a coarse translate (level n) and fine ones (level m > n).
  struct Overlap {
    int k, kf;
    double v;
  };
  for (int n = 0; n <= par_.N; ++n)
    for (int m = n + 1; m <= par_.N; ++m) {
      const double sn = std::ldexp(1.0, par_.q * n), sm = std::ldexp(1.0, par_.q * m);
      const int kn = kmax(n), kmm = kmax(m);
      auto overlaps = [&](const Fn1& f) {
        std::vector<std::vector<Overlap>> out(2 * kn + 1);
        for (int k = -kn; k <= kn; ++k) {
          const double lo = (p * k - 1.0) / sn, hi = (p * k + 1.0) / sn;
          const int kf_lo = std::max(-kmm, static_cast<int>(std::ceil((sm * lo - 1.0) / p)));
          const int kf_hi = std::min(kmm, static_cast<int>(std::floor((sm * hi + 1.0) / p)));
          for (int kf = kf_lo; kf <= kf_hi; ++kf) {
            const double a = std::max(lo, (p * kf - 1.0) / sm), b = std::min(hi, (p * kf + 1.0) / sm);
            if (b <= a) continue;
            const double v = integrate1d([&](double x) { return f(sn * x - p * k) * f(sm * x - p * kf); }, a, b, qo).value;
            out[k + kn].push_back({k, kf, v});
          }
        }
        return out;
      };
      const auto o1 = overlaps(F1), o2 = overlaps(F2);
      for (const auto& row1 : o1)
        for (const auto& row2 : o2)
          for (const auto& a : row1)
            for (const auto& b : row2)
              total.add(2.0 * sign(n, a.k, b.k) * sign(m, a.kf, b.kf) * a.v * b.v);
    }
  return std::sqrt(std::max(0.0, total.value()));
}

// ---------------------------------------------------------------- lifting

double lift_height(double side) {
  require_positive(side, "side");
  return side >= kE2 ? std::log(side) / 2.0 : side / kE2;
}

double LiftedFunction::operator()(const GroupPoint& p) const {
  double v = 0.0;
  for (size_t k = 0; k < atoms.size(); ++k) v += lambdas[k] * atoms[k](p);
  return v;
}

double LiftedFunction::vertical_integral(double x1, double x2) const {
  // Each a_j is constant in u on its height range, so the u-integral is exact.
  double v = 0.0;
  for (size_t k = 0; k < atoms.size(); ++k)
    for (const auto& s : atoms[k].separable) {
      if (std::abs(x1 - s.c1) > s.side / 2 || std::abs(x2 - s.c2) > s.side / 2) continue;
      v += lambdas[k] * s.coeff * (s.u_hi - s.u_lo) * s.planar(x1, x2);
    }
  return v;
}

LiftedFunction lift_to_H1(const std::vector<PlanarAtom>& h) {
  LiftedFunction f;
  for (const auto& b : h) {
    require_positive(b.side, "side");
    if (!b.b) fail(ErrorKind::InvalidArgument, "planar atom without values");
    if (b.sup > (1.0 + 1e-12) / (b.side * b.side))
      fail(ErrorKind::InvalidArgument, "planar atom exceeds |Q|^-1");
    if (std::abs(b.integral) > 1e-10) fail(ErrorKind::InvalidArgument, "planar atom is not mean-zero");
    const double r = lift_height(b.side);
    Atom a;
    a.name = "lift";
    a.support = CZSet{b.c1, b.c2, b.side, 1.0, r};
    a.separable.push_back(SeparablePiece{-r, r, 0.5 / r, b.b, b.c1, b.c2, b.side, b.sup, b.integral});
    f.atoms.push_back(std::move(a));
    f.lambdas.push_back(b.lambda);
    f.norm_bound += std::abs(b.lambda);
  }
  return f;
}

// ---------------------------------------------------------------- serialisation

std::string cz_set_json(const CZSet& R) {
  return json{{"b1", R.b1}, {"b2", R.b2}, {"L", R.L}, {"a", R.a}, {"r", R.r}, {"measure", R.measure()}}.dump();
}

std::string atom_json(const Atom& a) {
  json pieces = json::array();
  for (const auto& p : a.pieces) pieces.push_back({{"box", box_json(p.box)}, {"shear", p.shear}, {"coeff", p.coeff}});
  json sep = json::array();
  for (const auto& s : a.separable)
    sep.push_back({{"u", {s.u_lo, s.u_hi}}, {"coeff", s.coeff}, {"centre", {s.c1, s.c2}}, {"side", s.side},
                   {"planar_sup", s.planar_sup}, {"planar_integral", s.planar_integral}});
  const AtomEvidence ev = validate_atom(a);
  return json{{"name", a.name},
              {"support", json::parse(cz_set_json(a.support))},
              {"pieces", pieces},
              {"separable", sep},
              {"evidence",
               {{"support_ok", ev.support_ok}, {"sup_ok", ev.sup_ok}, {"mean_ok", ev.mean_ok},
                {"support_margin", ev.support_margin}, {"sup_margin", ev.sup_margin}, {"mean", ev.mean}}}}
      .dump();
}

std::string kit_json(const Kit& k) {
  json params = json::object();
  for (const auto& [name, v] : k.params) params[name] = v;
  return json{{"kind", to_string(k.kind)},
              {"i", k.i},
              {"j", k.j},
              {"params", params},
              {"E", box_json(k.E)},
              {"shift_field", k.shift_field},
              {"sigma", k.sigma},
              {"lower_sign", k.lower_sign},
              {"regions", {k.outer.name, k.middle.name, k.inner.name}},
              {"atom", json::parse(atom_json(k.atom))}}
      .dump();
}

void write_grid(const GridFunction& g, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "grid files are little-endian");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path);
  out << json{{"nx", g.nx}, {"ny", g.ny}, {"dx", g.dx}, {"dy", g.dy}, {"x0", g.x0}, {"y0", g.y0}}.dump() << '\n';
  out.write(reinterpret_cast<const char*>(g.values.data()), static_cast<std::streamsize>(g.values.size() * sizeof(double)));
}

GridFunction read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot read " + path);
  std::string header;
  std::getline(in, header);
  const json h = json::parse(header);
  GridFunction g = make_grid(h["nx"], h["ny"], h["dx"], h["dy"], h["x0"], h["y0"]);
  in.read(reinterpret_cast<char*>(g.values.data()), static_cast<std::streamsize>(g.values.size() * sizeof(double)));
  if (!in) fail(ErrorKind::InvalidArgument, "truncated grid file " + path);
  return g;
}

}  // namespace rieszlab
