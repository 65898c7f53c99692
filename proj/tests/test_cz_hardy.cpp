#include <cmath>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "rieszlab/cz_hardy.hpp"

using namespace rieszlab;

namespace {

const double kE2 = std::exp(2.0);

// For fixed height the nearest planar point is the clamp of x (|x - y| enters
// monotonically); the height is then found by a fine scan.
double scanned_distance(const CZSet& R, const GroupPoint& p) {
  const Box b = R.box();
  const double y1 = std::clamp(p.x1(), b.x1_lo, b.x1_hi), y2 = std::clamp(p.x2(), b.x2_lo, b.x2_hi);
  double best = kInf;
  const int n = 200000;
  for (int i = 0; i <= n; ++i)
    best = std::min(best, distance(p, GroupPoint(y1, y2, std::exp(b.u_lo + (b.u_hi - b.u_lo) * i / n))));
  return best;
}

CZSet admissible(double r, double a = 1.0) {
  const double L = r < 1.0 ? kE2 * a * r * 1.5 : a * std::exp(2.0 * r) * 1.5;
  return CZSet{0.3, -0.2, L, a, r};
}

}  // namespace

TEST_CASE("admissibility of Calderon-Zygmund sets") {
  const CZSet R{0.0, 0.0, kE2 * std::log(2.0), 1.0, std::log(2.0)};
  CHECK(is_cz_set(R));
  CHECK(R.measure() == doctest::Approx(36.366).epsilon(1e-4));
  CHECK_FALSE(is_cz_set(CZSet{0.0, 0.0, 1.0, 1.0, 1.0}));
  CZSet moved = R;
  moved.b1 += 17.0;
  moved.b2 -= 3.0;
  CHECK(is_cz_set(moved));
  // Left translation by (y, b) scales L and a by b and leaves r fixed.
  const double b = 3.7;
  CHECK(is_cz_set(CZSet{b * R.b1 + 2.0, b * R.b2 - 1.0, b * R.L, b * R.a, R.r}));
  CHECK_FALSE(is_cz_set(CZSet{0.0, 0.0, std::exp(8.0) * 1.0 * 0.5 * 1.01, 1.0, 0.5}));
  CHECK_THROWS_AS(is_cz_set(CZSet{0.0, 0.0, -1.0, 1.0, 1.0}), Error);
  CHECK_THROWS_AS(is_cz_set(CZSet{0.0, 0.0, 1.0, 1.0, 0.0}), Error);
}

TEST_CASE("distance to a set matches a fine height scan") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double r : {0.1, 1.0, 2.0}) {
    const CZSet R = admissible(r);
    for (int k = 0; k < 15; ++k) {
      const GroupPoint p(R.b1 + R.L * 1.5 * U(rng), R.b2 + R.L * 1.5 * U(rng), R.a * std::exp(2.5 * r * U(rng)));
      const double d = distance_to_set(R, p);
      // The scan step in u is 1e-5 r, so the oracle can only overshoot by that much.
      const double sc = scanned_distance(R, p);
      CHECK(d <= sc + 1e-12);
      CHECK(sc - d < 1e-5);
      if (R.contains(p)) CHECK(d == 0.0);
      // No point of R is closer.
      const Box b = R.box();
      for (int s = 0; s < 2000; ++s) {
        const GroupPoint y = from_log({b.x1_lo + (b.x1_hi - b.x1_lo) * (U(rng) + 1) / 2,
                                       b.x2_lo + (b.x2_hi - b.x2_lo) * (U(rng) + 1) / 2,
                                       b.u_lo + (b.u_hi - b.u_lo) * (U(rng) + 1) / 2});
        CHECK(distance(p, y) >= d - 1e-12);
      }
    }
  }
}

TEST_CASE("dilated sets: measure ratio and ball containment with one constant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double C0 = 0.0;
  for (double r : {0.1, 1.0, 5.0}) {
    const CZSet R = admissible(r, 2.0);
    const double ratio = dilated_measure(R) / R.measure();
    C0 = std::max(C0, ratio);
    CHECK(ratio > 1.0);
    // Monte Carlo oracle for rho(R*) in LogCoords over an enclosing box.
    if (r <= 1.0) {
      const double h = std::sinh(r) * R.a * std::exp(2 * r) + R.L;  // planar reach
      const Box B{R.b1 - h, R.b1 + h, R.b2 - h, R.b2 + h, std::log(R.a) - 2.01 * r, std::log(R.a) + 2.01 * r};
      int hit = 0;
      const int n = 200000;
      for (int k = 0; k < n; ++k) {
        const GroupPoint p = from_log({B.x1_lo + (B.x1_hi - B.x1_lo) * U(rng), B.x2_lo + (B.x2_hi - B.x2_lo) * U(rng),
                                       B.u_lo + (B.u_hi - B.u_lo) * U(rng)});
        hit += dilated_contains(R, p);
      }
      const double mc = B.volume() * hit / n;
      const double se = B.volume() * std::sqrt(double(hit)) / n;
      CHECK(std::abs(mc - dilated_measure(R)) < 4.0 * se + 1e-9);
    }
    // Every sampled point of R* lies in B(centre, c r); record the worst c.
    double worst = 0.0;
    for (int k = 0; k < 20000; ++k) {
      const GroupPoint p = from_log({R.b1 + 3 * R.L * (U(rng) - 0.5), R.b2 + 3 * R.L * (U(rng) - 0.5),
                                     std::log(R.a) + 4 * r * (U(rng) - 0.5)});
      if (dilated_contains(R, p)) worst = std::max(worst, distance(p, R.center()) / r);
    }
    C0 = std::max(C0, worst);
    MESSAGE("r=" << r << " rho(R*)/rho(R)=" << ratio << " max d/r=" << worst);
  }
  CHECK(C0 < 60.0);
}

TEST_CASE("integration outside R* against a Gaussian sampler") {
  // f = exp(-|x - m|^2 / s^2 - (u - u0)^2) has total mass pi^{3/2} s^2; the
  // part outside R* is that times the fraction of normal samples outside.
  const double s = 0.8, m1 = 0.4, m2 = 0.1, u0 = 0.2;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> X(0.0, s / std::sqrt(2.0)), Uu(0.0, std::sqrt(0.5));
  for (double r : {0.3, 1.0}) {
    const CZSet R = admissible(r);
    auto f = [&](double x1, double x2, double u) {
      return std::exp(-((x1 - m1) * (x1 - m1) + (x2 - m2) * (x2 - m2)) / (s * s) - (u - u0) * (u - u0));
    };
    OutsideOptions o;
    o.depth_below = 12.0;
    o.depth_above = 12.0;
    o.height.rel_tol = 1e-6;
    o.section.rel_tol = 1e-7;
    o.section.abs_tol = 1e-12;
    o.planar_scale = [s](double) { return s; };
    const Estimate e = integrate_outside_dilated(f, R, o);
    CHECK(e.converged);
    const int n = 400000;
    int out = 0;
    for (int k = 0; k < n; ++k) out += !dilated_contains(R, from_log({m1 + X(rng), m2 + X(rng), u0 + Uu(rng)}));
    const double total = std::pow(kPi, 1.5) * s * s;
    const double p = double(out) / n;
    CHECK(std::abs(e.value - total * p) < 4.0 * total * std::sqrt(p * (1 - p) / n) + 1e-6);
  }
  CHECK(dilated_section_radius2(admissible(1.0), 1e-6) < 0.0);
}

TEST_CASE("atom validation") {
  const Kit k = build_s1_kit();
  const AtomEvidence ev = validate_atom(k.atom);
  CHECK(ev.valid());
  CHECK(ev.sup_margin == doctest::Approx(0.0).scale(1.0));
  CHECK(std::abs(ev.mean) < 1e-14);

  Atom no_mean;
  no_mean.support = k.atom.support;
  no_mean.pieces.push_back({k.atom.support.box(), 0.0, 1.0 / k.atom.support.measure()});
  const AtomEvidence e2 = validate_atom(no_mean);
  CHECK(e2.support_ok);
  CHECK(e2.sup_ok);
  CHECK_FALSE(e2.mean_ok);

  Atom twice = k.atom;
  for (auto& p : twice.pieces) p.coeff *= 2.0;
  const AtomEvidence e3 = validate_atom(twice);
  CHECK_FALSE(e3.sup_ok);
  CHECK(e3.mean_ok);
  REQUIRE(e3.failures().size() == 1);
  CHECK(e3.failures()[0] == "sup_norm");

  Atom outside = k.atom;
  outside.pieces[0].box.x1_hi += 10.0;
  outside.pieces[1].box.x1_hi += 10.0;
  CHECK_FALSE(validate_atom(outside).support_ok);
}

TEST_CASE("S1 kit: regions, inclusion, shift and lower bound") {
  const Kit k = build_s1_kit();
  CHECK(k.params.at("B_second") >= 2 * k.params.at("B_prime") + 1);
  // E and its shift are disjoint, both in R.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int s = 0; s < 2000; ++s) {
    const GroupPoint y = from_log({-0.5 + U(rng), -0.25 * U(rng), std::log(2.0) * U(rng)});
    const GroupPoint ys = multiply(y, flow(FieldIndex{2}, k.sigma));
    CHECK(k.atom.support.contains(y));
    CHECK(k.atom.support.contains(ys));
    CHECK(k.atom.pieces[0].contains(ys) == false);
    CHECK(k.atom.pieces[1].contains(y) == false);
    CHECK(k.atom(ys) < 0.0);
  }
  // Nesting.
  for (const auto& p : sample_region(k.inner, 1e6, 10000, 1)) {
    CHECK(k.middle.contains(p));
    CHECK(k.outer.contains(p));
  }
  for (const auto& p : sample_region(k.middle, 1e6, 10000, 2)) CHECK(k.outer.contains(p));
  const InclusionReport inc = check_inclusion(k, 10000, 3);
  CHECK(inc.samples == 10000);
  CHECK(inc.violations == 0);
  CHECK(check_shift(k, 10000, 4).violations == 0);
  const LowerBoundReport lb = check_lower_bound(k, 10000, 5);
  CHECK(lb.violations == 0);
  CHECK(lb.c_min > 0.0);
  MESSAGE("S1 lower-bound constant c=" << lb.c_min << " (max " << lb.c_max << ")");
  // Phi only depends on x1 and a, both fixed by the shift.
  for (const auto& p : sample_region(k.middle, 1e4, 200, 6)) {
    const GroupPoint q = multiply(p, GroupPoint(0.0, 0.2, 1.0));
    CHECK(region_weight(k, q).flags.outer);
    CHECK(k.weight_at(q) == doctest::Approx(k.weight_at(p)).epsilon(1e-13));
  }
  CHECK_FALSE(closed_form_tail(k, 100.0).has_value());
}

TEST_CASE("S0 kit: membership, inclusion, lower bound and closed-form tail") {
  const Kit k = build_s0_kit();
  const double A = k.params.at("A");
  CHECK(region_weight(k, GroupPoint(0.0, 0.0, 2 * A)).flags.outer);
  CHECK_FALSE(region_weight(k, GroupPoint(2 * A, 0.0, 2 * A)).flags.outer);
  CHECK(validate_atom(k.atom).valid());
  for (const auto& p : sample_region(k.middle, 1e6, 10000, 1)) CHECK(k.outer.contains(p));
  CHECK(check_inclusion(k, 10000, 2).violations == 0);
  CHECK(check_shift(k, 10000, 3).violations == 0);
  const LowerBoundReport lb = check_lower_bound(k, 10000, 4);
  CHECK(lb.violations == 0);
  MESSAGE("S0 lower-bound constant c=" << lb.c_min);
  // Psi(p exp(tau X0)) >= c Psi(p) with c independent of p.
  double c = kInf;
  for (const auto& p : sample_region(k.outer, 1e8, 2000, 5))
    for (double tau : {0.0, 0.2, k.sigma}) {
      const GroupPoint q = multiply(p, flow(FieldIndex{0}, tau));
      c = std::min(c, k.weight_at(q) / k.weight_at(p));
    }
  CHECK(c >= std::exp(-2 * k.sigma) / (1 + k.sigma / std::log(A)) * (1 - 1e-12));
  for (double T : {1e2, 1e4, 1e8}) {
    const Estimate q = integrate_region(k.weight, k.inner, k.inner.u_lo, std::log(T), {1e-12, 1e-9, 400});
    CHECK(q.value == doctest::Approx(*closed_form_tail(k, T)).epsilon(0.01));
  }
}

TEST_CASE("Sij kits: cone search, inclusion, lower bound and closed-form tail") {
  for (auto [i, j] : {std::pair{1, 2}, std::pair{0, 0}, std::pair{2, 1}}) {
    const Kit k = build_sij_kit(FieldIndex{i}, FieldIndex{j});
    CAPTURE(i);
    CAPTURE(j);
    const double eps = k.params.at("eps");
    CHECK(eps > 0.0);
    CHECK(eps <= 0.25);
    CHECK(k.sigma < eps / 2);
    CHECK(validate_atom(k.atom).valid());
    CHECK(is_cz_set(k.atom.support));
    CHECK(check_inclusion(k, 10000, 1).violations == 0);
    CHECK(check_shift(k, 5000, 2).violations == 0);
    const LowerBoundReport lb = check_lower_bound(k, 2000, 3);
    CHECK(lb.violations == 0);
    CHECK(lb.c_min > 0.0);
    // The lower kernel agrees with nested finite differences of k_ji.
    const GroupPoint p = sample_region(k.outer, 200.0, 1, 4)[0];
    const double fd = field_derivative(FieldIndex{2}, [&](const GroupPoint& q) { return kernel_kij(FieldIndex{j}, FieldIndex{i}, q); }, p,
                                       {1e-3, true});
    CHECK(k.lower_kernel(p) == doctest::Approx(fd).epsilon(1e-4));
    for (double T : {1e2, 1e4, 1e8}) {
      const Estimate q = integrate_region(k.weight, k.inner, k.inner.u_lo, std::log(T), {1e-14, 1e-10, 400});
      CHECK(q.value == doctest::Approx(*closed_form_tail(k, T)).epsilon(0.01));
    }
    MESSAGE("S" << i << j << ": q=(" << k.params.at("q1") << "," << k.params.at("q2") << ") eps=" << eps
                << " c=" << lb.c_min);
  }
}

TEST_CASE("S1 atom: direct kernel integral equals the mean-value form") {
  const Kit k = build_s1_kit();
  const double rhoR = k.atom.support.measure();
  const double sigma = k.sigma;
  const QuadOptions q{1e-24, 1e-8, 400};
  Region Es;
  Es.name = "E^sigma";
  Es.u_lo = 0.0;
  Es.u_hi = std::log(2.0);
  Es.section = [sigma](double u) {
    CrossSection c;
    c.kind = CrossSection::Kind::Graph;
    c.x1_lo = -0.5;
    c.x1_hi = 0.5;
    const double s = sigma * std::exp(u);
    c.x2_lo = [s](double) { return -0.25 + s; };
    c.x2_hi = [s](double) { return s; };
    return c;
  };
  Es.contains = [](const GroupPoint&) { return true; };

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto gs = sample_region(k.inner, 60.0, 20, 13);
  for (const auto& g : gs) {
    const GroupPoint e = from_log({-0.5 + U(rng), -0.25 * U(rng), std::log(2.0) * U(rng)});
    const GroupPoint x = multiply(e, inverse(g));
    auto S1 = [&](double y1, double y2, double u) {
      return integral_kernel(IntegralOp::S, FieldIndex{1}, FieldIndex{1}, x, from_log({y1, y2, u}));
    };
    const double direct = (integrate_box(S1, k.E, q).value - integrate_region(S1, Es, 0.0, std::log(2.0), q).value) / rhoR;
    const GroupPoint xinv = inverse(x);
    auto segment = [&](double y1, double y2, double u) {
      const GroupPoint w = multiply(xinv, from_log({y1, y2, u}));
      return integrate1d([&](double t) { return kernel_X2k1(multiply(w, flow(FieldIndex{2}, t))); }, 0.0, sigma,
                         {1e-26, 1e-10, 100})
          .value;
    };
    const double mean_value = modular(x) * integrate_box(segment, k.E, q).value / rhoR;
    CHECK(direct == doctest::Approx(mean_value).epsilon(1e-6));
    CHECK(mean_value > 0.0);
  }
}

TEST_CASE("psi has mean zero in the asymptotic normalisation") {
  auto lo = [](double) { return -kInf; };
  auto hi = [](double) { return kInf; };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Psi p = psi_ij(FieldIndex{i}, FieldIndex{j});
      const double m = integrate2d([&](double x, double y) { return p(x, y); }, -kInf, kInf, lo, hi, {1e-12, 1e-10, 400}).value;
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(m) < 1e-8);
    }
  const Psi h = psi_ij(FieldIndex{0}, FieldIndex{0}, PsiNormalization::Halved);
  const double mh = integrate2d([&](double x, double y) { return h(x, y); }, -kInf, kInf, lo, hi, {1e-12, 1e-10, 400}).value;
  CHECK(mh == doctest::Approx(-0.25).epsilon(1e-6));
}

TEST_CASE("phi candidates and search") {
  for (PhiKind kd : {PhiKind::OddX1, PhiKind::OddX2, PhiKind::EvenX1, PhiKind::EvenX2, PhiKind::OddOdd}) {
    const Phi f = make_phi(kd);
    CHECK(std::abs(f.integral()) < 1e-13);
    CHECK(f(1.0, 0.3) == 0.0);
  }
  // psi_00 is radial, so the odd default gives zero and the search moves on.
  const Psi p00 = psi_ij(FieldIndex{0}, FieldIndex{0});
  CHECK(std::abs(psi_phi_at_origin(p00, make_phi(PhiKind::OddX1))) < 1e-12);
  const Phi f00 = search_phi(p00);
  CHECK(std::abs(psi_phi_at_origin(p00, f00)) > 1e-6);
  CHECK(f00.kind == PhiKind::EvenX1);
  const Psi p10 = psi_ij(FieldIndex{1}, FieldIndex{0});
  CHECK(search_phi(p10).kind == PhiKind::OddX1);
}

TEST_CASE("h_N: support, term count, mean zero and L2 norm") {
  const HNParams P{1, 3.0, 4, 1};
  const Phi phi = make_phi(PhiKind::OddX1);
  const HN h(P, phi, 77);
  // Direct count of |k| < (2^n L - 1)/p.
  long count = 0;
  for (int n = 0; n <= P.N; ++n) {
    const double X = (std::ldexp(P.L, n) - 1.0) / P.p;
    long side = 0;
    for (int k = -100; k <= 100; ++k) side += std::abs(k) < X;
    count += side * side;
  }
  CHECK(h.term_count() == count);
  CHECK(HN::term_count_formula(P) == count);
  CHECK(HN::term_count_formula({4, 60.0, 4, 1}) == 841 + 3481 + 14161 + 57121 + 229441);

  const double dx = 1.0 / 64;
  const int n = static_cast<int>(2 * (P.L + 1) / dx) + 1;
  const GridFunction g = h.sample(make_grid(n, n, dx, dx, -P.L - 1, -P.L - 1));
  double outside = 0.0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      if (std::abs(g.x(ix)) > P.L || std::abs(g.y(iy)) > P.L) outside = std::max(outside, std::abs(g.at(ix, iy)));
  CHECK(outside == 0.0);
  CHECK(std::abs(g.integral()) < 1e-10);
  // The trapezoid rule is spectrally accurate for these bumps.
  CHECK(h.l2_norm() == doctest::Approx(g.l2_norm()).epsilon(1e-6));
  CHECK_THROWS_AS(h.sample(make_grid(10, 10, 0.2, 0.2, 0, 0)), Error);
  CHECK_THROWS_AS(HN({2, 3.0, 4, 1}, phi, 1), Error);  // N >= log L

  // Overlaps enter the norm: compare with the grid for a deeper family.
  const HNParams Q{2, 8.0, 2, 1};
  const HN h2(Q, make_phi(PhiKind::EvenX1), 5);
  const double d2 = 1.0 / 128;
  const int m = static_cast<int>(2 * (Q.L + 1) / d2) + 1;
  const GridFunction g2 = h2.sample(make_grid(m, m, d2, d2, -Q.L - 1, -Q.L - 1));
  CHECK(h2.l2_norm() == doctest::Approx(g2.l2_norm()).epsilon(1e-6));
}

TEST_CASE("lifting planar atoms to G") {
  CHECK(lift_height(std::exp(4.0)) == doctest::Approx(2.0));
  CHECK(is_cz_set(CZSet{0, 0, std::exp(4.0), 1.0, lift_height(std::exp(4.0))}));
  CHECK(lift_height(2.0) == doctest::Approx(2.0 / kE2));
  const Phi phi = make_phi(PhiKind::OddX1);
  std::vector<PlanarAtom> h;
  double phisup = 0.0;
  for (int k = 0; k <= 200; ++k) phisup = std::max(phisup, std::abs(phi.f1(-1 + k / 100.0)));
  for (double side : {2.0, 10.0, std::exp(4.0)}) {
    // b(x) = phi(2x / side) scaled to sup |Q|^-1.
    const double s = 1.0 / (side * side * phisup * std::exp(-1.0));
    PlanarAtom b;
    b.lambda = side == 2.0 ? -0.5 : 1.5;
    b.c1 = side;
    b.c2 = -1.0;
    b.side = side;
    b.b = [=](double x1, double x2) { return s * phi(2 * (x1 - side) / side, 2 * (x2 + 1.0) / side); };
    b.sup = s * phisup * std::exp(-1.0);
    b.integral = 0.0;
    h.push_back(b);
  }
  const LiftedFunction f = lift_to_H1(h);
  CHECK(f.norm_bound == doctest::Approx(3.5));
  for (const auto& a : f.atoms) {
    CHECK(is_cz_set(a.support));
    CHECK(validate_atom(a).valid());
  }
  // Vertical integral: direct u-quadrature of f against the planar sum.
  for (double x1 : {0.3, 2.1, 9.0, 20.0})
    for (double x2 : {-1.3, 0.4}) {
      double hv = 0.0;
      for (const auto& b : h)
        if (std::abs(x1 - b.c1) <= b.side / 2 && std::abs(x2 - b.c2) <= b.side / 2) hv += b.lambda * b.b(x1, x2);
      const double vi = integrate1d([&](double u) { return f(GroupPoint(x1, x2, std::exp(u))); }, -3.0, 3.0,
                                    {1e-14, 1e-12, 400})
                            .value;
      CHECK(f.vertical_integral(x1, x2) == doctest::Approx(hv).epsilon(1e-12));
      CHECK(vi == doctest::Approx(hv).epsilon(1e-6).scale(1e-9));
    }
  PlanarAtom bad = h[0];
  bad.sup *= 2;
  CHECK_THROWS_AS(lift_to_H1({bad}), Error);
  bad = h[0];
  bad.integral = 0.1;
  CHECK_THROWS_AS(lift_to_H1({bad}), Error);
}

TEST_CASE("serialisation") {
  const Kit k = build_s0_kit();
  const std::string s = kit_json(k);
  CHECK(s.find("\"kind\":\"S0\"") != std::string::npos);
  CHECK(s.find("\"mean_ok\":true") != std::string::npos);
  CHECK(kit_json(build_s0_kit()) == s);
  GridFunction g = make_grid(3, 2, 0.5, 0.25, -1.0, 2.0);
  for (size_t t = 0; t < g.values.size(); ++t) g.values[t] = 0.1 * t - 0.3;
  const std::string path = "test_grid.bin";
  write_grid(g, path);
  const GridFunction r = read_grid(path);
  CHECK(r.nx == 3);
  CHECK(r.ny == 2);
  CHECK(r.dy == 0.25);
  CHECK(r.y0 == 2.0);
  CHECK(r.values == g.values);
  std::remove(path.c_str());
}
