#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "rieszlab/quadrature.hpp"

using namespace rieszlab;

namespace {

Region unit_disc_column(double u_lo) {
  Region r;
  r.name = "column";
  r.u_lo = u_lo;
  r.section = [](double) {
    CrossSection cs;
    cs.kind = CrossSection::Kind::Disc;
    cs.radius = 1.0;
    return cs;
  };
  r.contains = [](const GroupPoint& p) { return std::hypot(p.x1(), p.x2()) < 1.0; };
  return r;
}

}  // namespace

TEST_CASE("one dimensional rules") {
  CHECK(integrate1d([](double x) { return std::sin(x); }, 0, kPi).value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate1d([](double x) { return std::exp(-x); }, 0, kInf).value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(integrate1d([](double x) { return std::exp(-x * x); }, -kInf, kInf).value ==
        doctest::Approx(std::sqrt(kPi)).epsilon(1e-9));
  CHECK(integrate1d([](double x) { return 1 / std::sqrt(x); }, 0, 1).value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("box integrals") {
  // rho of a CZ box: side L in x, u in [log a - r, log a + r].
  const double L = 3, r = 0.7, u0 = 0.4;
  Box b{0, L, 0, L, u0 - r, u0 + r};
  const Estimate e = integrate([](double, double, double) { return 1.0; }, b, 1e-10);
  CHECK(std::abs(e.value - 2 * r * L * L) < 1e-10);
  // R of the S1 construction: x in [0, e^2 log 2]^2, a in [1/2, 2].
  const double s = std::exp(2.0) * std::log(2.0);
  Box R{0, s, 0, s, -std::log(2.0), std::log(2.0)};
  CHECK(integrate([](double, double, double) { return 1.0; }, R, 1e-10).value ==
        doctest::Approx(36.366).epsilon(1e-4));
  auto gauss = [](double x, double y, double u) { return std::exp(-x * x - 2 * y * y - 3 * u * u); };
  Box big{-8, 8, -8, 8, -6, 6};
  const double exact = std::sqrt(kPi) * std::sqrt(kPi / 2) * std::sqrt(kPi / 3);
  CHECK(integrate(gauss, big, 1e-8).value == doctest::Approx(exact).epsilon(1e-7));
  CHECK_THROWS(integrate(gauss, Box{1, 0, 0, 1, 0, 1}, 1e-8));
}

TEST_CASE("budget exhaustion carries the partial estimate") {
  // Unresolvable oscillation in u; the x-directions converge on one panel.
  auto rough = [](double, double, double u) { return std::sin(1e6 * u); };
  CHECK_FALSE(integrate1d([](double u) { return 1.0 / std::abs(u - 0.3); }, 0, 1, {1e-10, 1e-8, 20}).converged);
  try {
    integrate(rough, Box{0, 1, 0, 1, 0, 1}, 1e-8);
    FAIL("expected exhaustion");
  } catch (const BudgetExhausted& e) {
    CHECK(e.kind() == ErrorKind::BudgetExhausted);
    CHECK(e.partial().evaluations > 0);
  }
}

TEST_CASE("refinement consistency and determinism") {
  auto f = [](double x, double y, double u) { return std::exp(-x * x - y * y) / (1 + u * u); };
  Box b{-4, 4, -4, 4, -5, 5};
  QuadOptions coarse{1e-6, 0, 400}, fine{5e-7, 0, 400};
  const Estimate c = integrate_box(f, b, coarse);
  const Estimate d = integrate_box(f, b, fine);
  CHECK(std::abs(c.value - d.value) <= c.error + 1e-15);
  const Estimate c2 = integrate_box(f, b, coarse);
  CHECK(c.value == c2.value);
  CHECK(c.error == c2.error);
}

TEST_CASE("shell integration reproduces ball volume") {
  ShellOptions so;
  so.r_hi = 2.0;
  so.axisymmetric = true;
  const Estimate e = integrate_shell([](const GroupPoint&) { return 1.0; }, so);
  CHECK(e.value == doctest::Approx(kPi * (std::sinh(4.0) - 4.0)).epsilon(1e-8));
  so.axisymmetric = false;
  so.quad.rel_tol = 1e-6;
  CHECK(integrate_shell([](const GroupPoint&) { return 1.0; }, so).value ==
        doctest::Approx(kPi * (std::sinh(4.0) - 4.0)).epsilon(1e-6));
}

TEST_CASE("scan verdicts on closed forms") {
  const Region col = unit_disc_column(1.0);
  const std::vector<double> T{1e2, 1e4, 1e8, 1e16};
  QuadOptions q{1e-12, 1e-10, 400};
  // Weight 1/pi on the unit disc: I(T) = log T - 1.
  auto rep_log = scan_tail([](double, double, double) { return 1 / kPi; }, col, T, q);
  CHECK(rep_log.best.model == GrowthModel::Log);
  CHECK(rep_log.best.slope == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep_log.monotone());
  // Weight 1/(pi u): I(T) = log log T.
  auto rep_ll = scan_tail([](double, double, double u) { return 1 / (kPi * u); }, col, T, q);
  CHECK(rep_ll.best.model == GrowthModel::LogLog);
  CHECK(rep_ll.best.slope == doctest::Approx(1.0).epsilon(1e-6));
  // Weight e^{-u}: bounded.
  auto rep_b = scan_tail([](double, double, double u) { return std::exp(-u); }, col, T, q);
  CHECK(rep_b.best.model == GrowthModel::Bounded);
  CHECK(rep_b.last_decade_variation < 0.01);
  const std::string csv = rep_log.to_csv();
  CHECK(csv.rfind("T,I,model,params", 0) == 0);
  const std::vector<double> bad{1e4, 1e2};
  CHECK_THROWS(scan_tail([](double, double, double) { return 1.0; }, col, bad, q));
}

TEST_CASE("grid convolution") {
  auto psi = [](double x, double y) { return 1.0 / std::pow(1 + x * x + y * y, 1.5); };
  GridFunction g = make_grid(64, 64, 0.1, 0.1, -3.2, -3.2);
  g.at(32, 32) = 1.0 / g.cell_area();
  const GridFunction c = convolve2d(psi, g, 1.0);
  CHECK(c.at(32, 32) == doctest::Approx(psi(0, 0)).epsilon(1e-9));
  CHECK(c.at(40, 30) == doctest::Approx(psi(0.8, -0.2)).epsilon(1e-9));
  CHECK(convolve2d_at(psi, g, 1.0, g.x(40), g.y(30)) == doctest::Approx(c.at(40, 30)).epsilon(1e-9));
  GridFunction h = make_grid(64, 64, 0.1, 0.1, -3.2, -3.2);
  for (int ix = 0; ix < 64; ++ix)
    for (int iy = 0; iy < 64; ++iy) h.at(ix, iy) = std::exp(-(g.x(ix) * g.x(ix) + g.y(iy) * g.y(iy)));
  GridFunction sum = g;
  for (size_t k = 0; k < sum.values.size(); ++k) sum.values[k] = 2 * g.values[k] + 3 * h.values[k];
  const GridFunction ch = convolve2d(psi, h, 0.7), cs = convolve2d(psi, sum, 0.7), cg = convolve2d(psi, g, 0.7);
  for (int k : {0, 100, 2080, 4095}) CHECK(cs.values[k] == doctest::Approx(2 * cg.values[k] + 3 * ch.values[k]));
  try {
    convolve2d(psi, g, 0.05);
    FAIL("expected grid-too-coarse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridTooCoarse);
  }
}

TEST_CASE("parallel map keeps index order") {
  setenv("RIESZLAB_THREADS", "4", 1);
  CHECK(worker_count() == 4);
  auto v = parallel_map(100, [](int i) { return std::sqrt(static_cast<double>(i)); });
  setenv("RIESZLAB_THREADS", "1", 1);
  auto w = parallel_map(100, [](int i) { return std::sqrt(static_cast<double>(i)); });
  CHECK(v == w);
  CHECK(v[49] == 7.0);
  unsetenv("RIESZLAB_THREADS");
  CHECK(worker_count() >= 1);
}

TEST_CASE("parallel map rethrows the lowest failing index") {
  setenv("RIESZLAB_THREADS", "3", 1);
  try {
    parallel_map(10, [](int i) -> double {
      if (i == 4 || i == 7) fail(ErrorKind::NonFinite, "job " + std::to_string(i));
      return i;
    });
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("job 4") != std::string::npos);
  }
  unsetenv("RIESZLAB_THREADS");
}
