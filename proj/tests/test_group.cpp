#include <cmath>
#include <random>

#include "doctest.h"
#include "rieszlab/group.hpp"

using namespace rieszlab;

namespace {

GroupPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(-5, 5), uu(-3, 3);
  return GroupPoint(ux(rng), ux(rng), std::exp(uu(rng)));
}

}  // namespace

TEST_CASE("group law") {
  const GroupPoint p(1, 2, 3), q(-1, 0.5, 0.25);
  const GroupPoint pq = multiply(p, q);
  CHECK(pq.x1() == doctest::Approx(-2));
  CHECK(pq.x2() == doctest::Approx(3.5));
  CHECK(pq.a() == doctest::Approx(0.75));
  const GroupPoint e = multiply(p, inverse(p));
  CHECK(std::abs(e.x1()) < 1e-15);
  CHECK(std::abs(e.x2()) < 1e-15);
  CHECK(e.a() == doctest::Approx(1.0));
  CHECK_THROWS(GroupPoint(0, 0, 0));
  CHECK_THROWS(GroupPoint(0, 0, -1));
  CHECK_THROWS(GroupPoint(NAN, 0, 1));
  CHECK_THROWS(GroupPoint(0, 0, 1e-301));
}

TEST_CASE("log coordinates round trip") {
  const GroupPoint p(0.3, -2, 5);
  const LogCoords l = to_log(p);
  CHECK(l.u == doctest::Approx(std::log(5.0)));
  CHECK(from_log(l).a() == doctest::Approx(5.0));
}

TEST_CASE("distance examples") {
  CHECK(distance(GroupPoint::identity(), GroupPoint::identity()) == 0.0);
  CHECK(radius(GroupPoint(0, 0, std::exp(1.0))) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(radius(GroupPoint(1, 1, 1)) == doctest::Approx(1.3169578969248167).epsilon(1e-14));
  // No cancellation near the identity.
  CHECK(radius(GroupPoint(1e-12, 0, 1)) == doctest::Approx(1e-12).epsilon(1e-10));
}

TEST_CASE("metric invariants") {
  std::mt19937_64 rng(1);
  double worst_left = 0, worst_inv = 0;
  for (int n = 0; n < 1000; ++n) {
    auto g = random_point(rng), p = random_point(rng), q = random_point(rng);
    worst_left = std::max(worst_left, std::abs(distance(multiply(g, p), multiply(g, q)) - distance(p, q)));
    worst_inv = std::max(worst_inv, std::abs(radius(p) - radius(inverse(p))));
  }
  CHECK(worst_left < 1e-10);
  CHECK(worst_inv < 1e-10);
  int violations = 0;
  for (int n = 0; n < 10000; ++n) {
    auto p = random_point(rng), q = random_point(rng), w = random_point(rng);
    if (distance(p, w) > distance(p, q) + distance(q, w) + 1e-9) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("modular function") {
  CHECK(modular(GroupPoint::identity()) == 1.0);
  CHECK(modular(GroupPoint(3, 5, 2)) == 0.25);
  std::mt19937_64 rng(2);
  for (int n = 0; n < 50; ++n) {
    auto p = random_point(rng), q = random_point(rng);
    CHECK(modular(multiply(p, q)) == doctest::Approx(modular(p) * modular(q)).epsilon(1e-13));
  }
}

TEST_CASE("flows") {
  const GroupPoint f = flow(FieldIndex{2}, 0.25);
  CHECK(f == GroupPoint(0, 0.25, 1));
  CHECK(flow(FieldIndex{0}, std::log(2.0)).a() == doctest::Approx(2.0));
  for (FieldIndex i : kAllFields) CHECK(flow(i, 0.0) == GroupPoint::identity());
  CHECK_THROWS(FieldIndex{3});
}

TEST_CASE("field derivatives of r") {
  auto r = [](const GroupPoint& p) { return radius(p); };
  CHECK(field_derivative(FieldIndex{0}, r, GroupPoint(0, 0, std::exp(2.0))) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(field_derivative(FieldIndex{1}, r, GroupPoint(1, 1, 1)) == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-6));
  auto c = [](const GroupPoint&) { return 4.0; };
  CHECK(field_derivative(FieldIndex{2}, c, GroupPoint(1, 1, 1)) == 0.0);
  CHECK_THROWS(field_derivative(FieldIndex{1}, r, GroupPoint(1, 1, 1), {1e-2, false}));
  auto bad = [](const GroupPoint&) { return NAN; };
  CHECK_THROWS(field_derivative(FieldIndex{1}, bad, GroupPoint(1, 1, 1)));
  std::mt19937_64 rng(4);
  for (int n = 0; n < 100; ++n) {
    auto p = random_point(rng);
    if (radius(p) < 0.05) continue;
    for (FieldIndex i : kAllFields) {
      CHECK(std::abs(field_derivative(i, r, p) - field_derivative_of_radius(i, p)) < 1e-6);
    }
  }
}

TEST_CASE("left and right fields on a coordinate") {
  // X_1^r = d/dx1 while X_1 = a d/dx1.
  auto x1 = [](const GroupPoint& p) { return p.x1(); };
  CHECK(right_field_derivative(FieldIndex{1}, x1, GroupPoint(2, 3, 4)) == doctest::Approx(1.0));
  CHECK(field_derivative(FieldIndex{1}, x1, GroupPoint(2, 3, 4)) == doctest::Approx(4.0));
}

TEST_CASE("ball volume") {
  CHECK(ball_volume(0.1) / 1e-3 == doctest::Approx(4 * kPi / 3).epsilon(0.05));
  CHECK(ball_volume(2.0) == doctest::Approx(kPi * (std::sinh(4.0) - 4.0)).epsilon(0.01));
  CHECK(ball_volume(2.0) == doctest::Approx(73.19).epsilon(0.001));
  double prev = 0;
  for (double r = 0.25; r <= 4; r += 0.25) {
    const double v = ball_volume(r);
    CHECK(v > prev);
    CHECK(v == doctest::Approx(ball_volume_closed_form(r)).epsilon(1e-8));
    prev = v;
  }
  CHECK_THROWS(ball_volume(0.0));
}

TEST_CASE("local equivalence constant is finite and reproducible") {
  const double c = measure_local_equivalence_constant(2000, 7);
  CHECK(c >= 1.0);
  CHECK(c < 3.0);
  CHECK(c == measure_local_equivalence_constant(2000, 7));
}
