#pragma once

// Arithmetic on G = R^2 x| R^+ with product
//   (x1, x2, a) . (y1, y2, b) = (x1 + a y1, x2 + a y2, a b),
// its hyperbolic metric, Haar measures and the left-invariant frame
//   X0 = a d/da,  X1 = a d/dx1,  X2 = a d/dx2.

#include <functional>
#include <array>

#include "rieszlab/errors.hpp"

namespace rieszlab {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kMinHeight = 1e-300;
inline constexpr double kMaxHeight = 1e300;

class GroupPoint {
 public:
  constexpr GroupPoint() = default;
  /// Throws InvalidArgument unless every coordinate is finite and a lies in
  /// [1e-300, 1e300].
  GroupPoint(double x1, double x2, double a);

  static constexpr GroupPoint identity() { return GroupPoint{}; }

  double x1() const { return x1_; }
  double x2() const { return x2_; }
  double a() const { return a_; }

  bool operator==(const GroupPoint&) const = default;

 private:
  double x1_ = 0.0;
  double x2_ = 0.0;
  double a_ = 1.0;
};

/// (x1, x2, u = log a). The right Haar measure is du dx1 dx2 here.
struct LogCoords {
  double x1 = 0.0;
  double x2 = 0.0;
  double u = 0.0;
};

LogCoords to_log(const GroupPoint& p);
GroupPoint from_log(const LogCoords& q);

/// Selects one of X0, X1, X2.
class FieldIndex {
 public:
  constexpr explicit FieldIndex(int i) : i_(check(i)) {}
  constexpr int value() const { return i_; }
  constexpr operator int() const { return i_; }

 private:
  static constexpr int check(int i) {
    if (i < 0 || i > 2) throw Error(ErrorKind::InvalidArgument, "field index must be 0, 1 or 2");
    return i;
  }
  int i_;
};

inline constexpr std::array<FieldIndex, 3> kAllFields{FieldIndex{0}, FieldIndex{1}, FieldIndex{2}};

GroupPoint multiply(const GroupPoint& p, const GroupPoint& q);
GroupPoint inverse(const GroupPoint& p);

/// Distance data of a point from the identity. All fields are computed from
/// t = cosh r - 1 = ((a - 1)^2 + x1^2 + x2^2) / (2a), which never cancels.
struct RadialData {
  double r = 0.0;
  double cosh_r = 1.0;
  double sinh_r = 0.0;
  double cosh_minus_one = 0.0;
};

RadialData radial(const GroupPoint& p);

/// r(p) = d(p, e).
double radius(const GroupPoint& p);
double distance(const GroupPoint& p, const GroupPoint& q);

/// arcosh(1 + t) without cancellation for small t.
double arcosh1p(double t);

/// delta(p) = a^-2.
double modular(const GroupPoint& p);

/// exp(t X_i).
GroupPoint flow(FieldIndex i, double t);

using ScalarField = std::function<double(const GroupPoint&)>;

struct DerivativeOptions {
  double step = 1e-5;
  bool richardson = false;
};

/// Central difference (f(p exp(h X_i)) - f(p exp(-h X_i))) / 2h.
double field_derivative(FieldIndex i, const ScalarField& f, const GroupPoint& p,
                        DerivativeOptions opts = {});

/// Same, but along left translation: the right-invariant field X_i^r.
double right_field_derivative(FieldIndex i, const ScalarField& f, const GroupPoint& p,
                              DerivativeOptions opts = {});

/// Closed form of X_i r away from the identity.
double field_derivative_of_radius(FieldIndex i, const GroupPoint& p);

/// rho(B_r), computed by integrating over u in LogCoords with the disc
/// cross-sections taken exactly.
double ball_volume(double r, double tol = 1e-10);

/// pi (sinh 2r - 2r), the H^3 closed form used as an oracle.
double ball_volume_closed_form(double r);

/// Empirical constant C with r(p) <= C |(x1, x2, log a)| and
/// |(x1, x2, log a)| <= C r(p), sampled over the unit ball.
double measure_local_equivalence_constant(int samples, unsigned seed);

}  // namespace rieszlab
