#pragma once

// Calderon-Zygmund sets, atoms, the lifting of planar atoms to G and the
// counterexample constructions for S_1, S_0, S_ij and R_ij.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rieszlab/group.hpp"
#include "rieszlab/kernels.hpp"
#include "rieszlab/quadrature.hpp"

namespace rieszlab {

/// [b1 - L/2, b1 + L/2] x [b2 - L/2, b2 + L/2] x [a e^-r, a e^r].
struct CZSet {
  double b1 = 0.0, b2 = 0.0;
  double L = 1.0;
  double a = 1.0;
  double r = 1.0;

  double measure() const { return 2.0 * r * L * L; }
  bool contains(const GroupPoint& p) const;
  Box box() const;  // in LogCoords
  GroupPoint center() const { return GroupPoint(b1, b2, a); }
};

/// Admissibility: e^2 a r <= L < e^8 a r (r < 1), a e^{2r} <= L < a e^{8r} (r >= 1).
/// Throws InvalidArgument for non-positive parameters.
bool is_cz_set(const CZSet& R);

/// d(p, R), exact: the nearest point has x clamped to the square and height
/// sqrt(D^2 + a^2) clamped to the height range, D the planar gap.
double distance_to_set(const CZSet& R, const GroupPoint& p);

/// p in R* = {d(., R) < r}.
bool dilated_contains(const CZSet& R, const GroupPoint& p);

/// rho(R*) from the exact cross-sections (rounded squares).
double dilated_measure(const CZSet& R, double tol = 1e-9);

/// Squared fattening radius of the cross-section of R* at height a; the
/// section is empty when this is not positive.
double dilated_section_radius2(const CZSet& R, double a);

struct OutsideOptions {
  QuadOptions height{1e-7, 1e-2, 400};
  QuadOptions section{1e-5, 3e-3, 400};
  double depth_below = 200.0;  // u runs from log a - depth_below
  double depth_above = 30.0;   // to log a + depth_above
  Fn1 planar_scale;            // length scale in x at height a, default sqrt(a)
};

/// Integral of f(x1, x2, u) over the complement of R*, truncated in u. Each
/// section is split into four side strips and four corner quarter planes
/// outside the rounded square (plus the square itself where R* has no section).
Estimate integrate_outside_dilated(const Fn3& f, const CZSet& R, const OutsideOptions& o = {});
/// The planar integral of f(., ., u) over the complement of the section of R* at height e^u.
Estimate integrate_outside_section(const Fn3& f, const CZSet& R, double u, const OutsideOptions& o = {});

/// Piecewise description of an atom. A box piece is coeff on
///   x1 in [x1_lo, x1_hi], x2 - shear * a in [x2_lo, x2_hi], u in [u_lo, u_hi];
/// the shear describes right translates by exp(s X_2).
struct AtomPiece {
  Box box;
  double shear = 0.0;
  double coeff = 0.0;

  bool contains(const GroupPoint& p) const;
};

/// coeff * 1_[u_lo, u_hi](u) * b(x1, x2) with b supported in the square
/// centred at (c1, c2) of side side.
struct SeparablePiece {
  double u_lo = 0.0, u_hi = 0.0;
  double coeff = 1.0;
  Fn2 planar;
  double c1 = 0.0, c2 = 0.0, side = 1.0;
  double planar_sup = 0.0;       // sup |b|
  double planar_integral = 0.0;  // int b dx
};

struct Atom {
  std::string name;
  CZSet support;
  std::vector<AtomPiece> pieces;
  std::vector<SeparablePiece> separable;

  double operator()(const GroupPoint& p) const;
  double integral() const;
  /// Exact when pieces are disjoint, otherwise the sum of |coeff| bound.
  double sup_norm() const;
};

struct AtomEvidence {
  bool support_ok = false;
  bool sup_ok = false;
  bool mean_ok = false;
  double support_margin = 0.0;  // smallest distance from a piece edge to the support edge (LogCoords)
  double sup_margin = 0.0;      // rho(R)^-1 - sup
  double mean = 0.0;
  bool valid() const { return support_ok && sup_ok && mean_ok; }
  std::vector<std::string> failures() const;
};

AtomEvidence validate_atom(const Atom& f, double mean_tol = 1e-10);

enum class KitKind { S1, S0, Sij };
std::string to_string(KitKind k);

struct RegionFlags {
  bool outer = false;   // Gamma or Omega
  bool middle = false;  // Gamma' (S1, Sij) or Omega' (S0)
  bool inner = false;   // Gamma'' (S1, Sij); same as middle for S0
};

/// Everything needed by one unboundedness experiment.
struct Kit {
  KitKind kind = KitKind::S1;
  int i = 1, j = 1;  // operator indices (S_i or S_ij)
  std::map<std::string, double> params;
  Region outer, middle, inner;  // Gamma / Gamma' / Gamma''  or  Omega / Omega' / Omega'
  Fn3 weight;                   // Phi or Psi in LogCoords
  ScalarField lower_kernel;     // X_2 k_1, X_0 k_0 or X_2 k_ji
  double lower_sign = 1.0;      // sign of lower_kernel on the outer region
  Box E;                        // E or F (LogCoords)
  int shift_field = 2;          // X_2 or X_0
  double sigma = 0.0;
  Atom atom;
  // Points of inclusion_source * E^-1 * E must stay in inclusion_target.
  const Region& inclusion_source() const { return kind == KitKind::S0 ? middle : inner; }
  const Region& inclusion_target() const { return kind == KitKind::S0 ? outer : middle; }

  RegionFlags flags(const GroupPoint& p) const;
  double weight_at(const GroupPoint& p) const;
};

struct KitOverrides {
  std::optional<double> A, B, eps;
};

Kit build_s1_kit(const KitOverrides& o = {});
Kit build_s0_kit(const KitOverrides& o = {});
/// The kit for S_ij is built from X_2 k_ji.
Kit build_sij_kit(FieldIndex i, FieldIndex j, const KitOverrides& o = {});

struct RegionSample {
  RegionFlags flags;
  double weight = 0.0;
};
RegionSample region_weight(const Kit& kit, const GroupPoint& p);

/// Uniform sample of the named region truncated at a < a_max, in LogCoords.
std::vector<GroupPoint> sample_region(const Region& region, double a_max, int n, std::uint64_t seed);

/// Fraction of sampled (p in inner, y, z in E) with p y^-1 z outside middle.
struct InclusionReport {
  int samples = 0;
  int violations = 0;
};
InclusionReport check_inclusion(const Kit& kit, int samples, std::uint64_t seed, double a_max = 1e6);
/// Shift check: p in middle, tau in [0, tau_max] -> p exp(tau X) in outer.
InclusionReport check_shift(const Kit& kit, int samples, std::uint64_t seed, double a_max = 1e6);

/// min over samples of lower_sign * lower_kernel / weight on the outer region.
struct LowerBoundReport {
  int samples = 0;
  int violations = 0;  // samples where the signed ratio is not positive
  double c_min = 0.0;
  double c_max = 0.0;
};
LowerBoundReport check_lower_bound(const Kit& kit, int samples, std::uint64_t seed, double a_max = 1e6);

/// Closed form of the truncated divergence integral over the inner region:
/// S0: (pi/64)(log log T - log log(sqrt 2 A)); Sij: (eps^2/4) log(T / 2A).
/// Not available for S1 (returns nullopt).
std::optional<double> closed_form_tail(const Kit& kit, double T);

// ---------------------------------------------------------------- h_N family

/// Separable test functions phi(x1, x2) = f1(x1) f2(x2) supported in [-1, 1]^2.
enum class PhiKind { OddX1, OddX2, EvenX1, EvenX2, OddOdd };
std::string to_string(PhiKind k);

struct Phi {
  PhiKind kind = PhiKind::OddX1;
  double c = 0.0;  // centring constant of the even profile
  double f1(double s) const;
  double f2(double s) const;
  double operator()(double x1, double x2) const { return f1(x1) * f2(x2); }
  double integral() const;  // 0 for every kind
};

Phi make_phi(PhiKind kind);

/// (psi * phi)(0, 0) by quadrature.
double psi_phi_at_origin(const Psi& psi, const Phi& phi);

/// Default odd bump first; the next candidate whenever |psi * phi(0)| <= threshold.
/// Throws SearchFailure if none qualifies.
Phi search_phi(const Psi& psi, double threshold = 1e-6);

struct HNParams {
  int N = 2;
  double L = 60.0;
  int p = 4;
  int q = 1;
};

/// h_N = sum_{n=0}^N sum_{|k_i| < (2^{qn} L - 1)/p} s_{nk} phi(2^{qn} x - p k).
class HN {
 public:
  HN(const HNParams& params, const Phi& phi, std::uint64_t sign_seed);
  HN(const HNParams& params, const Phi& phi, std::vector<std::int8_t> signs);

  const HNParams& params() const { return par_; }
  const Phi& phi() const { return phi_; }
  /// Largest |k_i| at level n.
  int kmax(int n) const;
  long term_count() const;
  static long term_count_formula(const HNParams& p);
  std::int8_t sign(int n, int k1, int k2) const;
  const std::vector<std::int8_t>& signs() const { return signs_; }

  double operator()(double x1, double x2) const;
  /// Sample on a grid; throws GridTooCoarse unless dx, dy <= 2^{-qN} / 4.
  GridFunction sample(const GridFunction& shape) const;
  /// ||h_N||_2 from the exact overlap structure of the separable translates.
  double l2_norm() const;

 private:
  size_t level_offset(int n) const;
  HNParams par_;
  Phi phi_;
  std::vector<std::int8_t> signs_;
  std::vector<size_t> offsets_;
};

/// Random signs for all terms in level order.
std::vector<std::int8_t> draw_signs(const HNParams& p, std::uint64_t seed);

// ------------------------------------------------------------- H^1 lifting

struct PlanarAtom {
  double lambda = 1.0;
  double c1 = 0.0, c2 = 0.0, side = 1.0;  // supporting square
  Fn2 b;
  double sup = 0.0;
  double integral = 0.0;
};

struct LiftedFunction {
  std::vector<double> lambdas;
  std::vector<Atom> atoms;
  double norm_bound = 0.0;  // sum |lambda_j|

  double operator()(const GroupPoint& p) const;
  /// int_0^inf f(x, a) da / a.
  double vertical_integral(double x1, double x2) const;
};

/// r = log(L)/2 when L >= e^2, r = L / e^2 otherwise.
double lift_height(double side);

/// Throws InvalidArgument for a planar b_j that is not an atom.
LiftedFunction lift_to_H1(const std::vector<PlanarAtom>& h);

// ------------------------------------------------------------ serialisation

std::string cz_set_json(const CZSet& R);
std::string atom_json(const Atom& a);
std::string kit_json(const Kit& k);

/// Flat little-endian doubles preceded by a JSON header line
/// {"nx":..,"ny":..,"dx":..,"dy":..,"x0":..,"y0":..}.
void write_grid(const GridFunction& g, const std::string& path);
GridFunction read_grid(const std::string& path);

}  // namespace rieszlab
