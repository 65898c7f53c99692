#pragma once

// Experiment runners behind the rieszlab tool. Each returns a report whose JSON
// form depends only on (id, parameters, seed).

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rieszlab/cz_hardy.hpp"
#include "rieszlab/kernels.hpp"
#include "rieszlab/quadrature.hpp"
#include "rieszlab/term_algebra.hpp"

namespace rieszlab {

struct Check {
  std::string name;
  std::string anchor;  // what is being checked, in words
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct ExperimentReport {
  std::string id;
  std::map<std::string, double> numbers;
  std::map<std::string, std::string> labels;
  std::vector<Check> checks;
  std::uint64_t seed = 0;
  // Neither of these goes into the JSON.
  double runtime_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> curves;  // (name, CSV text)

  bool pass() const;
  std::vector<std::string> failing() const;
  Check& add(std::string name, std::string anchor, double value, double bound, bool pass);
  /// pass iff value <= bound (and value is finite).
  Check& add_le(std::string name, std::string anchor, double value, double bound);
  /// pass iff value >= bound.
  Check& add_ge(std::string name, std::string anchor, double value, double bound);
  void merge(const ExperimentReport& other, const std::string& prefix = "");
  /// {id, params, checks, seed}; key order and number formatting are fixed.
  std::string to_json() const;
};

struct RunOptions {
  std::uint64_t seed = 1;
  std::optional<double> tol;  // overrides the per-check tolerance where one applies
  double budget = 1.0;        // multiplies sample counts and quadrature caps
};

// ------------------------------------------------------------ verify suites

/// suite in {metric, kernels, term-algebra, cz}. Throws InvalidArgument otherwise.
ExperimentReport run_verify(const std::string& suite, const RunOptions& o = {});

/// (p_t * p_s)(x) by shell quadrature about the identity.
Estimate heat_convolution(double t, double s, const GroupPoint& x, double rel_tol = 1e-7);
/// int_0^inf p_t t^{-1/2} dt / sqrt(pi) and int_0^inf p_t dt.
double subordinated_U(const GroupPoint& p);
double subordinated_W(const GroupPoint& p);

/// (f * k^3)(x) for the test function f = b(x1) b(x2) c(u), b, c bumps on
/// [-1, 1] and [-1/2, 1/2], by quadrature over the support of f.
double k3_convolved_test_function(FieldIndex i, FieldIndex j, const GroupPoint& x);
/// (psi_a * h)(x) with h = int f da / a, on an FFT grid of spacing dx.
double psi_on_projection(FieldIndex i, FieldIndex j, const GroupPoint& x, double dx);

/// Truncated int |k| d rho over {a in [1/T, 1]} (k^1) or {a in [1, T]} (k^2).
ScanReport splitting_scan(FieldIndex i, FieldIndex j, bool lower, std::span<const double> T_list,
                          PsiNormalization norm = PsiNormalization::Asymptotic);

struct IntegrabilityCase {
  Exponent m;
  int p = 0;
  HalfSpace region = HalfSpace::Plus;
  bool classified = false;
  bool scanned_bounded = false;
  double variation = 0.0;
};
/// The 20-case grid straddling each inequality of the integrability criterion,
/// scanned over shells 1 < r < log T.
std::vector<IntegrabilityCase> integrability_grid();

// ------------------------------------------------------------- unboundedness

/// kind in {s1, s0, sij}; i, j used for sij.
ExperimentReport run_unbounded(const std::string& kind, FieldIndex i, FieldIndex j, double T_max,
                               const RunOptions& o = {});

/// Default truncation lists: s1 {1e2, 1e4, 1e8}; s0 and sij up to T_max.
std::vector<double> unbounded_truncations(KitKind kind, double T_max);

// ----------------------------------------------------------------- h_N runs

struct HnOptions {
  int i = 0, j = 0;  // psi_ij of the far kernel k^3
  std::vector<int> N_list{2, 3, 4};
  double L = 60.0;
  int p = 4;
  int q = 1;
  int draws = 20;
  int grid = 4;            // scales per octave in the a-grid
  int mc_samples = 40000;  // per N for the level-set measure
};

/// Table of G(b, y) = (psi_b * phi)(y) on grids, used for the level sets.
class ScaleTable {
 public:
  /// Scales 2^{k / per_octave} covering [b_min, b_max]; at scale b the grid
  /// has spacing min(1/8, b/4) and covers [-3 - 6b, 3 + 6b]^2.
  ScaleTable(const Psi& psi, const Phi& phi, int per_octave, double b_min, double b_max);
  /// Bilinear in y, linear in log b. Zero outside the table.
  double operator()(double b, double y1, double y2) const;
  double b_min() const { return scales_.front(); }
  double b_max() const { return scales_.back(); }
  const std::vector<double>& scales() const { return scales_; }

 private:
  std::vector<double> scales_;
  std::vector<GridFunction> grids_;
  double lookup(size_t k, double y1, double y2) const;
};

ExperimentReport run_hn(const HnOptions& h, const RunOptions& o = {});

// ------------------------------------------------------------ bounded side

/// int over the complement of R* of |R_i(x, y) - R_i(x, z)| d rho(x).
Estimate hormander_integral(FieldIndex i, const CZSet& R, const GroupPoint& y, const GroupPoint& z,
                            const OutsideOptions& o = {});

/// Bound on ||R_i a||_1 for a = rho(R)^-1 (1_left - 1_right):
///   (rho(R*) / rho(R))^{1/2} + sup_y H(y, centre), the sup over the eight
///   corners of R.
struct AtomNormBound {
  double inside = 0.0;
  double outside = 0.0;
  double error = 0.0;
  double total() const { return inside + outside; }
};
AtomNormBound riesz_atom_bound(FieldIndex i, const CZSet& R, const OutsideOptions& o = {});

/// The CZ set about (0, 0, 1) with log half height r and the smallest
/// admissible side (times 1.01).
CZSet reference_cz_set(double r);

/// Truncated int |g_ij (1 - cutoff)| d rho over a in [1/T, T].
ScanReport global_tij_scan(FieldIndex i, FieldIndex j, std::span<const double> T_list, double rel_tol = 1e-5);

/// (|beta| + |X - Y| (|grad_X beta| + |grad_Y beta|)) |X - Y|^3.
double standard_estimate_ratio(const ScalarField& local_kernel, const Triple& X, const Triple& Y);

/// check in {hormander, riesz-atoms, tij-global, local-beta}.
ExperimentReport run_bounded(const std::string& check, const RunOptions& o = {});

// -------------------------------------------------------------- expansions

/// Human-readable expansion of k_ij (order = number of e^{-2r} terms kept).
std::string expand_kernel(FieldIndex i, FieldIndex j, int order);

}  // namespace rieszlab
