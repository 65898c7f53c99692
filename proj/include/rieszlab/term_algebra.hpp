#pragma once

// Far-field calculus for W and its derivatives. A TermSum is a finite sum of
// flat terms  c * a^m0 x1^m1 x2^m2 e^{-p r}  kept up to an absolute exponent
// cutoff P = 2K + 1. The derivative rules used are exact identities,
//   X_i r = 2 x_i sum_{k>=0} e^{-(2k+1) r}                      (i = 1, 2)
//   X_0 r = 2 a sum_{k>=0} e^{-(2k+1) r} - 1 - 2 sum_{k>=1} e^{-2k r}
// so every kept term is exact; only exponents above P are dropped.
// All coefficients share one factor 1/pi and are otherwise rationals.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rieszlab/group.hpp"

namespace rieszlab {

/// Rational number with a double fallback once the int64 range is left.
class Coeff {
 public:
  Coeff() = default;
  Coeff(std::int64_t num, std::int64_t den = 1);
  static Coeff inexact(double v);

  bool exact() const { return exact_; }
  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const;
  bool is_zero() const { return exact_ ? num_ == 0 : val_ == 0.0; }

  Coeff operator+(const Coeff& o) const;
  Coeff operator-() const;
  Coeff operator-(const Coeff& o) const { return *this + (-o); }
  Coeff operator*(const Coeff& o) const;
  Coeff operator/(const Coeff& o) const;
  bool operator==(const Coeff& o) const;

  /// "p/q" or "p", exact representation only.
  std::string str() const;
  /// The coefficient times 1/pi, e.g. "-2/pi", "1/(2*pi)", "0".
  std::string str_over_pi() const;

 private:
  bool exact_ = true;
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  double val_ = 0.0;
};

/// c_0 + c_1 e^{-2r} + ... + c_K e^{-2Kr}.
class ExpSeries {
 public:
  ExpSeries() = default;
  explicit ExpSeries(std::vector<double> coefficients, bool truncated = false);
  /// 1 + e^{-2r} + ... + e^{-2Kr}, the expansion of 1 / (1 - e^{-2r}).
  static ExpSeries geometric(int K);

  int order() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coefficients() const { return c_; }
  bool truncated() const { return truncated_; }
  bool is_s_type() const { return !c_.empty() && c_[0] == 1.0; }
  bool is_r_type() const { return c_.empty() || c_[0] == 0.0; }

  /// Product re-truncated at the smaller order.
  ExpSeries operator*(const ExpSeries& o) const;
  /// Termwise d/dr.
  ExpSeries derivative() const;
  double evaluate(double r) const;

 private:
  std::vector<double> c_;
  bool truncated_ = false;
};

using Exponent = std::array<int, 3>;  // (m0, m1, m2)

/// coeff * a^m0 x1^m1 x2^m2 e^{-pr} * series(r); coeff carries a factor 1/pi.
struct Monomial {
  Exponent m{0, 0, 0};
  int p = 0;
  Coeff coeff;
  ExpSeries series;

  int degree() const { return m[0] + m[1] + m[2]; }
};

enum class HalfSpace { Plus, Minus };

/// Integrability of x^m e^{-pr} on G_+ (a > 1) or G_- (a < 1) outside the unit
/// ball. Rejects exponents outside Z^3_+ (m1, m2 >= 0, m0 >= -1).
bool classify_integrability(const Exponent& m, int p, HalfSpace region);
bool integrable_everywhere(const Exponent& m, int p);

class TermSum {
 public:
  struct Key {
    int p;
    Exponent m;
    auto operator<=>(const Key&) const = default;
  };

  TermSum() = default;
  explicit TermSum(int cutoff) : cutoff_(cutoff) {}

  int cutoff() const { return cutoff_; }
  /// Smallest remaining series order among principal groups.
  int effective_order() const;
  bool truncation_flag() const { return truncated_; }

  void add(const Exponent& m, int p, const Coeff& c);
  const std::map<Key, Coeff>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Grouped views: terms with the same m and the same parity of p are
  /// gathered into one Monomial x^m e^{-p_min r} S(r).
  std::vector<Monomial> principal() const;
  std::vector<Monomial> q_bucket() const;

  /// Flat principal terms (non-integrable somewhere outside B_1).
  std::vector<std::pair<Key, Coeff>> principal_terms() const;
  std::vector<std::pair<Key, Coeff>> q_terms() const;

  TermSum only_q() const;

 private:
  friend TermSum derive(const TermSum&, FieldIndex);
  int cutoff_ = 25;
  bool truncated_ = false;
  std::map<Key, Coeff> terms_;
};

/// (1/2pi) a^-1 e^{-r} S(r) with S = sum_{k<=K} e^{-2kr}. Throws for K < 1.
TermSum expansion_W(int K = 12);

/// X_i applied to every term. Throws OrderExhausted if the principal part has
/// no series order left.
TermSum derive(const TermSum& ts, FieldIndex i);

struct Evaluation {
  double value = 0.0;
  double truncation_bound = 0.0;
};

/// Sum of all terms at p; throws OutOfDomain for r(p) <= 1.
double evaluate(const TermSum& ts, const GroupPoint& p);
Evaluation evaluate_with_bound(const TermSum& ts, const GroupPoint& p);
/// Same without the domain check (the series converge for every r > 0).
Evaluation evaluate_series(const TermSum& ts, const GroupPoint& p);

/// k_ij = X_i X_j W matched to alpha x^m e^{-2r} + beta x^n e^{-3r} + Q.
struct SecondOrderShape {
  int i = 0, j = 0;
  Coeff alpha, beta;  // times 1/pi
  Exponent m{0, 0, 0}, n{0, 0, 0};
  TermSum kernel;
};

SecondOrderShape second_order_kernel(FieldIndex i, FieldIndex j, int K = 12);

/// X_2 k_ij matched to
///   gamma x^h e^{-2r} + eta x^l e^{-3r} + sigma x^m e^{-3r} + theta x^n e^{-4r} + Q.
struct ThirdOrderShape {
  int i = 0, j = 0;
  Coeff gamma, eta, sigma, theta;  // times 1/pi
  Exponent h{0, 0, 0}, l{0, 0, 0}, m{0, 0, 0}, n{0, 0, 0};
  TermSum kernel;

  /// P(x) = sum c x^m a^p |x|^{2(4-p)} over the principal terms; homogeneous
  /// of degree 6 with e^{-pr} ~ a^p |x|^{-2p} for large a.
  double P(double x1, double x2, double a) const;
};

ThirdOrderShape third_derivative_X2(FieldIndex i, FieldIndex j, int K = 12);

}  // namespace rieszlab
