#include "rieszlab/term_algebra.hpp"
#include "rieszlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rieszlab {

namespace {

using i128 = __int128;

bool fits(i128 v) { return v <= INT64_MAX && v >= -INT64_MAX; }

}  // namespace

Coeff::Coeff(std::int64_t num, std::int64_t den) {
  if (den == 0) fail(ErrorKind::InvalidArgument, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  num_ = g ? num / g : 0;
  den_ = g ? den / g : 1;
  val_ = static_cast<double>(num_) / static_cast<double>(den_);
}

Coeff Coeff::inexact(double v) {
  Coeff c;
  c.exact_ = false;
  c.val_ = v;
  return c;
}

double Coeff::value() const { return exact_ ? static_cast<double>(num_) / static_cast<double>(den_) : val_; }

Coeff Coeff::operator+(const Coeff& o) const {
  if (exact_ && o.exact_) {
    const i128 n = static_cast<i128>(num_) * o.den_ + static_cast<i128>(o.num_) * den_;
    const i128 d = static_cast<i128>(den_) * o.den_;
    if (fits(n) && fits(d)) {
      // Reduce in 128 bits first so moderate intermediates stay exact.
      i128 a = n < 0 ? -n : n, b = d;
      while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
      }
      const i128 g = a == 0 ? 1 : a;
      return Coeff(static_cast<std::int64_t>(n / g), static_cast<std::int64_t>(d / g));
    }
  }
  return inexact(value() + o.value());
}

Coeff Coeff::operator-() const {
  if (exact_) return Coeff(-num_, den_);
  return inexact(-val_);
}

Coeff Coeff::operator*(const Coeff& o) const {
  if (exact_ && o.exact_) {
    const i128 n = static_cast<i128>(num_) * o.num_;
    const i128 d = static_cast<i128>(den_) * o.den_;
    if (fits(n) && fits(d)) {
      const std::int64_t g = std::gcd(static_cast<std::int64_t>(n < 0 ? -n : n), static_cast<std::int64_t>(d));
      if (g == 0) return Coeff(0);
      return Coeff(static_cast<std::int64_t>(n / g), static_cast<std::int64_t>(d / g));
    }
  }
  return inexact(value() * o.value());
}

Coeff Coeff::operator/(const Coeff& o) const {
  if (o.is_zero()) fail(ErrorKind::InvalidArgument, "division by a zero coefficient");
  if (o.exact_) return *this * Coeff(o.den_, o.num_);
  return inexact(value() / o.value());
}

bool Coeff::operator==(const Coeff& o) const {
  if (exact_ && o.exact_) return num_ == o.num_ && den_ == o.den_;
  return value() == o.value();
}

std::string Coeff::str() const {
  std::ostringstream os;
  if (!exact_) {
    os.precision(17);
    os << val_;
    return os.str();
  }
  os << num_;
  if (den_ != 1) os << '/' << den_;
  return os.str();
}

std::string Coeff::str_over_pi() const {
  std::ostringstream os;
  if (!exact_) {
    os.precision(17);
    os << val_ << "/pi";
    return os.str();
  }
  if (num_ == 0) return "0";
  os << num_;
  if (den_ == 1) {
    os << "/pi";
  } else {
    os << "/(" << den_ << "*pi)";
  }
  return os.str();
}

ExpSeries::ExpSeries(std::vector<double> coefficients, bool truncated)
    : c_(std::move(coefficients)), truncated_(truncated) {}

ExpSeries ExpSeries::geometric(int K) {
  if (K < 0) fail(ErrorKind::InvalidArgument, "series order must be nonnegative");
  return ExpSeries(std::vector<double>(static_cast<size_t>(K) + 1, 1.0), true);
}

ExpSeries ExpSeries::operator*(const ExpSeries& o) const {
  const int K = std::min(order(), o.order());
  if (K < 0) return ExpSeries();
  std::vector<double> c(static_cast<size_t>(K) + 1, 0.0);
  bool dropped = truncated_ || o.truncated_;
  for (int i = 0; i <= order(); ++i) {
    for (int j = 0; j <= o.order(); ++j) {
      const double v = c_[i] * o.c_[j];
      if (i + j <= K) {
        c[i + j] += v;
      } else if (v != 0.0) {
        dropped = true;
      }
    }
  }
  return ExpSeries(std::move(c), dropped);
}

ExpSeries ExpSeries::derivative() const {
  std::vector<double> c(c_.size(), 0.0);
  for (size_t k = 0; k < c_.size(); ++k) c[k] = -2.0 * static_cast<double>(k) * c_[k];
  return ExpSeries(std::move(c), truncated_);
}

double ExpSeries::evaluate(double r) const {
  const double q = std::exp(-2.0 * r);
  double s = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * q + *it;
  return s;
}

bool classify_integrability(const Exponent& m, int p, HalfSpace region) {
  if (m[1] < 0 || m[2] < 0 || m[0] < -1) {
    std::ostringstream os;
    os << "exponent (" << m[0] << ", " << m[1] << ", " << m[2] << ") is outside Z^3_+";
    fail(ErrorKind::InvalidArgument, os.str());
  }
  if (p < 0) fail(ErrorKind::InvalidArgument, "p must be nonnegative");
  const int planar = m[1] + m[2] - 2 * p;
  if (region == HalfSpace::Plus) return planar < -2 && (m[0] + m[1] + m[2]) - p < -2;
  return planar < -2 && m[0] + p > 0;
}

bool integrable_everywhere(const Exponent& m, int p) {
  return classify_integrability(m, p, HalfSpace::Plus) && classify_integrability(m, p, HalfSpace::Minus);
}

void TermSum::add(const Exponent& m, int p, const Coeff& c) {
  if (c.is_zero()) return;
  if (p > cutoff_) {
    truncated_ = true;
    return;
  }
  const Key k{p, m};
  auto it = terms_.find(k);
  if (it == terms_.end()) {
    terms_.emplace(k, c);
  } else {
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

std::vector<std::pair<TermSum::Key, Coeff>> TermSum::principal_terms() const {
  std::vector<std::pair<Key, Coeff>> out;
  for (const auto& [k, c] : terms_) {
    if (!integrable_everywhere(k.m, k.p)) out.emplace_back(k, c);
  }
  return out;
}

std::vector<std::pair<TermSum::Key, Coeff>> TermSum::q_terms() const {
  std::vector<std::pair<Key, Coeff>> out;
  for (const auto& [k, c] : terms_) {
    if (integrable_everywhere(k.m, k.p)) out.emplace_back(k, c);
  }
  return out;
}

TermSum TermSum::only_q() const {
  TermSum out(cutoff_);
  out.truncated_ = truncated_;
  for (const auto& [k, c] : q_terms()) out.add(k.m, k.p, c);
  return out;
}

namespace {

std::vector<Monomial> group(const std::map<TermSum::Key, Coeff>& flat, int cutoff, bool want_principal) {
  // Terms sharing m and the parity of p form one x^m e^{-p0 r} S(r). A group
  // is principal when its lowest term is; higher p only improves integrability.
  std::map<std::pair<Exponent, int>, std::vector<std::pair<int, Coeff>>> buckets;
  for (const auto& [k, c] : flat) buckets[{k.m, k.p % 2}].emplace_back(k.p, c);
  std::vector<Monomial> out;
  for (auto& [key, list] : buckets) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const bool principal = !integrable_everywhere(key.first, list.front().first);
    if (principal != want_principal) continue;
    Monomial mono;
    mono.m = key.first;
    mono.p = list.front().first;
    mono.coeff = list.front().second;
    const int K = std::max(0, (cutoff - mono.p) / 2);
    std::vector<double> s(static_cast<size_t>(K) + 1, 0.0);
    for (const auto& [p, c] : list) s[static_cast<size_t>((p - mono.p) / 2)] = (c / mono.coeff).value();
    mono.series = ExpSeries(std::move(s), true);
    out.push_back(std::move(mono));
  }
  std::sort(out.begin(), out.end(), [](const Monomial& a, const Monomial& b) {
    return std::tie(a.p, a.m) < std::tie(b.p, b.m);
  });
  return out;
}

}  // namespace

std::vector<Monomial> TermSum::principal() const { return group(terms_, cutoff_, true); }

std::vector<Monomial> TermSum::q_bucket() const { return group(terms_, cutoff_, false); }

int TermSum::effective_order() const {
  const auto pr = principal_terms();
  int pmax = -1;
  if (pr.empty()) {
    if (terms_.empty()) return cutoff_ / 2;
    pmax = terms_.begin()->first.p;
  } else {
    for (const auto& [k, c] : pr) pmax = std::max(pmax, k.p);
  }
  return (cutoff_ - pmax) / 2;
}

TermSum expansion_W(int K) {
  if (K < 1) fail(ErrorKind::InvalidArgument, "truncation order K must be at least 1");
  TermSum ts(2 * K + 1);
  // 1/(4 pi) a^-1 / sinh r = (1/2pi) a^-1 sum_k e^{-(2k+1) r}
  for (int k = 0; k <= K; ++k) ts.add({-1, 0, 0}, 2 * k + 1, Coeff(1, 2));
  return ts;
}

TermSum derive(const TermSum& ts, FieldIndex i) {
  TermSum out(ts.cutoff_);
  out.truncated_ = ts.truncated_;
  const int P = ts.cutoff_;
  for (const auto& [key, c] : ts.terms_) {
    const Exponent& m = key.m;
    const int p = key.p;
    if (i == 0) {
      // (m0 + p) x^m e^{-pr}
      out.add(m, p, c * Coeff(m[0] + p));
      // -2p a x^m sum_{k>=0} e^{-(p+2k+1) r}
      for (int q = p + 1; q <= P + 1; q += 2) out.add({m[0] + 1, m[1], m[2]}, q, c * Coeff(-2 * p));
      // +2p x^m sum_{k>=1} e^{-(p+2k) r}
      for (int q = p + 2; q <= P + 1; q += 2) out.add(m, q, c * Coeff(2 * p));
    } else {
      const int idx = i.value();
      if (m[idx] > 0) {
        Exponent lowered = m;
        lowered[idx] -= 1;
        lowered[0] += 1;
        out.add(lowered, p, c * Coeff(m[idx]));
      }
      Exponent raised = m;
      raised[idx] += 1;
      for (int q = p + 1; q <= P + 1; q += 2) out.add(raised, q, c * Coeff(-2 * p));
    }
  }
  if (!out.terms_.empty() && out.effective_order() <= 0) {
    fail(ErrorKind::OrderExhausted, "series order exhausted; increase K");
  }
  return out;
}

namespace {

double monomial_value(const Exponent& m, const GroupPoint& x) {
  return std::pow(x.a(), m[0]) * std::pow(x.x1(), m[1]) * std::pow(x.x2(), m[2]);
}

}  // namespace

Evaluation evaluate_series(const TermSum& ts, const GroupPoint& p) {
  const RadialData d = radial(p);
  const double E = std::exp(-d.r);
  CompensatedSum acc;
  double top = 0.0;
  for (const auto& [k, c] : ts.terms()) {
    const double v = c.value() / kPi * monomial_value(k.m, p) * std::pow(E, k.p);
    acc.add(v);
    if (k.p >= ts.cutoff() - 1) top += std::abs(v);
  }
  Evaluation ev;
  ev.value = acc.value();
  const double q = E * E;
  ev.truncation_bound = 4.0 * top * q / (1.0 - q);
  return ev;
}

Evaluation evaluate_with_bound(const TermSum& ts, const GroupPoint& p) {
  if (radius(p) <= 1.0) fail(ErrorKind::OutOfDomain, "expansions are valid only outside the closed unit ball");
  return evaluate_series(ts, p);
}

double evaluate(const TermSum& ts, const GroupPoint& p) { return evaluate_with_bound(ts, p).value; }

SecondOrderShape second_order_kernel(FieldIndex i, FieldIndex j, int K) {
  SecondOrderShape s;
  s.i = i;
  s.j = j;
  s.kernel = derive(derive(expansion_W(K), j), i);
  bool have_alpha = false, have_beta = false;
  for (const auto& [k, c] : s.kernel.principal_terms()) {
    const int deg = k.m[0] + k.m[1] + k.m[2];
    if (k.p == 2 && deg == 0 && !have_alpha) {
      s.alpha = c;
      s.m = k.m;
      have_alpha = true;
    } else if (k.p == 3 && deg == 1 && !have_beta) {
      s.beta = c;
      s.n = k.m;
      have_beta = true;
    } else {
      std::ostringstream os;
      os << "unexpected principal term p=" << k.p << " m=(" << k.m[0] << "," << k.m[1] << "," << k.m[2] << ")";
      fail(ErrorKind::ShapeMismatch, os.str());
    }
  }
  if (!have_beta || s.beta.is_zero()) fail(ErrorKind::ShapeMismatch, "beta_ij vanishes");
  return s;
}

ThirdOrderShape third_derivative_X2(FieldIndex i, FieldIndex j, int K) {
  ThirdOrderShape s;
  s.i = i;
  s.j = j;
  s.kernel = derive(second_order_kernel(i, j, K).kernel, FieldIndex{2});
  int n3 = 0;
  bool have_h = false, have_n = false;
  for (const auto& [k, c] : s.kernel.principal_terms()) {
    const int deg = k.m[0] + k.m[1] + k.m[2];
    auto mismatch = [&] {
      std::ostringstream os;
      os << "unexpected principal term p=" << k.p << " m=(" << k.m[0] << "," << k.m[1] << "," << k.m[2] << ")";
      fail(ErrorKind::ShapeMismatch, os.str());
    };
    if (deg != k.p - 2) mismatch();
    if (k.p == 2 && !have_h) {
      s.gamma = c;
      s.h = k.m;
      have_h = true;
    } else if (k.p == 3 && n3 == 0) {
      s.eta = c;
      s.l = k.m;
      ++n3;
    } else if (k.p == 3 && n3 == 1) {
      s.sigma = c;
      s.m = k.m;
      ++n3;
    } else if (k.p == 4 && !have_n) {
      s.theta = c;
      s.n = k.m;
      have_n = true;
    } else {
      mismatch();
    }
  }
  if (!have_n || s.theta.is_zero()) fail(ErrorKind::ShapeMismatch, "theta_ij vanishes");
  return s;
}

double ThirdOrderShape::P(double x1, double x2, double a) const {
  const double norm2 = x1 * x1 + x2 * x2 + a * a;
  double s = 0.0;
  for (const auto& [k, c] : kernel.principal_terms()) {
    const double mono = std::pow(a, k.m[0]) * std::pow(x1, k.m[1]) * std::pow(x2, k.m[2]);
    s += c.value() / kPi * mono * std::pow(a, k.p) * std::pow(norm2, 4 - k.p);
  }
  return s;
}

}  // namespace rieszlab
