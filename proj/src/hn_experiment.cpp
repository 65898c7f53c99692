#include <algorithm>
#include <cmath>
#include <random>

#include "rieszlab/experiments.hpp"

namespace rieszlab {

ScaleTable::ScaleTable(const Psi& psi, const Phi& phi, int per_octave, double b_min, double b_max) {
  if (per_octave < 1 || !(b_min > 0.0) || !(b_max >= b_min)) fail(ErrorKind::InvalidArgument, "bad scale range");
  const int k0 = static_cast<int>(std::floor(per_octave * std::log2(b_min) + 1e-9));
  const int k1 = static_cast<int>(std::ceil(per_octave * std::log2(b_max) - 1e-9));
  const Fn2 kernel = [&psi](double y1, double y2) { return psi(y1, y2); };
  for (int k = k0; k <= k1; ++k) {
    const double b = std::exp2(static_cast<double>(k) / per_octave);
    const double dx = std::min(0.125, b / 4.0);
    const double R = 3.0 + 6.0 * b;
    const int n = 2 * static_cast<int>(std::ceil(R / dx)) + 1;
    GridFunction g = make_grid(n, n, dx, dx, -dx * (n / 2), -dx * (n / 2));
    for (int iy = 0; iy < n; ++iy) {
      const double f2 = phi.f2(g.y(iy));
      if (f2 == 0.0) continue;
      for (int ix = 0; ix < n; ++ix) g.at(ix, iy) = phi.f1(g.x(ix)) * f2;
    }
    scales_.push_back(b);
    grids_.push_back(convolve2d(kernel, g, b));
  }
}

double ScaleTable::lookup(size_t k, double y1, double y2) const {
  const GridFunction& g = grids_[k];
  const double fx = (y1 - g.x0) / g.dx, fy = (y2 - g.y0) / g.dy;
  if (!(fx >= 0.0) || !(fy >= 0.0) || fx >= g.nx - 1 || fy >= g.ny - 1) return 0.0;
  const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
  const double tx = fx - ix, ty = fy - iy;
  return (1 - ty) * ((1 - tx) * g.at(ix, iy) + tx * g.at(ix + 1, iy)) +
         ty * ((1 - tx) * g.at(ix, iy + 1) + tx * g.at(ix + 1, iy + 1));
}

double ScaleTable::operator()(double b, double y1, double y2) const {
  if (b < scales_.front() || b > scales_.back()) return 0.0;
  const auto it = std::upper_bound(scales_.begin(), scales_.end(), b);
  if (it == scales_.end()) return lookup(scales_.size() - 1, y1, y2);
  const size_t hi = static_cast<size_t>(it - scales_.begin());
  const size_t lo = hi - 1;
  const double w = std::log(b / scales_[lo]) / std::log(scales_[hi] / scales_[lo]);
  return (1 - w) * lookup(lo, y1, y2) + w * lookup(hi, y1, y2);
}

namespace {

// Largest eta in {1/2, 1/4, ...} with G of one sign on [-eta, eta]^2 x [2^-1/2, 2^1/2];
// returns (eta, min |G|).
std::pair<double, double> find_window(const ScaleTable& G) {
  for (double eta = 0.5; eta >= 1.0 / 64; eta /= 2) {
    double lo = kInf, hi = -kInf;
    for (double b : G.scales()) {
      if (b < std::sqrt(0.5) * (1 - 1e-12) || b > std::sqrt(2.0) * (1 + 1e-12)) continue;
      for (int s1 = -8; s1 <= 8; ++s1) {
        for (int s2 = -8; s2 <= 8; ++s2) {
          const double v = G(b, eta * s1 / 8.0, eta * s2 / 8.0);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    if (lo > 0.0) return {eta, lo};
    if (hi < 0.0) return {eta, -hi};
  }
  fail(ErrorKind::SearchFailure, "psi * phi changes sign in every window about the origin");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ExperimentReport run_hn(const HnOptions& h, const RunOptions& o) {
  if (h.N_list.empty()) fail(ErrorKind::InvalidArgument, "empty N list");
  ExperimentReport rep;
  rep.id = "hn";
  rep.seed = o.seed;
  rep.numbers["L"] = h.L;
  rep.numbers["p"] = h.p;
  rep.numbers["q"] = h.q;
  rep.numbers["draws"] = h.draws;
  rep.numbers["grid_per_octave"] = h.grid;
  rep.numbers["i"] = h.i;
  rep.numbers["j"] = h.j;
  const int mc = std::max(100, static_cast<int>(std::lround(h.mc_samples * o.budget)));
  rep.numbers["mc_samples"] = mc;
  for (int N : h.N_list) {
    if (!(N >= 1 && N < std::log(h.L))) fail(ErrorKind::InvalidArgument, "each N must satisfy 1 <= N < log L");
  }
  const int N_max = *std::max_element(h.N_list.begin(), h.N_list.end());

  const Psi psi = psi_ij(FieldIndex{h.i}, FieldIndex{h.j});
  const Phi phi = search_phi(psi);
  rep.labels["phi"] = to_string(phi.kind);
  rep.numbers["psi_phi_origin"] = psi_phi_at_origin(psi, phi);

  const double a_top = 4.0;
  const double b_cap = 8.0;
  const ScaleTable G(psi, phi, h.grid, std::exp2(-h.q * N_max) / 4.0, b_cap);
  const auto [eta, delta] = find_window(G);
  const double t = delta / 2;
  rep.numbers["eta"] = eta;
  rep.numbers["delta"] = delta;
  rep.numbers["t"] = t;

  std::vector<double> ratio_N, ratio_N1, norm_ratio, implied;
  for (int N : h.N_list) {
    const HNParams par{N, h.L, h.p, h.q};
    const std::string tag = "N" + std::to_string(N);

    // rho{|psi_a * h_N| > t} over x in [-L-1, L+1]^2, a in [2^{-qN}/4, 4].
    const HN hn(par, phi, o.seed + static_cast<std::uint64_t>(N));
    const double a_lo = std::exp2(-h.q * N) / 4.0;
    const double side = 2.0 * (h.L + 1.0);
    const double vol = side * side * std::log(a_top / a_lo);
    std::mt19937_64 rng(o.seed * 7919 + static_cast<std::uint64_t>(N));
    std::uniform_real_distribution<double> X(-h.L - 1.0, h.L + 1.0), U(std::log(a_lo), std::log(a_top));
    long hits = 0;
    for (int s = 0; s < mc; ++s) {
      const double x1 = X(rng), x2 = X(rng), a = std::exp(U(rng));
      double F = 0.0;
      for (int n = 0; n <= N; ++n) {
        const double lam = std::exp2(h.q * n);
        const double b = lam * a;
        if (b > b_cap) break;
        const double R = 3.0 + 6.0 * b;
        const double z1 = lam * x1, z2 = lam * x2;
        const int km = hn.kmax(n);
        const int i_lo = std::max(-km, static_cast<int>(std::ceil((z1 - R) / h.p)));
        const int i_hi = std::min(km, static_cast<int>(std::floor((z1 + R) / h.p)));
        const int j_lo = std::max(-km, static_cast<int>(std::ceil((z2 - R) / h.p)));
        const int j_hi = std::min(km, static_cast<int>(std::floor((z2 + R) / h.p)));
        for (int k1 = i_lo; k1 <= i_hi; ++k1) {
          for (int k2 = j_lo; k2 <= j_hi; ++k2) F += hn.sign(n, k1, k2) * G(b, z1 - h.p * k1, z2 - h.p * k2);
        }
      }
      hits += std::abs(F) > t;
    }
    const double frac = static_cast<double>(hits) / mc;
    const double M = vol * frac;
    const double M_err = vol * std::sqrt(frac * (1 - frac) / mc);
    rep.numbers[tag + "_level_set_measure"] = M;
    rep.numbers[tag + "_level_set_stderr"] = M_err;
    ratio_N.push_back(M / (N * h.L * h.L));
    ratio_N1.push_back(M / ((N + 1) * h.L * h.L));
    rep.numbers[tag + "_level_ratio_N"] = ratio_N.back();
    rep.numbers[tag + "_level_ratio_N1"] = ratio_N1.back();

    std::vector<double> norms;
    for (int d = 0; d < h.draws; ++d) {
      norms.push_back(HN(par, phi, o.seed * 1000003 + 1000 * static_cast<std::uint64_t>(N) + d).l2_norm());
    }
    const double med = median(norms);
    rep.numbers[tag + "_l2_median"] = med;
    rep.numbers[tag + "_l2_max"] = *std::max_element(norms.begin(), norms.end());
    norm_ratio.push_back(med / (std::sqrt(static_cast<double>(N)) * h.L));
    rep.numbers[tag + "_l2_ratio"] = norm_ratio.back();
    implied.push_back(t * M / (2.0 * h.L * med));
    rep.numbers[tag + "_implied_ratio"] = implied.back();
  }

  const double c_low = *std::min_element(ratio_N.begin(), ratio_N.end());
  rep.numbers["level_ratio_constant"] = c_low;
  rep.add_ge("level_set_lower_bound", "rho{|psi_a * h_N| > t} >= c N L^2 with c recorded from the run", c_low,
             std::numeric_limits<double>::min());
  rep.add_ge("level_set_trend", "no decreasing trend: measure / ((N + 1) L^2) at the largest N over the smallest",
             ratio_N1.back() / ratio_N1.front(), 0.9);
  const double C_up = *std::max_element(norm_ratio.begin(), norm_ratio.end());
  rep.numbers["l2_ratio_constant"] = C_up;
  rep.add_le("l2_upper_trend", "median ||h_N||_2 / (sqrt(N) L) does not grow: largest N over smallest",
             norm_ratio.back() / norm_ratio.front(), 1.1);
  bool increasing = true;
  for (size_t k = 1; k < implied.size(); ++k) increasing = increasing && implied[k] > implied[k - 1];
  rep.add("implied_ratio_increasing", "||f_N * k^3||_1 / ||f_N||_H1 lower bound increases with N",
          implied.back() / implied.front(), 1.0, increasing);
  return rep;
}

}  // namespace rieszlab
