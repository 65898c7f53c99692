// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rieszlab/experiments.hpp"

using namespace rieszlab;

namespace {

int failures = 0;

void line(int n, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

struct Timed {
  ExperimentReport rep;
  double seconds = 0.0;
  std::string error;
};

Timed timed(const std::function<ExperimentReport()>& f) {
  Timed t;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    t.rep = f();
  } catch (const std::exception& e) {
    t.error = e.what();
  }
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

const Check* find(const ExperimentReport& r, const std::string& name) {
  for (const Check& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

// All named checks present and passing; failing names collected into detail.
bool checks_pass(const Timed& t, const std::vector<std::string>& names, std::string& detail) {
  if (!t.error.empty()) {
    detail += " error: " + t.error;
    return false;
  }
  bool ok = true;
  for (const std::string& n : names) {
    const Check* c = find(t.rep, n);
    if (!c || !c->pass) {
      ok = false;
      char buf[160];
      if (c) {
        std::snprintf(buf, sizeof buf, " %s=%.6g vs %.6g;", n.c_str(), c->value, c->bound);
      } else {
        std::snprintf(buf, sizeof buf, " %s missing;", n.c_str());
      }
      detail += buf;
    }
  }
  return ok;
}

bool prefix_pass(const Timed& t, const std::string& prefix, std::string& detail) {
  std::vector<std::string> names;
  for (const Check& c : t.rep.checks) {
    if (c.name.rfind(prefix, 0) == 0) names.push_back(c.name);
  }
  if (names.empty() && t.error.empty()) {
    detail += " no checks named " + prefix + "*;";
    return false;
  }
  return checks_pass(t, names, detail);
}

std::string secs(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f s", s);
  return buf;
}

}  // namespace

int main() {
  const RunOptions opt{1, std::nullopt, 1.0};

  // 1. metric and measure
  const Timed metric = timed([&] { return run_verify("metric", opt); });
  {
    std::string d = secs(metric.seconds);
    bool ok = checks_pass(metric, {"left_invariance", "inversion_symmetry", "ball_volume_2"}, d);
    ok = ok && metric.seconds < 10.0;
    line(1, ok, "metric invariance, inversion symmetry and ball volume, under 10 s", d);
  }

  const Timed kernels = timed([&] { return run_verify("kernels", opt); });
  // 2. heat kernel
  {
    std::string d = "kernels suite " + secs(kernels.seconds);
    bool ok = checks_pass(kernels,
                          {"heat_mass_t0.1", "heat_mass_t1", "heat_semigroup", "subordination_U", "subordination_W"}, d);
    ok = ok && kernels.seconds < 120.0;
    line(2, ok, "heat kernel mass, semigroup and subordination, under 2 min", d);
  }
  // 3. derivative oracles
  {
    std::string d;
    bool ok = checks_pass(metric, {"radius_derivatives"}, d);
    ok = prefix_pass(kernels, "first_order_k", d) && ok;
    ok = checks_pass(kernels, {"second_order_X2k1", "second_order_X0k0"}, d) && ok;
    line(3, ok, "closed-form derivatives against finite differences", d.empty() ? "all oracles agree" : d);
  }

  const Timed terms = timed([&] { return run_verify("term-algebra", opt); });
  // 4. term algebra
  {
    std::string d;
    const bool ok = checks_pass(terms,
                                {"beta_nonzero", "second_order_shape", "theta_nonzero",
                                 "engine_vs_finite_differences", "alpha00_constant", "beta00_constant"},
                                d);
    line(4, ok, "second and third order shapes, engine agreement, alpha00 = -1/pi and beta00 = 2/pi",
         d.empty() ? "all match" : d);
  }
  // 5. integrability criterion
  {
    std::string d;
    const bool ok = checks_pass(terms, {"integrability_agreement"}, d);
    line(5, ok, "integrability classification agrees with tail scans on the 20-case grid",
         d.empty() ? "100% agreement" : d);
  }

  // 6, 7. unboundedness scans and lower bounds
  const Timed s0 = timed([&] { return run_unbounded("s0", FieldIndex{0}, FieldIndex{0}, 1e8, opt); });
  const Timed sij = timed([&] { return run_unbounded("sij", FieldIndex{0}, FieldIndex{0}, 1e8, opt); });
  const Timed s1 = timed([&] { return run_unbounded("s1", FieldIndex{0}, FieldIndex{0}, 1e8, opt); });
  {
    std::string d = "s0 " + secs(s0.seconds) + ", sij " + secs(sij.seconds) + ", s1 " + secs(s1.seconds) + ";";
    bool ok = checks_pass(s0, {"loglog_growth", "loglog_slope"}, d);
    ok = checks_pass(sij, {"log_growth", "log_slope"}, d) && ok;
    ok = checks_pass(s1, {"monotone", "unbounded_model"}, d) && ok;
    ok = ok && s0.seconds < 120.0 && sij.seconds < 120.0 && s1.seconds < 120.0;
    line(6, ok, "S0 slope pi/64, Sij slope eps^2/4, S1 monotone and unbounded, each under 2 min", d);
  }
  {
    std::string d;
    bool ok = checks_pass(s1, {"lower_bound_violations", "lower_bound_constant"}, d);
    ok = checks_pass(s0, {"lower_bound_violations", "lower_bound_constant"}, d) && ok;
    char buf[96];
    if (ok) {
      std::snprintf(buf, sizeof buf, "c = %.4g on Gamma, %.4g on Omega", s1.rep.numbers.at("lower_bound_c_min"),
                    s0.rep.numbers.at("lower_bound_c_min"));
      d = buf;
    }
    line(7, ok, "pointwise lower bounds with c > 0 and no violations over 10^4 samples", d);
  }

  // 8. h_N
  const Timed hn = timed([&] { return run_hn(HnOptions{}, opt); });
  {
    std::string d = secs(hn.seconds) + ";";
    bool ok = checks_pass(hn, {"level_set_lower_bound", "level_set_trend", "l2_upper_trend", "implied_ratio_increasing"},
                          d);
    ok = ok && hn.seconds < 300.0;
    line(8, ok, "h_N level sets, L2 norms and implied ratio for N = 2, 3, 4, under 5 min", d);
  }

  // 9. boundedness side
  {
    std::string d;
    bool ok = true;
    for (const char* check : {"hormander", "riesz-atoms", "tij-global", "local-beta"}) {
      const Timed b = timed([&] { return run_bounded(check, opt); });
      d += std::string(" ") + check + " " + secs(b.seconds) + ";";
      if (!b.error.empty()) {
        d += " error: " + b.error + ";";
        ok = false;
        continue;
      }
      for (const Check& c : b.rep.checks) ok = checks_pass(b, {c.name}, d) && ok;
    }
    line(9, ok, "Hormander trend, atom norms, global g_ij integral and local standard estimates", d);
  }

  // 10. determinism
  {
    std::string d;
    bool ok = true;
    const std::vector<std::pair<std::string, std::function<ExperimentReport()>>> runs{
        {"verify metric", [] { return run_verify("metric", {11}); }},
        {"unbounded sij", [] { return run_unbounded("sij", FieldIndex{1}, FieldIndex{2}, 1e6, {11}); }},
        {"hn", [] {
           HnOptions h;
           h.N_list = {2, 3};
           h.draws = 4;
           h.mc_samples = 2000;
           return run_hn(h, {11});
         }},
        {"bounded local-beta", [] { return run_bounded("local-beta", {11, std::nullopt, 0.2}); }},
    };
    for (const auto& [name, f] : runs) {
      const Timed a = timed(f), b = timed(f);
      const bool same = a.error.empty() && b.error.empty() && a.rep.to_json() == b.rep.to_json();
      if (!same) d += " " + name + " differs;";
      ok = ok && same;
    }
    line(10, ok, "identical seeds give byte-identical JSON reports", d.empty() ? "4 experiments, 2 runs each" : d);
  }

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
