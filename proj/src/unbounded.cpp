#include <cmath>

#include "rieszlab/experiments.hpp"

namespace rieszlab {

std::vector<double> unbounded_truncations(KitKind kind, double T_max) {
  if (!(T_max >= 1e3)) fail(ErrorKind::InvalidArgument, "T_max must be at least 1e3");
  std::vector<double> T;
  if (kind == KitKind::S1) {
    for (double t : {1e2, 1e4, 1e8}) {
      if (t <= T_max) T.push_back(t);
    }
    return T;
  }
  for (double t = 1e2; t <= T_max * (1 + 1e-12); t *= 10.0) T.push_back(t);
  return T;
}

ExperimentReport run_unbounded(const std::string& kind, FieldIndex i, FieldIndex j, double T_max,
                               const RunOptions& o) {
  ExperimentReport rep;
  rep.seed = o.seed;
  rep.numbers["T_max"] = T_max;
  Kit kit;
  if (kind == "s1") {
    kit = build_s1_kit();
  } else if (kind == "s0") {
    kit = build_s0_kit();
  } else if (kind == "sij") {
    kit = build_sij_kit(i, j);
    rep.numbers["i"] = i.value();
    rep.numbers["j"] = j.value();
  } else {
    fail(ErrorKind::InvalidArgument, "unknown construction '" + kind + "' (s1, s0, sij)");
  }
  rep.id = "unbounded-" + kind;
  for (const auto& [k, v] : kit.params) rep.numbers["kit_" + k] = v;

  const auto samples = [&](int n) { return std::max(1, static_cast<int>(std::lround(n * o.budget))); };
  const AtomEvidence ev = validate_atom(kit.atom);
  rep.add("atom", "the constructed function is an atom (support, size, mean zero)", ev.sup_margin, 0.0,
          ev.valid());
  const LowerBoundReport lb = check_lower_bound(kit, samples(10000), o.seed);
  rep.numbers["lower_bound_c_min"] = lb.c_min;
  rep.numbers["lower_bound_c_max"] = lb.c_max;
  rep.add_le("lower_bound_violations", "pointwise lower bound of the differentiated kernel by c times the weight",
             lb.violations, 0);
  rep.add("lower_bound_constant", "fitted constant c > 0", lb.c_min, 0.0, lb.c_min > 0.0);
  rep.add_le("inclusion", "inner region times E^-1 E stays in the middle region",
             check_inclusion(kit, samples(2000), o.seed + 1).violations, 0);
  rep.add_le("shift", "right shifts by the atom's offset stay in the outer region",
             check_shift(kit, samples(2000), o.seed + 2).violations, 0);

  QuadOptions q{1e-14, o.tol.value_or(1e-8), std::max(1, static_cast<int>(std::lround(400 * o.budget)))};
  const std::vector<double> T = unbounded_truncations(kit.kind, T_max);
  const ScanReport s = scan_tail(kit.weight, kit.inner, T, q);
  rep.curves.emplace_back("scan", s.to_csv());
  rep.labels["model"] = to_string(s.best.model);
  rep.numbers["log_slope"] = s.log_fit.slope;
  rep.numbers["loglog_slope"] = s.loglog_fit.slope;
  rep.numbers["last_decade_variation"] = s.last_decade_variation;
  rep.numbers["I_at_T_max"] = s.points.back().value;

  double cf_err = 0.0;
  for (const ScanPoint& p : s.points) {
    if (auto cf = closed_form_tail(kit, p.T)) cf_err = std::max(cf_err, std::abs(p.value / *cf - 1.0));
  }
  switch (kit.kind) {
    case KitKind::S0: {
      const double want = kPi / 64.0;
      rep.add("loglog_growth", "the weight over the inner region grows like log log T", 0.0, 0.0,
              s.best.model == GrowthModel::LogLog);
      rep.add_le("loglog_slope", "slope against pi/64, relative error", std::abs(s.loglog_fit.slope / want - 1.0),
                 0.05);
      rep.add_le("closed_form", "truncated integrals against the closed form, relative error", cf_err, 1e-3);
      break;
    }
    case KitKind::Sij: {
      const double eps = kit.params.at("eps");
      const double want = eps * eps / 4.0;
      rep.add("log_growth", "the weight over the inner region grows like log T", 0.0, 0.0,
              s.best.model == GrowthModel::Log);
      rep.add_le("log_slope", "slope against eps^2/4, relative error", std::abs(s.log_fit.slope / want - 1.0), 0.05);
      rep.add_le("closed_form", "truncated integrals against the closed form, relative error", cf_err, 1e-3);
      break;
    }
    case KitKind::S1: {
      rep.add("monotone", "truncated integrals strictly increase in T", 0.0, 0.0, s.monotone());
      rep.add("unbounded_model", "best fit is a growing model, not bounded", s.last_decade_variation, 0.01,
              s.best.model != GrowthModel::Bounded);
      break;
    }
  }
  return rep;
}

}  // namespace rieszlab
