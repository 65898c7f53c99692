// rieszlab: command-line front end for the experiment runners.
// Exit codes: 0 all checks pass, 1 a check failed, 2 bad input, 3 budget exhausted.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rieszlab/experiments.hpp"

namespace {

using namespace rieszlab;

struct Common {
  std::uint64_t seed = 1;
  std::optional<double> tol;
  double budget = 1.0;
  std::string out;
  std::string csv;

  RunOptions run() const { return RunOptions{seed, tol, budget}; }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--tol", c.tol, "override the quadrature tolerance");
  app->add_option("--budget", c.budget, "scale sample counts and quadrature caps")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "write the JSON report here instead of stdout");
  app->add_option("--csv", c.csv, "directory for CSV scan curves");
}

int emit(const ExperimentReport& rep, const Common& c) {
  if (c.out.empty()) {
    std::cout << rep.to_json();
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) fail(ErrorKind::InvalidArgument, "cannot write " + c.out);
    f << rep.to_json();
  }
  if (!c.csv.empty()) {
    std::filesystem::create_directories(c.csv);
    for (const auto& [name, text] : rep.curves) {
      std::ofstream(std::filesystem::path(c.csv) / (rep.id + "_" + name + ".csv"), std::ios::binary) << text;
    }
  }
  for (const std::string& name : rep.failing()) std::cerr << "check failed: " << name << "\n";
  return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on Riesz transforms of the group R^2 x R+"};
  app.require_subcommand(1);

  Common c;
  std::string suite, kind, check;
  int i = 0, j = 0, order = 3;
  double tmax = 1e8;
  HnOptions hn;

  auto* verify = app.add_subcommand("verify", "oracle suites");
  verify->add_option("suite", suite, "metric, kernels, term-algebra or cz")->required();
  add_common(verify, c);

  auto* unbounded = app.add_subcommand("unbounded", "divergence scans for S_1, S_0 and S_ij");
  unbounded->add_option("kind", kind, "s1, s0 or sij")->required();
  unbounded->add_option("--i", i)->check(CLI::Range(0, 2));
  unbounded->add_option("--j", j)->check(CLI::Range(0, 2));
  unbounded->add_option("--tmax", tmax, "largest truncation");
  add_common(unbounded, c);

  auto* hn_cmd = app.add_subcommand("hn", "level sets and norms of h_N");
  hn_cmd->add_option("--n-list", hn.N_list)->delimiter(',');
  hn_cmd->add_option("--L", hn.L);
  hn_cmd->add_option("--p", hn.p);
  hn_cmd->add_option("--q", hn.q);
  hn_cmd->add_option("--draws", hn.draws);
  hn_cmd->add_option("--grid", hn.grid, "scales per octave");
  hn_cmd->add_option("--samples", hn.mc_samples, "Monte Carlo samples per N");
  hn_cmd->add_option("--i", hn.i)->check(CLI::Range(0, 2));
  hn_cmd->add_option("--j", hn.j)->check(CLI::Range(0, 2));
  add_common(hn_cmd, c);

  auto* bounded = app.add_subcommand("bounded", "boundedness-side estimates");
  bounded->add_option("check", check, "hormander, riesz-atoms, tij-global or local-beta")->required();
  add_common(bounded, c);

  auto* expand = app.add_subcommand("expand", "far-field expansion constants as JSON");
  expand->add_option("--i", i)->check(CLI::Range(0, 2));
  expand->add_option("--j", j)->check(CLI::Range(0, 2));
  expand->add_option("--order", order, "number of e^{-2r} terms kept");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*verify) return emit(run_verify(suite, c.run()), c);
    if (*unbounded) return emit(run_unbounded(kind, FieldIndex{i}, FieldIndex{j}, tmax, c.run()), c);
    if (*hn_cmd) return emit(run_hn(hn, c.run()), c);
    if (*bounded) return emit(run_bounded(check, c.run()), c);
    if (*expand) {
      std::cout << expand_kernel(FieldIndex{i}, FieldIndex{j}, order);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::InvalidArgument: return 2;
      case ErrorKind::BudgetExhausted: return 3;
      default: return 1;
    }
  }
  return 2;
}
