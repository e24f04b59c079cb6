// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "harness.hpp"
#include "phfb/certify.hpp"
#include "phfb/generators.hpp"
#include "phfb/pencil.hpp"
#include "phfb/synthesis.hpp"

#ifndef PHFB_CLI_PATH
#error "PHFB_CLI_PATH must point at the command-line tool"
#endif

namespace {

using namespace phfb;
using namespace phfb::testing;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Closed-loop properties with the stated tolerances, recomputed from the raw
// closed-loop matrices.
struct StabilizeVerdict {
  bool ph = false;
  bool regular = false;
  bool index_le_1 = false;
  bool stable = false;
  bool all() const { return ph && regular && index_le_1 && stable; }
};

StabilizeVerdict judge_stabilize(const PHSystem& sys, const Matrix& F, const ToleranceConfig& tol) {
  StabilizeVerdict v;
  const CertReport rep = certify_closed_loop(sys, Feedback{F}, Goal::Stabilize, tol);
  v.ph = rep.w_min_eigenvalue >= -1e-8 * rep.w_norm;
  v.regular = rep.regular;
  v.index_le_1 = rep.index && *rep.index <= 1;
  v.stable = rep.asymptotically_stable &&
             (!rep.spectral_abscissa || *rep.spectral_abscissa < -1e-8);
  return v;
}

Outcome criterion_structure(const ToleranceConfig& tol) {
  const auto t0 = Clock::now();
  Rng rng(0xA11CE);
  int instances = 0, failures = 0, regular = 0, singular = 0;
  std::string first;
  for (int i = 0; i < 600; ++i) {
    const InstanceSpec spec = random_spec(rng);
    ++instances;
    try {
      const PHSystem sys = generate(spec);
      const ValidationReport v = validate(sys, tol);
      const PencilReport pr = pencil_report(sys.E, sys.J - sys.R, tol);
      bool ok = v.passed && pr.stability_class != StabilityClass::Unstable;
      if (pr.regular) {
        ++regular;
        ok = ok && pr.index && *pr.index <= 2;
      } else {
        ++singular;
      }
      if (!ok) {
        ++failures;
        if (first.empty()) first = "seed " + std::to_string(spec.seed);
      }
    } catch (const Error& e) {
      ++failures;
      if (first.empty()) first = "seed " + std::to_string(spec.seed) + ": " + e.what();
    }
  }
  const double secs = seconds_since(t0);
  Outcome out;
  out.passed = failures == 0 && instances >= 500 && secs < 60.0;
  out.detail = std::to_string(instances) + " instances, " + std::to_string(regular) + " regular, " +
               std::to_string(singular) + " singular, " + std::to_string(failures) + " failures, " +
               fmt("%.1f s", secs) + (first.empty() ? "" : "; first failure " + first);
  return out;
}

struct CertifiedLoop {
  PHSystem sys;
  Matrix F;
};

Outcome criterion_sufficiency(const ToleranceConfig& tol, std::vector<CertifiedLoop>& loops) {
  Rng rng(0xB0B);
  SpecRanges ranges;
  ranges.p_axis = 0.0;
  ranges.p_singular = 0.05;
  int feasible = 0, failures = 0, drawn = 0;
  std::string first;
  while (feasible < 320 && drawn < 5000) {
    ++drawn;
    const InstanceSpec spec = random_spec(rng, ranges);
    const PHSystem sys = generate(spec);
    bool c1 = false, c12 = false;
    try {
      c1 = condition_con1(sys, tol).holds;
      c12 = condition_con1_2(sys, tol).holds;
    } catch (const Error&) {
      continue;  // undecidable at this tolerance; not a feasible instance
    }
    if (!(c1 && c12)) continue;
    ++feasible;
    try {
      const StabilizationResult res = synthesize_stabilizing(sys, tol);
      const StabilizeVerdict v = judge_stabilize(sys, res.feedback.F, tol);
      if (!v.all()) {
        ++failures;
        if (first.empty()) {
          first = "seed " + std::to_string(spec.seed) + " n=" + std::to_string(spec.n) +
                  " (ph " + std::to_string(v.ph) + ", regular " + std::to_string(v.regular) +
                  ", index " + std::to_string(v.index_le_1) + ", stable " +
                  std::to_string(v.stable) + ")";
        }
      } else {
        loops.push_back({sys, res.feedback.F});
      }
    } catch (const Error& e) {
      ++failures;
      if (first.empty()) first = "seed " + std::to_string(spec.seed) + ": " + e.what();
    }
  }
  Outcome out;
  out.passed = failures == 0 && feasible >= 300;
  out.detail = std::to_string(feasible) + " feasible instances, " + std::to_string(failures) +
               " failures" + (first.empty() ? "" : "; first failure " + first);
  return out;
}

Outcome criterion_necessity(const ToleranceConfig& tol) {
  Rng rng(0xC0FFEE);
  SpecRanges ranges;
  ranges.p_axis = 1.0;
  ranges.p_singular = 0.0;
  ranges.max_n = 6;
  int instances = 0, accepted = 0, samples = 0, skipped = 0, con1_true = 0;
  std::string first;
  while (instances < 60 && skipped < 200) {
    InstanceSpec spec = random_spec(rng, ranges);
    if (!spec.knobs.force_axis_modes) continue;
    const PHSystem sys = generate(spec);
    if (condition_con1(sys, tol).holds) {
      ++con1_true;
      continue;
    }
    StabilizationResult base;
    try {
      base = construct_stabilizing_feedback(sys, tol);
    } catch (const Error&) {
      ++skipped;
      continue;
    }
    std::vector<Matrix> fs = sample_admissible_feedbacks(sys, base.trace, 200, rng, tol);
    if (fs.size() < 200) {
      ++skipped;
      continue;
    }
    fs.push_back(base.feedback.F);
    ++instances;
    for (const Matrix& f : fs) {
      ++samples;
      const CertReport rep = certify_closed_loop(sys, Feedback{f}, Goal::Stabilize, tol);
      if (rep.passed) {
        ++accepted;
        if (first.empty()) first = "seed " + std::to_string(spec.seed);
      }
    }
  }
  Outcome out;
  out.passed = instances >= 50 && accepted == 0 && con1_true == 0;
  out.detail = std::to_string(instances) + " instances, " + std::to_string(samples) +
               " admissible feedbacks certified, " + std::to_string(accepted) + " accepted, " +
               std::to_string(skipped) + " skipped, " + std::to_string(con1_true) +
               " generated with the rank condition intact" +
               (first.empty() ? "" : "; first acceptance " + first);
  return out;
}

Outcome criterion_passivity(const ToleranceConfig& tol) {
  Rng rng(0xD00D);
  SpecRanges ranges;
  ranges.p_axis = 0.05;
  ranges.p_singular = 0.05;
  ranges.p_s_definite = 1.0;
  ranges.p_rank_deficient = 0.8;
  int instances = 0, yes = 0, no = 0, failures = 0;
  std::string first;
  auto fail = [&](const InstanceSpec& spec, const std::string& why) {
    ++failures;
    if (first.empty()) first = "seed " + std::to_string(spec.seed) + ": " + why;
  };
  while (instances < 320) {
    const InstanceSpec spec = random_spec(rng, ranges);
    const PHSystem sys = generate(spec);
    ++instances;
    try {
      const Con2Result c = condition_con2(sys, tol);
      if (c.holds) {
        ++yes;
        const Feedback f = synthesize_passifying(sys, tol);
        const CertReport rep = certify_closed_loop(sys, f, Goal::Passify, tol);
        if (!(rep.w_min_eigenvalue > 0.0)) fail(spec, "formula feedback not strictly passive");
      } else {
        ++no;
        std::vector<Matrix> fs{passifying_formula(sys).F};
        for (int k = 0; k < 200; ++k) fs.push_back(random_feedback(sys.m(), sys.n(), rng));
        for (const Matrix& f : fs) {
          if (closed_loop_relative_min_eig(sys, f) > 1e-10) {
            fail(spec, "a feedback made W~ positive definite although the condition fails");
            break;
          }
        }
      }
    } catch (const Error& e) {
      fail(spec, e.what());
    }
  }
  Outcome out;
  out.passed = failures == 0 && instances >= 300;
  out.detail = std::to_string(instances) + " instances (" + std::to_string(yes) + " feasible, " +
               std::to_string(no) + " infeasible), " + std::to_string(failures) + " mismatches" +
               (first.empty() ? "" : "; first " + first);
  return out;
}

Outcome criterion_oracle(const ToleranceConfig& tol) {
  Rng rng(0xE1E1);
  SpecRanges ranges;
  ranges.max_n = 6;
  ranges.min_m = 0;
  ranges.max_m = 3;
  ranges.p_axis = 0.3;
  ranges.p_singular = 0.15;
  const double deficient_below = 1e-10;
  const double full_above = 1e-6;
  int instances = 0, disagreements = 0, banded = 0, breakdowns = 0, full = 0;
  std::string first;
  std::vector<double> base_grid;
  for (int k = -40; k <= 40; ++k) base_grid.push_back(0.25 * k);
  while (instances < 520) {
    const InstanceSpec spec = random_spec(rng, ranges);
    const PHSystem sys = generate(spec);
    const Matrix a = sys.J - sys.R;
    // Input matrix: G - P, a column subset of it, or none.
    Matrix b = sys.G - sys.P;
    const int which = static_cast<int>(rng() % 3);
    if (which == 1) b = b.leftCols(b.cols() / 2).eval();
    if (which == 2) b.resize(sys.n(), 0);
    AxisRankResult ours;
    try {
      ours = imaginary_axis_full_rank(sys.E, a, b, tol);
    } catch (const Error&) {
      ++breakdowns;
      continue;
    }
    ++instances;
    std::vector<double> grid = base_grid;
    for (const Complex& w : ours.witnesses) grid.push_back(w.imag());
    try {
      for (const Complex& z : kronecker_staircase(a, sys.E, tol).finite_eigenvalues) {
        grid.push_back(z.imag());
      }
    } catch (const Error&) {
    }
    bool agree = true;
    bool in_band = false;
    if (ours.full_rank) {
      ++full;
      for (double w : grid) {
        const double s = axis_relative_min_singular(sys.E, a, b, w);
        if (s < deficient_below) agree = false;
        else if (s < full_above) in_band = true;
      }
    } else {
      bool found = false;
      for (const Complex& w : ours.witnesses) {
        const double s = axis_relative_min_singular(sys.E, a, b, w.imag());
        if (s < deficient_below) found = true;
        else if (s < full_above) in_band = true;
      }
      agree = found;
    }
    if (!agree) {
      if (in_band) {
        ++banded;
      } else {
        ++disagreements;
        if (first.empty()) first = "seed " + std::to_string(spec.seed);
      }
    }
  }
  Outcome out;
  out.passed = disagreements == 0 && instances >= 500;
  out.detail = std::to_string(instances) + " instances (" + std::to_string(full) +
               " full rank), " + std::to_string(disagreements) + " disagreements, " +
               std::to_string(banded) + " inside the tolerance band, " +
               std::to_string(breakdowns) + " tolerance breakdowns skipped" +
               (first.empty() ? "" : "; first " + first);
  return out;
}

Outcome criterion_rank_characterisations(const ToleranceConfig& tol) {
  Rng rng(0xF00D);
  int l1i = 0, l1i_fail = 0, l1i_true = 0, l1ii = 0, l1ii_fail = 0, l1ii_true = 0;
  std::string first;
  auto note = [&](const std::string& s) {
    if (first.empty()) first = s;
  };
  for (int i = 0; i < 400; ++i) {
    const BlockInstance inst = random_block_instance(rng);
    try {
      const bool cond = block_stability_condition(inst.E, inst.J, inst.R, inst.n1, tol);
      const PencilReport pr = pencil_report(inst.E, inst.J - inst.R, tol);
      const bool stable = pr.stability_class == StabilityClass::AsymptoticallyStable;
      ++l1i;
      l1i_true += cond;
      if (cond != stable) {
        ++l1i_fail;
        note("stability characterisation, instance " + std::to_string(i));
      }
    } catch (const Error& e) {
      ++l1i_fail;
      note(std::string("stability characterisation: ") + e.what());
    }
    try {
      const bool cond = block_nonsingularity_condition(inst.J, inst.R, inst.n1, tol);
      const Matrix a = inst.J - inst.R;
      const bool nonsingular = numerical_rank(a, tol) == a.rows();
      ++l1ii;
      l1ii_true += cond;
      if (cond != nonsingular) {
        ++l1ii_fail;
        note("nonsingularity characterisation, instance " + std::to_string(i));
      }
    } catch (const Error& e) {
      ++l1ii_fail;
      note(std::string("nonsingularity characterisation: ") + e.what());
    }
  }

  // Admissible feedbacks: stability and index one.
  int l2 = 0, l2_fail = 0, l3 = 0, l3_fail = 0;
  SpecRanges ranges;
  ranges.max_n = 7;
  ranges.p_axis = 0.0;
  ranges.p_singular = 0.1;
  int drawn = 0;
  while ((l2 < 250 || l3 < 250) && drawn < 5000) {
    ++drawn;
    const InstanceSpec spec = random_spec(rng, ranges);
    const PHSystem sys = generate(spec);
    Matrix b = sys.G - sys.P;
    if (rng() % 2) b = gaussian_matrix(sys.n(), b.cols(), rng);
    const Matrix a = sys.J - sys.R;
    try {
      const bool stable_cond = imaginary_axis_full_rank(sys.E, a, b, tol).full_rank;
      const bool index_cond = condition_index_con(sys.E, a, b, tol).holds;
      if (!stable_cond && !index_cond) continue;
      const Matrix f = sample_constrained_feedback(sys.R, b, rng, tol);
      if (!feedback_admissible(sys.R, b, f, tol)) continue;
      const PencilReport pr = pencil_report(sys.E, a + b * f, tol);
      if (stable_cond) {
        ++l2;
        if (pr.stability_class != StabilityClass::AsymptoticallyStable) {
          ++l2_fail;
          note("admissible feedback not stabilizing, seed " + std::to_string(spec.seed));
        }
      }
      if (index_cond) {
        ++l3;
        if (!pr.regular || !pr.index || *pr.index > 1) {
          ++l3_fail;
          note("admissible feedback not index one, seed " + std::to_string(spec.seed));
        }
      }
    } catch (const Error& e) {
      note(std::string("admissible feedback suite: ") + e.what());
      ++l2_fail;
    }
  }
  Outcome out;
  out.passed = l1i >= 200 && l1ii >= 200 && l2 >= 200 && l3 >= 200 && l1i_fail == 0 &&
               l1ii_fail == 0 && l2_fail == 0 && l3_fail == 0 && l1i_true > 0 && l1i_true < l1i &&
               l1ii_true > 0 && l1ii_true < l1ii;
  out.detail = "stability characterisation " + std::to_string(l1i) + " (" + std::to_string(l1i_true) +
               " true, " + std::to_string(l1i_fail) + " failures); nonsingularity " +
               std::to_string(l1ii) + " (" + std::to_string(l1ii_true) + " true, " +
               std::to_string(l1ii_fail) + " failures); admissible-stable " + std::to_string(l2) +
               " (" + std::to_string(l2_fail) + " failures); admissible-index-one " +
               std::to_string(l3) + " (" + std::to_string(l3_fail) + " failures)" +
               (first.empty() ? "" : "; first " + first);
  return out;
}

Outcome criterion_dynamics(const ToleranceConfig& tol, const std::vector<CertifiedLoop>& loops) {
  const auto t0 = Clock::now();
  Rng rng(0x5EED);
  int used = 0, failures = 0, skipped = 0;
  double worst_ratio = 1e300;
  std::string first;
  const double dts[3] = {1e-2, 5e-3, 2.5e-3};
  for (const CertifiedLoop& loop : loops) {
    if (used >= 25) break;
    const PHSystem cl = apply_feedback(loop.sys, Feedback{loop.F});
    // Keep loops with dynamics whose fastest mode is well resolved by the
    // coarsest step, so the residual is in its asymptotic regime.
    const PencilReport pr = pencil_report(cl.E, cl.J - cl.R, tol);
    double radius = 0.0;
    for (const Complex& z : pr.finite_eigenvalues) radius = std::max(radius, std::abs(z));
    if (pr.finite_eigenvalues.empty() || radius * dts[0] > 0.02) {
      ++skipped;
      continue;
    }
    ++used;
    const Vector x0 = gaussian_matrix(cl.n(), 1, rng);
    const Vector v = gaussian_matrix(cl.m(), 1, rng);
    double res[3];
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      const SimulationResult sim = simulate_closed_loop(loop.sys, Feedback{loop.F}, x0,
                                                        PiecewiseInput::constant(v), 1.0, dts[k], tol);
      ok = ok && dissipation_inequality_check(cl, sim.trajectory, tol);
      res[k] = power_balance_residual(cl, sim.trajectory);
    }
    const double r1 = res[0] / res[1];
    const double r2 = res[1] / res[2];
    worst_ratio = std::min({worst_ratio, r1, r2});
    if (!ok || r1 < 1.8 || r2 < 1.8) {
      ++failures;
      if (first.empty()) {
        first = "loop " + std::to_string(used) + (ok ? "" : " dissipation inequality") +
                fmt(" ratios %.3f", r1) + fmt("/%.3f", r2);
      }
    }
  }
  const double secs = seconds_since(t0);
  Outcome out;
  out.passed = used >= 20 && failures == 0 && secs < 120.0;
  out.detail = std::to_string(used) + " closed loops simulated, " + std::to_string(skipped) +
               " static or fast loops skipped, " + std::to_string(failures) + " failures, worst residual ratio " +
               fmt("%.3f", worst_ratio) + ", " + fmt("%.1f s", secs) +
               (first.empty() ? "" : "; first " + first);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PHFB_CLI_PATH) + " " + args + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome criterion_cli(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path stab_in = dir / "scalar_stabilize.json";
  const fs::path pass_in = dir / "scalar_passify.json";
  const fs::path stab_out = dir / "scalar_stabilize_out.json";
  const fs::path pass_out = dir / "scalar_passify_out.json";
  std::ofstream(stab_in) << R"({"n":1,"m":1,"E":[[1]],"J":[[0]],"R":[[0]],"G":[[1]],"P":[[0]],"D":[[0]]})";
  std::ofstream(pass_in) << R"({"n":1,"m":1,"E":[[1]],"J":[[0]],"R":[[1]],"G":[[1]],"P":[[0]],"D":[[1]]})";

  std::vector<std::string> problems;
  const int rc1 = run_cli("stabilize --input " + stab_in.string() + " --output " + stab_out.string());
  const int rc2 = run_cli("passify --input " + pass_in.string() + " --output " + pass_out.string());
  if (rc1 != 0) problems.push_back("stabilize exit " + std::to_string(rc1));
  if (rc2 != 0) problems.push_back("passify exit " + std::to_string(rc2));
  try {
    const auto s = nlohmann::json::parse(slurp(stab_out));
    const double f = s.at("F").at(0).at(0).get<double>();
    const auto& spec = s.at("certification").at("spectrum");
    if (std::abs(f + 2.0) > 1e-12) problems.push_back("stabilizing F = " + std::to_string(f));
    if (spec.size() != 1 || std::abs(spec[0].at("re").get<double>() + 2.0) > 1e-12 ||
        std::abs(spec[0].at("im").get<double>()) > 1e-12) {
      problems.push_back("closed-loop spectrum is not {-2}");
    }
    if (!s.at("certification").at("passed").get<bool>()) problems.push_back("stabilize not certified");

    const auto p = nlohmann::json::parse(slurp(pass_out));
    const double g = p.at("F").at(0).at(0).get<double>();
    const auto& w = p.at("certification").at("ph_structure");
    const double lo = w.at("min_eigenvalue").get<double>();
    const double hi = w.at("max_eigenvalue").get<double>();
    if (std::abs(g + 2.0) > 1e-12) problems.push_back("passifying F = " + std::to_string(g));
    if (std::abs(lo - (2.0 - std::sqrt(2.0))) > 1e-12 || std::abs(hi - (2.0 + std::sqrt(2.0))) > 1e-12) {
      problems.push_back("W~ eigenvalues " + std::to_string(lo) + ", " + std::to_string(hi));
    }
    if (!p.at("certification").at("strictly_passive").at("passed").get<bool>()) {
      problems.push_back("passify not certified");
    }
  } catch (const std::exception& e) {
    problems.push_back(std::string("unreadable CLI output: ") + e.what());
  }
  Outcome out;
  out.passed = problems.empty();
  out.detail = problems.empty() ? "stabilize F = [[-2]], spectrum {-2}; passify F = [[-2]], W~ eigenvalues 2 -/+ sqrt(2)"
                                : problems.front();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const ToleranceConfig tol;
  const std::filesystem::path workdir =
      argc > 1 ? std::filesystem::path(argv[1])
               : std::filesystem::temp_directory_path() / "phfb_acceptance";

  std::vector<CertifiedLoop> loops;
  struct Row {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Row> rows = {
      {"AC1 structure soundness", [&] { return criterion_structure(tol); }},
      {"AC2 stabilization sufficiency", [&] { return criterion_sufficiency(tol, loops); }},
      {"AC3 stabilization necessity", [&] { return criterion_necessity(tol); }},
      {"AC4 strict passivity iff", [&] { return criterion_passivity(tol); }},
      {"AC5 axis rank oracle agreement", [&] { return criterion_oracle(tol); }},
      {"AC6 rank characterisation oracles", [&] { return criterion_rank_characterisations(tol); }},
      {"AC7 dynamics witness", [&] { return criterion_dynamics(tol, loops); }},
      {"AC8 scalar examples via CLI", [&] { return criterion_cli(workdir); }},
  };

  int failed = 0;
  for (const Row& row : rows) {
    Outcome o;
    try {
      o = row.run();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("aborted: ") + e.what();
    }
    failed += !o.passed;
    std::cout << (o.passed ? "PASS " : "FAIL ") << row.name << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
