// Command-line front end. Talks to the library only through the C interface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phfb/phfb.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitError = 2;

struct Options {
  std::string input;
  std::string output;
  std::string report;
  std::string feedback;
  std::string goal = "stabilize";
  std::optional<double> tol;
  std::optional<double> psd_tol;
  std::optional<double> axis_tol;
  double margin = 1.0;
  std::uint64_t seed = 0;
  std::size_t n = 3;
  std::size_t m = 2;
  int rank_e = -1;
  int rank_w = -1;
  bool force_axis_modes = false;
  bool force_singular = false;
  bool s_definite = false;
  std::string name;
  std::vector<double> x0;
  std::vector<double> v;
  double T = 1.0;
  double dt = 1e-2;
};

struct SystemDeleter {
  void operator()(phfb_system* s) const { phfb_system_destroy(s); }
};
struct FeedbackDeleter {
  void operator()(phfb_feedback* f) const { phfb_feedback_destroy(f); }
};
struct ReportDeleter {
  void operator()(phfb_report* r) const { phfb_report_destroy(r); }
};
using SystemPtr = std::unique_ptr<phfb_system, SystemDeleter>;
using FeedbackPtr = std::unique_ptr<phfb_feedback, FeedbackDeleter>;
using ReportPtr = std::unique_ptr<phfb_report, ReportDeleter>;

int error_exit(phfb_status status) {
  std::cerr << "phfb: " << phfb_status_name(status);
  const std::string detail = phfb_last_error();
  if (!detail.empty()) std::cerr << ": " << detail;
  std::cerr << "\n";
  return status == PHFB_CONDITIONS_NOT_MET ? kExitFailed : kExitError;
}

bool write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return static_cast<bool>(std::cout);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "phfb: cannot open '" << path << "' for writing\n";
    return false;
  }
  out << text;
  return static_cast<bool>(out);
}

phfb_tolerance tolerance(const Options& o) {
  phfb_tolerance t = phfb_default_tolerance();
  if (o.tol) t.rank_rtol = *o.tol;
  if (o.psd_tol) t.psd_tol = *o.psd_tol;
  if (o.axis_tol) t.axis_tol = *o.axis_tol;
  return t;
}

int load_system(const Options& o, SystemPtr& out) {
  if (o.input.empty()) {
    std::cerr << "phfb: --input is required\n";
    return kExitError;
  }
  phfb_system* raw = nullptr;
  const phfb_status st = phfb_system_load(o.input.c_str(), &raw);
  if (st != PHFB_OK) return error_exit(st);
  out.reset(raw);
  return kExitOk;
}

int load_feedback(const Options& o, const phfb_system* sys, FeedbackPtr& out) {
  if (o.feedback.empty()) {
    std::cerr << "phfb: --feedback is required\n";
    return kExitError;
  }
  phfb_feedback* raw = nullptr;
  const phfb_status st = phfb_feedback_load(o.feedback.c_str(), sys, &raw);
  if (st != PHFB_OK) return error_exit(st);
  out.reset(raw);
  return kExitOk;
}

// Writes the report (if any) and maps status and verdict to an exit code.
int finish(phfb_status st, phfb_report* raw, const std::string& path) {
  ReportPtr rep(raw);
  if (rep && !write_out(path, phfb_report_json(rep.get()))) return kExitError;
  if (st != PHFB_OK) return error_exit(st);
  return phfb_report_passed(rep.get()) ? kExitOk : kExitFailed;
}

int run_validate(const Options& o) {
  SystemPtr sys;
  if (int rc = load_system(o, sys)) return rc;
  const phfb_tolerance tol = tolerance(o);
  phfb_report* rep = nullptr;
  const phfb_status st = phfb_validate(sys.get(), &tol, &rep);
  return finish(st, rep, o.output);
}

int run_analyze(const Options& o) {
  SystemPtr sys;
  if (int rc = load_system(o, sys)) return rc;
  const phfb_tolerance tol = tolerance(o);
  phfb_report* rep = nullptr;
  const phfb_status st = phfb_analyze(sys.get(), &tol, &rep);
  return finish(st, rep, o.output);
}

int run_stabilize(const Options& o) {
  SystemPtr sys;
  if (int rc = load_system(o, sys)) return rc;
  const phfb_tolerance tol = tolerance(o);
  phfb_feedback* fb = nullptr;
  phfb_report* rep = nullptr;
  const phfb_status st = phfb_stabilize(sys.get(), &tol, o.margin, &fb, &rep);
  FeedbackPtr keep(fb);
  return finish(st, rep, o.output);
}

int run_passify(const Options& o) {
  SystemPtr sys;
  if (int rc = load_system(o, sys)) return rc;
  const phfb_tolerance tol = tolerance(o);
  phfb_feedback* fb = nullptr;
  phfb_report* rep = nullptr;
  const phfb_status st = phfb_passify(sys.get(), &tol, &fb, &rep);
  FeedbackPtr keep(fb);
  return finish(st, rep, o.output);
}

int run_certify(const Options& o) {
  SystemPtr sys;
  if (int rc = load_system(o, sys)) return rc;
  FeedbackPtr fb;
  if (int rc = load_feedback(o, sys.get(), fb)) return rc;
  const phfb_tolerance tol = tolerance(o);
  const phfb_goal goal = o.goal == "passify" ? PHFB_GOAL_PASSIFY : PHFB_GOAL_STABILIZE;
  phfb_report* rep = nullptr;
  const phfb_status st = phfb_certify(sys.get(), fb.get(), goal, &tol, &rep);
  return finish(st, rep, o.output);
}

int run_simulate(const Options& o) {
  SystemPtr sys;
  if (int rc = load_system(o, sys)) return rc;
  FeedbackPtr fb;
  if (int rc = load_feedback(o, sys.get(), fb)) return rc;
  const std::size_t n = phfb_system_n(sys.get());
  const std::size_t m = phfb_system_m(sys.get());
  if (!o.x0.empty() && o.x0.size() != n) {
    std::cerr << "phfb: --x0 needs " << n << " entries\n";
    return kExitError;
  }
  if (!o.v.empty() && o.v.size() != m) {
    std::cerr << "phfb: --v needs " << m << " entries\n";
    return kExitError;
  }
  const phfb_tolerance tol = tolerance(o);
  phfb_report* raw = nullptr;
  const phfb_status st = phfb_simulate(sys.get(), fb.get(), o.x0.empty() ? nullptr : o.x0.data(),
                                       o.v.empty() ? nullptr : o.v.data(), o.T, o.dt, &tol, &raw);
  ReportPtr rep(raw);
  if (rep) {
    if (!write_out(o.output, phfb_report_attachment(rep.get()))) return kExitError;
    if (!write_out(o.report, phfb_report_json(rep.get()))) return kExitError;
  }
  if (st != PHFB_OK) return error_exit(st);
  return phfb_report_passed(rep.get()) ? kExitOk : kExitFailed;
}

int run_gen(const Options& o) {
  phfb_gen_knobs k = phfb_default_gen_knobs();
  k.rank_e = o.rank_e;
  k.rank_w = o.rank_w;
  k.force_axis_modes = o.force_axis_modes ? 1 : 0;
  k.force_singular = o.force_singular ? 1 : 0;
  k.s_definite = o.s_definite ? 1 : 0;
  phfb_system* raw = nullptr;
  const phfb_status st = phfb_generate(o.n, o.m, o.seed, &k, &raw);
  if (st != PHFB_OK) return error_exit(st);
  SystemPtr sys(raw);
  char* text = nullptr;
  const phfb_status st2 = phfb_system_to_json(sys.get(), &text);
  if (st2 != PHFB_OK) return error_exit(st2);
  const bool ok = write_out(o.output, text);
  phfb_string_free(text);
  return ok ? kExitOk : kExitError;
}

void add_tolerances(CLI::App* cmd, Options& o) {
  cmd->add_option("--tol", o.tol, "Relative rank tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--psd-tol", o.psd_tol, "Relative semidefiniteness tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--axis-tol", o.axis_tol, "Distance counted as on the imaginary axis")
      ->check(CLI::PositiveNumber);
}

void add_io(CLI::App* cmd, Options& o, const char* output_help) {
  cmd->add_option("--input,-i", o.input, "System file (JSON)")->required();
  cmd->add_option("--output,-o", o.output, output_help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving state feedback for port-Hamiltonian descriptor systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(phfb_version()));
  Options o;

  auto* validate = app.add_subcommand("validate", "Check the port-Hamiltonian structure");
  add_io(validate, o, "Report file (default: stdout)");
  add_tolerances(validate, o);

  auto* analyze = app.add_subcommand("analyze", "Pencil structure and feedback existence conditions");
  add_io(analyze, o, "Report file (default: stdout)");
  add_tolerances(analyze, o);

  auto* stabilize = app.add_subcommand("stabilize", "Synthesize a stabilizing feedback");
  add_io(stabilize, o, "Feedback and certification file (default: stdout)");
  add_tolerances(stabilize, o);
  stabilize->add_option("--margin", o.margin, "Dissipation floor of the free block")
      ->check(CLI::PositiveNumber);

  auto* passify = app.add_subcommand("passify", "Synthesize a strictly passifying feedback");
  add_io(passify, o, "Feedback and certification file (default: stdout)");
  add_tolerances(passify, o);

  auto* certify = app.add_subcommand("certify", "Certify the closed loop of a given feedback");
  add_io(certify, o, "Report file (default: stdout)");
  add_tolerances(certify, o);
  certify->add_option("--feedback,-f", o.feedback, "Document with a top-level F")->required();
  certify->add_option("--goal", o.goal, "stabilize or passify")
      ->check(CLI::IsMember({"stabilize", "passify"}));

  auto* simulate = app.add_subcommand("simulate", "Simulate the closed loop with implicit Euler");
  add_io(simulate, o, "Trajectory CSV (default: stdout)");
  add_tolerances(simulate, o);
  simulate->add_option("--feedback,-f", o.feedback, "Document with a top-level F")->required();
  simulate->add_option("--report", o.report, "Report file (default: stdout)");
  simulate->add_option("--x0", o.x0, "Initial state, comma separated")->delimiter(',');
  simulate->add_option("--v", o.v, "Constant external input, comma separated")->delimiter(',');
  simulate->add_option("--T", o.T, "Final time")->check(CLI::PositiveNumber);
  simulate->add_option("--dt", o.dt, "Step size")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen", "Generate a random port-Hamiltonian system");
  gen->add_option("--output,-o", o.output, "System file (default: stdout)");
  gen->add_option("--seed", o.seed, "Random seed");
  gen->add_option("--n", o.n, "State dimension")->check(CLI::PositiveNumber);
  gen->add_option("--m", o.m, "Input dimension")->check(CLI::NonNegativeNumber);
  gen->add_option("--rank-e", o.rank_e, "Rank of E")->check(CLI::NonNegativeNumber);
  gen->add_option("--rank-w", o.rank_w, "Rank of the dissipation matrix")
      ->check(CLI::NonNegativeNumber);
  gen->add_flag("--force-axis-modes", o.force_axis_modes, "Embed an input-invisible oscillator");
  gen->add_flag("--force-singular", o.force_singular, "Make the pencil singular");
  gen->add_flag("--s-definite", o.s_definite, "Positive definite S");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  if (validate->parsed()) return run_validate(o);
  if (analyze->parsed()) return run_analyze(o);
  if (stabilize->parsed()) return run_stabilize(o);
  if (passify->parsed()) return run_passify(o);
  if (certify->parsed()) return run_certify(o);
  if (simulate->parsed()) return run_simulate(o);
  if (gen->parsed()) return run_gen(o);
  return kExitError;
}
