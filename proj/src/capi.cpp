#include "phfb/phfb.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "phfb/certify.hpp"
#include "phfb/generators.hpp"
#include "phfb/io.hpp"
#include "phfb/pencil.hpp"
#include "phfb/synthesis.hpp"

struct phfb_system {
  phfb::PHSystem sys;
  phfb::SystemMetadata meta;
};

struct phfb_feedback {
  phfb::Feedback fb;
  std::vector<double> row_major;
};

struct phfb_report {
  bool passed = false;
  std::string json;
  std::string attachment;
  bool has_attachment = false;
};

namespace {

using phfb::ErrorCode;
using phfb::Json;

thread_local std::string g_last_error;

phfb_status map_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ShapeMismatch:
      return PHFB_SHAPE_MISMATCH;
    case ErrorCode::ParseError:
      return PHFB_PARSE_ERROR;
    case ErrorCode::IoError:
      return PHFB_IO_ERROR;
    case ErrorCode::ToleranceBreakdown:
    case ErrorCode::NumericalBreakdown:
    case ErrorCode::SolveFailure:
      return PHFB_NUMERICAL_BREAKDOWN;
    case ErrorCode::ConditionsNotMet:
    case ErrorCode::NotIndexOne:
      return PHFB_CONDITIONS_NOT_MET;
    default:
      return PHFB_INVALID_ARGUMENT;
  }
}

template <typename Fn>
phfb_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const phfb::Error& e) {
    g_last_error = std::string(phfb::to_string(e.code())) + ": " + e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PHFB_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    g_last_error = std::string("internal error: ") + e.what();
    return PHFB_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "internal error";
    return PHFB_INTERNAL_ERROR;
  }
}

phfb_status fail(phfb_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

phfb::ToleranceConfig to_config(const phfb_tolerance* tol) {
  phfb::ToleranceConfig cfg;
  if (tol) {
    cfg.rank_rtol = tol->rank_rtol;
    cfg.psd_tol = tol->psd_tol;
    cfg.axis_tol = tol->axis_tol;
    cfg.stability_margin = tol->stability_margin;
  }
  cfg.check();
  return cfg;
}

phfb::Matrix from_row_major(const double* data, size_t rows, size_t cols) {
  phfb::Matrix a(static_cast<phfb::Index>(rows), static_cast<phfb::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    for (size_t k = 0; k < cols; ++k) {
      a(static_cast<phfb::Index>(i), static_cast<phfb::Index>(k)) = data ? data[i * cols + k] : 0.0;
    }
  }
  return a;
}

phfb_feedback* make_feedback(phfb::Feedback fb) {
  auto* out = new phfb_feedback{std::move(fb), {}};
  const phfb::Matrix& f = out->fb.F;
  out->row_major.resize(static_cast<size_t>(f.size()));
  for (phfb::Index i = 0; i < f.rows(); ++i) {
    for (phfb::Index k = 0; k < f.cols(); ++k) out->row_major[i * f.cols() + k] = f(i, k);
  }
  return out;
}

phfb_report* make_report(bool passed, const Json& j) {
  auto* rep = new phfb_report;
  rep->passed = passed;
  rep->json = phfb::dump(j);
  return rep;
}

Json header(const char* command, const phfb::ToleranceConfig& tol) {
  Json j;
  j["command"] = command;
  j["tolerance"] = phfb::tolerance_to_json(tol);
  return j;
}

}  // namespace

extern "C" {

const char* phfb_version(void) { return "0.1.0"; }

const char* phfb_status_name(phfb_status status) {
  switch (status) {
    case PHFB_OK: return "ok";
    case PHFB_CONDITIONS_NOT_MET: return "conditions not met";
    case PHFB_INVALID_ARGUMENT: return "invalid argument";
    case PHFB_SHAPE_MISMATCH: return "shape mismatch";
    case PHFB_PARSE_ERROR: return "parse error";
    case PHFB_IO_ERROR: return "i/o error";
    case PHFB_NUMERICAL_BREAKDOWN: return "numerical breakdown";
    case PHFB_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

const char* phfb_last_error(void) { return g_last_error.c_str(); }

phfb_tolerance phfb_default_tolerance(void) {
  const phfb::ToleranceConfig cfg;
  return {cfg.rank_rtol, cfg.psd_tol, cfg.axis_tol, cfg.stability_margin};
}

phfb_gen_knobs phfb_default_gen_knobs(void) { return {-1, -1, 0, 0, 0}; }

phfb_status phfb_system_create(size_t n, size_t m, const double* E, const double* J,
                               const double* R, const double* G, const double* P, const double* D,
                               phfb_system** out) {
  return guarded([&] {
    if (!out) return fail(PHFB_INVALID_ARGUMENT, "out must not be NULL");
    *out = nullptr;
    if (n == 0) return fail(PHFB_INVALID_ARGUMENT, "n must be positive");
    if (!E || !J || !R || (m > 0 && (!G || !P || !D))) {
      return fail(PHFB_INVALID_ARGUMENT, "matrix pointers must not be NULL");
    }
    auto sys = phfb::PHSystem::from_feedthrough(
        from_row_major(E, n, n), from_row_major(J, n, n), from_row_major(R, n, n),
        from_row_major(G, n, m), from_row_major(P, n, m), from_row_major(D, m, m));
    *out = new phfb_system{std::move(sys), {}};
    return PHFB_OK;
  });
}

phfb_status phfb_system_load(const char* path, phfb_system** out) {
  return guarded([&] {
    if (!path || !out) return fail(PHFB_INVALID_ARGUMENT, "path and out must not be NULL");
    *out = nullptr;
    phfb::SystemDocument doc = phfb::load_system(path);
    *out = new phfb_system{std::move(doc.system), std::move(doc.metadata)};
    return PHFB_OK;
  });
}

phfb_status phfb_system_parse(const char* json, phfb_system** out) {
  return guarded([&] {
    if (!json || !out) return fail(PHFB_INVALID_ARGUMENT, "json and out must not be NULL");
    *out = nullptr;
    phfb::SystemDocument doc = phfb::system_from_json(phfb::parse_json(json));
    *out = new phfb_system{std::move(doc.system), std::move(doc.metadata)};
    return PHFB_OK;
  });
}

phfb_status phfb_system_save(const phfb_system* sys, const char* path) {
  return guarded([&] {
    if (!sys || !path) return fail(PHFB_INVALID_ARGUMENT, "sys and path must not be NULL");
    phfb::save_system(path, sys->sys, sys->meta);
    return PHFB_OK;
  });
}

phfb_status phfb_system_to_json(const phfb_system* sys, char** out) {
  return guarded([&] {
    if (!sys || !out) return fail(PHFB_INVALID_ARGUMENT, "sys and out must not be NULL");
    const std::string text = phfb::dump(phfb::system_to_json(sys->sys, sys->meta));
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) return fail(PHFB_INTERNAL_ERROR, "out of memory");
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
    return PHFB_OK;
  });
}

void phfb_system_destroy(phfb_system* sys) { delete sys; }

size_t phfb_system_n(const phfb_system* sys) { return sys ? static_cast<size_t>(sys->sys.n()) : 0; }

size_t phfb_system_m(const phfb_system* sys) { return sys ? static_cast<size_t>(sys->sys.m()) : 0; }

phfb_status phfb_system_get_matrix(const phfb_system* sys, const char* name, double* out,
                                   size_t len) {
  return guarded([&] {
    if (!sys || !name || !out) return fail(PHFB_INVALID_ARGUMENT, "arguments must not be NULL");
    const phfb::PHSystem& s = sys->sys;
    const std::string key(name);
    phfb::Matrix a;
    if (key == "E") a = s.E;
    else if (key == "J") a = s.J;
    else if (key == "R") a = s.R;
    else if (key == "G") a = s.G;
    else if (key == "P") a = s.P;
    else if (key == "S") a = s.S;
    else if (key == "N") a = s.N;
    else if (key == "D") a = s.D();
    else return fail(PHFB_INVALID_ARGUMENT, "unknown matrix name '" + key + "'");
    if (len != static_cast<size_t>(a.size())) {
      return fail(PHFB_SHAPE_MISMATCH, "buffer length does not match matrix size");
    }
    for (phfb::Index i = 0; i < a.rows(); ++i) {
      for (phfb::Index k = 0; k < a.cols(); ++k) out[i * a.cols() + k] = a(i, k);
    }
    return PHFB_OK;
  });
}

phfb_status phfb_generate(size_t n, size_t m, uint64_t seed, const phfb_gen_knobs* knobs,
                          phfb_system** out) {
  return guarded([&] {
    if (!out) return fail(PHFB_INVALID_ARGUMENT, "out must not be NULL");
    *out = nullptr;
    const phfb_gen_knobs k = knobs ? *knobs : phfb_default_gen_knobs();
    phfb::GeneratorKnobs gk;
    if (k.rank_e >= 0) gk.rank_E = k.rank_e;
    if (k.rank_w >= 0) gk.rank_W = k.rank_w;
    gk.force_axis_modes = k.force_axis_modes != 0;
    gk.force_singular = k.force_singular != 0;
    gk.s_definite = k.s_definite != 0;
    auto sys = phfb::random_ph(static_cast<phfb::Index>(n), static_cast<phfb::Index>(m), seed, gk);
    phfb::SystemMetadata meta;
    meta.seed = seed;
    meta.knobs = gk;
    *out = new phfb_system{std::move(sys), std::move(meta)};
    return PHFB_OK;
  });
}

phfb_status phfb_feedback_create(size_t rows, size_t cols, const double* data,
                                 phfb_feedback** out) {
  return guarded([&] {
    if (!out) return fail(PHFB_INVALID_ARGUMENT, "out must not be NULL");
    *out = nullptr;
    if (!data && rows * cols > 0) return fail(PHFB_INVALID_ARGUMENT, "data must not be NULL");
    phfb::Feedback fb{from_row_major(data, rows, cols)};
    if (!fb.F.allFinite()) return fail(PHFB_INVALID_ARGUMENT, "feedback entries must be finite");
    *out = make_feedback(std::move(fb));
    return PHFB_OK;
  });
}

phfb_status phfb_feedback_load(const char* path, const phfb_system* sys, phfb_feedback** out) {
  return guarded([&] {
    if (!path || !sys || !out) return fail(PHFB_INVALID_ARGUMENT, "arguments must not be NULL");
    *out = nullptr;
    *out = make_feedback(
        phfb::feedback_from_json(phfb::read_json_file(path), sys->sys.m(), sys->sys.n()));
    return PHFB_OK;
  });
}

phfb_status phfb_feedback_parse(const char* json, const phfb_system* sys, phfb_feedback** out) {
  return guarded([&] {
    if (!json || !sys || !out) return fail(PHFB_INVALID_ARGUMENT, "arguments must not be NULL");
    *out = nullptr;
    *out = make_feedback(
        phfb::feedback_from_json(phfb::parse_json(json), sys->sys.m(), sys->sys.n()));
    return PHFB_OK;
  });
}

void phfb_feedback_destroy(phfb_feedback* fb) { delete fb; }

size_t phfb_feedback_rows(const phfb_feedback* fb) { return fb ? static_cast<size_t>(fb->fb.F.rows()) : 0; }

size_t phfb_feedback_cols(const phfb_feedback* fb) { return fb ? static_cast<size_t>(fb->fb.F.cols()) : 0; }

const double* phfb_feedback_data(const phfb_feedback* fb) {
  return fb ? fb->row_major.data() : nullptr;
}

phfb_status phfb_validate(const phfb_system* sys, const phfb_tolerance* tol, phfb_report** out) {
  return guarded([&] {
    if (!sys || !out) return fail(PHFB_INVALID_ARGUMENT, "sys and out must not be NULL");
    *out = nullptr;
    const phfb::ToleranceConfig cfg = to_config(tol);
    const phfb::ValidationReport v = phfb::validate(sys->sys, cfg);
    Json j = header("validate", cfg);
    j["passed"] = v.passed;
    j["validation"] = phfb::validation_to_json(v);
    *out = make_report(v.passed, j);
    return PHFB_OK;
  });
}

phfb_status phfb_analyze(const phfb_system* sys, const phfb_tolerance* tol, phfb_report** out) {
  return guarded([&] {
    if (!sys || !out) return fail(PHFB_INVALID_ARGUMENT, "sys and out must not be NULL");
    *out = nullptr;
    const phfb::ToleranceConfig cfg = to_config(tol);
    const phfb::PHSystem& s = sys->sys;
    const phfb::ValidationReport v = phfb::validate(s, cfg);
    Json j = header("analyze", cfg);
    j["passed"] = v.passed;
    j["validation"] = phfb::validation_to_json(v);
    if (!v.passed) {
      *out = make_report(false, j);
      return PHFB_OK;
    }
    const phfb::PencilReport pr = phfb::pencil_report(s.E, s.J - s.R, cfg);
    j["pencil"] = phfb::pencil_to_json(pr);
    const phfb::Matrix common = phfb::common_nullspace(s, cfg);
    j["common_nullspace"] = Json{{"singular", common.cols() > 0},
                                 {"basis", phfb::matrix_to_json(common.transpose())}};
    j["conditions"] = Json{{"con1", phfb::con1_to_json(phfb::condition_con1(s, cfg))},
                           {"con1_2", phfb::rank_condition_to_json(phfb::condition_con1_2(s, cfg))},
                           {"con2", phfb::con2_to_json(phfb::condition_con2(s, cfg), cfg)}};
    *out = make_report(true, j);
    return PHFB_OK;
  });
}

phfb_status phfb_stabilize(const phfb_system* sys, const phfb_tolerance* tol, double margin,
                           phfb_feedback** fb, phfb_report** report) {
  return guarded([&] {
    if (!sys || !fb || !report) return fail(PHFB_INVALID_ARGUMENT, "arguments must not be NULL");
    *fb = nullptr;
    *report = nullptr;
    const phfb::ToleranceConfig cfg = to_config(tol);
    const phfb::PHSystem& s = sys->sys;
    Json j = header("stabilize", cfg);
    j["margin"] = margin;
    const phfb::ValidationReport v = phfb::validate(s, cfg);
    if (!v.passed) {
      j["passed"] = false;
      j["reason"] = "system violates the port-Hamiltonian structure";
      j["validation"] = phfb::validation_to_json(v);
      *report = make_report(false, j);
      return fail(PHFB_CONDITIONS_NOT_MET, "system violates the port-Hamiltonian structure");
    }
    const phfb::Con1Result c1 = phfb::condition_con1(s, cfg);
    const phfb::RankConditionResult c12 = phfb::condition_con1_2(s, cfg);
    j["conditions"] = Json{{"con1", phfb::con1_to_json(c1)}, {"con1_2", phfb::rank_condition_to_json(c12)}};
    if (!c1.holds || !c12.holds) {
      std::string reason = !c1.holds ? "rank condition on the imaginary axis fails"
                                     : "index-one rank condition fails";
      j["passed"] = false;
      j["reason"] = reason;
      *report = make_report(false, j);
      return fail(PHFB_CONDITIONS_NOT_MET, "no stabilizing feedback exists: " + reason);
    }
    const phfb::StabilizationResult res = phfb::construct_stabilizing_feedback(s, cfg, margin);
    const phfb::CertReport cert =
        phfb::certify_closed_loop(s, res.feedback, phfb::Goal::Stabilize, cfg);
    j["passed"] = cert.passed;
    j["F"] = phfb::feedback_to_json(res.feedback);
    j["trace"] = phfb::trace_to_json(res.trace);
    j["certification"] = phfb::cert_to_json(cert);
    *report = make_report(cert.passed, j);
    *fb = make_feedback(res.feedback);
    return PHFB_OK;
  });
}

phfb_status phfb_passify(const phfb_system* sys, const phfb_tolerance* tol, phfb_feedback** fb,
                         phfb_report** report) {
  return guarded([&] {
    if (!sys || !fb || !report) return fail(PHFB_INVALID_ARGUMENT, "arguments must not be NULL");
    *fb = nullptr;
    *report = nullptr;
    const phfb::ToleranceConfig cfg = to_config(tol);
    const phfb::PHSystem& s = sys->sys;
    Json j = header("passify", cfg);
    const phfb::ValidationReport v = phfb::validate(s, cfg);
    if (!v.passed) {
      j["passed"] = false;
      j["reason"] = "system violates the port-Hamiltonian structure";
      j["validation"] = phfb::validation_to_json(v);
      *report = make_report(false, j);
      return fail(PHFB_CONDITIONS_NOT_MET, "system violates the port-Hamiltonian structure");
    }
    const phfb::Con2Result c2 = phfb::condition_con2(s, cfg);
    j["conditions"] = Json{{"con2", phfb::con2_to_json(c2, cfg)}};
    if (!c2.holds) {
      j["passed"] = false;
      j["reason"] = c2.reason;
      *report = make_report(false, j);
      return fail(PHFB_CONDITIONS_NOT_MET, "no strictly passifying feedback exists: " + c2.reason);
    }
    const phfb::Feedback f = phfb::passifying_formula(s);
    const phfb::CertReport cert = phfb::certify_closed_loop(s, f, phfb::Goal::Passify, cfg);
    j["passed"] = cert.passed;
    j["F"] = phfb::feedback_to_json(f);
    j["certification"] = phfb::cert_to_json(cert);
    *report = make_report(cert.passed, j);
    *fb = make_feedback(f);
    return PHFB_OK;
  });
}

phfb_status phfb_certify(const phfb_system* sys, const phfb_feedback* fb, phfb_goal goal,
                         const phfb_tolerance* tol, phfb_report** out) {
  return guarded([&] {
    if (!sys || !fb || !out) return fail(PHFB_INVALID_ARGUMENT, "arguments must not be NULL");
    *out = nullptr;
    if (goal != PHFB_GOAL_STABILIZE && goal != PHFB_GOAL_PASSIFY) {
      return fail(PHFB_INVALID_ARGUMENT, "unknown goal");
    }
    const phfb::ToleranceConfig cfg = to_config(tol);
    const phfb::Goal g = goal == PHFB_GOAL_STABILIZE ? phfb::Goal::Stabilize : phfb::Goal::Passify;
    const phfb::CertReport cert = phfb::certify_closed_loop(sys->sys, fb->fb, g, cfg);
    Json j = header("certify", cfg);
    j["passed"] = cert.passed;
    j["F"] = phfb::feedback_to_json(fb->fb);
    j["certification"] = phfb::cert_to_json(cert);
    *out = make_report(cert.passed, j);
    return PHFB_OK;
  });
}

phfb_status phfb_simulate(const phfb_system* sys, const phfb_feedback* fb, const double* x0,
                          const double* v, double T, double dt, const phfb_tolerance* tol,
                          phfb_report** out) {
  return guarded([&] {
    if (!sys || !fb || !out) return fail(PHFB_INVALID_ARGUMENT, "arguments must not be NULL");
    *out = nullptr;
    const phfb::ToleranceConfig cfg = to_config(tol);
    const phfb::PHSystem& s = sys->sys;
    const phfb::Index n = s.n();
    const phfb::Index m = s.m();
    phfb::Vector x(n);
    for (phfb::Index i = 0; i < n; ++i) x(i) = x0 ? x0[i] : 0.0;
    phfb::Vector vin(m);
    for (phfb::Index i = 0; i < m; ++i) vin(i) = v ? v[i] : 0.0;

    const phfb::SimulationResult sim = phfb::simulate_closed_loop(
        s, fb->fb, x, phfb::PiecewiseInput::constant(vin), T, dt, cfg);
    const phfb::PHSystem cl = phfb::apply_feedback(s, fb->fb);
    const bool dissipation = phfb::dissipation_inequality_check(cl, sim.trajectory, cfg);
    Json j = header("simulate", cfg);
    j["passed"] = dissipation;
    j["T"] = T;
    j["dt"] = dt;
    j["samples"] = sim.trajectory.samples();
    j["projected"] = sim.projected;
    j["x0"] = std::vector<double>(sim.x0.data(), sim.x0.data() + n);
    j["v"] = std::vector<double>(vin.data(), vin.data() + m);
    j["dissipation_inequality"] = Json{{"passed", dissipation}};
    j["power_balance_residual"] = sim.trajectory.samples() >= 3
                                      ? Json(phfb::power_balance_residual(cl, sim.trajectory))
                                      : Json(nullptr);
    phfb_report* rep = make_report(dissipation, j);
    std::ostringstream csv;
    phfb::write_trajectory_csv(csv, cl, sim.trajectory);
    rep->attachment = csv.str();
    rep->has_attachment = true;
    *out = rep;
    return PHFB_OK;
  });
}

int phfb_report_passed(const phfb_report* report) { return report && report->passed ? 1 : 0; }

const char* phfb_report_json(const phfb_report* report) {
  return report ? report->json.c_str() : nullptr;
}

const char* phfb_report_attachment(const phfb_report* report) {
  return report && report->has_attachment ? report->attachment.c_str() : nullptr;
}

void phfb_report_destroy(phfb_report* report) { delete report; }

void phfb_string_free(char* s) { std::free(s); }

}  // extern "C"
