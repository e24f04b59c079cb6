#include "phfb/certify.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace phfb {

const char* to_string(Goal g) {
  switch (g) {
    case Goal::Stabilize: return "stabilize";
    case Goal::Passify: return "passify";
  }
  return "unknown";
}

CertReport certify_closed_loop(const PHSystem& sys, const Feedback& fb, Goal goal,
                               const ToleranceConfig& tol) {
  CertReport rep;
  rep.goal = goal;
  rep.closed_loop = apply_feedback(sys, fb);
  const PHSystem& cl = rep.closed_loop;

  const Matrix w = dissipation_matrix(cl);
  const DefinitenessClass wc = classify_definiteness(w, tol);
  rep.w_min_eigenvalue = wc.min_eigenvalue;
  rep.w_max_eigenvalue = wc.max_eigenvalue;
  rep.w_norm = wc.scale;
  rep.psd_tolerance = tol.psd_tol * wc.scale;
  rep.ph_structure = wc.positive_semidefinite();
  rep.strictly_passive = wc.positive_definite();

  rep.stability_tolerance = tol.stability_margin;
  const PencilReport pr = pencil_report(cl.E, cl.J - cl.R, tol);
  rep.regular = pr.regular;
  rep.index = pr.index;
  rep.spectrum = pr.finite_eigenvalues;
  rep.spectral_abscissa = pr.spectral_abscissa;
  rep.stability_class = pr.stability_class;
  rep.asymptotically_stable = pr.stability_class == StabilityClass::AsymptoticallyStable;

  if (goal == Goal::Stabilize) {
    rep.passed = rep.ph_structure && rep.regular && rep.index && *rep.index <= 1 &&
                 rep.asymptotically_stable;
  } else {
    rep.passed = rep.strictly_passive;
  }
  return rep;
}

PiecewiseInput PiecewiseInput::constant(const Vector& v) {
  PiecewiseInput in;
  in.values = v;
  in.hold = std::numeric_limits<double>::infinity();
  return in;
}

Vector PiecewiseInput::at(double t) const {
  if (values.cols() == 0) return Vector::Zero(values.rows());
  Index k = 0;
  if (std::isfinite(hold) && hold > 0.0 && t > 0.0) {
    k = static_cast<Index>(std::floor(t / hold));
  }
  k = std::min<Index>(k, values.cols() - 1);
  return values.col(k);
}

namespace {

struct IndexOneData {
  Matrix left_null;  // columns span the left nullspace of E
};

IndexOneData require_index_one(const PHSystem& closed, const ToleranceConfig& tol) {
  const Matrix a = closed.J - closed.R;
  const PencilReport pr = pencil_report(closed.E, a, tol);
  if (!pr.regular || !pr.index || *pr.index > 1) {
    std::ostringstream msg;
    msg << "closed loop is not regular of index at most one";
    if (pr.regular && pr.index) msg << " (index " << *pr.index << ")";
    if (!pr.regular) msg << " (singular pencil)";
    throw Error(ErrorCode::NotIndexOne, msg.str());
  }
  return {nullspace_basis(closed.E.transpose(), tol)};
}

}  // namespace

Vector consistent_projection(const PHSystem& closed, const Vector& x0, const ToleranceConfig& tol,
                             const std::optional<Vector>& v0) {
  closed.check_shapes();
  if (x0.size() != closed.n()) {
    throw Error(ErrorCode::ShapeMismatch, "consistent_projection: x0 has wrong length");
  }
  if (v0 && v0->size() != closed.m()) {
    throw Error(ErrorCode::ShapeMismatch, "consistent_projection: v0 has wrong length");
  }
  const IndexOneData data = require_index_one(closed, tol);
  if (data.left_null.cols() == 0) return x0;
  const Matrix a = closed.J - closed.R;
  const Matrix m = data.left_null.transpose() * a;
  Vector c = Vector::Zero(m.rows());
  if (v0) c = data.left_null.transpose() * (closed.G - closed.P) * (*v0);
  const Vector residual = m * x0 + c;
  if (residual.norm() <= tol.psd_tol * std::max(1.0, norm2(m) * x0.norm())) return x0;
  return x0 - pseudo_inverse(m, tol) * residual;
}

SimulationResult simulate_closed_loop(const PHSystem& sys, const Feedback& fb, const Vector& x0,
                                      const PiecewiseInput& input, double T, double dt,
                                      const ToleranceConfig& tol) {
  if (!(dt > 0.0) || !std::isfinite(dt) || !(T >= dt) || !std::isfinite(T)) {
    throw Error(ErrorCode::InvalidArgument, "simulate: need dt > 0 and T >= dt");
  }
  const PHSystem cl = apply_feedback(sys, fb);
  const Index n = cl.n();
  const Index m = cl.m();
  if (x0.size() != n) throw Error(ErrorCode::ShapeMismatch, "simulate: x0 has wrong length");
  if (input.values.rows() != m) {
    throw Error(ErrorCode::ShapeMismatch, "simulate: input has wrong number of rows");
  }
  require_index_one(cl, tol);

  const Matrix a = cl.J - cl.R;
  const Matrix b = cl.G - cl.P;
  const Matrix step = cl.E - dt * a;
  const Eigen::FullPivLU<Matrix> lu(step);
  if (!lu.isInvertible() || lu.rcond() < std::numeric_limits<double>::epsilon()) {
    throw Error(ErrorCode::SolveFailure, "simulate: step matrix is numerically singular at t = 0");
  }

  SimulationResult out;
  out.x0 = consistent_projection(cl, x0, tol, input.at(0.0));
  out.projected = (out.x0 - x0).norm() > 0.0;

  const Index steps = static_cast<Index>(std::llround(T / dt));
  Trajectory& tr = out.trajectory;
  tr.t.resize(steps + 1);
  tr.x.resize(n, steps + 1);
  tr.u.resize(m, steps + 1);
  tr.y.resize(m, steps + 1);

  Vector x = out.x0;
  for (Index k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Vector v = input.at(t);
    tr.t[k] = t;
    tr.x.col(k) = x;
    tr.u.col(k) = v;
    tr.y.col(k) = output(cl, x, v);
    if (k == steps) break;
    Vector next = lu.solve(cl.E * x + dt * b * v);
    if (!next.allFinite()) {
      std::ostringstream msg;
      msg << "simulate: solve failed at t = " << t;
      throw Error(ErrorCode::SolveFailure, msg.str());
    }
    x = std::move(next);
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const PHSystem& sys, const Trajectory& traj) {
  const Index n = traj.x.rows();
  const Index m = traj.u.rows();
  os << "t";
  for (Index i = 1; i <= n; ++i) os << ",x" << i;
  for (Index i = 1; i <= m; ++i) os << ",u" << i;
  for (Index i = 1; i <= m; ++i) os << ",y" << i;
  os << ",H\n";
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  for (Index k = 0; k < traj.samples(); ++k) {
    os << traj.t[k];
    for (Index i = 0; i < n; ++i) os << ',' << traj.x(i, k);
    for (Index i = 0; i < m; ++i) os << ',' << traj.u(i, k);
    for (Index i = 0; i < m; ++i) os << ',' << traj.y(i, k);
    os << ',' << hamiltonian(sys, traj.x.col(k)) << '\n';
  }
  os.precision(old_precision);
}

}  // namespace phfb
