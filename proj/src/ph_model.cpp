#include "phfb/ph_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phfb {

void PHSystem::check_shapes() const {
  const Index nn = E.rows();
  const Index mm = G.cols();
  const bool ok = E.cols() == nn && J.rows() == nn && J.cols() == nn && R.rows() == nn &&
                  R.cols() == nn && G.rows() == nn && P.rows() == nn && P.cols() == mm &&
                  S.rows() == mm && S.cols() == mm && N.rows() == mm && N.cols() == mm;
  if (!ok) throw Error(ErrorCode::ShapeMismatch, "system matrices have inconsistent shapes");
  auto finite = [](const Matrix& a) { return a.allFinite(); };
  if (!(finite(E) && finite(J) && finite(R) && finite(G) && finite(P) && finite(S) && finite(N))) {
    throw Error(ErrorCode::InvalidArgument, "system matrices contain non-finite entries");
  }
}

PHSystem PHSystem::from_feedthrough(Matrix E, Matrix J, Matrix R, Matrix G, Matrix P,
                                    const Matrix& D) {
  auto [s, n] = sym_skew_split(D);
  PHSystem sys{std::move(E), std::move(J), std::move(R), std::move(G), std::move(P),
               std::move(s), std::move(n)};
  sys.check_shapes();
  return sys;
}

Matrix dissipation_matrix(const PHSystem& sys) {
  sys.check_shapes();
  const Index n = sys.n();
  const Index m = sys.m();
  Matrix w(n + m, n + m);
  w.topLeftCorner(n, n) = sys.R;
  w.topRightCorner(n, m) = sys.P;
  w.bottomLeftCorner(m, n) = sys.P.transpose();
  w.bottomRightCorner(m, m) = sys.S;
  return w;
}

namespace {

ConstraintVerdict symmetric_check(const char* name, const Matrix& a, bool skew,
                                  const ToleranceConfig& tol) {
  ConstraintVerdict v;
  v.name = name;
  v.margin = skew ? skew_defect(a) : symmetry_defect(a);
  v.tolerance = tol.psd_tol * a.norm();
  v.passed = v.margin <= v.tolerance;
  return v;
}

ConstraintVerdict psd_check(const char* name, const Matrix& a, const ToleranceConfig& tol) {
  const DefinitenessClass cls = classify_definiteness(a, tol);
  ConstraintVerdict v;
  v.name = name;
  v.margin = cls.min_eigenvalue;
  v.tolerance = -tol.psd_tol * cls.scale;
  v.passed = cls.positive_semidefinite();
  return v;
}

}  // namespace

ValidationReport validate(const PHSystem& sys, const ToleranceConfig& tol) {
  sys.check_shapes();
  ValidationReport report;
  report.checks.push_back(symmetric_check("E_symmetric", sys.E, false, tol));
  report.checks.push_back(psd_check("E_psd", sys.E, tol));
  report.checks.push_back(symmetric_check("J_skew", sys.J, true, tol));
  report.checks.push_back(symmetric_check("N_skew", sys.N, true, tol));
  report.checks.push_back(symmetric_check("S_symmetric", sys.S, false, tol));
  report.checks.push_back(psd_check("W_psd", dissipation_matrix(sys), tol));
  report.passed = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const ConstraintVerdict& c) { return c.passed; });
  return report;
}

double hamiltonian(const PHSystem& sys, const Vector& x) {
  if (x.size() != sys.n()) throw Error(ErrorCode::ShapeMismatch, "hamiltonian: state has wrong length");
  return 0.5 * x.dot(sys.E * x);
}

PHSystem apply_feedback(const PHSystem& sys, const Feedback& fb) {
  sys.check_shapes();
  if (fb.F.rows() != sys.m() || fb.F.cols() != sys.n()) {
    throw Error(ErrorCode::ShapeMismatch, "apply_feedback: F must be m x n");
  }
  const Matrix bf = (sys.G - sys.P) * fb.F;
  const Matrix port = 0.5 * fb.F.transpose() * (sys.S + sys.N).transpose();
  PHSystem out = sys;
  out.J = sys.J + 0.5 * (bf - bf.transpose());
  out.R = sys.R - 0.5 * (bf + bf.transpose());
  out.G = sys.G + port;
  out.P = sys.P + port;
  return out;
}

Vector output(const PHSystem& sys, const Vector& x, const Vector& u) {
  return (sys.G + sys.P).transpose() * x + (sys.S + sys.N) * u;
}

namespace {

void check_trajectory(const PHSystem& sys, const Trajectory& traj) {
  sys.check_shapes();
  const Index k = traj.samples();
  if (traj.x.rows() != sys.n() || traj.u.rows() != sys.m() || traj.y.rows() != sys.m() ||
      traj.x.cols() != k || traj.u.cols() != k || traj.y.cols() != k) {
    throw Error(ErrorCode::ShapeMismatch, "trajectory does not match the system dimensions");
  }
  if (k < 3) throw Error(ErrorCode::GridTooShort, "trajectory needs at least 3 samples");
  for (Index i = 1; i < k; ++i) {
    if (!(traj.t[i] > traj.t[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "trajectory grid is not strictly increasing");
    }
  }
}

}  // namespace

double power_balance_residual(const PHSystem& sys, const Trajectory& traj) {
  check_trajectory(sys, traj);
  const Matrix w = dissipation_matrix(sys);
  const Index n = sys.n();
  const Index m = sys.m();
  double worst = 0.0;
  Vector xu(n + m);
  for (Index k = 1; k + 1 < traj.samples(); ++k) {
    const double h_next = hamiltonian(sys, traj.x.col(k + 1));
    const double h_prev = hamiltonian(sys, traj.x.col(k - 1));
    const double dh = (h_next - h_prev) / (traj.t[k + 1] - traj.t[k - 1]);
    xu.head(n) = traj.x.col(k);
    xu.tail(m) = traj.u.col(k);
    const double supplied = traj.y.col(k).dot(traj.u.col(k));
    worst = std::max(worst, std::abs(dh + xu.dot(w * xu) - supplied));
  }
  return worst;
}

bool dissipation_inequality_check(const PHSystem& sys, const Trajectory& traj,
                                  const ToleranceConfig& tol) {
  check_trajectory(sys, traj);
  const Index k = traj.samples();
  std::vector<double> power(k);
  std::vector<double> energy(k);
  double max_energy = 0.0;
  for (Index i = 0; i < k; ++i) {
    power[i] = traj.y.col(i).dot(traj.u.col(i));
    energy[i] = hamiltonian(sys, traj.x.col(i));
    max_energy = std::max(max_energy, std::abs(energy[i]));
  }
  double variation = 0.0;
  double max_step = 0.0;
  for (Index i = 1; i < k; ++i) {
    variation += std::abs(power[i] - power[i - 1]);
    max_step = std::max(max_step, traj.t[i] - traj.t[i - 1]);
  }
  const double slack = tol.psd_tol * std::max(1.0, max_energy) + max_step * variation;

  // phi_k = H_k - int_0^{t_k} y^T u must be non-increasing up to the slack for
  // every pair k1 < k2.
  double supplied = 0.0;
  double min_phi = energy[0];
  for (Index i = 1; i < k; ++i) {
    supplied += 0.5 * (power[i] + power[i - 1]) * (traj.t[i] - traj.t[i - 1]);
    const double phi = energy[i] - supplied;
    if (phi - min_phi > slack) return false;
    min_phi = std::min(min_phi, phi);
  }
  return true;
}

}  // namespace phfb
