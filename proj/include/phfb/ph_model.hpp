#pragma once

// Port-Hamiltonian descriptor systems
//
//   E x' = (J - R) x + (G - P) u
//      y = (G + P)^T x + (S + N) u
//
// with E = E^T >= 0, J = -J^T, N = -N^T and W = [R P; P^T S] >= 0.

#include <string>
#include <vector>

#include "phfb/linalg.hpp"

namespace phfb {

struct PHSystem {
  Matrix E;
  Matrix J;
  Matrix R;
  Matrix G;
  Matrix P;
  Matrix S;
  Matrix N;

  Index n() const { return E.rows(); }
  Index m() const { return G.cols(); }

  /// Feedthrough D = S + N.
  Matrix D() const { return S + N; }

  /// Throws ShapeMismatch unless E, J, R are n x n, G, P are n x m and S, N are m x m.
  void check_shapes() const;

  /// Builds a system from D, splitting it into its symmetric and skew parts.
  static PHSystem from_feedthrough(Matrix E, Matrix J, Matrix R, Matrix G, Matrix P,
                                   const Matrix& D);
};

/// State feedback u = F x + v; F is m x n.
struct Feedback {
  Matrix F;
};

struct ConstraintVerdict {
  std::string name;
  bool passed = false;
  /// Violation norm for symmetry constraints, smallest eigenvalue for
  /// semidefiniteness constraints.
  double margin = 0.0;
  /// The bound the margin was compared against.
  double tolerance = 0.0;
};

struct ValidationReport {
  std::vector<ConstraintVerdict> checks;
  bool passed = false;
};

/// Sampled solution on a uniform grid. Column k of x, u, y belongs to t[k].
struct Trajectory {
  std::vector<double> t;
  Matrix x;
  Matrix u;
  Matrix y;

  Index samples() const { return static_cast<Index>(t.size()); }
};

ValidationReport validate(const PHSystem& sys, const ToleranceConfig& tol);

/// W = [R P; P^T S].
Matrix dissipation_matrix(const PHSystem& sys);

/// H(x) = x^T E x / 2.
double hamiltonian(const PHSystem& sys, const Vector& x);

/// Closed loop under u = F x + v:
///   J~ = J + [(G-P)F - F^T(G-P)^T] / 2,  R~ = R - [(G-P)F + F^T(G-P)^T] / 2,
///   G~ = G + F^T(S+N)^T / 2,             P~ = P + F^T(S+N)^T / 2.
/// E, S and N are copied unchanged. The result is not revalidated.
PHSystem apply_feedback(const PHSystem& sys, const Feedback& fb);

/// Output y = (G + P)^T x + (S + N) u.
Vector output(const PHSystem& sys, const Vector& x, const Vector& u);

/// max over interior samples of |dH/dt + [x;u]^T W [x;u] - y^T u| with dH/dt a
/// central difference. Throws ShapeMismatch, GridTooShort.
double power_balance_residual(const PHSystem& sys, const Trajectory& traj);

/// Checks H(x(t2)) - H(x(t1)) <= int_{t1}^{t2} y^T u + slack for every pair of
/// samples, with a trapezoid integral. The slack is
/// psd_tol * max(1, max H) + dt * TV(y^T u), the rounding band plus the
/// quadrature defect of a piecewise-constant input.
bool dissipation_inequality_check(const PHSystem& sys, const Trajectory& traj,
                                  const ToleranceConfig& tol);

}  // namespace phfb
