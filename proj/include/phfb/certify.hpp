#pragma once

// Independent certification of closed loops and a small implicit Euler
// integrator for index-one descriptor systems.

#include <optional>
#include <ostream>
#include <vector>

#include "phfb/linalg.hpp"
#include "phfb/pencil.hpp"
#include "phfb/ph_model.hpp"

namespace phfb {

enum class Goal { Stabilize, Passify };

const char* to_string(Goal g);

struct CertReport {
  Goal goal = Goal::Stabilize;
  PHSystem closed_loop;

  /// W~ >= 0 up to psd_tol.
  bool ph_structure = false;
  double w_min_eigenvalue = 0.0;
  double w_max_eigenvalue = 0.0;
  double w_norm = 0.0;
  double psd_tolerance = 0.0;

  bool regular = false;
  std::optional<Index> index;
  std::vector<Complex> spectrum;

  bool asymptotically_stable = false;
  std::optional<double> spectral_abscissa;
  double stability_tolerance = 0.0;
  StabilityClass stability_class = StabilityClass::Singular;

  /// W~ > 0.
  bool strictly_passive = false;

  /// Goal Stabilize: pH, regular, index <= 1, asymptotically stable.
  /// Goal Passify: strictly passive.
  bool passed = false;
};

/// Recomputes every verdict from the raw closed loop. Throws ShapeMismatch.
CertReport certify_closed_loop(const PHSystem& sys, const Feedback& fb, Goal goal,
                               const ToleranceConfig& tol);

/// Piecewise-constant input: column k of `values` is held on
/// [k * hold, (k + 1) * hold); the last column is held until the end.
struct PiecewiseInput {
  Matrix values;
  double hold = 0.0;

  static PiecewiseInput constant(const Vector& v);
  Vector at(double t) const;
};

struct SimulationResult {
  Trajectory trajectory;
  /// Initial state actually used, after projection onto the constraints.
  Vector x0;
  bool projected = false;
};

/// Implicit Euler on E x' = (J~ - R~) x + (G~ - P~) v with y = (G~ + P~)^T x
/// + (S + N) v. The trajectory's u row block holds v. Throws NotIndexOne,
/// SolveFailure, InvalidArgument.
SimulationResult simulate_closed_loop(const PHSystem& sys, const Feedback& fb, const Vector& x0,
                                      const PiecewiseInput& input, double T, double dt,
                                      const ToleranceConfig& tol);

/// Closest x with N^T (A x + B v0) = 0, N spanning the left nullspace of E.
/// With no v0 the input is taken as zero. Throws NotIndexOne.
Vector consistent_projection(const PHSystem& closed, const Vector& x0, const ToleranceConfig& tol,
                             const std::optional<Vector>& v0 = std::nullopt);

/// Header t,x1..xn,u1..um,y1..ym,H; one row per sample.
void write_trajectory_csv(std::ostream& os, const PHSystem& sys, const Trajectory& traj);

}  // namespace phfb
