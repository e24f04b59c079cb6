#pragma once

// Structure-preserving state feedback synthesis.
//
// synthesize_stabilizing builds F such that the closed loop is again pH,
// regular, of index at most one and asymptotically stable. The construction
// compresses the feedthrough D = S + N, splits the input matrix accordingly,
// and then works in a congruence basis Z in which B3, B1 S11^{1/2} and R are
// simultaneously in staircase form. synthesize_passifying gives the closed
// form feedback that makes the dissipation matrix strictly positive definite.

#include <vector>

#include "phfb/linalg.hpp"
#include "phfb/pencil.hpp"
#include "phfb/ph_model.hpp"

namespace phfb {

/// Orthogonal U with U^T (S+N) U = [D11 D12 0; -D12^T D22 0; 0 0 0] and
/// U^T S U = diag(S11, 0, 0), S11 > 0, the leading (m1+m2) block nonsingular.
struct DCompression {
  Matrix U;
  Index m1 = 0;
  Index m2 = 0;
  Index m3 = 0;
  Matrix D11;
  Matrix D12;
  Matrix D22;
  Matrix S11;
  /// Leading (m1+m2) x (m1+m2) block of U^T (S+N) U.
  Matrix lead;

  /// [lead 0; 0 I_m3].
  Matrix dhat() const;
};

/// Throws NotPSD (S), NotSkew (N), NotSymmetric (S).
DCompression compress_feedthrough(const Matrix& S, const Matrix& N, const ToleranceConfig& tol);

/// Every intermediate of the stabilizing construction. Block names follow the
/// partitions of the construction: mu1..mu4 are the row blocks of the Z basis.
struct SynthesisTrace {
  DCompression compression;
  double dhat_condition = 0.0;
  Matrix B1, B2, B3;
  Matrix P1, P2, P3;
  Matrix F1, F2, F3;
  Matrix Z;
  Matrix V1, V3;
  Index mu1 = 0, mu2 = 0, mu3 = 0, mu4 = 0;
  Matrix R11, R12, R22;
  Matrix B12;
  Matrix P11, P12, P13, P14;
  Matrix Phat11, Phat12, Phat13, Phat14;
  Matrix F31, F32, F33, F34;
  double beta = 0.0;
  double margin = 0.0;
  Matrix F;
};

/// Residuals of the identities the construction is supposed to satisfy.
struct TraceIdentities {
  double compression_residual = 0.0;   // ||U (U^T D U) U^T - D||
  double orthogonality_residual = 0.0; // ||U^T U - I||
  double p2_norm = 0.0;
  double p3_norm = 0.0;
  double b12_phat14_norm = 0.0;
  double p14_norm = 0.0;
  double staircase_residual = 0.0;     // max deviation of Z B3 V3, Z B1 S11^{1/2} V1, Z R Z^T from their block forms
  double a1_min_eigenvalue = 0.0;      // [R22+P12+P12^T+2I, P13; P13^T, I]
  Index a1_rank = 0;
  double closed_R_min_eigenvalue = 0.0;  // lambda_min of R~ = R - sym((G-P)F)
  Index rank_closed_R = 0;
  Index rank_R_B1_B3 = 0;
  double scale = 1.0;                  // reference norm for the residuals

  /// All residuals below `rtol * scale`, the A1 block positive definite with
  /// rank mu2+mu3, and rank(R~) = mu1+mu2+mu3 = rank [R, B1, B3].
  bool hold(const SynthesisTrace& trace, double rtol = 1e-8) const;
};

TraceIdentities check_trace_identities(const PHSystem& sys, const SynthesisTrace& trace,
                                       const ToleranceConfig& tol);

/// Thrown when a feasibility condition fails; carries the axis witnesses.
class ConditionsNotMetError : public Error {
 public:
  ConditionsNotMetError(const std::string& what, std::vector<Complex> witnesses)
      : Error(ErrorCode::ConditionsNotMet, what), witnesses_(std::move(witnesses)) {}

  const std::vector<Complex>& witnesses() const { return witnesses_; }

 private:
  std::vector<Complex> witnesses_;
};

struct StabilizationResult {
  Feedback feedback;
  SynthesisTrace trace;
};

/// Checks both existence conditions, then runs the construction. Throws
/// ConditionsNotMetError or NumericalBreakdown.
StabilizationResult synthesize_stabilizing(const PHSystem& sys, const ToleranceConfig& tol,
                                           double margin = 1.0);

/// The construction without the feasibility checks. When the conditions fail
/// the result is still an admissible feedback candidate (closed loop pH) but
/// carries no stability guarantee.
StabilizationResult construct_stabilizing_feedback(const PHSystem& sys, const ToleranceConfig& tol,
                                                   double margin = 1.0);

/// F = -(S+N)^{-1}(G+P)^T - (S+N)^{-T}(G-P)^T. Throws ConditionsNotMetError
/// when S is not positive definite or the strict-passivity matrix is not.
Feedback synthesize_passifying(const PHSystem& sys, const ToleranceConfig& tol);

/// The same formula without the feasibility check; requires S + N invertible.
Feedback passifying_formula(const PHSystem& sys);

/// R~ = R - (B F + F^T B^T) / 2 >= 0 and rank R~ = rank [R, B].
bool feedback_admissible(const Matrix& R, const Matrix& B, const Matrix& F,
                                const ToleranceConfig& tol);

}  // namespace phfb
