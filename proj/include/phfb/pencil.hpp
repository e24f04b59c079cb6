#pragma once

// Structural analysis of matrix pencils sE - A: Kronecker structure via an
// orthogonal staircase reduction, regularity, index, finite spectrum, and the
// rank conditions on the imaginary axis that decide feedback existence.

#include <optional>
#include <string>
#include <vector>

#include "phfb/linalg.hpp"
#include "phfb/ph_model.hpp"

namespace phfb {

enum class StabilityClass { AsymptoticallyStable, StableNotAsymptotic, Unstable, Singular };

const char* to_string(StabilityClass c);

struct KroneckerSummary {
  Index rows = 0;
  Index cols = 0;
  Index normal_rank = 0;
  /// Eigenvalues of the regular part, sorted by (real, imag).
  std::vector<Complex> finite_eigenvalues;
  /// One entry per infinite Jordan block, largest first.
  std::vector<Index> infinite_block_sizes;
  /// Right (column) minimal indices epsilon_i, ascending.
  std::vector<Index> right_minimal_indices;
  /// Left (row) minimal indices eta_i, ascending.
  std::vector<Index> left_minimal_indices;

  bool regular() const {
    return rows == cols && right_minimal_indices.empty() && left_minimal_indices.empty();
  }
};

/// Staircase output plus the deflated pencil (regular_E invertible) whose
/// generalized eigenvalues are the finite eigenvalues.
struct StaircaseDecomposition {
  KroneckerSummary summary;
  Matrix regular_E;
  Matrix regular_A;
};

/// Reduces sE - A (p x q, rectangular allowed) by alternating orthogonal
/// column compressions of E and row compressions of A. A first sweep peels off
/// the infinite and right singular structure, a sweep on the transposed
/// remainder peels off the left singular structure, and the square remainder
/// carries the finite eigenvalues.
///
/// Throws ToleranceBreakdown when a singular value lands within a factor 10 of
/// the truncation threshold on either side; the message names the stage.
StaircaseDecomposition staircase_decomposition(const Matrix& A, const Matrix& E,
                                               const ToleranceConfig& tol);

KroneckerSummary kronecker_staircase(const Matrix& A, const Matrix& E, const ToleranceConfig& tol);

struct PencilReport {
  bool regular = false;
  /// Largest infinite block size; 0 when E is invertible. Empty when singular.
  std::optional<Index> index;
  std::vector<Complex> finite_eigenvalues;
  Index rank_E = 0;
  StabilityClass stability_class = StabilityClass::Singular;
  /// max Re(lambda); empty when there are no finite eigenvalues.
  std::optional<double> spectral_abscissa;
  /// min |Re(lambda)|; empty when there are no finite eigenvalues.
  std::optional<double> axis_distance;
  /// False when some eigenvalue within axis_tol of the imaginary axis is not
  /// semi-simple.
  bool axis_eigenvalues_semisimple = true;
  KroneckerSummary kronecker;
};

/// Throws NotSquare, ToleranceBreakdown.
PencilReport pencil_report(const Matrix& E, const Matrix& A, const ToleranceConfig& tol);

/// True iff [E; J; R] has a nontrivial common nullspace, which for pH data is
/// equivalent to det(sE - (J - R)) == 0 identically.
bool singular_common_nullspace(const PHSystem& sys, const ToleranceConfig& tol);

/// Orthonormal basis of the common nullspace of E, J and R.
Matrix common_nullspace(const PHSystem& sys, const ToleranceConfig& tol);

struct AxisRankResult {
  bool full_rank = false;
  /// Points near the imaginary axis where the rank drops. A pencil that is
  /// rank deficient everywhere reports s = 0.
  std::vector<Complex> witnesses;
};

/// Decides rank(s*Ep - Ap) == rows(Ep) for every s on the imaginary axis.
AxisRankResult axis_full_row_rank(const Matrix& Ep, const Matrix& Ap, const ToleranceConfig& tol);

/// rank [sE - A, B] == n for every s on the imaginary axis. B may have zero
/// columns.
AxisRankResult imaginary_axis_full_rank(const Matrix& E, const Matrix& A, const Matrix& B,
                                        const ToleranceConfig& tol);

/// Rank characterisation for R = diag(R11, 0), R11 > 0, with the
/// leading block of size n1: all finite eigenvalues of sE - (J - R) lie in
/// the open left half plane iff rank [s E12^T + J12^T, s E22 - J22] = n2 on
/// the imaginary axis. Throws HypothesisViolated.
bool block_stability_condition(const Matrix& E, const Matrix& J, const Matrix& R, Index n1,
                                const ToleranceConfig& tol);

/// Companion statement: J - R is nonsingular iff rank [-J12^T, J22] = n2.
/// Same hypothesis as above.
bool block_nonsingularity_condition(const Matrix& J, const Matrix& R, Index n1,
                                     const ToleranceConfig& tol);

/// Input directions that an admissible feedback can use:
///   B1 = (G - P)(S + N)^+ range(S),  B3 = (G - P) null(S + N).
struct FeedbackInputBlocks {
  Matrix B1;
  Matrix B3;

  Matrix stacked() const { return hcat(B1, B3); }
};

FeedbackInputBlocks feedback_input_blocks(const PHSystem& sys, const ToleranceConfig& tol);

struct Con1Result {
  bool holds = false;
  std::vector<Complex> witnesses;
};

/// rank [sE - (J - R), B1, B3] = n for all s on the imaginary axis.
Con1Result condition_con1(const PHSystem& sys, const ToleranceConfig& tol);

struct RankConditionResult {
  bool holds = false;
  Index rank = 0;
  Index required = 0;
};

/// rank [E, A null(E), B] = n.
RankConditionResult condition_index_con(const Matrix& E, const Matrix& A, const Matrix& B,
                                        const ToleranceConfig& tol);

/// rank [E, (J - R) null(E), B1, B3] = n.
RankConditionResult condition_con1_2(const PHSystem& sys, const ToleranceConfig& tol);

struct Con2Result {
  bool holds = false;
  DefinitenessClass s_class;
  /// Classification of R + [(G-P)(S+N)^{-1}(G+P)^T + (G+P)(S+N)^{-T}(G-P)^T] / 2;
  /// only meaningful when S > 0.
  DefinitenessClass condition_class;
  std::string reason;
};

/// Strict-passivity feasibility: S > 0 and the matrix above is positive definite.
Con2Result condition_con2(const PHSystem& sys, const ToleranceConfig& tol);

}  // namespace phfb
