#pragma once

// Tolerance-aware dense linear algebra primitives. Every rank, nullspace and
// definiteness decision in the library goes through this file so that all
// stages share one truncation rule.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <utility>

#include "phfb/error.hpp"

namespace phfb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Thresholds for the numerical decisions that replace exact rank and
/// definiteness statements.
struct ToleranceConfig {
  /// Singular values at or below rank_rtol * sigma_max * max(rows, cols)
  /// count as zero.
  double rank_rtol = 1e-10;
  /// Eigenvalue band, relative to the spectral norm, for (semi)definiteness.
  double psd_tol = 1e-10;
  /// |Re(lambda)| <= axis_tol places an eigenvalue on the imaginary axis.
  double axis_tol = 1e-8;
  /// Re(lambda) <= -stability_margin for an "asymptotically stable" verdict.
  double stability_margin = 1e-8;

  /// Throws InvalidArgument unless every threshold is positive and finite.
  void check() const;
};

enum class Definiteness {
  PositiveDefinite,
  PositiveSemidefinite,
  Indefinite,
  NegativeSemidefinite,
  NegativeDefinite,
};

const char* to_string(Definiteness d);

struct DefinitenessClass {
  Definiteness kind = Definiteness::PositiveDefinite;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  /// Spectral norm of the symmetric part; the psd_tol band is relative to it.
  double scale = 0.0;

  bool positive_semidefinite() const {
    return kind == Definiteness::PositiveDefinite ||
           kind == Definiteness::PositiveSemidefinite;
  }
  bool positive_definite() const { return kind == Definiteness::PositiveDefinite; }
};

/// The truncation level rank_rtol * sigma_max * max(rows, cols) for `m`.
double rank_threshold(const Matrix& m, const ToleranceConfig& tol);

/// Same rule with an externally supplied scale in place of sigma_max(m). Used
/// when a block's rank has to be judged against the norm of a larger object.
double rank_threshold(double scale, Index rows, Index cols, const ToleranceConfig& tol);

Index numerical_rank(const Matrix& m, const ToleranceConfig& tol);

/// Orthonormal columns spanning the numerical right nullspace.
Matrix nullspace_basis(const Matrix& m, const ToleranceConfig& tol);

/// Orthonormal columns spanning the numerical column space.
Matrix range_basis(const Matrix& m, const ToleranceConfig& tol);

/// Orthonormal columns completing `q` (orthonormal columns) to a basis.
Matrix orthogonal_complement(const Matrix& q);

Matrix pseudo_inverse(const Matrix& m, const ToleranceConfig& tol);

/// Symmetric PSD square root. Eigenvalues are clipped at zero before the root.
/// Throws NotSquare, NotSymmetric, NotPSD.
Matrix psd_sqrt(const Matrix& m, const ToleranceConfig& tol);

/// Classifies the symmetric part (M + M^T) / 2. Throws NotSquare.
DefinitenessClass classify_definiteness(const Matrix& m, const ToleranceConfig& tol);

/// (S, N) with S = (D + D^T) / 2 and N = (D - D^T) / 2. Throws NotSquare.
std::pair<Matrix, Matrix> sym_skew_split(const Matrix& d);

/// ||M - M^T||_F.
double symmetry_defect(const Matrix& m);
/// ||M + M^T||_F.
double skew_defect(const Matrix& m);

/// Spectral norm; 0 for empty matrices.
double norm2(const Matrix& m);

/// [a, b] with a.rows() == b.rows(); empty blocks allowed.
Matrix hcat(const Matrix& a, const Matrix& b);
/// [a; b] with a.cols() == b.cols(); empty blocks allowed.
Matrix vcat(const Matrix& a, const Matrix& b);

/// Thin SVD bundle with singular values sorted descending and full U and V.
struct FullSvd {
  Matrix u;
  Vector sigma;
  Matrix v;
};
FullSvd full_svd(const Matrix& m);

}  // namespace phfb
