#include "phfb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace phfb {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotSkew: return "NotSkew";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::ToleranceBreakdown: return "ToleranceBreakdown";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::ConditionsNotMet: return "ConditionsNotMet";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::GridTooShort: return "GridTooShort";
    case ErrorCode::NotIndexOne: return "NotIndexOne";
    case ErrorCode::SolveFailure: return "SolveFailure";
    case ErrorCode::InfeasibleKnobs: return "InfeasibleKnobs";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite: return "PositiveDefinite";
    case Definiteness::PositiveSemidefinite: return "PositiveSemidefinite";
    case Definiteness::Indefinite: return "Indefinite";
    case Definiteness::NegativeSemidefinite: return "NegativeSemidefinite";
    case Definiteness::NegativeDefinite: return "NegativeDefinite";
  }
  return "Unknown";
}

void ToleranceConfig::check() const {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(rank_rtol) || !ok(psd_tol) || !ok(axis_tol) || !ok(stability_margin)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive and finite");
  }
}

double norm2(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

FullSvd full_svd(const Matrix& m) {
  FullSvd out;
  if (m.rows() == 0 || m.cols() == 0) {
    out.u = Matrix::Identity(m.rows(), m.rows());
    out.v = Matrix::Identity(m.cols(), m.cols());
    out.sigma.resize(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  out.sigma = svd.singularValues();
  return out;
}

double rank_threshold(double scale, Index rows, Index cols, const ToleranceConfig& tol) {
  return tol.rank_rtol * scale * static_cast<double>(std::max(rows, cols));
}

double rank_threshold(const Matrix& m, const ToleranceConfig& tol) {
  return rank_threshold(norm2(m), m.rows(), m.cols(), tol);
}

namespace {

Index count_above(const Vector& sigma, double threshold) {
  Index r = 0;
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > threshold) ++r;
  }
  return r;
}

}  // namespace

Index numerical_rank(const Matrix& m, const ToleranceConfig& tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  return count_above(s, rank_threshold(s(0), m.rows(), m.cols(), tol));
}

Matrix nullspace_basis(const Matrix& m, const ToleranceConfig& tol) {
  const FullSvd svd = full_svd(m);
  const double smax = svd.sigma.size() ? svd.sigma(0) : 0.0;
  const Index r = count_above(svd.sigma, rank_threshold(smax, m.rows(), m.cols(), tol));
  return svd.v.rightCols(m.cols() - r);
}

Matrix range_basis(const Matrix& m, const ToleranceConfig& tol) {
  const FullSvd svd = full_svd(m);
  const double smax = svd.sigma.size() ? svd.sigma(0) : 0.0;
  const Index r = count_above(svd.sigma, rank_threshold(smax, m.rows(), m.cols(), tol));
  return svd.u.leftCols(r);
}

Matrix orthogonal_complement(const Matrix& q) {
  const Index n = q.rows();
  if (q.cols() == 0) return Matrix::Identity(n, n);
  // Columns of the full U beyond rank(q) span range(q)^perp.
  const FullSvd svd = full_svd(q);
  return svd.u.rightCols(n - q.cols());
}

Matrix pseudo_inverse(const Matrix& m, const ToleranceConfig& tol) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double thr = rank_threshold(s(0), m.rows(), m.cols(), tol);
  Vector inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > thr) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double symmetry_defect(const Matrix& m) { return (m - m.transpose()).norm(); }

double skew_defect(const Matrix& m) { return (m + m.transpose()).norm(); }

Matrix psd_sqrt(const Matrix& m, const ToleranceConfig& tol) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::NotSquare, "psd_sqrt: matrix is not square");
  if (m.size() == 0) return m;
  if (symmetry_defect(m) > tol.psd_tol * m.norm()) {
    throw Error(ErrorCode::NotSymmetric, "psd_sqrt: matrix is not symmetric");
  }
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& lambda = eig.eigenvalues();
  const double scale = std::max(std::abs(lambda(0)), std::abs(lambda(lambda.size() - 1)));
  if (lambda(0) < -tol.psd_tol * scale) {
    throw Error(ErrorCode::NotPSD, "psd_sqrt: matrix has eigenvalue " + std::to_string(lambda(0)));
  }
  const Vector root = lambda.cwiseMax(0.0).cwiseSqrt();
  const Matrix& q = eig.eigenvectors();
  Matrix x = q * root.asDiagonal() * q.transpose();
  return 0.5 * (x + x.transpose());
}

DefinitenessClass classify_definiteness(const Matrix& m, const ToleranceConfig& tol) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::NotSquare, "classify_definiteness: matrix is not square");
  }
  DefinitenessClass out;
  if (m.size() == 0) return out;  // vacuously positive definite
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const Vector& lambda = eig.eigenvalues();
  out.min_eigenvalue = lambda(0);
  out.max_eigenvalue = lambda(lambda.size() - 1);
  out.scale = std::max(std::abs(out.min_eigenvalue), std::abs(out.max_eigenvalue));
  const double band = tol.psd_tol * out.scale;
  if (out.min_eigenvalue > band) {
    out.kind = Definiteness::PositiveDefinite;
  } else if (out.max_eigenvalue < -band) {
    out.kind = Definiteness::NegativeDefinite;
  } else if (out.min_eigenvalue >= -band) {
    out.kind = Definiteness::PositiveSemidefinite;
  } else if (out.max_eigenvalue <= band) {
    out.kind = Definiteness::NegativeSemidefinite;
  } else {
    out.kind = Definiteness::Indefinite;
  }
  return out;
}

std::pair<Matrix, Matrix> sym_skew_split(const Matrix& d) {
  if (d.rows() != d.cols()) throw Error(ErrorCode::NotSquare, "sym_skew_split: matrix is not square");
  Matrix s = 0.5 * (d + d.transpose());
  Matrix n = 0.5 * (d - d.transpose());
  return {std::move(s), std::move(n)};
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "hcat: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

Matrix vcat(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::ShapeMismatch, "vcat: column counts differ");
  Matrix out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

}  // namespace phfb
