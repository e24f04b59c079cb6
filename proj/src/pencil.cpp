#include "phfb/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace phfb {

const char* to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::AsymptoticallyStable: return "AsymptoticallyStable";
    case StabilityClass::StableNotAsymptotic: return "StableNotAsymptotic";
    case StabilityClass::Unstable: return "Unstable";
    case StabilityClass::Singular: return "Singular";
  }
  return "Unknown";
}

namespace {

constexpr double kAmbiguityFactor = 10.0;
constexpr double kClusterRtol = 1e-8;

struct SweepResult {
  std::vector<Index> k;  // column block sizes (nullity of the E block)
  std::vector<Index> r;  // row block sizes (rank of the A block)
  Matrix E;
  Matrix A;
};

Index decide_rank(const Vector& sigma, double thr, const char* sweep, const char* what,
                  std::size_t stage) {
  Index r = 0;
  for (Index i = 0; i < sigma.size(); ++i) {
    const double s = sigma(i);
    if (s > thr / kAmbiguityFactor && s < thr * kAmbiguityFactor) {
      std::ostringstream msg;
      msg << "ambiguous rank decision in " << sweep << " sweep, stage " << stage << " (" << what
          << "): singular value " << s << " vs threshold " << thr;
      throw Error(ErrorCode::ToleranceBreakdown, msg.str());
    }
    if (s > thr) ++r;
  }
  return r;
}

// One staircase sweep on sE - A: repeatedly compresses the column nullspace of
// E and the row space of A restricted to those columns. Stops when E has full
// column rank. The returned pencil is the trailing remainder.
SweepResult sweep(Matrix E, Matrix A, double thr, const char* name) {
  SweepResult out;
  for (std::size_t stage = 1;; ++stage) {
    const Index p = E.rows();
    const Index q = E.cols();
    if (q == 0) break;

    const FullSvd se = full_svd(E);
    const Index rank_e = decide_rank(se.sigma, thr, name, "E column compression", stage);
    const Index k = q - rank_e;
    if (k == 0) break;

    Matrix v(q, q);
    v.leftCols(k) = se.v.rightCols(k);
    v.rightCols(rank_e) = se.v.leftCols(rank_e);
    E = E * v;
    A = A * v;
    E.leftCols(k).setZero();

    const FullSvd sa = full_svd(A.leftCols(k));
    const Index r = decide_rank(sa.sigma, thr, name, "A row compression", stage);
    A = sa.u.transpose() * A;
    E = sa.u.transpose() * E;
    A.block(r, 0, p - r, k).setZero();

    out.k.push_back(k);
    out.r.push_back(r);
    Matrix e_rest = E.bottomRightCorner(p - r, q - k);
    Matrix a_rest = A.bottomRightCorner(p - r, q - k);
    E = std::move(e_rest);
    A = std::move(a_rest);
  }
  out.E = std::move(E);
  out.A = std::move(A);
  return out;
}

// Minimal indices: k_j - r_j blocks of index j - 1.
std::vector<Index> minimal_indices(const SweepResult& s) {
  std::vector<Index> out;
  for (std::size_t j = 0; j < s.k.size(); ++j) {
    const Index count = s.k[j] - s.r[j];
    for (Index c = 0; c < count; ++c) out.push_back(static_cast<Index>(j));
  }
  return out;
}

// Infinite blocks: r_j - k_{j+1} blocks of size j.
std::vector<Index> infinite_blocks(const SweepResult& s) {
  std::vector<Index> out;
  for (std::size_t j = s.k.size(); j-- > 0;) {
    const Index next = j + 1 < s.k.size() ? s.k[j + 1] : 0;
    const Index count = s.r[j] - next;
    for (Index c = 0; c < count; ++c) out.push_back(static_cast<Index>(j + 1));
  }
  return out;
}

bool structure_consistent(const SweepResult& s) {
  for (std::size_t j = 0; j < s.k.size(); ++j) {
    const Index next = j + 1 < s.k.size() ? s.k[j + 1] : 0;
    if (s.r[j] > s.k[j] || next > s.r[j]) return false;
  }
  return true;
}

void sort_spectrum(std::vector<Complex>& ev) {
  std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

std::vector<Complex> generalized_eigenvalues(const Matrix& A, const Matrix& E) {
  std::vector<Complex> out;
  if (A.rows() == 0) return out;
  Eigen::GeneralizedEigenSolver<Matrix> ges(A, E, false);
  if (ges.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalBreakdown, "QZ iteration did not converge");
  }
  const auto alphas = ges.alphas();
  const auto betas = ges.betas();
  for (Index i = 0; i < alphas.size(); ++i) {
    out.push_back(alphas(i) / betas(i));
  }
  sort_spectrum(out);
  return out;
}

}  // namespace

StaircaseDecomposition staircase_decomposition(const Matrix& A, const Matrix& E,
                                               const ToleranceConfig& tol) {
  if (A.rows() != E.rows() || A.cols() != E.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "staircase: A and E must have the same shape");
  }
  tol.check();
  const Index p = E.rows();
  const Index q = E.cols();
  const double scale = std::max(norm2(E), norm2(A));
  const double thr = rank_threshold(scale, p, q, tol);

  const SweepResult first = sweep(E, A, thr, "infinite/right");
  const SweepResult second = sweep(first.E.transpose(), first.A.transpose(), thr, "left");
  if (!structure_consistent(first) || !structure_consistent(second)) {
    throw Error(ErrorCode::ToleranceBreakdown, "staircase block sizes are inconsistent");
  }
  if (!infinite_blocks(second).empty() || second.E.rows() != second.E.cols()) {
    throw Error(ErrorCode::ToleranceBreakdown,
                "staircase left sweep did not leave a square regular remainder");
  }

  StaircaseDecomposition out;
  KroneckerSummary& s = out.summary;
  s.rows = p;
  s.cols = q;
  s.right_minimal_indices = minimal_indices(first);
  s.left_minimal_indices = minimal_indices(second);
  s.infinite_block_sizes = infinite_blocks(first);
  std::sort(s.infinite_block_sizes.rbegin(), s.infinite_block_sizes.rend());
  s.normal_rank = q - static_cast<Index>(s.right_minimal_indices.size());
  if (s.normal_rank != p - static_cast<Index>(s.left_minimal_indices.size())) {
    throw Error(ErrorCode::ToleranceBreakdown, "staircase normal rank accounting failed");
  }
  out.regular_E = second.E.transpose();
  out.regular_A = second.A.transpose();
  s.finite_eigenvalues = generalized_eigenvalues(out.regular_A, out.regular_E);
  return out;
}

KroneckerSummary kronecker_staircase(const Matrix& A, const Matrix& E, const ToleranceConfig& tol) {
  return staircase_decomposition(A, E, tol).summary;
}

namespace {

// Geometric multiplicity of lambda in the regular pencil s*E - A (E invertible).
Index geometric_multiplicity(const Matrix& E, const Matrix& A, const Complex& lambda,
                             double spread, const ToleranceConfig& tol) {
  const ComplexMatrix m = lambda * E.cast<Complex>() - A.cast<Complex>();
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double scale = std::max(norm2(E), norm2(A));
  const double thr = std::max(rank_threshold(scale, E.rows(), E.cols(), tol),
                              10.0 * (spread + 1e-14 * std::max(1.0, std::abs(lambda))) * norm2(E));
  Index rank = 0;
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > thr) ++rank;
  }
  return E.rows() - rank;
}

}  // namespace

PencilReport pencil_report(const Matrix& E, const Matrix& A, const ToleranceConfig& tol) {
  if (E.rows() != E.cols() || A.rows() != A.cols()) {
    throw Error(ErrorCode::NotSquare, "pencil_report: E and A must be square");
  }
  const StaircaseDecomposition dec = staircase_decomposition(A, E, tol);
  PencilReport rep;
  rep.kronecker = dec.summary;
  rep.regular = dec.summary.regular();
  rep.rank_E = numerical_rank(E, tol);
  rep.finite_eigenvalues = dec.summary.finite_eigenvalues;

  for (const Complex& z : rep.finite_eigenvalues) {
    rep.spectral_abscissa = std::max(rep.spectral_abscissa.value_or(z.real()), z.real());
    rep.axis_distance = std::min(rep.axis_distance.value_or(std::abs(z.real())), std::abs(z.real()));
  }

  // Semi-simplicity of the eigenvalues on the axis, by cluster.
  const auto& ev = rep.finite_eigenvalues;
  std::vector<bool> seen(ev.size(), false);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (seen[i] || std::abs(ev[i].real()) > tol.axis_tol) continue;
    const double radius = kClusterRtol * std::max(1.0, std::abs(ev[i]));
    Complex mean = 0.0;
    Index count = 0;
    for (std::size_t j = i; j < ev.size(); ++j) {
      if (!seen[j] && std::abs(ev[j] - ev[i]) <= radius) {
        seen[j] = true;
        mean += ev[j];
        ++count;
      }
    }
    mean /= static_cast<double>(count);
    double spread = 0.0;
    for (const Complex& z : ev) {
      if (std::abs(z - ev[i]) <= radius) spread = std::max(spread, std::abs(z - mean));
    }
    if (geometric_multiplicity(dec.regular_E, dec.regular_A, mean, spread, tol) < count) {
      rep.axis_eigenvalues_semisimple = false;
    }
  }

  if (!rep.regular) {
    rep.stability_class = StabilityClass::Singular;
    return rep;
  }
  rep.index = dec.summary.infinite_block_sizes.empty() ? 0 : dec.summary.infinite_block_sizes.front();

  const double abscissa = rep.spectral_abscissa.value_or(-std::numeric_limits<double>::infinity());
  if (abscissa > tol.axis_tol) {
    rep.stability_class = StabilityClass::Unstable;
  } else if (abscissa <= -tol.stability_margin) {
    rep.stability_class = StabilityClass::AsymptoticallyStable;
  } else if (!rep.axis_eigenvalues_semisimple) {
    rep.stability_class = StabilityClass::Unstable;
  } else {
    rep.stability_class = StabilityClass::StableNotAsymptotic;
  }
  return rep;
}

Matrix common_nullspace(const PHSystem& sys, const ToleranceConfig& tol) {
  sys.check_shapes();
  return nullspace_basis(vcat(vcat(sys.E, sys.J), sys.R), tol);
}

bool singular_common_nullspace(const PHSystem& sys, const ToleranceConfig& tol) {
  return common_nullspace(sys, tol).cols() > 0;
}

AxisRankResult axis_full_row_rank(const Matrix& Ep, const Matrix& Ap, const ToleranceConfig& tol) {
  AxisRankResult out;
  if (Ep.rows() == 0) {
    out.full_rank = true;
    return out;
  }
  const KroneckerSummary s = kronecker_staircase(Ap, Ep, tol);
  if (s.normal_rank < Ep.rows()) {
    out.witnesses.push_back(Complex(0.0, 0.0));
    return out;
  }
  for (const Complex& z : s.finite_eigenvalues) {
    if (std::abs(z.real()) <= tol.axis_tol) out.witnesses.push_back(z);
  }
  out.full_rank = out.witnesses.empty();
  return out;
}

AxisRankResult imaginary_axis_full_rank(const Matrix& E, const Matrix& A, const Matrix& B,
                                        const ToleranceConfig& tol) {
  const Index n = E.rows();
  if (E.cols() != n || A.rows() != n || A.cols() != n || B.rows() != n) {
    throw Error(ErrorCode::ShapeMismatch, "imaginary_axis_full_rank: inconsistent shapes");
  }
  return axis_full_row_rank(hcat(E, Matrix::Zero(n, B.cols())), hcat(A, B), tol);
}

namespace {

void check_block_partition(const Matrix& R, Index n1, const ToleranceConfig& tol) {
  const Index n = R.rows();
  if (R.cols() != n || n1 < 0 || n1 > n) {
    throw Error(ErrorCode::HypothesisViolated, "block partition: invalid partition");
  }
  const Index n2 = n - n1;
  const double scale = std::max(R.norm(), 1e-300);
  const double off = std::max(R.topRightCorner(n1, n2).norm(), R.bottomLeftCorner(n2, n1).norm());
  if (off > tol.psd_tol * scale || R.bottomRightCorner(n2, n2).norm() > tol.psd_tol * scale) {
    throw Error(ErrorCode::HypothesisViolated, "block partition: R is not of the form diag(R11, 0)");
  }
  if (!classify_definiteness(R.topLeftCorner(n1, n1), tol).positive_definite()) {
    throw Error(ErrorCode::HypothesisViolated, "block partition: R11 is not positive definite");
  }
}

}  // namespace

bool block_stability_condition(const Matrix& E, const Matrix& J, const Matrix& R, Index n1,
                                const ToleranceConfig& tol) {
  const Index n = E.rows();
  if (E.cols() != n || J.rows() != n || J.cols() != n || R.rows() != n) {
    throw Error(ErrorCode::ShapeMismatch, "block partition: inconsistent shapes");
  }
  check_block_partition(R, n1, tol);
  const Index n2 = n - n1;
  if (n2 == 0) return true;
  // Rows n1.. of sE - J are [s E12^T + J12^T, s E22 - J22].
  return axis_full_row_rank(E.bottomRows(n2), J.bottomRows(n2), tol).full_rank;
}

bool block_nonsingularity_condition(const Matrix& J, const Matrix& R, Index n1,
                                     const ToleranceConfig& tol) {
  check_block_partition(R, n1, tol);
  const Index n2 = J.rows() - n1;
  if (n2 == 0) return true;
  const Matrix rows = J.bottomRows(n2);
  const double thr = rank_threshold(std::max(norm2(J), norm2(R)), J.rows(), J.cols(), tol);
  const FullSvd svd = full_svd(rows);
  Index rank = 0;
  for (Index i = 0; i < svd.sigma.size(); ++i) {
    if (svd.sigma(i) > thr) ++rank;
  }
  return rank == n2;
}

FeedbackInputBlocks feedback_input_blocks(const PHSystem& sys, const ToleranceConfig& tol) {
  sys.check_shapes();
  const Matrix d = sys.D();
  const Matrix b = sys.G - sys.P;
  FeedbackInputBlocks out;
  out.B1 = b * pseudo_inverse(d, tol) * range_basis(sys.S, tol);
  out.B3 = b * nullspace_basis(d, tol);
  return out;
}

Con1Result condition_con1(const PHSystem& sys, const ToleranceConfig& tol) {
  const FeedbackInputBlocks blocks = feedback_input_blocks(sys, tol);
  const AxisRankResult r = imaginary_axis_full_rank(sys.E, sys.J - sys.R, blocks.stacked(), tol);
  return {r.full_rank, r.witnesses};
}

RankConditionResult condition_index_con(const Matrix& E, const Matrix& A, const Matrix& B,
                                        const ToleranceConfig& tol) {
  const Index n = E.rows();
  if (E.cols() != n || A.rows() != n || A.cols() != n || B.rows() != n) {
    throw Error(ErrorCode::ShapeMismatch, "condition_index_con: inconsistent shapes");
  }
  const Matrix stacked = hcat(hcat(E, A * nullspace_basis(E, tol)), B);
  RankConditionResult out;
  out.rank = numerical_rank(stacked, tol);
  out.required = n;
  out.holds = out.rank == n;
  return out;
}

RankConditionResult condition_con1_2(const PHSystem& sys, const ToleranceConfig& tol) {
  const FeedbackInputBlocks blocks = feedback_input_blocks(sys, tol);
  return condition_index_con(sys.E, sys.J - sys.R, blocks.stacked(), tol);
}

Con2Result condition_con2(const PHSystem& sys, const ToleranceConfig& tol) {
  sys.check_shapes();
  Con2Result out;
  out.s_class = classify_definiteness(sys.S, tol);
  if (!out.s_class.positive_definite()) {
    out.reason = "S not positive definite";
    return out;
  }
  const Matrix d = sys.D();
  const Eigen::PartialPivLU<Matrix> lu_t(d.transpose());
  const Matrix gp = sys.G + sys.P;
  const Matrix gm = sys.G - sys.P;
  // (G-P) D^{-1} (G+P)^T, formed as (D^{-T}(G-P)^T)^T (G+P)^T.
  const Matrix left = lu_t.solve(gm.transpose()).transpose();
  const Matrix cross = left * gp.transpose();
  const Matrix x = sys.R + 0.5 * (cross + cross.transpose());
  out.condition_class = classify_definiteness(x, tol);
  out.holds = out.condition_class.positive_definite();
  if (!out.holds) out.reason = "strict passivity condition matrix not positive definite";
  return out;
}

}  // namespace phfb
