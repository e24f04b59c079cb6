#include "phfb/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phfb {

Matrix DCompression::dhat() const {
  const Index lead_size = m1 + m2;
  const Index m = lead_size + m3;
  Matrix out = Matrix::Zero(m, m);
  out.topLeftCorner(lead_size, lead_size) = lead;
  out.bottomRightCorner(m3, m3).setIdentity();
  return out;
}

DCompression compress_feedthrough(const Matrix& S, const Matrix& N, const ToleranceConfig& tol) {
  const Index m = S.rows();
  if (S.cols() != m || N.rows() != m || N.cols() != m) {
    throw Error(ErrorCode::ShapeMismatch, "compress_feedthrough: S and N must be m x m");
  }
  if (symmetry_defect(S) > tol.psd_tol * S.norm()) {
    throw Error(ErrorCode::NotSymmetric, "compress_feedthrough: S is not symmetric");
  }
  if (!classify_definiteness(S, tol).positive_semidefinite()) {
    throw Error(ErrorCode::NotPSD, "compress_feedthrough: S is not positive semidefinite");
  }
  if (skew_defect(N) > tol.psd_tol * N.norm()) {
    throw Error(ErrorCode::NotSkew, "compress_feedthrough: N is not skew-symmetric");
  }

  const Matrix d = S + N;
  DCompression out;
  // null(S+N) is both the left and the right nullspace because S >= 0.
  const Matrix u3 = nullspace_basis(d, tol);
  out.m3 = u3.cols();
  const Matrix c = orthogonal_complement(u3);

  // range(S) lies inside null(S+N)^perp; split the complement into range(S)
  // and the part where only N acts.
  Matrix sc = c.transpose() * S * c;
  sc = 0.5 * (sc + sc.transpose());
  Matrix u1;
  Matrix u2;
  if (sc.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sc);
    const Vector& lambda = eig.eigenvalues();
    const double thr = rank_threshold(norm2(S), m, m, tol);
    Index zero = 0;
    while (zero < lambda.size() && lambda(zero) <= thr) ++zero;
    const Matrix& q = eig.eigenvectors();
    u1 = c * q.rightCols(lambda.size() - zero);
    u2 = c * q.leftCols(zero);
  } else {
    u1.resize(m, 0);
    u2.resize(m, 0);
  }
  out.m1 = u1.cols();
  out.m2 = u2.cols();

  out.U.resize(m, m);
  out.U.leftCols(out.m1) = u1;
  out.U.middleCols(out.m1, out.m2) = u2;
  out.U.rightCols(out.m3) = u3;

  const Matrix t = out.U.transpose() * d * out.U;
  const Index lead = out.m1 + out.m2;
  out.lead = t.topLeftCorner(lead, lead);
  out.D11 = t.topLeftCorner(out.m1, out.m1);
  out.D12 = t.block(0, out.m1, out.m1, out.m2);
  out.D22 = t.block(out.m1, out.m1, out.m2, out.m2);
  Matrix s11 = u1.transpose() * S * u1;
  out.S11 = 0.5 * (s11 + s11.transpose());
  return out;
}

namespace {

Index decide_rank(const Vector& sigma, double thr, const char* stage) {
  Index r = 0;
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > thr / 10.0 && sigma(i) < thr * 10.0) {
      std::ostringstream msg;
      msg << "ambiguous rank decision in " << stage << ": singular value " << sigma(i)
          << " vs threshold " << thr;
      throw Error(ErrorCode::NumericalBreakdown, msg.str());
    }
    if (sigma(i) > thr) ++r;
  }
  return r;
}

// Splits the columns of `m` into blocks of the given sizes.
std::vector<Matrix> split_cols(const Matrix& m, std::initializer_list<Index> sizes) {
  std::vector<Matrix> out;
  Index at = 0;
  for (Index s : sizes) {
    out.push_back(m.middleCols(at, s));
    at += s;
  }
  return out;
}

Matrix inverse_sqrt_pd(const Matrix& s) {
  if (s.size() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const Vector inv = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

StabilizationResult construct_stabilizing_feedback(const PHSystem& sys, const ToleranceConfig& tol,
                                                   double margin) {
  sys.check_shapes();
  tol.check();
  if (!(margin > 0.0) || !std::isfinite(margin)) {
    throw Error(ErrorCode::InvalidArgument, "margin must be positive and finite");
  }
  const Index n = sys.n();
  const Index m = sys.m();

  StabilizationResult result;
  SynthesisTrace& tr = result.trace;
  tr.margin = margin;
  tr.compression = compress_feedthrough(sys.S, sys.N, tol);
  const DCompression& dc = tr.compression;
  const Index m1 = dc.m1;
  const Index m2 = dc.m2;
  const Index m3 = dc.m3;

  // [B1 B2 B3] = (G - P) U Dhat^{-1}, [P1 P2 P3] = P U.
  const Matrix dhat = dc.dhat();
  const Eigen::FullPivLU<Matrix> dhat_lu(dhat);
  if (m > 0 && !dhat_lu.isInvertible()) {
    throw Error(ErrorCode::NumericalBreakdown, "compressed feedthrough block is singular");
  }
  if (m > 0) {
    Eigen::JacobiSVD<Matrix> svd(dhat);
    const Vector& s = svd.singularValues();
    tr.dhat_condition = s(0) / s(s.size() - 1);
  }
  const Matrix gu = (sys.G - sys.P) * dc.U;
  const Matrix b = m > 0 ? Matrix(Eigen::FullPivLU<Matrix>(dhat.transpose()).solve(gu.transpose()).transpose()) : gu;
  {
    auto blocks = split_cols(b, {m1, m2, m3});
    tr.B1 = blocks[0];
    tr.B2 = blocks[1];
    tr.B3 = blocks[2];
    auto pblocks = split_cols(sys.P * dc.U, {m1, m2, m3});
    tr.P1 = pblocks[0];
    tr.P2 = pblocks[1];
    tr.P3 = pblocks[2];
  }

  tr.F1 = -2.0 * (tr.B1 * dc.S11 + tr.P1).transpose();
  tr.F2 = Matrix::Zero(m2, n);

  // Z-compression of (B3, B1 S11^{1/2}, R).
  const Matrix s11_half = psd_sqrt(dc.S11, tol);
  const Matrix c1 = tr.B1 * s11_half;
  const double scale = std::max({norm2(sys.R), norm2(c1), norm2(tr.B3)});
  const double thr = rank_threshold(scale, n, n + m1 + m3, tol);

  const FullSvd sb3 = full_svd(tr.B3);
  const Index mu1 = decide_rank(sb3.sigma, thr, "column echelon of B3");
  tr.V3 = sb3.v;
  const Matrix ua2 = sb3.u.rightCols(n - mu1);

  const FullSvd sc1 = full_svd(ua2.transpose() * c1);
  const Index mu2 = decide_rank(sc1.sigma, thr, "compression of B1 S11^(1/2)");
  tr.V1 = sc1.v;
  const Matrix bottom_rows = sc1.u.rightCols(n - mu1 - mu2).transpose() * ua2.transpose();

  Matrix top(mu1, n);
  for (Index i = 0; i < mu1; ++i) top.row(i) = sb3.u.col(i).transpose() / sb3.sigma(i);
  Matrix middle(mu2, n);
  for (Index i = 0; i < mu2; ++i) {
    middle.row(i) = sc1.u.col(i).transpose() * ua2.transpose() / sc1.sigma(i);
  }
  // Clear the mu2 leading columns of the top rows of Z B1 S11^{1/2} V1.
  {
    const Matrix x1 = (top * c1 * tr.V1).leftCols(mu2);
    top -= x1 * middle;
  }

  // Congruence compression of R on the remaining rows.
  Matrix rb = bottom_rows * sys.R * bottom_rows.transpose();
  rb = 0.5 * (rb + rb.transpose());
  Index mu3 = 0;
  Matrix third;
  Matrix fourth;
  if (rb.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(rb);
    const Vector& lambda = eig.eigenvalues();
    Vector abs_lambda = lambda.cwiseAbs();
    std::sort(abs_lambda.data(), abs_lambda.data() + abs_lambda.size(), std::greater<>());
    decide_rank(abs_lambda, thr, "compression of R");
    Index zero = 0;
    while (zero < lambda.size() && lambda(zero) <= thr) ++zero;
    mu3 = lambda.size() - zero;
    const Matrix& q = eig.eigenvectors();
    third.resize(mu3, n);
    for (Index i = 0; i < mu3; ++i) {
      third.row(i) = q.col(zero + i).transpose() * bottom_rows / std::sqrt(lambda(zero + i));
    }
    fourth = q.leftCols(zero).transpose() * bottom_rows;
  } else {
    third.resize(0, n);
    fourth.resize(0, n);
  }
  const Index mu4 = n - mu1 - mu2 - mu3;

  Matrix z(n, n);
  z.topRows(mu1) = top;
  z.middleRows(mu1, mu2) = middle;
  z.middleRows(mu1 + mu2, mu3) = third;
  z.bottomRows(mu4) = fourth;
  {
    // Remove the coupling between the (mu1, mu2) rows and the mu3 rows.
    const Matrix coupling = (z.topRows(mu1 + mu2) * sys.R * third.transpose());
    z.topRows(mu1 + mu2) -= coupling * third;
  }
  tr.Z = z;
  tr.mu1 = mu1;
  tr.mu2 = mu2;
  tr.mu3 = mu3;
  tr.mu4 = mu4;

  const Matrix zrz = z * sys.R * z.transpose();
  tr.R11 = zrz.topLeftCorner(mu1, mu1);
  tr.R12 = zrz.block(0, mu1, mu1, mu2);
  tr.R22 = zrz.block(mu1, mu1, mu2, mu2);
  tr.B12 = (z * c1 * tr.V1).topRows(mu1).rightCols(m1 - mu2);

  // V1^T S11^{-1/2} P1^T Z^T, rows split (mu2 | m1 - mu2).
  const Matrix phat = tr.V1.transpose() * inverse_sqrt_pd(dc.S11) * tr.P1.transpose() * z.transpose();
  {
    auto upper = split_cols(phat.topRows(mu2), {mu1, mu2, mu3, mu4});
    auto lower = split_cols(phat.bottomRows(m1 - mu2), {mu1, mu2, mu3, mu4});
    tr.P11 = upper[0];
    tr.P12 = upper[1];
    tr.P13 = upper[2];
    tr.P14 = upper[3];
    tr.Phat11 = lower[0];
    tr.Phat12 = lower[1];
    tr.Phat13 = lower[2];
    tr.Phat14 = lower[3];
  }

  // Free block: F31 = -2 beta I makes the mu1 block of R~ positive definite.
  double lambda_min = 0.0;
  if (mu1 > 0) {
    const Matrix x11 = tr.R11 + tr.B12 * tr.Phat11 + tr.Phat11.transpose() * tr.B12.transpose() +
                       tr.B12 * tr.B12.transpose();
    lambda_min = classify_definiteness(x11, tol).min_eigenvalue;
  }
  tr.beta = margin + std::max(0.0, -lambda_min);
  tr.F31 = -2.0 * tr.beta * Matrix::Identity(mu1, mu1);
  tr.F32 = 2.0 * (tr.R12 + tr.B12 * tr.Phat12 + tr.P11.transpose());
  tr.F33 = 2.0 * tr.B12 * tr.Phat13;
  tr.F34 = Matrix::Zero(mu1, mu4);

  // V3^T F3 Z^T = [F31 F32 F33 F34; 0].
  Matrix f3z = Matrix::Zero(m3, n);
  f3z.topLeftCorner(mu1, mu1) = tr.F31;
  f3z.block(0, mu1, mu1, mu2) = tr.F32;
  f3z.block(0, mu1 + mu2, mu1, mu3) = tr.F33;
  f3z.block(0, mu1 + mu2 + mu3, mu1, mu4) = tr.F34;
  const Eigen::FullPivLU<Matrix> z_lu(z);
  if (n > 0 && !z_lu.isInvertible()) {
    throw Error(ErrorCode::NumericalBreakdown, "congruence basis Z is singular");
  }
  const Matrix v3f = tr.V3 * f3z;
  tr.F3 = n > 0 ? Matrix(z_lu.solve(v3f.transpose()).transpose()) : v3f;

  Matrix stacked(m, n);
  stacked.topRows(m1) = tr.F1;
  stacked.middleRows(m1, m2) = tr.F2;
  stacked.bottomRows(m3) = tr.F3;
  tr.F = m > 0 ? Matrix(dc.U * dhat_lu.solve(stacked)) : stacked;
  result.feedback.F = tr.F;
  return result;
}

StabilizationResult synthesize_stabilizing(const PHSystem& sys, const ToleranceConfig& tol,
                                           double margin) {
  const Con1Result c1 = condition_con1(sys, tol);
  if (!c1.holds) {
    throw ConditionsNotMetError(
        "no stabilizing structure-preserving feedback: rank [sE-(J-R), B1, B3] drops on the "
        "imaginary axis",
        c1.witnesses);
  }
  const RankConditionResult c12 = condition_con1_2(sys, tol);
  if (!c12.holds) {
    std::ostringstream msg;
    msg << "no index-one structure-preserving feedback: rank [E, (J-R)null(E), B1, B3] = "
        << c12.rank << " < " << c12.required;
    throw ConditionsNotMetError(msg.str(), {});
  }
  return construct_stabilizing_feedback(sys, tol, margin);
}

TraceIdentities check_trace_identities(const PHSystem& sys, const SynthesisTrace& tr,
                                       const ToleranceConfig& tol) {
  TraceIdentities id;
  const DCompression& dc = tr.compression;
  const Index n = sys.n();
  const Index m = sys.m();
  const Matrix d = sys.D();
  id.scale = std::max({1.0, norm2(d), norm2(sys.R), norm2(sys.G), norm2(sys.P)});

  Matrix t = dc.U.transpose() * d * dc.U;
  const Index lead = dc.m1 + dc.m2;
  Matrix block_form = Matrix::Zero(m, m);
  block_form.topLeftCorner(lead, lead) = t.topLeftCorner(lead, lead);
  id.compression_residual = (dc.U * block_form * dc.U.transpose() - d).norm();
  id.orthogonality_residual = (dc.U.transpose() * dc.U - Matrix::Identity(m, m)).norm();

  id.p2_norm = tr.P2.norm();
  id.p3_norm = tr.P3.norm();
  id.b12_phat14_norm = (tr.B12 * tr.Phat14).norm();
  id.p14_norm = tr.P14.norm();

  const Index mu1 = tr.mu1, mu2 = tr.mu2, mu3 = tr.mu3, mu4 = tr.mu4;
  const Index m1 = dc.m1, m3 = dc.m3;
  {
    Matrix want_b3 = Matrix::Zero(n, m3);
    want_b3.topLeftCorner(mu1, mu1).setIdentity();
    const Matrix zb1 = tr.Z * tr.B1 * psd_sqrt(dc.S11, tol) * tr.V1;
    Matrix want_b1 = Matrix::Zero(n, m1);
    want_b1.block(mu1, 0, mu2, mu2).setIdentity();
    want_b1.topRightCorner(mu1, m1 - mu2) = tr.B12;
    const Matrix zrz = tr.Z * sys.R * tr.Z.transpose();
    Matrix want_r = Matrix::Zero(n, n);
    want_r.topLeftCorner(mu1 + mu2, mu1 + mu2) = zrz.topLeftCorner(mu1 + mu2, mu1 + mu2);
    want_r.block(mu1 + mu2, mu1 + mu2, mu3, mu3).setIdentity();
    id.staircase_residual = std::max({(tr.Z * tr.B3 * tr.V3 - want_b3).norm(),
                                      (zb1 - want_b1).norm(), (zrz - want_r).norm()});
  }

  {
    Matrix a1(mu2 + mu3, mu2 + mu3);
    a1.topLeftCorner(mu2, mu2) =
        tr.R22 + tr.P12 + tr.P12.transpose() + 2.0 * Matrix::Identity(mu2, mu2);
    a1.topRightCorner(mu2, mu3) = tr.P13;
    a1.bottomLeftCorner(mu3, mu2) = tr.P13.transpose();
    a1.bottomRightCorner(mu3, mu3).setIdentity();
    id.a1_min_eigenvalue = a1.size() ? classify_definiteness(a1, tol).min_eigenvalue : 1.0;
    id.a1_rank = numerical_rank(a1, tol);
  }

  const Matrix bf = (sys.G - sys.P) * tr.F;
  const Matrix closed_r = sys.R - 0.5 * (bf + bf.transpose());
  id.closed_R_min_eigenvalue = classify_definiteness(closed_r, tol).min_eigenvalue;
  id.rank_closed_R = numerical_rank(closed_r, tol);
  id.rank_R_B1_B3 = numerical_rank(hcat(hcat(sys.R, tr.B1), tr.B3), tol);
  (void)mu4;
  return id;
}

bool TraceIdentities::hold(const SynthesisTrace& tr, double rtol) const {
  const double bound = rtol * scale;
  const bool residuals = compression_residual <= bound && orthogonality_residual <= rtol &&
                         p2_norm <= bound && p3_norm <= bound && b12_phat14_norm <= bound &&
                         p14_norm <= bound;
  const bool a1 = (tr.mu2 + tr.mu3 == 0 || a1_min_eigenvalue > 0.0) && a1_rank == tr.mu2 + tr.mu3;
  const bool ranks = rank_closed_R == tr.mu1 + tr.mu2 + tr.mu3 && rank_closed_R == rank_R_B1_B3;
  return residuals && a1 && ranks;
}

Feedback passifying_formula(const PHSystem& sys) {
  sys.check_shapes();
  const Matrix d = sys.D();
  const Eigen::FullPivLU<Matrix> lu(d);
  if (sys.m() > 0 && !lu.isInvertible()) {
    throw Error(ErrorCode::NumericalBreakdown, "S + N is singular");
  }
  const Matrix gp = sys.G + sys.P;
  const Matrix gm = sys.G - sys.P;
  Feedback fb;
  if (sys.m() == 0) {
    fb.F.resize(0, sys.n());
    return fb;
  }
  fb.F = -lu.solve(gp.transpose()) - Eigen::FullPivLU<Matrix>(d.transpose()).solve(gm.transpose());
  return fb;
}

Feedback synthesize_passifying(const PHSystem& sys, const ToleranceConfig& tol) {
  const Con2Result c = condition_con2(sys, tol);
  if (!c.holds) throw ConditionsNotMetError(c.reason, {});
  return passifying_formula(sys);
}

bool feedback_admissible(const Matrix& R, const Matrix& B, const Matrix& F,
                                const ToleranceConfig& tol) {
  const Index n = R.rows();
  if (R.cols() != n || B.rows() != n || F.rows() != B.cols() || F.cols() != n) {
    throw Error(ErrorCode::ShapeMismatch, "feedback_admissible: inconsistent shapes");
  }
  const Matrix bf = B * F;
  const Matrix closed_r = R - 0.5 * (bf + bf.transpose());
  if (!classify_definiteness(closed_r, tol).positive_semidefinite()) return false;
  return numerical_rank(closed_r, tol) == numerical_rank(hcat(R, B), tol);
}

}  // namespace phfb
