#include "phfb/generators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace phfb {

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

Matrix random_orthogonal(Index n, Rng& rng) {
  if (n == 0) return Matrix(0, 0);
  const Matrix a = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  }
  return q;
}

Matrix random_skew(Index n, Rng& rng) {
  const Matrix a = gaussian_matrix(n, n, rng);
  return 0.5 * (a - a.transpose());
}

namespace {

[[noreturn]] void infeasible(const std::string& what) {
  throw Error(ErrorCode::InfeasibleKnobs, "random_ph: " + what);
}

struct Resolved {
  Index rank_E = 0;
  Index rank_W = 0;
};

Resolved resolve(Index n, Index m, const GeneratorKnobs& k) {
  if (n < 1 || m < 0) throw Error(ErrorCode::InvalidArgument, "random_ph: need n >= 1, m >= 0");
  const Index axis = k.force_axis_modes ? 2 : 0;
  const Index sing = k.force_singular ? 1 : 0;
  if (n < axis + sing) infeasible("state dimension too small for the requested pathologies");
  if (k.force_axis_modes && n == axis + sing && k.force_singular) {
    infeasible("no room for a singular direction next to the oscillator");
  }
  Resolved r;
  r.rank_E = k.rank_E.value_or(n - sing);
  r.rank_W = k.rank_W.value_or(n - axis - sing + m);
  if (r.rank_E < 0 || r.rank_E > n) infeasible("rank_E out of range");
  if (r.rank_W < 0 || r.rank_W > n + m) infeasible("rank_W out of range");
  if (r.rank_E > n - sing) infeasible("force_singular needs rank_E <= n - 1");
  if (r.rank_E < axis) infeasible("force_axis_modes needs rank_E >= 2");
  if (r.rank_W > n - axis - sing + m) infeasible("rank_W too large for the forced null directions");
  if (k.s_definite && r.rank_W < m) infeasible("s_definite needs rank_W >= m");
  return r;
}

// E = Q diag(lambda) Q^T with `rank` eigenvalues in [0.5, 2.5].
Matrix psd_with_rank(Index n, Index rank, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.5, 2.5);
  Vector lambda = Vector::Zero(n);
  for (Index i = 0; i < rank; ++i) lambda(i) = unif(rng);
  const Matrix q = random_orthogonal(n, rng);
  Matrix e = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (e + e.transpose());
}

// L is (n + m) x rank. With s_definite the bottom m x rank block gets full
// row rank with singular values bounded away from zero.
Matrix dissipation_factor(Index n, Index m, Index rank, bool s_definite, Rng& rng) {
  Matrix l = gaussian_matrix(n + m, rank, rng) / std::sqrt(static_cast<double>(std::max<Index>(rank, 1)));
  if (s_definite && m > 0) {
    Eigen::JacobiSVD<Matrix> svd(l.bottomRows(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector s = svd.singularValues();
    for (Index i = 0; i < s.size(); ++i) s(i) = std::max(s(i), 0.3);
    l.bottomRows(m) = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  }
  return l;
}

// Plain instance: rank_E, rank_W as given; optionally singular along e_1.
PHSystem base_instance(Index n, Index m, Index rank_E, Index rank_W, bool singular,
                       bool s_definite, Rng& rng) {
  PHSystem sys;
  const Index free = singular ? n - 1 : n;
  sys.E = Matrix::Zero(n, n);
  sys.J = Matrix::Zero(n, n);
  sys.R = Matrix::Zero(n, n);
  sys.P = Matrix::Zero(n, m);

  sys.E.bottomRightCorner(free, free) = psd_with_rank(free, rank_E, rng);
  sys.J.bottomRightCorner(free, free) = random_skew(free, rng);
  const Matrix l = dissipation_factor(free, m, rank_W, s_definite, rng);
  const Matrix w = l * l.transpose();
  sys.R.bottomRightCorner(free, free) = w.topLeftCorner(free, free);
  sys.P.bottomRows(free) = w.topRightCorner(free, m);
  sys.S = w.bottomRightCorner(m, m);
  sys.S = 0.5 * (sys.S + sys.S.transpose());
  sys.R = 0.5 * (sys.R + sys.R.transpose());
  sys.N = random_skew(m, rng);
  sys.G = gaussian_matrix(n, m, rng);
  return sys;
}

void congruence(PHSystem& sys, const Matrix& q) {
  auto sym = [](const Matrix& a) { return Matrix(0.5 * (a + a.transpose())); };
  auto skew = [](const Matrix& a) { return Matrix(0.5 * (a - a.transpose())); };
  sys.E = sym(q * sys.E * q.transpose());
  sys.R = sym(q * sys.R * q.transpose());
  sys.J = skew(q * sys.J * q.transpose());
  sys.G = q * sys.G;
  sys.P = q * sys.P;
}

}  // namespace

PHSystem random_ph(Index n, Index m, std::uint64_t seed, const GeneratorKnobs& knobs) {
  const Resolved r = resolve(n, m, knobs);
  Rng rng(seed);

  PHSystem sys;
  if (knobs.force_axis_modes) {
    const Index nb = n - 2;
    PHSystem rest = base_instance(nb, m, r.rank_E - 2, r.rank_W, knobs.force_singular,
                                  knobs.s_definite, rng);
    std::uniform_real_distribution<double> freq(0.5, 3.0);
    const double omega = freq(rng);
    sys.E = Matrix::Zero(n, n);
    sys.J = Matrix::Zero(n, n);
    sys.R = Matrix::Zero(n, n);
    sys.G = Matrix::Zero(n, m);
    sys.P = Matrix::Zero(n, m);
    sys.E.topLeftCorner(2, 2).setIdentity();
    sys.J(0, 1) = omega;
    sys.J(1, 0) = -omega;
    sys.E.bottomRightCorner(nb, nb) = rest.E;
    sys.J.bottomRightCorner(nb, nb) = rest.J;
    sys.R.bottomRightCorner(nb, nb) = rest.R;
    sys.G.bottomRows(nb) = rest.G;
    sys.P.bottomRows(nb) = rest.P;
    sys.S = rest.S;
    sys.N = rest.N;
  } else {
    sys = base_instance(n, m, r.rank_E, r.rank_W, knobs.force_singular, knobs.s_definite, rng);
  }
  congruence(sys, random_orthogonal(n, rng));
  sys.check_shapes();
  return sys;
}

double axis_relative_min_singular(const Matrix& E, const Matrix& A, const Matrix& B, double omega) {
  const Index n = E.rows();
  if (E.cols() != n || A.rows() != n || A.cols() != n || B.rows() != n) {
    throw Error(ErrorCode::ShapeMismatch, "axis_relative_min_singular: inconsistent shapes");
  }
  if (n == 0) return 1.0;
  ComplexMatrix mat(n, n + B.cols());
  mat.leftCols(n) = Complex(0.0, omega) * E.cast<Complex>() - A.cast<Complex>();
  mat.rightCols(B.cols()) = B.cast<Complex>();
  Eigen::JacobiSVD<ComplexMatrix> svd(mat);
  const auto& s = svd.singularValues();
  return s(n - 1) / std::max(1.0, s(0));
}

bool brute_force_rank_on_axis(const Matrix& E, const Matrix& A, const Matrix& B,
                              const std::vector<double>& omega_grid, double rtol) {
  return std::all_of(omega_grid.begin(), omega_grid.end(), [&](double w) {
    return axis_relative_min_singular(E, A, B, w) > rtol;
  });
}

}  // namespace phfb
