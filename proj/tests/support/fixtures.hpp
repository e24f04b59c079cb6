#pragma once

#include <initializer_list>

#include "phfb/linalg.hpp"
#include "phfb/ph_model.hpp"

namespace phfb {
namespace testing {

/// Row-major literal.
inline Matrix mat(Index rows, Index cols, std::initializer_list<double> values) {
  Matrix a(rows, cols);
  auto it = values.begin();
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < cols; ++k) a(i, k) = *it++;
  }
  return a;
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

/// n = m = 1 system from scalar coefficients.
inline PHSystem scalar_system(double e, double j, double r, double g, double p, double s,
                              double n) {
  PHSystem sys;
  sys.E = Matrix::Constant(1, 1, e);
  sys.J = Matrix::Constant(1, 1, j);
  sys.R = Matrix::Constant(1, 1, r);
  sys.G = Matrix::Constant(1, 1, g);
  sys.P = Matrix::Constant(1, 1, p);
  sys.S = Matrix::Constant(1, 1, s);
  sys.N = Matrix::Constant(1, 1, n);
  return sys;
}

inline Feedback scalar_feedback(double f) { return Feedback{Matrix::Constant(1, 1, f)}; }

}  // namespace testing
}  // namespace phfb
