#pragma once

// Seeded random pH descriptor systems with controllable structural
// pathologies, and brute-force oracles for small instances.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "phfb/linalg.hpp"
#include "phfb/ph_model.hpp"

namespace phfb {

using Rng = std::mt19937_64;

struct GeneratorKnobs {
  /// Number of positive eigenvalues of E; default n (n - 1 with force_singular).
  std::optional<Index> rank_E;
  /// Rank of W = [R P; P^T S]; default as large as the other knobs allow.
  std::optional<Index> rank_W;
  /// Embed an undamped oscillator invisible to the inputs (needs n >= 2).
  bool force_axis_modes = false;
  /// E, J and R share a null direction.
  bool force_singular = false;
  /// S positive definite.
  bool s_definite = false;
};

/// Always passes validate. Throws InfeasibleKnobs, InvalidArgument.
PHSystem random_ph(Index n, Index m, std::uint64_t seed, const GeneratorKnobs& knobs = {});

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng);

/// Haar-distributed orthogonal matrix.
Matrix random_orthogonal(Index n, Rng& rng);

Matrix random_skew(Index n, Rng& rng);

/// sigma_n([i w E - A, B]) / max(1, ||[i w E - A, B]||_2) for n x n E, A.
double axis_relative_min_singular(const Matrix& E, const Matrix& A, const Matrix& B, double omega);

/// rank [i w E - A, B] == n at every grid point, with rank decided by
/// relative smallest singular value above `rtol`.
bool brute_force_rank_on_axis(const Matrix& E, const Matrix& A, const Matrix& B,
                              const std::vector<double>& omega_grid, double rtol = 1e-8);

}  // namespace phfb
