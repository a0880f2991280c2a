#pragma once

#include <cstddef>
#include <vector>

#include "ncs/errors.hpp"

// Finite-dimensional structure of a d-component system split into m groups:
// the group decomposition, the symmetric coupling matrix beta, and the
// maximum of the quartic form f(X) = sum_ij beta_ij x_i^2 x_j^2 on |X| = 1.

namespace ncs::algebra {

enum class PairClass { Diagonal, SameGroup, CrossGroup };

// Partition of indices {0,...,d-1} into m consecutive groups given by
// breakpoints 0 = a_0 < a_1 < ... < a_m = d. Group h (0-based) covers
// indices [a_h, a_{h+1}).
struct GroupDecomposition {
  std::vector<std::size_t> breakpoints;

  std::size_t d() const { return breakpoints.back(); }
  std::size_t m() const { return breakpoints.size() - 1; }
  std::size_t group_of(std::size_t i) const;
  std::size_t group_begin(std::size_t h) const { return breakpoints[h]; }
  std::size_t group_end(std::size_t h) const { return breakpoints[h + 1]; }
  std::size_t group_size(std::size_t h) const { return group_end(h) - group_begin(h); }
};

// Validates strict monotonicity and endpoints; throws HypothesisError
// ("NotStrictlyIncreasing") otherwise.
GroupDecomposition make_decomposition(const std::vector<std::size_t>& breakpoints);

// Classifies the pair: Diagonal (i = j), SameGroup, or CrossGroup.
PairClass classify_pair(const GroupDecomposition& dec, std::size_t i, std::size_t j);

// Dense symmetric coupling matrix. Construction validates symmetry and
// beta_ii > 0.
class CouplingMatrix {
public:
  CouplingMatrix() = default;
  // Row-major entries, size d*d.
  CouplingMatrix(std::size_t d, std::vector<double> entries);

  std::size_t d() const { return d_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * d_ + j]; }

  // Principal submatrix on the index range [begin, end).
  CouplingMatrix block(std::size_t begin, std::size_t end) const;
  // Principal submatrix of group h.
  CouplingMatrix group_block(const GroupDecomposition& dec, std::size_t h) const;

  // All same-group off-diagonal entries nonnegative?
  bool cooperative_within_groups(const GroupDecomposition& dec) const;
  // All cross-group entries nonpositive, and at least one pair of groups fully
  // strictly negative?
  bool competitive_across_groups(const GroupDecomposition& dec) const;

private:
  std::size_t d_ = 0;
  std::vector<double> a_;
};

// Result of maximizing f(X) = X^T-quartic over the unit sphere. Maximizers are
// reported through y = (x_i^2) on the probability simplex; `directions` holds
// one nonnegative representative X = sqrt(y) per distinct maximizing support.
struct SphereMaxResult {
  double value = 0.0;
  std::vector<std::vector<double>> directions;
  bool degenerate = false; // a maximizing face carries a continuum of maximizers
};

// Exact global maximum of f on the sphere by enumeration of all simplex faces
// of the equivalent problem max{y^T B y : y >= 0, sum y = 1}: every face's
// relative-interior stationary points plus all vertices. Throws
// HypothesisError("BadDimension") for d = 0 or d > 16.
SphereMaxResult fmax(const CouplingMatrix& B);

// min_k (M_kk - sum_{h != k} |M_kh|) for a dense symmetric matrix given
// row-major; a positive value certifies positive definiteness.
double gershgorin_lower_bound(const std::vector<double>& M, std::size_t m);

// Strict row diagonal dominance of a dense symmetric matrix.
bool is_strictly_diagonally_dominant(const std::vector<double>& M, std::size_t m);

} // namespace ncs::algebra
