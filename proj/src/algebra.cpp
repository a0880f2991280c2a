#include "ncs/algebra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace ncs::algebra {

std::size_t GroupDecomposition::group_of(std::size_t i) const {
  for (std::size_t h = 0; h + 1 < breakpoints.size(); ++h)
    if (i >= breakpoints[h] && i < breakpoints[h + 1]) return h;
  throw HypothesisError("IndexOutOfRange", "component index " + std::to_string(i));
}

GroupDecomposition make_decomposition(const std::vector<std::size_t>& breakpoints) {
  if (breakpoints.size() < 2 || breakpoints.front() != 0)
    throw HypothesisError("NotStrictlyIncreasing",
                          "breakpoints must start at 0 and contain at least one group");
  for (std::size_t h = 0; h + 1 < breakpoints.size(); ++h)
    if (breakpoints[h] >= breakpoints[h + 1])
      throw HypothesisError("NotStrictlyIncreasing", "breakpoints must be strictly increasing");
  return GroupDecomposition{breakpoints};
}

PairClass classify_pair(const GroupDecomposition& dec, std::size_t i, std::size_t j) {
  if (i >= dec.d() || j >= dec.d())
    throw HypothesisError("IndexOutOfRange", "pair index exceeds dimension");
  if (i == j) return PairClass::Diagonal;
  return dec.group_of(i) == dec.group_of(j) ? PairClass::SameGroup : PairClass::CrossGroup;
}

CouplingMatrix::CouplingMatrix(std::size_t d, std::vector<double> entries)
    : d_(d), a_(std::move(entries)) {
  if (d_ == 0 || a_.size() != d_ * d_)
    throw HypothesisError("BadDimension", "coupling matrix entries must be d*d");
  for (std::size_t i = 0; i < d_; ++i) {
    if (!((*this)(i, i) > 0.0))
      throw HypothesisError("NonPositiveDiagonal",
                            "beta_" + std::to_string(i) + std::to_string(i) + " must be > 0");
    for (std::size_t j = i + 1; j < d_; ++j)
      if ((*this)(i, j) != (*this)(j, i))
        throw HypothesisError("NotSymmetric", "coupling matrix must be symmetric");
  }
}

CouplingMatrix CouplingMatrix::block(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > d_) throw HypothesisError("BadDimension", "invalid block range");
  std::size_t k = end - begin;
  std::vector<double> e(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) e[i * k + j] = (*this)(begin + i, begin + j);
  return CouplingMatrix(k, std::move(e));
}

CouplingMatrix CouplingMatrix::group_block(const GroupDecomposition& dec, std::size_t h) const {
  return block(dec.group_begin(h), dec.group_end(h));
}

bool CouplingMatrix::cooperative_within_groups(const GroupDecomposition& dec) const {
  for (std::size_t i = 0; i < d_; ++i)
    for (std::size_t j = i + 1; j < d_; ++j)
      if (classify_pair(dec, i, j) == PairClass::SameGroup && (*this)(i, j) < 0.0) return false;
  return true;
}

bool CouplingMatrix::competitive_across_groups(const GroupDecomposition& dec) const {
  for (std::size_t i = 0; i < d_; ++i)
    for (std::size_t j = i + 1; j < d_; ++j)
      if (classify_pair(dec, i, j) == PairClass::CrossGroup && (*this)(i, j) > 0.0) return false;
  // at least one pair of groups with every cross entry strictly negative
  for (std::size_t g = 0; g < dec.m(); ++g)
    for (std::size_t h = g + 1; h < dec.m(); ++h) {
      bool all_neg = true;
      for (std::size_t i = dec.group_begin(g); i < dec.group_end(g) && all_neg; ++i)
        for (std::size_t j = dec.group_begin(h); j < dec.group_end(h) && all_neg; ++j)
          if (!((*this)(i, j) < 0.0)) all_neg = false;
      if (all_neg) return true;
    }
  return false;
}

namespace {

// Stationary points of y^T B y on the relative interior of the face
// {y : supp y = A, sum y = 1}: B_A y_A = mu * 1, 1^T y_A = 1. A singular but
// consistent system means a continuum of stationary points on that face.
struct FaceStationary {
  bool exists = false;
  bool continuum = false;
  double value = 0.0;
  std::vector<double> y; // representative, on the full index set
};

FaceStationary face_stationary(const CouplingMatrix& B, const std::vector<std::size_t>& A) {
  const std::size_t k = A.size();
  FaceStationary out;
  Eigen::MatrixXd BA(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) BA(i, j) = B(A[i], A[j]);

  // Solve the bordered system [B_A, -1; 1^T, 0][y; mu] = [0; 1] via a
  // rank-revealing decomposition so singular faces are handled exactly.
  Eigen::MatrixXd K(k + 1, k + 1);
  K.setZero();
  K.topLeftCorner(k, k) = BA;
  K.topRightCorner(k, 1).setConstant(-1.0);
  K.bottomLeftCorner(1, k).setConstant(1.0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs(k) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  lu.setThreshold(1e-12);
  if (lu.rank() < static_cast<Eigen::Index>(k + 1)) {
    // Rank-deficient: either inconsistent (no stationary point) or a continuum.
    Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
    double resid = (K * sol - rhs).norm();
    double scale = 1.0 + rhs.norm() + K.norm() * sol.norm();
    if (resid > 1e-10 * scale) return out; // inconsistent
    out.continuum = true;
    Eigen::VectorXd y = sol.head(k);
    for (std::size_t i = 0; i < k; ++i)
      if (!(y(i) > 1e-12)) return FaceStationary{}; // representative not interior
    out.exists = true;
    out.value = y.dot(BA * y);
    out.y.assign(B.d(), 0.0);
    for (std::size_t i = 0; i < k; ++i) out.y[A[i]] = y(i);
    return out;
  }

  Eigen::VectorXd sol = lu.solve(rhs);
  Eigen::VectorXd y = sol.head(k);
  for (std::size_t i = 0; i < k; ++i)
    if (!(y(i) > 1e-12)) return out; // stationary point not in the relative interior
  out.exists = true;
  out.value = y.dot(BA * y); // equals mu at a stationary point
  out.y.assign(B.d(), 0.0);
  for (std::size_t i = 0; i < k; ++i) out.y[A[i]] = y(i);
  return out;
}

} // namespace

SphereMaxResult fmax(const CouplingMatrix& B) {
  const std::size_t d = B.d();
  if (d == 0 || d > 16) throw HypothesisError("BadDimension", "fmax supports 1 <= d <= 16");

  struct Candidate {
    double value;
    bool continuum;
    std::vector<double> y;
    std::vector<std::size_t> support;
  };
  std::vector<Candidate> cands;

  // Vertices.
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> y(d, 0.0);
    y[i] = 1.0;
    cands.push_back({B(i, i), false, y, {i}});
  }
  // Relative-interior stationary points of every face with >= 2 indices.
  for (std::size_t mask = 1; mask < (std::size_t(1) << d); ++mask) {
    std::vector<std::size_t> A;
    for (std::size_t i = 0; i < d; ++i)
      if (mask & (std::size_t(1) << i)) A.push_back(i);
    if (A.size() < 2) continue;
    FaceStationary st = face_stationary(B, A);
    if (st.exists) cands.push_back({st.value, st.continuum, st.y, A});
  }

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : cands) best = std::max(best, c.value);

  const double tie_tol = 1e-11 * std::max(1.0, std::abs(best));
  SphereMaxResult res;
  res.value = best;
  std::set<std::vector<std::size_t>> seen;
  for (const auto& c : cands) {
    if (c.value < best - tie_tol) continue;
    if (c.continuum) res.degenerate = true;
    if (seen.insert(c.support).second) {
      std::vector<double> x(d);
      for (std::size_t i = 0; i < d; ++i) x[i] = std::sqrt(std::max(0.0, c.y[i]));
      res.directions.push_back(std::move(x));
    }
  }
  return res;
}

double gershgorin_lower_bound(const std::vector<double>& M, std::size_t m) {
  if (m == 0 || M.size() != m * m)
    throw HypothesisError("BadDimension", "matrix entries must be m*m");
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m; ++k) {
    double row = M[k * m + k];
    for (std::size_t h = 0; h < m; ++h)
      if (h != k) row -= std::abs(M[k * m + h]);
    lo = std::min(lo, row);
  }
  return lo;
}

bool is_strictly_diagonally_dominant(const std::vector<double>& M, std::size_t m) {
  if (m == 0 || M.size() != m * m)
    throw HypothesisError("BadDimension", "matrix entries must be m*m");
  for (std::size_t k = 0; k < m; ++k) {
    double off = 0.0;
    for (std::size_t h = 0; h < m; ++h)
      if (h != k) off += std::abs(M[k * m + h]);
    if (!(M[k * m + k] > off)) return false;
  }
  return true;
}

} // namespace ncs::algebra
