#pragma once

#include <cstddef>
#include <vector>

#include "ncs/algebra.hpp"
#include "ncs/discretization.hpp"

// The variational structure on the ball: per-component norms
// ||u_i||_i^2 = int |grad u_i|^2 + lambda_i int u_i^2, the energy
// J(u) = 1/2 sum_h ||u_h||_h^2 - 1/4 sum_{h,k} M_hk, the group Gram
// M_hk = sum_{(i,j) in I_h x I_k} beta_ij int u_i^2 u_j^2, the Nehari
// residuals Psi_k = ||u_k||_k^2 - sum_h M_kh, and the gradient as the
// equation residual -Lap u_i + lambda_i u_i - u_i sum_j beta_ij u_j^2.

namespace ncs::functional {

using discretization::RadialField;
using discretization::RadialGrid;

// Subset of group indices a functional is restricted to.
using GroupSet = std::vector<std::size_t>;

struct ProblemSpec {
  RadialGrid grid;
  std::vector<double> lambdas;
  algebra::CouplingMatrix beta;
  algebra::GroupDecomposition decomp;
  double lambda1 = 0.0; // first Dirichlet eigenvalue of the grid

  // strict: lambda_i in (-lambda1, 0); limit: lambda_i in (-lambda1, 0]
  // (whole-space truncation studies).
  enum class Mode { strict, limit } mode = Mode::strict;

  std::size_t d() const { return beta.d(); }
  std::size_t m() const { return decomp.m(); }
  GroupSet all_groups() const;
};

// Validates dimensions and the lambda range; computes lambda1.
ProblemSpec make_problem_spec(RadialGrid grid, std::vector<double> lambdas,
                              algebra::CouplingMatrix beta, algebra::GroupDecomposition decomp,
                              ProblemSpec::Mode mode = ProblemSpec::Mode::strict);

// d radial fields on the problem's grid.
struct SystemState {
  std::vector<RadialField> comp;
};

SystemState zero_state(const ProblemSpec& spec);
void check_state(const ProblemSpec& spec, const SystemState& u);

// ||u_i||_i^2 (positive definite for admissible lambdas).
double norm_sq(const ProblemSpec& spec, const RadialField& u, std::size_t i);
// sum over the components of group h.
double group_norm_sq(const ProblemSpec& spec, const SystemState& u, std::size_t h);

// |u_i|_4^4 summed over the components of group h.
double group_l4_mass(const ProblemSpec& spec, const SystemState& u, std::size_t h);

// Row-major |G| x |G| Gram over the listed groups.
std::vector<double> group_gram(const ProblemSpec& spec, const SystemState& u, const GroupSet& G);

double energy_J(const ProblemSpec& spec, const SystemState& u, const GroupSet& G);

// Equation-residual fields, one per component of the groups in G (components
// outside G get zero fields). Pairing with integrate() reproduces directional
// derivatives of energy_J.
SystemState gradient_J(const ProblemSpec& spec, const SystemState& u, const GroupSet& G);

// Psi_k for k in G, in the order of G.
std::vector<double> nehari_residuals(const ProblemSpec& spec, const SystemState& u,
                                     const GroupSet& G);

// Strict diagonal dominance of the group Gram (membership in the
// diagonally-dominant subset of the Nehari set where the constraint Gram is
// invertible).
bool in_diagonally_dominant_set(const ProblemSpec& spec, const SystemState& u, const GroupSet& G);

} // namespace ncs::functional
