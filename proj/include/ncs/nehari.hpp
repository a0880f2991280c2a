#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ncs/functional.hpp"

// Constrained minimization over the Nehari-type set
// N_G = { u : Psi_k(u) = 0, each group of G nontrivial }: the group-rescaling
// projection solves M t = (||u_h||^2)_h and scales group h by sqrt(t_h); the
// minimizer is located by projected descent with re-projection after every
// step, multi-start, and deterministic seeded restarts.

namespace ncs::nehari {

using functional::GroupSet;
using functional::ProblemSpec;
using functional::SystemState;

struct ProjectionResult {
  SystemState state;          // scaled state on N_G
  std::vector<double> t;      // group scalings, all > 0
  std::vector<double> psi;    // Nehari residuals of the scaled state
  double level = 0.0;         // J at the scaled state
};

// Throws HypothesisError("EmptyGroup") if a group in G has zero L4 mass,
// NumericalError("SingularGram") if the Gram cannot be solved reliably,
// NumericalError("NonPositiveProjection") if some t_h <= 0.
ProjectionResult project(const ProblemSpec& spec, const SystemState& u, const GroupSet& G);

struct MinimizeOptions {
  double step = 0.5;            // dimensionless trial step (preconditioned metric)
  double tol = 1e-8;            // relative level-plateau tolerance
  std::size_t max_iter = 4000;  // per restart
  std::size_t restarts = 20;
  unsigned long long seed = 1;
  bool precondition = true;     // H^1-metric descent; false: explicit CFL-scaled steps
  double collapse_rel = 1e-6;   // group L4 mass collapse threshold (relative to start)
  double lambda_threshold = std::numeric_limits<double>::quiet_NaN(); // warn if |cross beta| >= this
};

struct RestartRecord {
  unsigned long long seed = 0;
  double level = 0.0;
  bool converged = false;
  bool collapsed = false;
  std::size_t iterations = 0;
};

struct MinimizerResult {
  SystemState state;
  double level = 0.0;
  std::vector<double> psi;       // Nehari residuals at the reported state
  double grad_norm_rel = 0.0;    // stationarity evidence
  bool converged = false;
  std::size_t iterations = 0;
  unsigned long long seed = 0;   // seed of the winning restart
  std::vector<RestartRecord> restarts;
  std::vector<std::string> warnings;
};

// Least level over restarts; NumericalError("NoAdmissibleStart") if every
// restart collapses or fails to project.
MinimizerResult minimize(const ProblemSpec& spec, const GroupSet& G,
                         const MinimizeOptions& opts = {});

// J restricted to N_G at u (projects first); convenience for levels c_G.
double compute_level(const ProblemSpec& spec, const SystemState& u, const GroupSet& G);

struct Classification {
  std::vector<double> direction;    // fitted unit vector X, nonnegative convention
  double fit_residual_rel = 0.0;    // relative L2 distance of u to X * w
  double direction_distance = 0.0;  // min distance of X to the fmax maximizer set
  bool synchronized = false;        // fit residual and distance both small
};

// Fits u ~ X * w (w = pointwise euclidean norm of the components) and compares
// X against the maximizer directions of fmax on the full coupling matrix.
Classification classify_minimizer(const ProblemSpec& spec, const SystemState& u,
                                  double fit_tol = 1e-2);

} // namespace ncs::nehari
