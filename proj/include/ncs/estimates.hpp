#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ncs/bubbles.hpp"
#include "ncs/functional.hpp"
#include "ncs/nehari.hpp"

// Quantitative side of the existence theory: the explicit threshold chain
//   C_bar, Lambda_1 = S^2/(32 C_bar), delta(eps) = 1/16 min_h C^h eps^2 |ln eps|,
//   Lambda_2 = S^2/(16 (sum_h l_h - 2 delta*)), Lambda_3 = min(Lambda_1, Lambda_2),
//   Lambda_4 = delta* S^2 / (8 C_bar sum_h l_h), Lambda = min(Lambda_3, Lambda_4),
//   theta = min_h l_h, t_hat = 8 max{C_bar, l_h} / theta,
// cutoff-bubble competitors certifying the strict upper bounds
//   c_Gamma < sum_{h in Gamma} l_h - delta(eps)  (disjoint bubbles)
//   c < c_G + sum_{h not in G} l_h - delta(eps)  (attained groups + bubbles)
// and itemized hypothesis checks for the existence/nonexistence statements.

namespace ncs::estimates {

using functional::GroupSet;
using functional::ProblemSpec;
using functional::SystemState;

// Per-group explicit data: fmax, maximizer direction, level l_h, and the decay
// constant C^h = sum_{i in I_h} 8 X0_i^2 |lambda_i| / fmax_h.
struct GroupLevelData {
  std::vector<double> f_max;
  std::vector<std::vector<double>> X0;
  std::vector<double> l;
  std::vector<double> C_h;
  double l_total = 0.0;

  double delta(double eps) const; // 1/16 min_h C^h * eps^2 |ln eps|
};

GroupLevelData group_level_data(const ProblemSpec& spec);
GroupLevelData group_level_data(const algebra::CouplingMatrix& beta,
                                const algebra::GroupDecomposition& dec,
                                const std::vector<double>& lambdas);

struct CompetitorGeometry {
  std::vector<bubbles::Point> centers; // one per group
  double rho = 0.0;                    // cutoff radius; support radius is 2 rho
};

// m centers on a ring of radius ring_fraction * R in a fixed 2-plane (origin
// for m = 1); rho = 0.99 min(min pairwise distance / 4, boundary distance / 2).
CompetitorGeometry default_geometry(const ProblemSpec& spec, double ring_fraction = 0.5);

// Smooth cutoff bubble of group h at `center`: components
// xi(s) X0_i fmax^{-1/2} U_eps(s), xi = 1 on [0, rho], 0 beyond 2 rho
// (quintic smoothstep). A = sum_i (int |grad|^2 + lambda_i int ^2),
// B = sum_ij beta_ij int ^2 ^2. Throws HypothesisError("GeometryViolated") if
// the support leaves the ball.
struct CutoffBubble {
  std::size_t group = 0;
  double eps = 0.0, rho = 0.0;
  bubbles::Point center{};
  bubbles::SubsystemGroundState ground;
  double A = 0.0, B = 0.0;

  double cutoff(double s) const;
  double cutoff_deriv(double s) const;
  double component(std::size_t local_i, double s) const;       // distance s from center
  double component_deriv(std::size_t local_i, double s) const;
};

CutoffBubble build_cutoff_bubble(const ProblemSpec& spec, std::size_t group, double eps,
                                 const bubbles::Point& center, double rho);

struct CompetitorReport {
  double eps = 0.0;
  GroupSet gamma;              // groups covered, attained ones first for mixed
  GroupSet attained;           // subset realized by a minimizer (mixed only)
  std::vector<double> ell;     // quadratic coefficients (norm^2 or A_h)
  std::vector<double> gram;    // row-major quartic Gram
  std::vector<double> t_star;  // maximizer of Phi over t >= 0
  double upper_bound = 0.0;    // max_t Phi
  double target = 0.0;         // sum l_h - delta (+ attained level for mixed)
  double delta = 0.0;
  double gershgorin = 0.0;     // concavity margin of the Gram
  double Pi = 0.0;             // sup of the attained state over bubble supports
  bool t_positive = false;
  bool satisfied = false;      // t_positive and upper_bound < target
};

// Disjoint cutoff bubbles for the groups in gamma; cross-Gram entries vanish
// identically (disjoint supports), so max_t Phi = 1/4 sum A_h^2/B_h.
CompetitorReport competitor_disjoint(const ProblemSpec& spec, const GroupSet& gamma, double eps,
                                     const CompetitorGeometry& geom);

// Largest cutoff radius that keeps n_bubbles supports of radius 2 rho
// disjoint on the ring r = R - 2 rho, capped at rho_fraction * R.
double mixed_cutoff_radius(const ProblemSpec& spec, std::size_t n_bubbles,
                           double rho_fraction = 0.2);

// Attained minimizer on the groups of G (level `level_G`) plus cutoff bubbles
// for the remaining groups, centered on the admissible ring where the
// minimizer is smallest; quartic couplings between the minimizer and each
// bubble are measured by offset quadrature. Throws
// NumericalError("NotConcave") if the Gershgorin bound of the Gram is <= 0.
CompetitorReport competitor_mixed(const ProblemSpec& spec, const SystemState& minimizer_G,
                                  double level_G, const GroupSet& G, double eps, double rho);

struct ThresholdOptions {
  double ring_fraction = 0.5;
  double rho_override = 0.0;             // > 0: use this rho
  std::vector<double> eps_factors;       // default {2^-2, ..., 2^-8} (times rho)
  discretization::SobolevOptions sobolev;
};

struct SweepRow {
  double eps = 0.0;
  double upper_bound = 0.0; // full-collection disjoint competitor
  double target = 0.0;
  bool all_subsets_ok = false;
  bool ok = false; // full collection satisfied
};

struct ThresholdSet {
  double S = 0.0;
  double S_tilde_sq = 0.0;
  GroupLevelData levels;
  double C_bar = 0.0;
  double Lambda1 = 0.0;
  double eps_star = 0.0, delta_star = 0.0;
  double Lambda2 = 0.0, Lambda3 = 0.0, Lambda4 = 0.0, Lambda = 0.0;
  double theta = 0.0, t_hat = 0.0;
  CompetitorGeometry geometry;
  std::vector<SweepRow> sweep;

  double delta(double eps) const { return levels.delta(eps); }
};

// Full chain; the dyadic sweep fixes eps* as the largest factor at which the
// disjoint-competitor inequality verifies for every nonempty group subset.
// Throws NumericalError("SweepExhausted") if no swept eps verifies.
ThresholdSet compute_thresholds(const ProblemSpec& spec, const ThresholdOptions& opts = {});

enum class Theorem {
  existence_general,   // cooperative within groups, cross couplings < Lambda
  existence_singletons, // m = d: all off-diagonal couplings < Lambda
  existence_equal_lambda, // equal lambdas + constant dominant beta_h per group
  existence_alpha,     // alpha-form smallness |beta_ij| <= Lambda/(alpha d^2)
  limit_nonexistence   // whole-space mixed-sign hypotheses
};

struct HypothesisClause {
  std::string description;
  bool ok = false;
  double margin = 0.0; // distance to violation (negative when violated)
};

struct HypothesisReport {
  Theorem theorem = Theorem::existence_general;
  bool ok = false;
  std::vector<HypothesisClause> clauses;
};

HypothesisReport check_hypotheses(const ProblemSpec& spec, const ThresholdSet& thresholds,
                                  Theorem theorem, double alpha = 2.0);

struct VerifyOptions {
  ThresholdOptions thresholds;
  bool run_mixed = true; // solve each proper collection and run mixed competitors
  nehari::MinimizeOptions minimize;
  std::vector<double> mixed_factors; // default {2^-2, ..., 2^-10} (times rho)
  double mixed_rho_fraction = 0.2;
};

struct MixedRow {
  GroupSet attained;
  double level_G = 0.0;
  CompetitorReport report;     // first verifying trial (deepest otherwise)
  std::vector<SweepRow> trials;
};

struct VerificationReport {
  ThresholdSet thresholds;
  std::vector<MixedRow> mixed; // one per attained collection
  bool all_ok = false;
};

VerificationReport verify_energy_estimates(const ProblemSpec& spec, const VerifyOptions& opts);

} // namespace ncs::estimates
