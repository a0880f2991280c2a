#pragma once

#include <array>
#include <functional>
#include <vector>

#include "ncs/algebra.hpp"
#include "ncs/quadrature.hpp"

// Explicit objects of the critical problem in R^4: the Aubin-Talenti bubble
// U_{eps,y}(x) = 2 sqrt(2) eps / (eps^2 + |x-y|^2), its energy
// S~^2 = int |grad U|^2 = int U^4, the per-group least-energy levels
// l_h = S~^2 / (4 fmax_h), the ground-state family X0 (fmax_h)^{-1/2} U, and
// the (unattained) limit level sum_h l_h of the whole-space system.

namespace ncs::bubbles {

using Point = std::array<double, 4>;

struct Bubble {
  double epsilon = 1.0;
  Point center{0.0, 0.0, 0.0, 0.0};

  double radial(double s) const; // value at distance s from the center
  double radial_deriv(double s) const;
  double operator()(const Point& x) const;
};

double bubble_eval(const Bubble& b, const Point& x);

// int_{R^4} |grad U|^2 = int_{R^4} U^4, computed once by high-order radial
// quadrature (cached); equals 32 pi^2 / 3 analytically.
double sobolev_tilde_sq();
// The two sides computed independently, for consistency checks.
double bubble_grad_sq_integral();
double bubble_quartic_integral();

// l_h for the group whose coupling block is B_sub: sobolev_tilde_sq() / (4 fmax).
// Requires the block cooperative (off-diagonal >= 0): HypothesisError
// ("CooperationViolated") otherwise.
double subsystem_level(const algebra::CouplingMatrix& B_sub);

struct SubsystemGroundState {
  std::vector<double> direction; // X0, |X0| = 1, nonnegative representative
  double f_max = 0.0;
  double level = 0.0; // l_h
  Bubble bubble;

  // Component i at distance s from the center: X0_i fmax^{-1/2} U(s).
  double component(std::size_t i, double s) const;
  double component_deriv(std::size_t i, double s) const;
};

SubsystemGroundState subsystem_ground_state(const algebra::CouplingMatrix& B_sub, double epsilon,
                                            const Point& center);

struct LimitLevel {
  double total = 0.0;
  std::vector<double> per_group;
  bool attained = false; // never attained under the mixed-sign hypotheses
};

// sum_h l_h for the full decomposition. Hypotheses: cooperative within groups,
// nonpositive across groups with at least one fully strictly negative group
// pair; HypothesisError("HypothesisViolated") otherwise.
LimitLevel limit_level(const algebra::CouplingMatrix& B, const algebra::GroupDecomposition& dec);

// int U_{eps1,0}^2 U_{eps2, R e}^2 over R^4 (separation R >= 0).
double bubble_overlap(double eps1, double eps2, double separation);

// Radial test profile with derivative, supported on [0, rmax) (rmax may be
// infinity for decaying profiles).
struct RadialProfile {
  std::function<double(double)> f;
  std::function<double(double)> df;
  double rmax = 0.0;
  double scale = 1.0;
};

// (sum_i int |grad v_i|^2)^2 - 4 l_h * int sum_ij beta_ij v_i^2 v_j^2 for a
// vector of radial profiles; nonnegative for every admissible state, zero at
// the ground-state bubble.
double vector_sobolev_residual(const std::vector<RadialProfile>& v,
                               const algebra::CouplingMatrix& B_sub);

} // namespace ncs::bubbles
