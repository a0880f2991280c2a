#pragma once

#include <cstddef>
#include <vector>

#include "ncs/errors.hpp"

// Radial discretization of the ball B_R in R^4. Fields are nodal values on
// [0, R] with the Dirichlet condition f(R) = 0; the volume measure is
// 2 pi^2 r^3 dr. The discrete triple (quadrature, Dirichlet form, Laplacian)
// is built to be mutually consistent:
//   - integrate(f) = 2 pi^2 sum_k w_k f_k r_k^3 with sum_k w_k r_k^3 = R^4/4
//     exact to machine precision,
//   - dirichlet_form(u,v) = 2 pi^2 sum_k c_k (du_k)(dv_k)/dr_k^2 with
//     c_k = (r_{k+1}^4 - r_k^4)/4 (the exact Dirichlet integral of the
//     piecewise-linear interpolants),
//   - laplacian_apply is the mass-normalized flux difference, exact on
//     quadratic polynomials at interior nodes; at r = 0 it uses the removable
//     singularity value 4 u''(0); the boundary row is identically zero.
// Then integrate(u * laplacian_apply(v)) = -dirichlet_form(u,v) up to an
// O(h^4) node-0 term for boundary-zero fields.

namespace ncs::discretization {

using RadialField = std::vector<double>;

struct RadialGrid {
  double radius = 0.0;
  std::size_t n = 0;
  bool graded = false;
  std::vector<double> r;    // nodes, r[0] = 0, r[n-1] = R
  std::vector<double> w;    // per-node quadrature weights (multiply f_k r_k^3)
  std::vector<double> cell; // c_k, size n-1
  std::vector<double> mass; // w_k r_k^3 (node 0: exactly 0), size n

  double h() const { return r[1] - r[0]; } // first spacing (uniform: the spacing)
};

// Uniform grid (default) or sinh-graded grid clustering nodes near r = 0.
// Requires R > 0 and n >= 16.
RadialGrid make_grid(double R, std::size_t n, bool graded = false);

// 2 pi^2 sum_k mass_k f_k.
double integrate(const RadialGrid& g, const RadialField& f);

// 2 pi^2 sum_k c_k (u_{k+1}-u_k)(v_{k+1}-v_k)/dr_k^2; the H^1_0 Dirichlet
// integral of the piecewise-linear interpolants, exactly.
double dirichlet_form(const RadialGrid& g, const RadialField& u, const RadialField& v);

// Discrete radial Laplacian f'' + (3/r) f'; see the header comment.
RadialField laplacian_apply(const RadialGrid& g, const RadialField& f);

// First Dirichlet eigenvalue of -Laplacian, inverse power iteration on the
// (stiffness, mass) pencil, Richardson-extrapolated over this grid and its
// once-refined companion.
double dirichlet_lambda1(const RadialGrid& g);

struct Eigenpair {
  double lambda = 0.0;
  RadialField u; // positive, max-normalized
};
// Single-grid (no extrapolation) first eigenpair.
Eigenpair first_dirichlet_eigenpair(const RadialGrid& g);

struct SobolevOptions {
  std::size_t max_iter = 4000;
  double tol = 1e-13;
  unsigned long long seed = 12345;
};

// S = min_i inf_u (dirichlet_form(u,u) + lambda_i integrate(u^2)) / |u|_4^2
// over nonzero fields, by preconditioned quotient descent with multi-start.
// Requires every lambda_i in (-lambda1, 0] on this grid.
double sobolev_S(const RadialGrid& g, const std::vector<double>& lambdas,
                 const SobolevOptions& opts = {});

} // namespace ncs::discretization
