#pragma once

#include <functional>
#include <vector>

#include "ncs/errors.hpp"

// Panel-based Gauss-Legendre quadrature for radial integrals in R^4:
//   - compact integrands on [a, b] with a grading scale,
//   - decaying integrands on [0, inf) truncated where an empirical tail
//     estimate drops below tolerance,
//   - axially reduced products f(|x|) g(|x - c|) via
//     4*pi * iint f(r) g(sqrt(r^2 - 2 r |c| cos(theta) + |c|^2)) r^3 sin^2(theta).

namespace ncs::quadrature {

using Fn = std::function<double(double)>;

// Nodes/weights of the N-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> x, w;
};
const GaussRule& gauss_rule(int npts);

// Integral over one panel [a, b].
double panel_integral(const Fn& f, double a, double b, int npts = 24);

// Composite integral over [a, b]; panels are graded geometrically around
// `scale` (panel widths grow ~2x away from 0) so integrands varying on that
// scale near the origin are resolved.
double integrate_compact(const Fn& f, double a, double b, double scale, int npts = 24);

// Integral over [0, inf) of a decaying integrand: graded panels out to a
// cutoff that doubles until the empirical tail estimate
// |f(R)| * R / (q - 1), q = log2(f(R/2)/f(R)), falls below rel_tol * |I|.
// Throws NumericalError("QuadratureNotConverged") if the cutoff exceeds 2^40
// without meeting the tolerance.
double integrate_decaying(const Fn& f, double scale, double rel_tol = 1e-12);

// integral over R^4 of F(|x|) * G(|x - c|) dx for radial profiles F, G given
// with their support radii (infinity allowed for decaying profiles) and
// grading scales; dist = |c| >= 0. Panels in r are graded around 0 and around
// dist; panels in theta resolve the G-peak of angular width ~ g_scale/dist.
// A 2x panel refinement must agree to rel_tol or
// NumericalError("QuadratureNotConverged") is thrown.
double overlap_integral(const Fn& F, double f_rmax, double f_scale,
                        const Fn& G, double g_rmax, double g_scale,
                        double dist, double rel_tol = 1e-8);

} // namespace ncs::quadrature
