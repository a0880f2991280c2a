#include "ncs/bubbles.hpp"

#include <cmath>
#include <limits>

#include "ncs/constants.hpp"

namespace ncs::bubbles {

namespace {
constexpr double two_sqrt2 = 2.8284271247461903; // 2 sqrt(2)
}

double Bubble::radial(double s) const {
  return two_sqrt2 * epsilon / (epsilon * epsilon + s * s);
}

double Bubble::radial_deriv(double s) const {
  double d = epsilon * epsilon + s * s;
  return -two_sqrt2 * epsilon * 2.0 * s / (d * d);
}

double Bubble::operator()(const Point& x) const {
  double s2 = 0.0;
  for (int k = 0; k < 4; ++k) {
    double t = x[k] - center[k];
    s2 += t * t;
  }
  return two_sqrt2 * epsilon / (epsilon * epsilon + s2);
}

double bubble_eval(const Bubble& b, const Point& x) { return b(x); }

double bubble_grad_sq_integral() {
  static double cached = [] {
    Bubble u; // eps = 1, centered; both integrals are eps- and center-invariant
    return quadrature::integrate_decaying(
        [&](double r) {
          double du = u.radial_deriv(r);
          return 2.0 * pi_sq * du * du * r * r * r;
        },
        1.0);
  }();
  return cached;
}

double bubble_quartic_integral() {
  static double cached = [] {
    Bubble u;
    return quadrature::integrate_decaying(
        [&](double r) {
          double v = u.radial(r);
          return 2.0 * pi_sq * v * v * v * v * r * r * r;
        },
        1.0);
  }();
  return cached;
}

double sobolev_tilde_sq() { return bubble_quartic_integral(); }

double subsystem_level(const algebra::CouplingMatrix& B_sub) {
  for (std::size_t i = 0; i < B_sub.d(); ++i)
    for (std::size_t j = i + 1; j < B_sub.d(); ++j)
      if (B_sub(i, j) < 0.0)
        throw HypothesisError("CooperationViolated",
                              "subsystem coupling must be cooperative (off-diagonal >= 0)");
  algebra::SphereMaxResult fm = algebra::fmax(B_sub);
  return sobolev_tilde_sq() / (4.0 * fm.value);
}

double SubsystemGroundState::component(std::size_t i, double s) const {
  return direction.at(i) / std::sqrt(f_max) * bubble.radial(s);
}

double SubsystemGroundState::component_deriv(std::size_t i, double s) const {
  return direction.at(i) / std::sqrt(f_max) * bubble.radial_deriv(s);
}

SubsystemGroundState subsystem_ground_state(const algebra::CouplingMatrix& B_sub, double epsilon,
                                            const Point& center) {
  if (!(epsilon > 0.0)) throw HypothesisError("BadParameters", "epsilon must be > 0");
  for (std::size_t i = 0; i < B_sub.d(); ++i)
    for (std::size_t j = i + 1; j < B_sub.d(); ++j)
      if (B_sub(i, j) < 0.0)
        throw HypothesisError("CooperationViolated",
                              "subsystem coupling must be cooperative (off-diagonal >= 0)");
  algebra::SphereMaxResult fm = algebra::fmax(B_sub);
  SubsystemGroundState g;
  g.direction = fm.directions.front();
  g.f_max = fm.value;
  g.level = sobolev_tilde_sq() / (4.0 * fm.value);
  g.bubble = Bubble{epsilon, center};
  return g;
}

LimitLevel limit_level(const algebra::CouplingMatrix& B, const algebra::GroupDecomposition& dec) {
  if (B.d() != dec.d())
    throw HypothesisError("BadDimension", "coupling matrix and decomposition disagree on d");
  if (!B.cooperative_within_groups(dec))
    throw HypothesisError("HypothesisViolated", "same-group couplings must be >= 0");
  if (!B.competitive_across_groups(dec))
    throw HypothesisError("HypothesisViolated",
                          "cross-group couplings must be <= 0 with at least one fully strictly "
                          "negative group pair");
  LimitLevel out;
  for (std::size_t h = 0; h < dec.m(); ++h) {
    double lh = subsystem_level(B.group_block(dec, h));
    out.per_group.push_back(lh);
    out.total += lh;
  }
  out.attained = false;
  return out;
}

double bubble_overlap(double eps1, double eps2, double separation) {
  if (!(eps1 > 0.0) || !(eps2 > 0.0) || separation < 0.0)
    throw HypothesisError("BadParameters", "bubble overlap needs eps > 0, separation >= 0");
  Bubble u1{eps1, {}}, u2{eps2, {}};
  auto F = [&](double r) {
    double v = u1.radial(r);
    return v * v;
  };
  auto G = [&](double s) {
    double v = u2.radial(s);
    return v * v;
  };
  const double inf = std::numeric_limits<double>::infinity();
  return quadrature::overlap_integral(F, inf, eps1, G, inf, eps2, separation, 1e-9);
}

double vector_sobolev_residual(const std::vector<RadialProfile>& v,
                               const algebra::CouplingMatrix& B_sub) {
  if (v.size() != B_sub.d())
    throw HypothesisError("BadDimension", "profile count must match coupling dimension");
  double grad = 0.0;
  for (const auto& p : v) {
    auto g = [&](double r) {
      double d = p.df(r);
      return 2.0 * pi_sq * d * d * r * r * r;
    };
    grad += std::isfinite(p.rmax) ? quadrature::integrate_compact(g, 0.0, p.rmax, p.scale)
                                  : quadrature::integrate_decaying(g, p.scale);
  }
  double quart = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (B_sub(i, j) == 0.0) continue;
      auto q = [&](double r) {
        double a = v[i].f(r), b = v[j].f(r);
        return 2.0 * pi_sq * a * a * b * b * r * r * r;
      };
      double rmax = std::min(v[i].rmax, v[j].rmax);
      double scale = std::min(v[i].scale, v[j].scale);
      quart += B_sub(i, j) * (std::isfinite(rmax)
                                  ? quadrature::integrate_compact(q, 0.0, rmax, scale)
                                  : quadrature::integrate_decaying(q, scale));
    }
  double l_h = subsystem_level(B_sub);
  return grad * grad - 4.0 * l_h * quart;
}

} // namespace ncs::bubbles
