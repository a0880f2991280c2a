#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ncs/bubbles.hpp"
#include "ncs/errors.hpp"

using namespace ncs;
using algebra::CouplingMatrix;
using bubbles::Bubble;
using bubbles::Point;
using std::numbers::pi;

TEST_CASE("bubble pointwise values and derivative") {
  Bubble b{0.5, {0, 0, 0, 0}};
  auto exact = [&](double s) {
    return 2.0 * std::sqrt(2.0) * b.epsilon / (b.epsilon * b.epsilon + s * s);
  };
  for (double s : {0.0, 0.3, 1.0, 7.5}) CHECK(b.radial(s) == doctest::Approx(exact(s)).epsilon(1e-15));

  // centered difference vs analytic derivative
  for (double s : {0.1, 0.5, 2.0}) {
    double h = 1e-6;
    double fd = (b.radial(s + h) - b.radial(s - h)) / (2.0 * h);
    CHECK(b.radial_deriv(s) == doctest::Approx(fd).epsilon(1e-8));
  }
  CHECK(b.radial_deriv(0.0) == doctest::Approx(0.0));

  Bubble c{1.0, {1.0, 0.0, 0.0, 0.0}};
  Point x{1.0, 2.0, 0.0, 0.0}; // distance 2 from center
  CHECK(c(x) == doctest::Approx(c.radial(2.0)).epsilon(1e-15));
  CHECK(bubbles::bubble_eval(c, x) == doctest::Approx(c(x)));
}

TEST_CASE("bubble energy equals 32 pi^2 / 3 and both integrals agree") {
  double s2 = bubbles::sobolev_tilde_sq();
  CHECK(s2 == doctest::Approx(32.0 * pi * pi / 3.0).epsilon(1e-6));
  double g = bubbles::bubble_grad_sq_integral();
  double q = bubbles::bubble_quartic_integral();
  CHECK(g / q == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s2 == doctest::Approx(105.27578027828648).epsilon(1e-6));
}

TEST_CASE("subsystem least-energy levels") {
  double s2 = bubbles::sobolev_tilde_sq();
  CHECK(bubbles::subsystem_level(CouplingMatrix(1, {1.0})) ==
        doctest::Approx(s2 / 4.0).epsilon(1e-13));
  CHECK(bubbles::subsystem_level(CouplingMatrix(1, {2.0})) ==
        doctest::Approx(s2 / 8.0).epsilon(1e-13));
  // symmetric cooperative pair: fmax = (1 + beta)/2
  CHECK(bubbles::subsystem_level(CouplingMatrix(2, {1.0, 2.5, 2.5, 1.0})) ==
        doctest::Approx(s2 / 7.0).epsilon(1e-13));
  CHECK_THROWS_AS(bubbles::subsystem_level(CouplingMatrix(2, {1.0, -0.5, -0.5, 1.0})),
                  HypothesisError);
}

TEST_CASE("subsystem ground state profile") {
  CouplingMatrix B(2, {1.0, 2.5, 2.5, 1.0});
  auto gs = bubbles::subsystem_ground_state(B, 0.7, {0, 0, 0, 0});
  CHECK(gs.f_max == doctest::Approx(1.75).epsilon(1e-13));
  CHECK(gs.level == doctest::Approx(bubbles::sobolev_tilde_sq() / 7.0).epsilon(1e-12));
  REQUIRE(gs.direction.size() == 2);
  CHECK(gs.direction[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(gs.direction[1] == doctest::Approx(gs.direction[0]).epsilon(1e-13));
  CHECK(gs.bubble.epsilon == doctest::Approx(0.7));

  // component_i(s) = X0_i fmax^{-1/2} U(s)
  double u0 = gs.bubble.radial(0.3);
  CHECK(gs.component(0, 0.3) == doctest::Approx(gs.direction[0] / std::sqrt(1.75) * u0).epsilon(1e-13));
  double h = 1e-6, s = 0.4;
  double fd = (gs.component(1, s + h) - gs.component(1, s - h)) / (2.0 * h);
  CHECK(gs.component_deriv(1, s) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("vector Sobolev-type residual") {
  CouplingMatrix B(2, {1.0, 2.5, 2.5, 1.0});
  auto gs = bubbles::subsystem_ground_state(B, 1.0, {0, 0, 0, 0});

  std::vector<bubbles::RadialProfile> v(2);
  for (std::size_t i = 0; i < 2; ++i) {
    v[i].f = [&gs, i](double s) { return gs.component(i, s); };
    v[i].df = [&gs, i](double s) { return gs.component_deriv(i, s); };
    v[i].rmax = std::numeric_limits<double>::infinity();
    v[i].scale = 1.0;
  }
  double at_ground = bubbles::vector_sobolev_residual(v, B);
  double scale4 = std::pow(bubbles::sobolev_tilde_sq() / 1.75, 2);
  CHECK(std::abs(at_ground) <= 1e-7 * scale4); // zero up to quadrature error

  // generic profiles sit strictly above the inequality floor
  std::vector<bubbles::RadialProfile> w(2);
  w[0].f = [](double s) { return std::exp(-s * s / 2.0); };
  w[0].df = [](double s) { return -s * std::exp(-s * s / 2.0); };
  w[0].rmax = std::numeric_limits<double>::infinity();
  w[0].scale = 1.0;
  w[1].f = [](double s) { return 0.5 * std::exp(-s * s); };
  w[1].df = [](double s) { return -s * std::exp(-s * s); };
  w[1].rmax = std::numeric_limits<double>::infinity();
  w[1].scale = 1.0;
  CHECK(bubbles::vector_sobolev_residual(w, B) > 0.0);

  // perturbed bubble also stays nonnegative
  std::vector<bubbles::RadialProfile> p(2);
  for (std::size_t i = 0; i < 2; ++i) {
    double amp = (i == 0) ? 1.05 : 0.93;
    p[i].f = [&gs, i, amp](double s) { return amp * gs.component(i, s); };
    p[i].df = [&gs, i, amp](double s) { return amp * gs.component_deriv(i, s); };
    p[i].rmax = std::numeric_limits<double>::infinity();
    p[i].scale = 1.0;
  }
  CHECK(bubbles::vector_sobolev_residual(p, B) >= -1e-7 * scale4);
}

TEST_CASE("limit level of the decoupled system") {
  CouplingMatrix B(3, {1.0, 2.5, -0.3, 2.5, 1.0, -0.3, -0.3, -0.3, 1.0});
  auto dec = algebra::make_decomposition({0, 2, 3});
  auto L = bubbles::limit_level(B, dec);
  double s2 = bubbles::sobolev_tilde_sq();
  REQUIRE(L.per_group.size() == 2);
  CHECK(L.per_group[0] == doctest::Approx(s2 / 7.0).epsilon(1e-12));
  CHECK(L.per_group[1] == doctest::Approx(s2 / 4.0).epsilon(1e-12));
  CHECK(L.total == doctest::Approx(s2 * 11.0 / 28.0).epsilon(1e-12));
  CHECK_FALSE(L.attained);

  // cooperative across groups violates the competition hypothesis
  CouplingMatrix C(3, {1.0, 2.5, 0.3, 2.5, 1.0, 0.3, 0.3, 0.3, 1.0});
  CHECK_THROWS_AS(bubbles::limit_level(C, dec), HypothesisError);
}

TEST_CASE("interaction of two separated bubbles") {
  double coincident = bubbles::bubble_overlap(1.0, 1.0, 0.0);
  CHECK(coincident == doctest::Approx(bubbles::sobolev_tilde_sq()).epsilon(1e-6));

  CHECK(bubbles::bubble_overlap(0.5, 2.0, 5.0) ==
        doctest::Approx(bubbles::bubble_overlap(2.0, 0.5, 5.0)).epsilon(1e-6));

  double prev = coincident;
  std::vector<double> vals;
  for (double R : {4.0, 8.0, 16.0, 32.0}) {
    double v = bubbles::bubble_overlap(1.0, 1.0, R);
    CHECK(v > 0.0);
    CHECK(v < prev);
    prev = v;
    vals.push_back(v);
  }
  CHECK(vals.back() < vals.front() / 10.0);
}
