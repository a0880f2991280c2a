#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "ncs/functional.hpp"

using namespace ncs;
using namespace ncs::functional;

namespace {

double rng01(std::uint64_t& s) {
  s ^= s >> 12;
  s ^= s << 25;
  s ^= s >> 27;
  return double((s * 2685821657736338717ULL) >> 11) / 9007199254740992.0;
}

ProblemSpec mixed_spec(std::size_t n = 64) {
  auto grid = discretization::make_grid(1.0, n);
  algebra::CouplingMatrix beta(3, {1.0, 2.5, -0.3, 2.5, 1.0, -0.3, -0.3, -0.3, 1.0});
  auto dec = algebra::make_decomposition({0, 2, 3});
  return make_problem_spec(std::move(grid), {-7.0, -7.0, -7.0}, std::move(beta), dec);
}

// smooth random field vanishing on the boundary
RadialField random_field(const RadialGrid& g, std::uint64_t& seed, double amp = 1.0) {
  double a = rng01(seed), b = rng01(seed), c = rng01(seed);
  RadialField u(g.n);
  for (std::size_t k = 0; k < g.n; ++k) {
    double r = g.r[k];
    u[k] = amp * (1.0 - r * r) * (a + b * r + c * std::cos(3.0 * r));
  }
  u.back() = 0.0;
  return u;
}

SystemState random_state(const ProblemSpec& spec, std::uint64_t& seed, double amp = 1.0) {
  SystemState u;
  for (std::size_t i = 0; i < spec.d(); ++i) u.comp.push_back(random_field(spec.grid, seed, amp));
  return u;
}

} // namespace

TEST_CASE("problem validation") {
  auto grid = discretization::make_grid(1.0, 64);
  algebra::CouplingMatrix beta(1, {1.0});
  auto dec = algebra::make_decomposition({0, 1});

  CHECK_NOTHROW(make_problem_spec(grid, {-7.0}, beta, dec));
  // lambda must exceed -lambda_1 (about -14.68 here)
  CHECK_THROWS_AS(make_problem_spec(grid, {-30.0}, beta, dec), HypothesisError);
  CHECK_THROWS_AS(make_problem_spec(grid, {0.0}, beta, dec), HypothesisError); // strict
  CHECK_NOTHROW(make_problem_spec(grid, {0.0}, beta, dec, ProblemSpec::Mode::limit));
  CHECK_THROWS_AS(make_problem_spec(grid, {0.5}, beta, dec, ProblemSpec::Mode::limit),
                  HypothesisError);
  // dimension mismatches
  CHECK_THROWS_AS(make_problem_spec(grid, {-7.0, -7.0}, beta, dec), HypothesisError);
  auto dec3 = algebra::make_decomposition({0, 3});
  CHECK_THROWS_AS(make_problem_spec(grid, {-7.0}, beta, dec3), HypothesisError);

  auto spec = mixed_spec();
  CHECK(spec.d() == 3);
  CHECK(spec.m() == 2);
  CHECK(spec.lambda1 == doctest::Approx(14.68197).epsilon(1e-3));
  CHECK(spec.all_groups() == GroupSet{0, 1});
}

TEST_CASE("state shape checking") {
  auto spec = mixed_spec();
  auto z = zero_state(spec);
  REQUIRE(z.comp.size() == 3);
  CHECK(z.comp[0].size() == spec.grid.n);
  CHECK_NOTHROW(check_state(spec, z));

  SystemState bad1;
  bad1.comp.assign(2, RadialField(spec.grid.n, 0.0));
  CHECK_THROWS_AS(check_state(spec, bad1), HypothesisError);
  SystemState bad2 = z;
  bad2.comp[1].resize(spec.grid.n - 1);
  CHECK_THROWS_AS(check_state(spec, bad2), HypothesisError);
}

TEST_CASE("component norm at a discrete eigenfunction") {
  auto spec = mixed_spec(128);
  auto pair = discretization::first_dirichlet_eigenpair(spec.grid);
  RadialField phi2(spec.grid.n);
  for (std::size_t k = 0; k < spec.grid.n; ++k) phi2[k] = pair.u[k] * pair.u[k];
  double l2 = discretization::integrate(spec.grid, phi2);
  // stiffness pencil identity: dirichlet_form(phi,phi) = lambda * int phi^2
  double expect = (pair.lambda - 7.0) * l2;
  CHECK(norm_sq(spec, pair.u, 0) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("energy assembles from norms and the group Gram") {
  auto spec = mixed_spec();
  std::uint64_t seed = 11;
  auto u = random_state(spec, seed);

  GroupSet all = spec.all_groups();
  auto M = group_gram(spec, u, all);
  REQUIRE(M.size() == 4);
  CHECK(M[0 * 2 + 1] == doctest::Approx(M[1 * 2 + 0]).epsilon(1e-14));

  double quad = 0.0;
  for (double x : M) quad += x;
  double expected = 0.5 * (group_norm_sq(spec, u, 0) + group_norm_sq(spec, u, 1)) - 0.25 * quad;
  CHECK(energy_J(spec, u, all) == doctest::Approx(expected).epsilon(1e-13));

  // restriction to one group uses only that group's entries
  auto M0 = group_gram(spec, u, {0});
  REQUIRE(M0.size() == 1);
  CHECK(M0[0] == doctest::Approx(M[0]).epsilon(1e-14));
  double e0 = 0.5 * group_norm_sq(spec, u, 0) - 0.25 * M0[0];
  CHECK(energy_J(spec, u, {0}) == doctest::Approx(e0).epsilon(1e-13));

  // single-component group: Gram entry is beta_ii |u_i|_4^4
  RadialField q(spec.grid.n);
  for (std::size_t k = 0; k < spec.grid.n; ++k) {
    double v = u.comp[2][k];
    q[k] = v * v * v * v;
  }
  auto M1 = group_gram(spec, u, {1});
  CHECK(M1[0] == doctest::Approx(discretization::integrate(spec.grid, q)).epsilon(1e-13));
  CHECK(group_l4_mass(spec, u, 1) == doctest::Approx(M1[0]).epsilon(1e-13));
}

TEST_CASE("Nehari residual identity and zero state behavior") {
  auto spec = mixed_spec();
  std::uint64_t seed = 23;
  auto u = random_state(spec, seed);

  GroupSet all = spec.all_groups();
  auto psi = nehari_residuals(spec, u, all);
  auto M = group_gram(spec, u, all);
  REQUIRE(psi.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    double expect = group_norm_sq(spec, u, k) - M[k * 2 + 0] - M[k * 2 + 1];
    CHECK(psi[k] == doctest::Approx(expect).epsilon(1e-12));
  }

  auto z = zero_state(spec);
  auto Mz = group_gram(spec, z, all);
  for (double x : Mz) CHECK(x == 0.0);
  auto pz = nehari_residuals(spec, z, all);
  for (double x : pz) CHECK(x == 0.0);
  CHECK_FALSE(in_diagonally_dominant_set(spec, z, all));
  CHECK(energy_J(spec, z, all) == 0.0);
}

TEST_CASE("gradient matches finite differences of the energy") {
  auto spec = mixed_spec();
  std::uint64_t seed = 31;
  auto u = random_state(spec, seed);
  GroupSet all = spec.all_groups();
  auto grad = gradient_J(spec, u, all);
  REQUIRE(grad.comp.size() == 3);

  for (int dir = 0; dir < 5; ++dir) {
    auto v = random_state(spec, seed, 0.5);
    double pairing = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      RadialField gv(spec.grid.n);
      for (std::size_t k = 0; k < spec.grid.n; ++k) gv[k] = grad.comp[i][k] * v.comp[i][k];
      pairing += discretization::integrate(spec.grid, gv);
    }
    double t = 1e-5;
    SystemState up = u, um = u;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < spec.grid.n; ++k) {
        up.comp[i][k] += t * v.comp[i][k];
        um.comp[i][k] -= t * v.comp[i][k];
      }
    double fd = (energy_J(spec, up, all) - energy_J(spec, um, all)) / (2.0 * t);
    CHECK(pairing == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("gradient restricted to a subset vanishes off the subset") {
  auto spec = mixed_spec();
  std::uint64_t seed = 47;
  auto u = random_state(spec, seed);
  auto grad = gradient_J(spec, u, {1}); // group 1 = component 2 only
  for (double x : grad.comp[0]) CHECK(x == 0.0);
  for (double x : grad.comp[1]) CHECK(x == 0.0);
  double nonzero = 0.0;
  for (double x : grad.comp[2]) nonzero += std::abs(x);
  CHECK(nonzero > 0.0);
}

TEST_CASE("diagonally dominant subset membership") {
  auto spec = mixed_spec();
  // strongly unbalanced state: group 0 large, group 1 small -> the cross
  // entries stay small against the diagonal
  std::uint64_t seed = 5;
  auto u = random_state(spec, seed);
  for (std::size_t k = 0; k < spec.grid.n; ++k) {
    u.comp[0][k] *= 4.0;
    u.comp[1][k] *= 4.0;
    u.comp[2][k] *= 4.0;
  }
  GroupSet all = spec.all_groups();
  auto M = group_gram(spec, u, all);
  bool expect = std::abs(M[0]) > std::abs(M[1]) && std::abs(M[3]) > std::abs(M[2]);
  CHECK(in_diagonally_dominant_set(spec, u, all) == expect);
  CHECK(in_diagonally_dominant_set(spec, u, {0}));
}
