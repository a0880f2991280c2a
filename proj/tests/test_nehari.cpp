#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "ncs/bubbles.hpp"
#include "ncs/nehari.hpp"

using namespace ncs;
using namespace ncs::nehari;
using functional::GroupSet;
using functional::SystemState;

namespace {

double rng01(std::uint64_t& s) {
  s ^= s >> 12;
  s ^= s << 25;
  s ^= s >> 27;
  return double((s * 2685821657736338717ULL) >> 11) / 9007199254740992.0;
}

functional::ProblemSpec scalar_spec(std::size_t n = 96, double lambda = -7.0) {
  auto grid = discretization::make_grid(1.0, n);
  return functional::make_problem_spec(std::move(grid), {lambda}, algebra::CouplingMatrix(1, {1.0}),
                                       algebra::make_decomposition({0, 1}));
}

functional::ProblemSpec mixed_spec(std::size_t n = 96) {
  auto grid = discretization::make_grid(1.0, n);
  algebra::CouplingMatrix beta(3, {1.0, 2.5, -0.3, 2.5, 1.0, -0.3, -0.3, -0.3, 1.0});
  return functional::make_problem_spec(std::move(grid), {-7.0, -7.0, -7.0}, std::move(beta),
                                       algebra::make_decomposition({0, 2, 3}));
}

SystemState smooth_state(const functional::ProblemSpec& spec, std::uint64_t seed) {
  SystemState u;
  for (std::size_t i = 0; i < spec.d(); ++i) {
    discretization::RadialField f(spec.grid.n);
    double a = 0.5 + rng01(seed), b = rng01(seed);
    for (std::size_t k = 0; k < spec.grid.n; ++k) {
      double r = spec.grid.r[k];
      f[k] = (1.0 - r * r) * (a + b * r * r);
    }
    f.back() = 0.0;
    u.comp.push_back(std::move(f));
    seed += 0x9e3779b97f4a7c15ULL;
  }
  return u;
}

} // namespace

TEST_CASE("projection scales onto the constraint set") {
  auto spec = mixed_spec();
  auto u = smooth_state(spec, 7);
  GroupSet all = spec.all_groups();

  auto pr = project(spec, u, all);
  REQUIRE(pr.t.size() == 2);
  for (double t : pr.t) CHECK(t > 0.0);

  // scaled state is u with each group multiplied by sqrt(t_h)
  for (std::size_t k = 0; k < spec.grid.n; ++k) {
    CHECK(pr.state.comp[0][k] == doctest::Approx(std::sqrt(pr.t[0]) * u.comp[0][k]).epsilon(1e-13));
    CHECK(pr.state.comp[2][k] == doctest::Approx(std::sqrt(pr.t[1]) * u.comp[2][k]).epsilon(1e-13));
  }

  // defining linear system: gram(u) * t = group norms of u
  auto M = functional::group_gram(spec, u, all);
  for (std::size_t k = 0; k < 2; ++k) {
    double row = M[k * 2 + 0] * pr.t[0] + M[k * 2 + 1] * pr.t[1];
    double ell = functional::group_norm_sq(spec, u, k);
    CHECK(row == doctest::Approx(ell).epsilon(1e-11));
  }

  // residuals on the scaled state vanish; level is its energy
  for (std::size_t k = 0; k < 2; ++k) {
    double scale = functional::group_norm_sq(spec, pr.state, k);
    CHECK(std::abs(pr.psi[k]) <= 1e-10 * scale);
  }
  CHECK(pr.level == doctest::Approx(functional::energy_J(spec, pr.state, all)).epsilon(1e-13));
  CHECK(compute_level(spec, u, all) == doctest::Approx(pr.level).epsilon(1e-13));

  // a state already on the set reprojects with unit scalings
  auto pr2 = project(spec, pr.state, all);
  CHECK(pr2.t[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(pr2.t[1] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("projection failure modes") {
  auto spec = mixed_spec();
  GroupSet all = spec.all_groups();

  auto z = functional::zero_state(spec);
  CHECK_THROWS_AS(project(spec, z, all), HypothesisError); // empty groups

  auto u = smooth_state(spec, 3);
  for (auto& x : u.comp[2]) x = 0.0; // kill group 1 only
  CHECK_THROWS_AS(project(spec, u, all), HypothesisError);
  CHECK_NOTHROW(project(spec, u, {0}));

  // strongly competing singleton groups with identical profiles force a
  // negative scaling pair
  auto grid = discretization::make_grid(1.0, 64);
  algebra::CouplingMatrix beta(2, {1.0, -5.0, -5.0, 1.0});
  auto hostile = functional::make_problem_spec(std::move(grid), {-7.0, -7.0}, std::move(beta),
                                               algebra::make_decomposition({0, 1, 2}));
  SystemState same;
  for (int i = 0; i < 2; ++i) {
    discretization::RadialField f(hostile.grid.n);
    for (std::size_t k = 0; k < hostile.grid.n; ++k) {
      double r = hostile.grid.r[k];
      f[k] = 1.0 - r * r;
    }
    same.comp.push_back(std::move(f));
  }
  CHECK_THROWS_AS(project(hostile, same, hostile.all_groups()), NumericalError);
}

TEST_CASE("scalar critical problem: minimize and cross-check level") {
  auto spec = scalar_spec(96);
  MinimizeOptions opts;
  opts.restarts = 6;
  opts.seed = 1;
  auto res = minimize(spec, spec.all_groups(), opts);

  CHECK(res.converged);
  REQUIRE(res.psi.size() == 1);
  double scale = functional::group_norm_sq(spec, res.state, 0);
  CHECK(std::abs(res.psi[0]) <= 1e-8 * scale);
  CHECK(res.grad_norm_rel < 1e-3);

  double top = bubbles::sobolev_tilde_sq() / 4.0;
  CHECK(res.level > 0.0);
  CHECK(res.level < top);

  // independent algorithm: the level and the constrained quotient minimum
  // satisfy 4c = S^2 on the same grid
  double S = discretization::sobolev_S(spec.grid, {-7.0});
  CHECK(4.0 * res.level == doctest::Approx(S * S).epsilon(1e-4));

  // positivity and radial monotonicity of the profile
  const auto& u = res.state.comp[0];
  for (std::size_t k = 0; k + 1 < spec.grid.n; ++k) CHECK(u[k] > 0.0);
  double mx = *std::max_element(u.begin(), u.end());
  for (std::size_t k = 0; k + 1 < spec.grid.n; ++k) CHECK(u[k + 1] <= u[k] + 1e-9 * mx);
  CHECK(u.back() == 0.0);
}

TEST_CASE("determinism and refinement stability") {
  auto spec = scalar_spec(96);
  MinimizeOptions opts;
  opts.restarts = 4;
  opts.seed = 77;

  auto r1 = minimize(spec, spec.all_groups(), opts);
  auto r2 = minimize(spec, spec.all_groups(), opts);
  CHECK(r1.level == r2.level); // bitwise
  CHECK(r1.seed == r2.seed);
  for (std::size_t k = 0; k < spec.grid.n; ++k) CHECK(r1.state.comp[0][k] == r2.state.comp[0][k]);

  MinimizeOptions other = opts;
  other.seed = 1234;
  auto r3 = minimize(spec, spec.all_groups(), other);
  CHECK(r3.level == doctest::Approx(r1.level).epsilon(1e-6));

  auto fine = scalar_spec(191); // interleaved refinement of the 96-node grid
  auto r4 = minimize(fine, fine.all_groups(), opts);
  CHECK(std::abs(r4.level - r1.level) / r1.level < 0.02);

  REQUIRE(r1.restarts.size() == 4);
  for (const auto& rec : r1.restarts) {
    CHECK(rec.converged);
    CHECK(rec.level >= r1.level - 1e-13 * std::abs(r1.level));
  }
}

TEST_CASE("mixed system minimization and restart bookkeeping") {
  auto spec = mixed_spec(96);
  MinimizeOptions opts;
  opts.restarts = 6;
  opts.seed = 1;
  opts.lambda_threshold = 0.2; // |cross beta| = 0.3 exceeds it
  auto res = minimize(spec, spec.all_groups(), opts);

  CHECK(res.converged);
  for (std::size_t k = 0; k < 2; ++k) {
    double scale = functional::group_norm_sq(spec, res.state, k);
    CHECK(std::abs(res.psi[k]) <= 1e-7 * scale);
  }
  // below the decoupled limit level (strict subadditivity of the least level)
  auto L = bubbles::limit_level(spec.beta, spec.decomp);
  CHECK(res.level < L.total);
  CHECK(res.level > 0.0);
  CHECK_FALSE(res.warnings.empty());

  MinimizeOptions quiet = opts;
  quiet.lambda_threshold = 0.5;
  auto res2 = minimize(spec, spec.all_groups(), quiet);
  CHECK(res2.warnings.empty());

  // single-group restriction solves the cooperative pair subproblem
  auto sub = minimize(spec, {0}, opts);
  CHECK(sub.converged);
  CHECK(sub.level > 0.0);
  CHECK(sub.level < bubbles::sobolev_tilde_sq() / 7.0); // below l for fmax = 1.75
}

TEST_CASE("synchronization classification") {
  // purely cooperative pair with dominant coupling: minimizer is parallel to
  // the unique sphere maximizer (1,1)/sqrt(2)
  auto grid = discretization::make_grid(1.0, 96);
  algebra::CouplingMatrix beta(2, {1.0, 2.5, 2.5, 1.0});
  auto spec = functional::make_problem_spec(std::move(grid), {-7.0, -7.0}, std::move(beta),
                                            algebra::make_decomposition({0, 2}));
  MinimizeOptions opts;
  opts.restarts = 4;
  auto res = minimize(spec, spec.all_groups(), opts);
  auto cls = classify_minimizer(spec, res.state);
  CHECK(cls.synchronized);
  CHECK(cls.fit_residual_rel < 1e-2);
  CHECK(cls.direction_distance < 1e-2);
  REQUIRE(cls.direction.size() == 2);
  CHECK(cls.direction[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-2));
  CHECK(cls.direction[1] == doctest::Approx(cls.direction[0]).epsilon(1e-2));

  // the mixed system is proportional within groups but its direction is far
  // from the full-matrix maximizer set
  auto mspec = mixed_spec(96);
  auto mres = minimize(mspec, mspec.all_groups(), opts);
  auto mcls = classify_minimizer(mspec, mres.state);
  CHECK_FALSE(mcls.synchronized);
  CHECK(mcls.direction_distance > 0.1);
}
