#include "ncs/functional.hpp"

#include <algorithm>
#include <cmath>

namespace ncs::functional {

GroupSet ProblemSpec::all_groups() const {
  GroupSet G(m());
  for (std::size_t h = 0; h < m(); ++h) G[h] = h;
  return G;
}

ProblemSpec make_problem_spec(RadialGrid grid, std::vector<double> lambdas,
                              algebra::CouplingMatrix beta, algebra::GroupDecomposition decomp,
                              ProblemSpec::Mode mode) {
  if (beta.d() != decomp.d())
    throw HypothesisError("BadDimension", "coupling matrix and decomposition disagree on d");
  if (lambdas.size() != beta.d())
    throw HypothesisError("BadDimension", "lambdas size must equal d");
  ProblemSpec spec{std::move(grid), std::move(lambdas), std::move(beta), std::move(decomp), 0.0,
                   mode};
  spec.lambda1 = discretization::dirichlet_lambda1(spec.grid);
  for (double l : spec.lambdas) {
    bool ok = (mode == ProblemSpec::Mode::strict) ? (l > -spec.lambda1 && l < 0.0)
                                                  : (l > -spec.lambda1 && l <= 0.0);
    if (!ok)
      throw HypothesisError("LambdaOutOfRange",
                            "lambda = " + std::to_string(l) + " outside (-lambda1, 0" +
                                (mode == ProblemSpec::Mode::strict ? ")" : "]") +
                                ", lambda1 = " + std::to_string(spec.lambda1));
  }
  return spec;
}

SystemState zero_state(const ProblemSpec& spec) {
  SystemState u;
  u.comp.assign(spec.d(), RadialField(spec.grid.n, 0.0));
  return u;
}

void check_state(const ProblemSpec& spec, const SystemState& u) {
  if (u.comp.size() != spec.d())
    throw HypothesisError("GridMismatch", "state must have d components");
  for (const auto& f : u.comp)
    if (f.size() != spec.grid.n)
      throw HypothesisError("GridMismatch", "component size does not match the grid");
}

double norm_sq(const ProblemSpec& spec, const RadialField& u, std::size_t i) {
  double dir = discretization::dirichlet_form(spec.grid, u, u);
  RadialField sq(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) sq[k] = u[k] * u[k];
  return dir + spec.lambdas.at(i) * discretization::integrate(spec.grid, sq);
}

double group_norm_sq(const ProblemSpec& spec, const SystemState& u, std::size_t h) {
  double s = 0.0;
  for (std::size_t i = spec.decomp.group_begin(h); i < spec.decomp.group_end(h); ++i)
    s += norm_sq(spec, u.comp[i], i);
  return s;
}

double group_l4_mass(const ProblemSpec& spec, const SystemState& u, std::size_t h) {
  double s = 0.0;
  RadialField q(spec.grid.n);
  for (std::size_t i = spec.decomp.group_begin(h); i < spec.decomp.group_end(h); ++i) {
    for (std::size_t k = 0; k < q.size(); ++k) {
      double v = u.comp[i][k];
      q[k] = v * v * v * v;
    }
    s += discretization::integrate(spec.grid, q);
  }
  return s;
}

std::vector<double> group_gram(const ProblemSpec& spec, const SystemState& u, const GroupSet& G) {
  check_state(spec, u);
  const std::size_t m = G.size();
  std::vector<double> M(m * m, 0.0);
  RadialField q(spec.grid.n);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      double s = 0.0;
      for (std::size_t i = spec.decomp.group_begin(G[a]); i < spec.decomp.group_end(G[a]); ++i)
        for (std::size_t j = spec.decomp.group_begin(G[b]); j < spec.decomp.group_end(G[b]); ++j) {
          double bij = spec.beta(i, j);
          if (bij == 0.0) continue;
          for (std::size_t k = 0; k < q.size(); ++k) {
            double vi = u.comp[i][k], vj = u.comp[j][k];
            q[k] = vi * vi * vj * vj;
          }
          s += bij * discretization::integrate(spec.grid, q);
        }
      M[a * m + b] = s;
      M[b * m + a] = s;
    }
  return M;
}

double energy_J(const ProblemSpec& spec, const SystemState& u, const GroupSet& G) {
  check_state(spec, u);
  double quad = 0.0;
  for (std::size_t h : G) quad += group_norm_sq(spec, u, h);
  std::vector<double> M = group_gram(spec, u, G);
  double quart = 0.0;
  for (double v : M) quart += v;
  return 0.5 * quad - 0.25 * quart;
}

SystemState gradient_J(const ProblemSpec& spec, const SystemState& u, const GroupSet& G) {
  check_state(spec, u);
  SystemState g = zero_state(spec);
  for (std::size_t h : G) {
    for (std::size_t i = spec.decomp.group_begin(h); i < spec.decomp.group_end(h); ++i) {
      RadialField lap = discretization::laplacian_apply(spec.grid, u.comp[i]);
      RadialField& gi = g.comp[i];
      for (std::size_t k = 0; k < spec.grid.n; ++k) {
        double cubic = 0.0;
        for (std::size_t gh : G)
          for (std::size_t j = spec.decomp.group_begin(gh); j < spec.decomp.group_end(gh); ++j) {
            double vj = u.comp[j][k];
            cubic += spec.beta(i, j) * vj * vj;
          }
        gi[k] = -lap[k] + spec.lambdas[i] * u.comp[i][k] - u.comp[i][k] * cubic;
      }
      gi[spec.grid.n - 1] = 0.0;
    }
  }
  return g;
}

std::vector<double> nehari_residuals(const ProblemSpec& spec, const SystemState& u,
                                     const GroupSet& G) {
  std::vector<double> M = group_gram(spec, u, G);
  const std::size_t m = G.size();
  std::vector<double> psi(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < m; ++b) row += M[a * m + b];
    psi[a] = group_norm_sq(spec, u, G[a]) - row;
  }
  return psi;
}

bool in_diagonally_dominant_set(const ProblemSpec& spec, const SystemState& u, const GroupSet& G) {
  std::vector<double> M = group_gram(spec, u, G);
  return algebra::is_strictly_diagonally_dominant(M, G.size());
}

} // namespace ncs::functional
