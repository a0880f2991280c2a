#include "ncs/nehari.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace ncs::nehari {

namespace {

using discretization::RadialField;
using discretization::RadialGrid;

double uniform01(std::uint64_t& s) {
  // xorshift* keeps restart streams identical across standard libraries.
  s ^= s >> 12;
  s ^= s << 25;
  s ^= s >> 27;
  return double((s * 0x2545F4914F6CDD1DULL) >> 11) * 0x1p-53;
}

struct GroupTridiag {
  // (stiffness + lambda_i * mass) factor data per component, interior nodes.
  std::vector<double> lo, di, up;
};

GroupTridiag component_operator(const ProblemSpec& spec, std::size_t i) {
  const RadialGrid& g = spec.grid;
  const std::size_t K = g.n - 1;
  GroupTridiag t;
  t.lo.assign(K - 1, 0.0);
  t.di.assign(K - 1, 0.0);
  t.up.assign(K - 1, 0.0);
  const double lam = spec.lambdas[i];
  for (std::size_t k = 1; k <= K - 1; ++k) {
    double drl = g.r[k] - g.r[k - 1], drr = g.r[k + 1] - g.r[k];
    double al = g.cell[k - 1] / (drl * drl), ar = g.cell[k] / (drr * drr);
    std::size_t row = k - 1;
    t.di[row] = ((k == 1) ? ar : al + ar) + lam * g.mass[k];
    if (row > 0) t.lo[row] = -al;
    if (k < K - 1) t.up[row] = -ar;
  }
  return t;
}

void tridiag_solve(const GroupTridiag& t, std::vector<double>& rhs) {
  const std::size_t n = t.di.size();
  std::vector<double> c(n), d(n);
  c[0] = t.up[0] / t.di[0];
  d[0] = rhs[0] / t.di[0];
  for (std::size_t k = 1; k < n; ++k) {
    double m = t.di[k] - t.lo[k] * c[k - 1];
    c[k] = (k + 1 < n) ? t.up[k] / m : 0.0;
    d[k] = (rhs[k] - t.lo[k] * d[k - 1]) / m;
  }
  rhs[n - 1] = d[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) rhs[k] = d[k] - c[k] * rhs[k + 1];
}

// H^1-metric preconditioning of a residual field: solve (A + lambda M) p = M g.
RadialField precondition_field(const ProblemSpec& spec, const GroupTridiag& t,
                               const RadialField& g) {
  const RadialGrid& gr = spec.grid;
  const std::size_t K = gr.n - 1;
  std::vector<double> rhs(K - 1);
  for (std::size_t k = 1; k <= K - 1; ++k) rhs[k - 1] = gr.mass[k] * g[k];
  tridiag_solve(t, rhs);
  RadialField p(gr.n, 0.0);
  for (std::size_t k = 1; k <= K - 1; ++k) p[k] = rhs[k - 1];
  p[0] = p[1]; // folded r=0 node follows its neighbor
  return p;
}

} // namespace

ProjectionResult project(const ProblemSpec& spec, const SystemState& u, const GroupSet& G) {
  functional::check_state(spec, u);
  if (G.empty()) throw HypothesisError("BadParameters", "projection needs a nonempty group set");
  for (std::size_t h : G)
    if (!(functional::group_l4_mass(spec, u, h) > 0.0))
      throw HypothesisError("EmptyGroup",
                            "group " + std::to_string(h) + " has zero quartic mass");

  const std::size_t m = G.size();
  std::vector<double> M = functional::group_gram(spec, u, G);
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd b(m);
  for (std::size_t a = 0; a < m; ++a) {
    b(a) = functional::group_norm_sq(spec, u, G[a]);
    for (std::size_t c = 0; c < m; ++c) A(a, c) = M[a * m + c];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd t = lu.solve(b);
  double resid = (A * t - b).norm();
  double scale = b.norm() + A.norm() * t.norm();
  if (!(resid <= 1e-10 * std::max(scale, 1e-300)) || !t.allFinite())
    throw NumericalError("SingularGram", "group Gram solve residual " + std::to_string(resid));
  for (std::size_t a = 0; a < m; ++a)
    if (!(t(a) > 0.0))
      throw NumericalError("NonPositiveProjection",
                           "t_" + std::to_string(G[a]) + " = " + std::to_string(t(a)));

  ProjectionResult out;
  out.state = u;
  out.t.resize(m);
  for (std::size_t a = 0; a < m; ++a) {
    out.t[a] = t(a);
    double s = std::sqrt(t(a));
    for (std::size_t i = spec.decomp.group_begin(G[a]); i < spec.decomp.group_end(G[a]); ++i)
      for (auto& v : out.state.comp[i]) v *= s;
  }
  out.psi = functional::nehari_residuals(spec, out.state, G);
  out.level = functional::energy_J(spec, out.state, G);
  return out;
}

double compute_level(const ProblemSpec& spec, const SystemState& u, const GroupSet& G) {
  return project(spec, u, G).level;
}

namespace {

struct RestartOutcome {
  RestartRecord rec;
  SystemState state;
  std::vector<double> psi;
  double grad_norm_rel = 0.0;
  bool admissible = false;
};

SystemState initial_state(const ProblemSpec& spec, const GroupSet& G, std::uint64_t seed,
                          std::size_t restart_index) {
  const RadialGrid& g = spec.grid;
  SystemState u = functional::zero_state(spec);
  std::uint64_t s = seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL;
  uniform01(s);
  const std::size_t m = G.size();
  for (std::size_t a = 0; a < m; ++a) {
    std::size_t h = G[a];
    for (std::size_t i = spec.decomp.group_begin(h); i < spec.decomp.group_end(h); ++i) {
      double center, width, amp, conc;
      if (restart_index == 0) {
        // deterministic flat start; groups offset radially to avoid symmetry locking
        center = (m > 1) ? 0.45 * double(a) / double(m) : 0.0;
        width = 0.35;
        amp = 1.0;
        conc = 0.15;
      } else {
        center = 0.55 * uniform01(s);
        width = 0.08 + 0.4 * uniform01(s);
        amp = 0.5 + uniform01(s);
        conc = 0.03 + 0.4 * uniform01(s);
      }
      for (std::size_t k = 0; k < g.n; ++k) {
        double x = g.r[k] / g.radius;
        double cut = 1.0 - x * x;
        double humped = std::exp(-(x - center) * (x - center) / (width * width));
        double peak = conc / (conc * conc + x * x);
        u.comp[i][k] = amp * cut * (humped + peak);
      }
      u.comp[i][g.n - 1] = 0.0;
    }
  }
  return u;
}

RestartOutcome run_restart(const ProblemSpec& spec, const GroupSet& G, const MinimizeOptions& opts,
                           std::size_t restart_index) {
  const RadialGrid& grid = spec.grid;
  RestartOutcome out;
  out.rec.seed = opts.seed + restart_index;

  SystemState u = initial_state(spec, G, out.rec.seed, restart_index);

  // Projection with perturb-and-retry.
  std::uint64_t pseed = out.rec.seed ^ 0xABCDEF1234567890ULL;
  ProjectionResult proj;
  bool projected = false;
  for (int attempt = 0; attempt < 5 && !projected; ++attempt) {
    try {
      proj = project(spec, u, G);
      projected = true;
    } catch (const NumericalError&) {
      for (std::size_t h : G)
        for (std::size_t i = spec.decomp.group_begin(h); i < spec.decomp.group_end(h); ++i)
          for (std::size_t k = 0; k + 1 < grid.n; ++k) {
            double x = grid.r[k] / grid.radius;
            u.comp[i][k] = std::abs(u.comp[i][k] + 0.01 * (uniform01(pseed) - 0.3) * (1 - x * x));
          }
    }
  }
  if (!projected) {
    out.rec.collapsed = true;
    return out;
  }
  u = proj.state;
  double J = proj.level;

  std::vector<double> mass0(G.size());
  for (std::size_t a = 0; a < G.size(); ++a)
    mass0[a] = functional::group_l4_mass(spec, u, G[a]);

  std::vector<GroupTridiag> ops;
  if (opts.precondition)
    for (std::size_t i = 0; i < spec.d(); ++i) ops.push_back(component_operator(spec, i));

  double hmin = grid.radius;
  for (std::size_t k = 0; k + 1 < grid.n; ++k) hmin = std::min(hmin, grid.r[k + 1] - grid.r[k]);

  double step = opts.step;
  std::size_t plateau = 0, hard_fail = 0;
  bool stationary = false;
  std::size_t it = 0;
  for (; it < opts.max_iter && plateau < 8 && hard_fail < 3; ++it) {
    SystemState grad = functional::gradient_J(spec, u, G);
    // descent direction per component
    SystemState dir = functional::zero_state(spec);
    double pred = 0.0; // <grad, dir> pairing, positive for a descent direction
    for (std::size_t h : G)
      for (std::size_t i = spec.decomp.group_begin(h); i < spec.decomp.group_end(h); ++i) {
        if (opts.precondition) {
          dir.comp[i] = precondition_field(spec, ops[i], grad.comp[i]);
        } else {
          dir.comp[i] = grad.comp[i];
          double cfl = hmin * hmin / 4.0;
          for (auto& v : dir.comp[i]) v *= cfl;
        }
        for (std::size_t k = 1; k + 1 < grid.n; ++k)
          pred += grid.mass[k] * grad.comp[i][k] * dir.comp[i][k];
      }
    if (!(pred > 0.0)) {
      stationary = true; // gradient pairing vanished: stop at the floor
      break;
    }

    bool accepted = false;
    double s = step;
    for (int bt = 0; bt < 25 && !accepted; ++bt, s *= 0.5) {
      SystemState trial = u;
      for (std::size_t h : G)
        for (std::size_t i = spec.decomp.group_begin(h); i < spec.decomp.group_end(h); ++i) {
          for (std::size_t k = 0; k + 1 < grid.n; ++k)
            trial.comp[i][k] = std::abs(trial.comp[i][k] - s * dir.comp[i][k]);
          trial.comp[i][grid.n - 1] = 0.0;
        }
      try {
        ProjectionResult p = project(spec, trial, G);
        if (p.level < J) {
          double rel = (J - p.level) / std::max(std::abs(J), 1e-30);
          u = std::move(p.state);
          J = p.level;
          accepted = true;
          plateau = (rel < opts.tol) ? plateau + 1 : 0;
          step = std::min(s * 1.3, 4.0 * opts.step);
        }
      } catch (const Error&) {
        // non-projectable trial: backtrack
      } catch (const std::exception&) {
      }
    }
    if (!accepted) {
      ++hard_fail;
      ++plateau;
    }

    bool collapsed = false;
    for (std::size_t a = 0; a < G.size(); ++a)
      if (functional::group_l4_mass(spec, u, G[a]) < opts.collapse_rel * mass0[a]) collapsed = true;
    if (collapsed) {
      out.rec.collapsed = true;
      out.rec.iterations = it + 1;
      out.rec.level = J;
      return out;
    }
  }

  // The origin node carries no quadrature mass, so the flow leaves the gap
  // u_0 - u_1 essentially invariant; closing it removes the spurious Dirichlet
  // energy of the first cell. Kept only when re-projection confirms a lower
  // level.
  {
    SystemState polished = u;
    for (std::size_t h : G)
      for (std::size_t i = spec.decomp.group_begin(h); i < spec.decomp.group_end(h); ++i)
        polished.comp[i][0] = polished.comp[i][1];
    try {
      ProjectionResult p = project(spec, polished, G);
      if (p.level <= J) {
        u = std::move(p.state);
        J = p.level;
      }
    } catch (const Error&) {
    }
  }

  out.rec.iterations = it;
  out.rec.level = J;
  // a plateau of tiny accepted steps, an exhausted line search, and a vanished
  // gradient pairing are all level floors; only running out of iterations with
  // progress still being made counts as non-convergence
  out.rec.converged = plateau >= 8 || hard_fail >= 3 || stationary;
  out.state = u;
  out.psi = functional::nehari_residuals(spec, u, G);
  {
    SystemState grad = functional::gradient_J(spec, u, G);
    double gn = 0.0, un = 0.0;
    for (std::size_t h : G)
      for (std::size_t i = spec.decomp.group_begin(h); i < spec.decomp.group_end(h); ++i) {
        RadialField sq(grid.n), usq(grid.n);
        for (std::size_t k = 0; k < grid.n; ++k) {
          sq[k] = grad.comp[i][k] * grad.comp[i][k];
          usq[k] = u.comp[i][k] * u.comp[i][k];
        }
        gn += discretization::integrate(grid, sq);
        un += discretization::integrate(grid, usq);
      }
    out.grad_norm_rel = std::sqrt(gn) * std::sqrt(un) / std::max(8.0 * std::abs(J), 1e-30);
  }
  out.admissible = true;
  return out;
}

} // namespace

MinimizerResult minimize(const ProblemSpec& spec, const GroupSet& G, const MinimizeOptions& opts) {
  if (G.empty()) throw HypothesisError("BadParameters", "minimize needs a nonempty group set");
  for (std::size_t h : G)
    if (h >= spec.m()) throw HypothesisError("IndexOutOfRange", "group index out of range");

  std::size_t threads = 1;
  if (const char* env = std::getenv("NEHARI_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 1) threads = static_cast<std::size_t>(v);
  }
  threads = std::min<std::size_t>(std::max<std::size_t>(threads, 1), std::max<std::size_t>(opts.restarts, 1));

  std::vector<RestartOutcome> outcomes(opts.restarts);
  if (threads <= 1) {
    for (std::size_t rix = 0; rix < opts.restarts; ++rix)
      outcomes[rix] = run_restart(spec, G, opts, rix);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        std::size_t rix = next.fetch_add(1);
        if (rix >= opts.restarts) return;
        outcomes[rix] = run_restart(spec, G, opts, rix);
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  MinimizerResult res;
  std::size_t best = opts.restarts;
  for (std::size_t rix = 0; rix < opts.restarts; ++rix) {
    res.restarts.push_back(outcomes[rix].rec);
    if (!outcomes[rix].admissible) continue;
    if (best == opts.restarts || outcomes[rix].rec.level < outcomes[best].rec.level) best = rix;
  }
  if (best == opts.restarts)
    throw NumericalError("NoAdmissibleStart",
                         "every restart collapsed to a semi-trivial state or failed to project");

  const RestartOutcome& win = outcomes[best];
  res.state = win.state;
  res.level = win.rec.level;
  res.psi = win.psi;
  res.grad_norm_rel = win.grad_norm_rel;
  res.converged = win.rec.converged;
  res.iterations = win.rec.iterations;
  res.seed = win.rec.seed;

  if (!std::isnan(opts.lambda_threshold)) {
    for (std::size_t i = 0; i < spec.d(); ++i)
      for (std::size_t j = i + 1; j < spec.d(); ++j)
        if (algebra::classify_pair(spec.decomp, i, j) == algebra::PairClass::CrossGroup &&
            std::abs(spec.beta(i, j)) >= opts.lambda_threshold)
          res.warnings.push_back("cross coupling beta(" + std::to_string(i) + "," +
                                 std::to_string(j) + ") exceeds the smallness threshold " +
                                 std::to_string(opts.lambda_threshold));
  }
  return res;
}

Classification classify_minimizer(const ProblemSpec& spec, const SystemState& u, double fit_tol) {
  functional::check_state(spec, u);
  const std::size_t d = spec.d(), n = spec.grid.n;
  RadialField w(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += u.comp[i][k] * u.comp[i][k];
    w[k] = std::sqrt(s);
  }
  RadialField wsq(n);
  for (std::size_t k = 0; k < n; ++k) wsq[k] = w[k] * w[k];
  double wn = discretization::integrate(spec.grid, wsq);
  if (!(wn > 0.0)) throw HypothesisError("EmptyGroup", "cannot classify the zero state");

  Classification cls;
  cls.direction.resize(d);
  double xn = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    RadialField prod(n);
    for (std::size_t k = 0; k < n; ++k) prod[k] = u.comp[i][k] * w[k];
    cls.direction[i] = discretization::integrate(spec.grid, prod) / wn;
    xn += cls.direction[i] * cls.direction[i];
  }
  xn = std::sqrt(xn);
  for (auto& x : cls.direction) x /= xn;

  double resid = 0.0, total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    RadialField dev(n), usq(n);
    for (std::size_t k = 0; k < n; ++k) {
      double e = u.comp[i][k] - cls.direction[i] * xn * w[k];
      dev[k] = e * e;
      usq[k] = u.comp[i][k] * u.comp[i][k];
    }
    resid += discretization::integrate(spec.grid, dev);
    total += discretization::integrate(spec.grid, usq);
  }
  cls.fit_residual_rel = std::sqrt(resid / std::max(total, 1e-300));

  algebra::SphereMaxResult fm = algebra::fmax(spec.beta);
  double dist = std::numeric_limits<double>::infinity();
  for (const auto& x0 : fm.directions) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double t = cls.direction[i] - x0[i];
      s += t * t;
    }
    dist = std::min(dist, std::sqrt(s));
  }
  cls.direction_distance = dist;
  cls.synchronized = cls.fit_residual_rel <= fit_tol && cls.direction_distance <= fit_tol;
  return cls;
}

} // namespace ncs::nehari
