#include "ncs/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ncs/constants.hpp"

namespace ncs::discretization {

namespace {

void check_field(const RadialGrid& g, const RadialField& f, const char* what) {
  if (f.size() != g.n)
    throw HypothesisError("GridMismatch", std::string(what) + ": field size " +
                                              std::to_string(f.size()) + " != grid n " +
                                              std::to_string(g.n));
}

// Tridiagonal SPD solve (Thomas algorithm).
void tridiag_solve(const std::vector<double>& lower, const std::vector<double>& diag,
                   const std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n), d(n);
  c[0] = upper[0] / diag[0];
  d[0] = rhs[0] / diag[0];
  for (std::size_t k = 1; k < n; ++k) {
    double m = diag[k] - lower[k] * c[k - 1];
    c[k] = (k + 1 < n) ? upper[k] / m : 0.0;
    d[k] = (rhs[k] - lower[k] * d[k - 1]) / m;
  }
  rhs[n - 1] = d[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) rhs[k] = d[k] - c[k] * rhs[k + 1];
}

// Interior stiffness/mass pencil on nodes 1..n-2 with the r=0 node folded
// into node 1 (its quadrature mass vanishes, which forces u_0 = u_1).
struct Pencil {
  std::vector<double> lo, di, up; // stiffness tridiagonal
  std::vector<double> ms;         // mass diagonal
};

Pencil interior_pencil(const RadialGrid& g) {
  const std::size_t n = g.n, K = n - 1;
  Pencil p;
  p.lo.assign(K - 1, 0.0);
  p.di.assign(K - 1, 0.0);
  p.up.assign(K - 1, 0.0);
  p.ms.assign(K - 1, 0.0);
  for (std::size_t k = 1; k <= K - 1; ++k) {
    double drl = g.r[k] - g.r[k - 1], drr = g.r[k + 1] - g.r[k];
    double al = g.cell[k - 1] / (drl * drl), ar = g.cell[k] / (drr * drr);
    std::size_t row = k - 1;
    p.di[row] = al + ar;
    if (k == 1) p.di[row] = ar; // u_0 = u_1 elimination cancels the first flux
    if (row > 0) p.lo[row] = -al;
    if (k < K - 1) p.up[row] = -ar;
    p.ms[row] = g.mass[k];
  }
  return p;
}

double rayleigh(const Pencil& p, const std::vector<double>& x) {
  const std::size_t n = x.size();
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double ax = p.di[k] * x[k];
    if (k > 0) ax += p.lo[k] * x[k - 1];
    if (k + 1 < n) ax += p.up[k] * x[k + 1];
    num += x[k] * ax;
    den += p.ms[k] * x[k] * x[k];
  }
  return num / den;
}

Eigenpair eigen_single(const RadialGrid& g) {
  Pencil p = interior_pencil(g);
  const std::size_t n = p.di.size();
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    double s = g.r[k + 1] / g.radius;
    x[k] = 1.0 - s * s;
  }
  double lam = rayleigh(p, x), prev = 0.0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> rhs(n);
    for (std::size_t k = 0; k < n; ++k) rhs[k] = p.ms[k] * x[k];
    tridiag_solve(p.lo, p.di, p.up, rhs);
    double nrm = 0.0;
    for (double v : rhs) nrm = std::max(nrm, std::abs(v));
    for (auto& v : rhs) v /= nrm;
    x = std::move(rhs);
    prev = lam;
    lam = rayleigh(p, x);
    if (std::abs(lam - prev) <= 1e-15 * lam && it > 3) break;
  }
  Eigenpair ep;
  ep.lambda = lam;
  ep.u.assign(g.n, 0.0);
  double mx = 0.0;
  for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, std::abs(x[k]));
  double sgn = (x[n / 2] < 0.0) ? -1.0 : 1.0;
  for (std::size_t k = 0; k < n; ++k) ep.u[k + 1] = sgn * x[k] / mx;
  ep.u[0] = ep.u[1]; // folded node
  ep.u[g.n - 1] = 0.0;
  return ep;
}

} // namespace

RadialGrid make_grid(double R, std::size_t n, bool graded) {
  if (!(R > 0.0)) throw HypothesisError("BadParameters", "radius must be > 0");
  if (n < 16) throw HypothesisError("BadParameters", "grid needs n >= 16 nodes");
  RadialGrid g;
  g.radius = R;
  g.n = n;
  g.graded = graded;
  g.r.resize(n);
  const std::size_t K = n - 1;
  if (!graded) {
    for (std::size_t k = 0; k < n; ++k) g.r[k] = R * double(k) / double(K);
  } else {
    const double a = 3.0; // sinh grading strength: ~3x finer near the origin
    const double s = std::sinh(a);
    for (std::size_t k = 0; k < n; ++k) g.r[k] = R * std::sinh(a * double(k) / double(K)) / s;
  }
  g.r[0] = 0.0;
  g.r[K] = R;

  g.cell.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    double r0 = g.r[k], r1 = g.r[k + 1];
    g.cell[k] = (r1 * r1 * r1 * r1 - r0 * r0 * r0 * r0) / 4.0;
  }

  // Interior masses: the unique values making the flux-difference Laplacian
  // exact on r^2; boundary mass is the remainder enforcing the exact volume.
  g.mass.assign(n, 0.0);
  double acc = 0.0;
  for (std::size_t k = 1; k <= K - 1; ++k) {
    double drl = g.r[k] - g.r[k - 1], drr = g.r[k + 1] - g.r[k];
    double m = (g.cell[k] * (g.r[k] + g.r[k + 1]) / drr -
                g.cell[k - 1] * (g.r[k] + g.r[k - 1]) / drl) /
               8.0;
    if (!(m > 0.0)) throw NumericalError("BadParameters", "grid mass positivity violated");
    g.mass[k] = m;
    acc += m;
  }
  double total = R * R * R * R / 4.0;
  g.mass[K] = total - acc;
  if (!(g.mass[K] > 0.0)) throw NumericalError("BadParameters", "boundary mass not positive");

  g.w.resize(n);
  g.w[0] = 0.5 * (g.r[1] - g.r[0]); // multiplies r_0^3 = 0; stored for completeness
  for (std::size_t k = 1; k < n; ++k) g.w[k] = g.mass[k] / (g.r[k] * g.r[k] * g.r[k]);
  return g;
}

double integrate(const RadialGrid& g, const RadialField& f) {
  check_field(g, f, "integrate");
  double s = 0.0;
  for (std::size_t k = 1; k < g.n; ++k) s += g.mass[k] * f[k];
  return 2.0 * pi_sq * s;
}

double dirichlet_form(const RadialGrid& g, const RadialField& u, const RadialField& v) {
  check_field(g, u, "dirichlet_form");
  check_field(g, v, "dirichlet_form");
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < g.n; ++k) {
    double dr = g.r[k + 1] - g.r[k];
    s += g.cell[k] * (u[k + 1] - u[k]) * (v[k + 1] - v[k]) / (dr * dr);
  }
  return 2.0 * pi_sq * s;
}

RadialField laplacian_apply(const RadialGrid& g, const RadialField& f) {
  check_field(g, f, "laplacian_apply");
  const std::size_t K = g.n - 1;
  RadialField out(g.n, 0.0);
  double r1 = g.r[1];
  out[0] = 8.0 * (f[1] - f[0]) / (r1 * r1); // 4 f''(0), f'(0) = 0
  for (std::size_t k = 1; k <= K - 1; ++k) {
    double drl = g.r[k] - g.r[k - 1], drr = g.r[k + 1] - g.r[k];
    out[k] = (g.cell[k - 1] * (f[k - 1] - f[k]) / (drl * drl) +
              g.cell[k] * (f[k + 1] - f[k]) / (drr * drr)) /
             g.mass[k];
  }
  out[K] = 0.0;
  return out;
}

Eigenpair first_dirichlet_eigenpair(const RadialGrid& g) { return eigen_single(g); }

double dirichlet_lambda1(const RadialGrid& g) {
  double coarse = eigen_single(g).lambda;
  RadialGrid fine = make_grid(g.radius, 2 * g.n - 1, g.graded);
  double fval = eigen_single(fine).lambda;
  return (4.0 * fval - coarse) / 3.0;
}

namespace {

struct QuotientWork {
  const RadialGrid& g;
  double lambda;
  Pencil p; // stiffness + mass on interior nodes

  // N(u) = u^T (A + lambda M) u, T(u) = sum mass u^4, on interior vectors.
  double N(const std::vector<double>& x) const {
    double s = 0.0;
    const std::size_t n = x.size();
    for (std::size_t k = 0; k < n; ++k) {
      double ax = p.di[k] * x[k];
      if (k > 0) ax += p.lo[k] * x[k - 1];
      if (k + 1 < n) ax += p.up[k] * x[k + 1];
      s += x[k] * (ax + lambda * p.ms[k] * x[k]);
    }
    return s;
  }
  double T(const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += p.ms[k] * x[k] * x[k] * x[k] * x[k];
    return s;
  }
  double Q(const std::vector<double>& x) const {
    return 2.0 * pi_sq * N(x) / std::sqrt(2.0 * pi_sq * T(x));
  }
};

double quotient_descent(QuotientWork& w, std::vector<double> x, std::size_t max_iter, double tol) {
  // Preconditioned fixed-point/descent: u <- (1-s) u + s (A+lambda M)^{-1} M u^3 * (N/T),
  // with backtracking on the quotient and L4 normalization.
  const std::size_t n = x.size();
  std::vector<double> lo = w.p.lo, up = w.p.up, di(n);
  for (std::size_t k = 0; k < n; ++k) di[k] = w.p.di[k] + w.lambda * w.p.ms[k];

  auto normalize = [&](std::vector<double>& v) {
    double t = w.T(v);
    double c = std::pow(t, -0.25);
    for (auto& e : v) e *= c;
  };
  normalize(x);
  double q = w.Q(x);
  std::size_t stable = 0;
  for (std::size_t it = 0; it < max_iter && stable < 6; ++it) {
    std::vector<double> rhs(n);
    double ratio = w.N(x) / w.T(x);
    for (std::size_t k = 0; k < n; ++k) rhs[k] = ratio * w.p.ms[k] * x[k] * x[k] * x[k];
    tridiag_solve(lo, di, up, rhs); // rhs := (A + lambda M)^{-1} M u^3 ratio
    double s = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt, s *= 0.5) {
      std::vector<double> trial(n);
      for (std::size_t k = 0; k < n; ++k) trial[k] = (1.0 - s) * x[k] + s * rhs[k];
      normalize(trial);
      double qt = w.Q(trial);
      if (qt < q) {
        double rel = (q - qt) / std::max(std::abs(q), 1e-30);
        x = std::move(trial);
        q = qt;
        accepted = true;
        stable = (rel < tol) ? stable + 1 : 0;
        break;
      }
    }
    if (!accepted) ++stable;
  }
  return q;
}

} // namespace

double sobolev_S(const RadialGrid& g, const std::vector<double>& lambdas,
                 const SobolevOptions& opts) {
  if (lambdas.empty()) throw HypothesisError("BadParameters", "sobolev_S needs lambdas");
  double lam1 = dirichlet_lambda1(g);
  for (double l : lambdas)
    if (!(l > -lam1) || l > 0.0)
      throw HypothesisError("LambdaOutOfRange",
                            "sobolev_S requires lambda in (-lambda1, 0], lambda1 = " +
                                std::to_string(lam1));
  // The quotient is pointwise increasing in lambda, so the minimum over
  // components is attained at the smallest lambda.
  double lam = *std::min_element(lambdas.begin(), lambdas.end());

  QuotientWork w{g, lam, interior_pencil(g)};
  const std::size_t n = w.p.di.size();

  std::vector<std::vector<double>> starts;
  {
    std::vector<double> s1(n);
    for (std::size_t k = 0; k < n; ++k) {
      double s = g.r[k + 1] / g.radius;
      s1[k] = 1.0 - s * s;
    }
    starts.push_back(s1);
    for (double eps : {g.radius / 8.0, g.radius / 64.0}) {
      std::vector<double> sb(n);
      for (std::size_t k = 0; k < n; ++k) {
        double r = g.r[k + 1];
        double cut = 1.0 - std::pow(r / g.radius, 2.0);
        sb[k] = eps / (eps * eps + r * r) * cut;
      }
      starts.push_back(sb);
    }
    std::mt19937_64 rng(opts.seed);
    std::vector<double> sr(n);
    for (std::size_t k = 0; k < n; ++k) {
      double r = g.r[k + 1] / g.radius;
      double u1 = double(rng() >> 11) * 0x1p-53, u2 = double(rng() >> 11) * 0x1p-53;
      sr[k] = (1.0 - r * r) * (1.0 + 0.5 * std::sin(3.0 * pi * r * (0.5 + u1)) * u2);
    }
    starts.push_back(sr);
  }

  double best = std::numeric_limits<double>::infinity();
  for (auto& s : starts) best = std::min(best, quotient_descent(w, s, opts.max_iter, opts.tol));
  return best;
}

} // namespace ncs::discretization
