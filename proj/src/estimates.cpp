#include "ncs/estimates.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncs/constants.hpp"
#include "ncs/quadrature.hpp"

namespace ncs::estimates {

namespace {

double sq(double x) { return x * x; }

double center_dist(const bubbles::Point& a, const bubbles::Point& b) {
  double s = 0.0;
  for (int k = 0; k < 4; ++k) s += sq(a[k] - b[k]);
  return std::sqrt(s);
}

double center_norm(const bubbles::Point& a) { return center_dist(a, bubbles::Point{}); }

// max Phi(t) = 1/2 t.ell - 1/4 t^T M t over t >= 0, M positive definite
// (certified by the caller through the Gershgorin bound). Active-set on the
// stationarity system M t = ell.
struct PhiMax {
  std::vector<double> t;
  double value = 0.0;
  bool positive = false;
};

PhiMax maximize_phi(const std::vector<double>& ell, const std::vector<double>& M, std::size_t m) {
  std::vector<bool> active(m, false); // active: pinned at t = 0
  PhiMax out;
  out.t.assign(m, 0.0);
  for (int guard = 0; guard < 1 << (m + 2); ++guard) {
    std::vector<std::size_t> free;
    for (std::size_t k = 0; k < m; ++k)
      if (!active[k]) free.push_back(k);
    Eigen::VectorXd t = Eigen::VectorXd::Zero(m);
    if (!free.empty()) {
      Eigen::MatrixXd A(free.size(), free.size());
      Eigen::VectorXd b(free.size());
      for (std::size_t a = 0; a < free.size(); ++a) {
        b(a) = ell[free[a]];
        for (std::size_t c = 0; c < free.size(); ++c) A(a, c) = M[free[a] * m + free[c]];
      }
      Eigen::VectorXd x = A.ldlt().solve(b);
      for (std::size_t a = 0; a < free.size(); ++a) t(free[a]) = x(a);
    }
    // pin the most negative free coordinate, if any
    std::size_t worst = m;
    double worst_v = -1e-14;
    for (std::size_t k = 0; k < m; ++k)
      if (!active[k] && t(k) < worst_v) {
        worst_v = t(k);
        worst = k;
      }
    if (worst < m) {
      active[worst] = true;
      continue;
    }
    // KKT for pinned coordinates: gradient 1/2(ell_k - (Mt)_k) must be <= 0
    std::size_t release = m;
    double best_grad = 1e-12;
    for (std::size_t k = 0; k < m; ++k) {
      if (!active[k]) continue;
      double mt = 0.0;
      for (std::size_t c = 0; c < m; ++c) mt += M[k * m + c] * t(c);
      double grad = ell[k] - mt;
      if (grad > best_grad) {
        best_grad = grad;
        release = k;
      }
    }
    if (release < m) {
      active[release] = false;
      continue;
    }
    double lin = 0.0, quad = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      lin += t(k) * ell[k];
      double mt = 0.0;
      for (std::size_t c = 0; c < m; ++c) mt += M[k * m + c] * t(c);
      quad += t(k) * mt;
    }
    out.value = 0.5 * lin - 0.25 * quad;
    out.positive = true;
    for (std::size_t k = 0; k < m; ++k) {
      out.t[k] = std::max(t(k), 0.0);
      if (!(out.t[k] > 0.0)) out.positive = false;
    }
    return out;
  }
  throw NumericalError("NotConcave", "active-set maximization did not terminate");
}

} // namespace

double GroupLevelData::delta(double eps) const {
  if (!(eps > 0.0)) throw HypothesisError("BadParameters", "delta needs eps > 0");
  double cmin = *std::min_element(C_h.begin(), C_h.end());
  return cmin / 16.0 * eps * eps * std::abs(std::log(eps));
}

GroupLevelData group_level_data(const algebra::CouplingMatrix& beta,
                                const algebra::GroupDecomposition& dec,
                                const std::vector<double>& lambdas) {
  GroupLevelData out;
  for (std::size_t h = 0; h < dec.m(); ++h) {
    algebra::CouplingMatrix blk = beta.group_block(dec, h);
    for (std::size_t i = 0; i < blk.d(); ++i)
      for (std::size_t j = i + 1; j < blk.d(); ++j)
        if (blk(i, j) < 0.0)
          throw HypothesisError("CooperationViolated",
                                "group " + std::to_string(h) + " has a negative coupling");
    algebra::SphereMaxResult fm = algebra::fmax(blk);
    out.f_max.push_back(fm.value);
    out.X0.push_back(fm.directions.front());
    double lh = bubbles::sobolev_tilde_sq() / (4.0 * fm.value);
    out.l.push_back(lh);
    out.l_total += lh;
    double ch = 0.0;
    for (std::size_t i = 0; i < blk.d(); ++i)
      ch += 8.0 * sq(fm.directions.front()[i]) / fm.value * std::abs(lambdas[dec.group_begin(h) + i]);
    out.C_h.push_back(ch);
  }
  return out;
}

GroupLevelData group_level_data(const ProblemSpec& spec) {
  return group_level_data(spec.beta, spec.decomp, spec.lambdas);
}

CompetitorGeometry default_geometry(const ProblemSpec& spec, double ring_fraction) {
  const double R = spec.grid.radius;
  const std::size_t m = spec.m();
  CompetitorGeometry geom;
  if (m == 1) {
    geom.centers.push_back(bubbles::Point{0.0, 0.0, 0.0, 0.0});
    geom.rho = 0.99 * R / 2.0;
    return geom;
  }
  double q = ring_fraction * R;
  for (std::size_t h = 0; h < m; ++h) {
    double a = 2.0 * pi * double(h) / double(m);
    geom.centers.push_back(bubbles::Point{q * std::cos(a), q * std::sin(a), 0.0, 0.0});
  }
  double min_pair = 2.0 * q * std::sin(pi / double(m));
  geom.rho = 0.99 * std::min(min_pair / 4.0, (R - q) / 2.0);
  if (!(geom.rho > 0.0))
    throw HypothesisError("GeometryViolated", "ring placement leaves no room for cutoffs");
  return geom;
}

double CutoffBubble::cutoff(double s) const {
  if (s <= rho) return 1.0;
  if (s >= 2.0 * rho) return 0.0;
  double t = (s - rho) / rho;
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double CutoffBubble::cutoff_deriv(double s) const {
  if (s <= rho || s >= 2.0 * rho) return 0.0;
  double t = (s - rho) / rho;
  return -30.0 * t * t * sq(t - 1.0) / rho;
}

double CutoffBubble::component(std::size_t local_i, double s) const {
  return cutoff(s) * ground.component(local_i, s);
}

double CutoffBubble::component_deriv(std::size_t local_i, double s) const {
  return cutoff_deriv(s) * ground.component(local_i, s) + cutoff(s) * ground.component_deriv(local_i, s);
}

CutoffBubble build_cutoffbubble_impl(const ProblemSpec& spec, std::size_t group, double eps,
                                     const bubbles::Point& center, double rho) {
  if (!(eps > 0.0) || !(rho > 0.0))
    throw HypothesisError("BadParameters", "cutoff bubble needs eps > 0 and rho > 0");
  if (group >= spec.m()) throw HypothesisError("IndexOutOfRange", "group index out of range");
  if (center_norm(center) + 2.0 * rho > spec.grid.radius * (1.0 + 1e-12))
    throw HypothesisError("GeometryViolated", "cutoff support leaves the ball");

  CutoffBubble cb;
  cb.group = group;
  cb.eps = eps;
  cb.rho = rho;
  cb.center = center;
  cb.ground = bubbles::subsystem_ground_state(spec.beta.group_block(spec.decomp, group), eps,
                                              center);

  const std::size_t dloc = spec.decomp.group_size(group);
  double grad = quadrature::integrate_compact(
      [&](double s) {
        double g = 0.0;
        for (std::size_t i = 0; i < dloc; ++i) g += sq(cb.component_deriv(i, s));
        return 2.0 * pi_sq * g * s * s * s;
      },
      0.0, 2.0 * rho, eps, 24);
  double lam_part = quadrature::integrate_compact(
      [&](double s) {
        double g = 0.0;
        for (std::size_t i = 0; i < dloc; ++i)
          g += spec.lambdas[spec.decomp.group_begin(group) + i] * sq(cb.component(i, s));
        return 2.0 * pi_sq * g * s * s * s;
      },
      0.0, 2.0 * rho, eps, 24);
  cb.A = grad + lam_part;

  const algebra::CouplingMatrix blk = spec.beta.group_block(spec.decomp, group);
  cb.B = quadrature::integrate_compact(
      [&](double s) {
        double g = 0.0;
        for (std::size_t i = 0; i < dloc; ++i)
          for (std::size_t j = 0; j < dloc; ++j)
            g += blk(i, j) * sq(cb.component(i, s)) * sq(cb.component(j, s));
        return 2.0 * pi_sq * g * s * s * s;
      },
      0.0, 2.0 * rho, eps, 24);
  return cb;
}

CutoffBubble build_cutoff_bubble(const ProblemSpec& spec, std::size_t group, double eps,
                                 const bubbles::Point& center, double rho) {
  return build_cutoffbubble_impl(spec, group, eps, center, rho);
}

CompetitorReport competitor_disjoint(const ProblemSpec& spec, const GroupSet& gamma, double eps,
                                     const CompetitorGeometry& geom) {
  if (gamma.empty()) throw HypothesisError("BadParameters", "competitor needs groups");
  if (geom.centers.size() < spec.m())
    throw HypothesisError("GeometryViolated", "geometry must provide one center per group");
  for (std::size_t a = 0; a < gamma.size(); ++a)
    for (std::size_t b = a + 1; b < gamma.size(); ++b)
      if (center_dist(geom.centers[gamma[a]], geom.centers[gamma[b]]) <
          4.0 * geom.rho * (1.0 - 1e-12))
        throw HypothesisError("GeometryViolated", "cutoff supports overlap");

  GroupLevelData lv = group_level_data(spec);
  const std::size_t m = gamma.size();
  CompetitorReport rep;
  rep.eps = eps;
  rep.gamma = gamma;
  rep.ell.resize(m);
  rep.gram.assign(m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    CutoffBubble cb = build_cutoffbubble_impl(spec, gamma[a], eps, geom.centers[gamma[a]], geom.rho);
    rep.ell[a] = cb.A;
    rep.gram[a * m + a] = cb.B;
  }
  rep.gershgorin = algebra::gershgorin_lower_bound(rep.gram, m);
  PhiMax mx = maximize_phi(rep.ell, rep.gram, m);
  rep.t_star = mx.t;
  rep.upper_bound = mx.value;
  rep.t_positive = mx.positive;
  rep.delta = lv.delta(eps);
  rep.target = -rep.delta;
  for (std::size_t a = 0; a < m; ++a) rep.target += lv.l[gamma[a]];
  bool ab_ok = true;
  for (std::size_t a = 0; a < m; ++a)
    if (!(rep.ell[a] > 0.0 && rep.ell[a] < rep.gram[a * m + a])) ab_ok = false;
  rep.satisfied = rep.t_positive && ab_ok && rep.upper_bound < rep.target;
  return rep;
}

double mixed_cutoff_radius(const ProblemSpec& spec, std::size_t n_bubbles, double rho_fraction) {
  const double R = spec.grid.radius;
  double rho = rho_fraction * R;
  if (n_bubbles >= 2) {
    // supports centered on the ring r = R - 2 rho need pairwise chord >= 4 rho
    double s = std::sin(pi / double(n_bubbles));
    rho = std::min(rho, R * s / (2.0 / 0.99 + 2.0 * s));
  }
  return rho;
}

CompetitorReport competitor_mixed(const ProblemSpec& spec, const SystemState& minimizer_G,
                                  double level_G, const GroupSet& G, double eps, double rho) {
  functional::check_state(spec, minimizer_G);
  if (G.empty() || G.size() >= spec.m())
    throw HypothesisError("BadParameters", "mixed competitor needs a proper nonempty subset");
  if (!(rho > 0.0)) throw HypothesisError("BadParameters", "mixed competitor needs rho > 0");
  const double R = spec.grid.radius;

  GroupSet H;
  for (std::size_t h = 0; h < spec.m(); ++h)
    if (std::find(G.begin(), G.end(), h) == G.end()) H.push_back(h);

  // Ring radius: the largest admissible grid radius, where the (radially
  // decreasing) attained state is smallest.
  const auto& r = spec.grid.r;
  double ring = -1.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < spec.grid.n; ++k) {
    if (r[k] + 2.0 * rho > R * (1.0 - 1e-12)) break;
    double worst = 0.0;
    for (std::size_t g : G)
      for (std::size_t i = spec.decomp.group_begin(g); i < spec.decomp.group_end(g); ++i)
        worst = std::max(worst, std::abs(minimizer_G.comp[i][k]));
    if (worst <= best) {
      best = worst;
      ring = r[k];
    }
  }
  if (ring < 0.0) throw HypothesisError("GeometryViolated", "no admissible bubble ring");

  std::vector<bubbles::Point> centers;
  for (std::size_t j = 0; j < H.size(); ++j) {
    double a = 2.0 * pi * double(j) / double(H.size());
    centers.push_back(bubbles::Point{ring * std::cos(a), ring * std::sin(a), 0.0, 0.0});
  }
  for (std::size_t a = 0; a < centers.size(); ++a)
    for (std::size_t b = a + 1; b < centers.size(); ++b)
      if (center_dist(centers[a], centers[b]) < 4.0 * rho * (1.0 - 1e-12))
        throw HypothesisError("GeometryViolated", "bubble ring too tight for the cutoff radius");

  GroupLevelData lv = group_level_data(spec);
  const std::size_t mg = G.size(), mh = H.size(), m = mg + mh;
  CompetitorReport rep;
  rep.eps = eps;
  rep.attained = G;
  rep.gamma = G;
  for (std::size_t h : H) rep.gamma.push_back(h);
  rep.ell.resize(m);
  rep.gram.assign(m * m, 0.0);

  // attained block
  std::vector<double> MG = functional::group_gram(spec, minimizer_G, G);
  for (std::size_t a = 0; a < mg; ++a) {
    rep.ell[a] = functional::group_norm_sq(spec, minimizer_G, G[a]);
    for (std::size_t b = 0; b < mg; ++b) rep.gram[a * m + b] = MG[a * mg + b];
  }

  // bubbles + cross couplings
  std::vector<CutoffBubble> cbs;
  for (std::size_t j = 0; j < mh; ++j)
    cbs.push_back(build_cutoffbubble_impl(spec, H[j], eps, centers[j], rho));

  // sup of the attained state over the radial shell carrying the supports
  rep.Pi = 0.0;
  for (std::size_t k = 0; k < spec.grid.n; ++k) {
    if (r[k] < ring - 2.0 * rho || r[k] > ring + 2.0 * rho) continue;
    for (std::size_t g : G)
      for (std::size_t i = spec.decomp.group_begin(g); i < spec.decomp.group_end(g); ++i)
        rep.Pi = std::max(rep.Pi, std::abs(minimizer_G.comp[i][k]));
  }

  auto interp_sq = [&spec, &r, R](const discretization::RadialField& f) {
    const discretization::RadialField* fp = &f;
    return [&spec, &r, R, fp](double s) {
      if (s >= R) return 0.0;
      std::size_t k;
      if (!spec.grid.graded) {
        double x = s / R * double(spec.grid.n - 1);
        k = std::min<std::size_t>(static_cast<std::size_t>(x), spec.grid.n - 2);
      } else {
        k = std::upper_bound(r.begin(), r.end(), s) - r.begin();
        k = (k == 0) ? 0 : std::min<std::size_t>(k - 1, spec.grid.n - 2);
      }
      double t = (s - r[k]) / (r[k + 1] - r[k]);
      double v = (1.0 - t) * (*fp)[k] + t * (*fp)[k + 1];
      return v * v;
    };
  };

  for (std::size_t j = 0; j < mh; ++j) {
    std::size_t col = mg + j;
    rep.ell[col] = cbs[j].A;
    rep.gram[col * m + col] = cbs[j].B;
    for (std::size_t a = 0; a < mg; ++a) {
      double cross = 0.0;
      for (std::size_t i = spec.decomp.group_begin(G[a]); i < spec.decomp.group_end(G[a]); ++i) {
        for (std::size_t jj = 0; jj < spec.decomp.group_size(H[j]); ++jj) {
          double bij = spec.beta(i, spec.decomp.group_begin(H[j]) + jj);
          if (bij == 0.0) continue;
          auto Ffun = interp_sq(minimizer_G.comp[i]);
          auto Gfun = [&, jj](double s) { return sq(cbs[j].component(jj, s)); };
          cross += bij * quadrature::overlap_integral(Ffun, R, std::max(R / 16.0, eps), Gfun,
                                                      2.0 * rho, eps, ring, 1e-6);
        }
      }
      rep.gram[col * m + a] = cross;
      rep.gram[a * m + col] = cross;
    }
  }

  rep.gershgorin = algebra::gershgorin_lower_bound(rep.gram, m);
  if (!(rep.gershgorin > 0.0))
    throw NumericalError("NotConcave", "mixed competitor Gram is not certified positive definite");

  PhiMax mx = maximize_phi(rep.ell, rep.gram, m);
  rep.t_star = mx.t;
  rep.upper_bound = mx.value;
  rep.t_positive = mx.positive;
  rep.delta = lv.delta(eps);
  rep.target = level_G - rep.delta;
  for (std::size_t h : H) rep.target += lv.l[h];
  rep.satisfied = rep.t_positive && rep.upper_bound < rep.target;
  return rep;
}

ThresholdSet compute_thresholds(const ProblemSpec& spec, const ThresholdOptions& opts) {
  ThresholdSet ts;
  ts.S_tilde_sq = bubbles::sobolev_tilde_sq();
  ts.levels = group_level_data(spec);
  ts.S = discretization::sobolev_S(spec.grid, spec.lambdas, opts.sobolev);

  double worst_diag = std::numeric_limits<double>::infinity();
  double c_factor = 0.0;
  for (std::size_t h = 0; h < spec.m(); ++h) {
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = spec.decomp.group_begin(h); i < spec.decomp.group_end(h); ++i)
      mn = std::min(mn, 1.0 / spec.beta(i, i));
    c_factor = std::max(c_factor, mn);
    worst_diag = std::min(worst_diag, mn);
  }
  ts.C_bar = 0.25 * c_factor * double(spec.m()) * ts.S_tilde_sq;
  ts.Lambda1 = sq(ts.S) / (32.0 * ts.C_bar);

  ts.geometry = default_geometry(spec, opts.ring_fraction);
  if (opts.rho_override > 0.0) ts.geometry.rho = opts.rho_override;

  std::vector<double> factors = opts.eps_factors;
  if (factors.empty())
    for (int k = 2; k <= 8; ++k) factors.push_back(std::ldexp(1.0, -k));
  std::sort(factors.begin(), factors.end(), std::greater<double>());

  GroupSet all = spec.all_groups();
  ts.eps_star = 0.0;
  for (double f : factors) {
    double eps = f * ts.geometry.rho;
    CompetitorReport full = competitor_disjoint(spec, all, eps, ts.geometry);
    SweepRow row;
    row.eps = eps;
    row.upper_bound = full.upper_bound;
    row.target = full.target;
    row.ok = full.satisfied;
    row.all_subsets_ok = full.satisfied;
    // subset inequalities reuse the per-group A, B of the full report
    for (std::size_t mask = 1; mask < (std::size_t(1) << spec.m()) && row.all_subsets_ok; ++mask) {
      double upper = 0.0, target = -full.delta;
      bool ab_ok = true;
      for (std::size_t h = 0; h < spec.m(); ++h) {
        if (!(mask & (std::size_t(1) << h))) continue;
        double A = full.ell[h], B = full.gram[h * spec.m() + h];
        if (!(A > 0.0 && A < B)) ab_ok = false;
        if (A > 0.0) upper += 0.25 * A * A / B;
        target += ts.levels.l[h];
      }
      if (!(ab_ok && upper < target)) row.all_subsets_ok = false;
    }
    ts.sweep.push_back(row);
    if (row.all_subsets_ok && ts.eps_star == 0.0) ts.eps_star = eps;
  }
  if (ts.eps_star == 0.0) {
    std::string diag;
    for (const auto& row : ts.sweep)
      diag += " eps=" + std::to_string(row.eps) + " upper=" + std::to_string(row.upper_bound) +
              " target=" + std::to_string(row.target) + ";";
    throw NumericalError("SweepExhausted",
                         "no swept eps verifies the disjoint-competitor inequalities:" + diag);
  }

  ts.delta_star = ts.levels.delta(ts.eps_star);
  double denom = ts.levels.l_total - 2.0 * ts.delta_star;
  if (!(denom > 0.0))
    throw NumericalError("SweepExhausted", "sum of levels does not dominate 2 delta*");
  ts.Lambda2 = sq(ts.S) / (16.0 * denom);
  ts.Lambda3 = std::min(ts.Lambda1, ts.Lambda2);
  ts.Lambda4 = ts.delta_star * sq(ts.S) / (8.0 * ts.C_bar * ts.levels.l_total);
  ts.Lambda = std::min(ts.Lambda3, ts.Lambda4);
  ts.theta = *std::min_element(ts.levels.l.begin(), ts.levels.l.end());
  double tmax = std::max(ts.C_bar, *std::max_element(ts.levels.l.begin(), ts.levels.l.end()));
  ts.t_hat = 8.0 * tmax / ts.theta;
  return ts;
}

namespace {

void add_clause(HypothesisReport& rep, std::string desc, bool ok, double margin) {
  rep.clauses.push_back({std::move(desc), ok, margin});
  rep.ok = rep.ok && ok;
}

} // namespace

HypothesisReport check_hypotheses(const ProblemSpec& spec, const ThresholdSet& thresholds,
                                  Theorem theorem, double alpha) {
  HypothesisReport rep;
  rep.theorem = theorem;
  rep.ok = true;
  const auto& B = spec.beta;
  const auto& dec = spec.decomp;
  const std::size_t d = spec.d();

  if (theorem != Theorem::limit_nonexistence) {
    double lam_margin = std::numeric_limits<double>::infinity();
    for (double l : spec.lambdas)
      lam_margin = std::min({lam_margin, l + spec.lambda1, -l});
    add_clause(rep, "lambdas lie in (-lambda1, 0)", lam_margin > 0.0, lam_margin);
  }

  auto same_group_min = [&] {
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j)
        if (algebra::classify_pair(dec, i, j) == algebra::PairClass::SameGroup)
          mn = std::min(mn, B(i, j));
    return mn;
  };
  auto cross_entries = [&] {
    std::vector<double> v;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j)
        if (algebra::classify_pair(dec, i, j) == algebra::PairClass::CrossGroup)
          v.push_back(B(i, j));
    return v;
  };

  switch (theorem) {
    case Theorem::existence_general: {
      double mn = same_group_min();
      bool has_pairs = std::isfinite(mn);
      add_clause(rep, "same-group couplings are nonnegative", !has_pairs || mn >= 0.0,
                 has_pairs ? mn : 0.0);
      double worst = -std::numeric_limits<double>::infinity();
      for (double b : cross_entries()) worst = std::max(worst, b);
      bool has_cross = std::isfinite(worst);
      add_clause(rep, "cross-group couplings are below Lambda",
                 !has_cross || worst < thresholds.Lambda,
                 has_cross ? thresholds.Lambda - worst : thresholds.Lambda);
      break;
    }
    case Theorem::existence_singletons: {
      bool singletons = dec.m() == d;
      add_clause(rep, "every group is a singleton", singletons, singletons ? 1.0 : -1.0);
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) worst = std::max(worst, B(i, j));
      bool has = std::isfinite(worst);
      add_clause(rep, "off-diagonal couplings are below Lambda",
                 !has || worst < thresholds.Lambda, has ? thresholds.Lambda - worst : thresholds.Lambda);
      break;
    }
    case Theorem::existence_equal_lambda:
    case Theorem::existence_alpha: {
      double dev = 0.0;
      for (std::size_t h = 0; h < dec.m(); ++h)
        for (std::size_t i = dec.group_begin(h); i < dec.group_end(h); ++i)
          dev = std::max(dev, std::abs(spec.lambdas[i] - spec.lambdas[dec.group_begin(h)]));
      add_clause(rep, "lambdas are constant within each group", dev <= 1e-14, -dev);

      double bdev = 0.0;
      double beta_margin = std::numeric_limits<double>::infinity();
      for (std::size_t h = 0; h < dec.m(); ++h) {
        if (dec.group_size(h) < 2) continue;
        double bh = B(dec.group_begin(h), dec.group_begin(h) + 1);
        double diag_max = 0.0;
        for (std::size_t i = dec.group_begin(h); i < dec.group_end(h); ++i) {
          diag_max = std::max(diag_max, B(i, i));
          for (std::size_t j = i + 1; j < dec.group_end(h); ++j)
            bdev = std::max(bdev, std::abs(B(i, j) - bh));
        }
        double need = (theorem == Theorem::existence_alpha) ? alpha / (alpha - 1.0) * diag_max
                                                            : diag_max;
        beta_margin = std::min(beta_margin, bh - need);
      }
      bool has_multi = std::isfinite(beta_margin);
      add_clause(rep, "same-group couplings are constant per group", bdev <= 1e-14, -bdev);
      add_clause(rep,
                 theorem == Theorem::existence_alpha
                     ? "group coupling exceeds alpha/(alpha-1) times the diagonal maximum"
                     : "group coupling exceeds the group diagonal maximum",
                 !has_multi || beta_margin > 0.0, has_multi ? beta_margin : 1.0);

      auto cross = cross_entries();
      if (theorem == Theorem::existence_alpha) {
        if (!(alpha > 1.0)) throw HypothesisError("BadParameters", "alpha must exceed 1");
        double bound = thresholds.Lambda / (alpha * double(d) * double(d));
        double worst = 0.0;
        for (double b : cross) worst = std::max(worst, std::abs(b));
        add_clause(rep, "cross-group couplings are within Lambda/(alpha d^2)",
                   cross.empty() || worst <= bound, bound - worst);
      } else {
        double cdev = 0.0;
        for (double b : cross) cdev = std::max(cdev, std::abs(b - cross.front()));
        add_clause(rep, "cross-group couplings are constant", cross.empty() || cdev <= 1e-14,
                   -cdev);
        double worst = cross.empty() ? -std::numeric_limits<double>::infinity() : cross.front();
        add_clause(rep, "cross-group coupling is below Lambda",
                   cross.empty() || worst < thresholds.Lambda,
                   cross.empty() ? thresholds.Lambda : thresholds.Lambda - worst);
      }
      break;
    }
    case Theorem::limit_nonexistence: {
      double mn = same_group_min();
      bool has_pairs = std::isfinite(mn);
      add_clause(rep, "same-group couplings are nonnegative", !has_pairs || mn >= 0.0,
                 has_pairs ? mn : 0.0);
      auto cross = cross_entries();
      double worst = 0.0;
      for (double b : cross) worst = std::max(worst, b);
      add_clause(rep, "cross-group couplings are nonpositive", cross.empty() || worst <= 0.0,
                 -worst);
      bool pair = B.competitive_across_groups(dec);
      add_clause(rep, "some group pair is fully strictly negative", pair, pair ? 1.0 : -1.0);
      break;
    }
  }
  return rep;
}

VerificationReport verify_energy_estimates(const ProblemSpec& spec, const VerifyOptions& opts) {
  VerificationReport out;
  out.thresholds = compute_thresholds(spec, opts.thresholds);
  out.all_ok = true;

  if (opts.run_mixed && spec.m() >= 2) {
    std::vector<double> factors = opts.mixed_factors;
    if (factors.empty())
      for (int k = 2; k <= 10; ++k) factors.push_back(std::ldexp(1.0, -k));
    std::sort(factors.begin(), factors.end(), std::greater<double>());

    std::vector<GroupSet> subsets;
    if (spec.m() <= 3) {
      for (std::size_t mask = 1; mask + 1 < (std::size_t(1) << spec.m()); ++mask) {
        GroupSet G;
        for (std::size_t h = 0; h < spec.m(); ++h)
          if (mask & (std::size_t(1) << h)) G.push_back(h);
        subsets.push_back(G);
      }
    } else {
      for (std::size_t h = 0; h < spec.m(); ++h) subsets.push_back({h});
    }
    for (const auto& G : subsets) {
      nehari::MinimizerResult mr = nehari::minimize(spec, G, opts.minimize);
      MixedRow row;
      row.attained = G;
      row.level_G = mr.level;
      double rho = mixed_cutoff_radius(spec, spec.m() - G.size(), opts.mixed_rho_fraction);
      for (double f : factors) {
        row.report = competitor_mixed(spec, mr.state, mr.level, G, f * rho, rho);
        SweepRow tr;
        tr.eps = row.report.eps;
        tr.upper_bound = row.report.upper_bound;
        tr.target = row.report.target;
        tr.ok = tr.all_subsets_ok = row.report.satisfied;
        row.trials.push_back(tr);
        if (row.report.satisfied) break;
      }
      out.all_ok = out.all_ok && row.report.satisfied;
      out.mixed.push_back(std::move(row));
    }
  }
  return out;
}

} // namespace ncs::estimates
