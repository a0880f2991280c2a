#include "ncs/quadrature.hpp"

#include "ncs/constants.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace ncs::quadrature {

namespace {

// Legendre nodes by Newton iteration from the Chebyshev initial guess.
GaussRule build_rule(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(ncs::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.x[n - 1 - i] = x;
    r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

std::vector<double> graded_breaks(double a, double b, double scale) {
  // Geometric panel boundaries anchored at `a`, first panel ~ scale/4.
  std::vector<double> br{a};
  double w = std::max(scale / 4.0, (b - a) * 1e-12);
  double p = a;
  while (p + w < b) {
    p += w;
    br.push_back(p);
    w *= 2.0;
  }
  br.push_back(b);
  return br;
}

} // namespace

const GaussRule& gauss_rule(int npts) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(npts);
  if (it == cache.end()) it = cache.emplace(npts, build_rule(npts)).first;
  return it->second;
}

double panel_integral(const Fn& f, double a, double b, int npts) {
  const GaussRule& g = gauss_rule(npts);
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(c + hw * g.x[i]);
  return s * hw;
}

double integrate_compact(const Fn& f, double a, double b, double scale, int npts) {
  if (!(b > a)) return 0.0;
  auto br = graded_breaks(a, b, scale);
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) s += panel_integral(f, br[k], br[k + 1], npts);
  return s;
}

double integrate_decaying(const Fn& f, double scale, double rel_tol) {
  double R = std::max(16.0 * scale, 16.0);
  double acc = integrate_compact(f, 0.0, R, scale);
  for (int it = 0; it < 60; ++it) {
    double fR = std::abs(f(R)), fR2 = std::abs(f(0.5 * R));
    double tail;
    if (fR == 0.0) {
      tail = 0.0;
    } else {
      double q = std::log2(fR2 / fR);
      tail = (q > 1.01) ? fR * R / (q - 1.0) : fR * R * 64.0;
    }
    if (tail <= rel_tol * std::max(std::abs(acc), 1e-300)) return acc;
    acc += integrate_compact(f, R, 2.0 * R, R);
    R *= 2.0;
    if (R > std::ldexp(1.0, 40))
      throw NumericalError("QuadratureNotConverged",
                           "decaying radial integral: tail estimate above tolerance at r=2^40");
  }
  return acc;
}

namespace {

double overlap_pass(const Fn& F, double f_rmax, double f_scale, const Fn& G, double g_rmax,
                    double g_scale, double dist, int refine) {
  // r-range where both factors can be nonzero.
  double rlo = std::max(0.0, dist - g_rmax);
  double rhi = std::min(f_rmax, dist + g_rmax);
  if (!(rhi > rlo)) return 0.0;

  // r panel boundaries: graded about 0 (scale f_scale) and about dist (scale g_scale).
  std::vector<double> br;
  for (double p : graded_breaks(0.0, std::max(rhi, dist), f_scale)) br.push_back(p);
  if (dist > 0.0) {
    double w = g_scale / 4.0;
    for (int k = 0; k < 40 && w < 2.0 * (rhi - rlo); ++k, w *= 2.0) {
      br.push_back(dist - w);
      br.push_back(dist + w);
    }
    br.push_back(dist);
  }
  br.push_back(rlo);
  br.push_back(rhi);
  std::sort(br.begin(), br.end());
  br.erase(std::remove_if(br.begin(), br.end(), [&](double p) { return p < rlo || p > rhi; }),
           br.end());
  br.erase(std::unique(br.begin(), br.end(),
                       [&](double a, double b) { return std::abs(a - b) < 1e-14 * (rhi + 1.0); }),
           br.end());
  if (br.empty() || br.front() > rlo) br.insert(br.begin(), rlo);
  if (br.back() < rhi) br.push_back(rhi);

  // theta panels: graded near 0 with first width ~ angular size of the G peak.
  double t0 = ncs::pi / 8.0;
  if (dist > 0.0) t0 = std::min(t0, 0.25 * g_scale / dist);
  std::vector<double> tb{0.0};
  double w = t0, p = 0.0;
  while (p + w < ncs::pi) {
    p += w;
    tb.push_back(p);
    w *= 2.0;
  }
  tb.push_back(ncs::pi);

  const int npts = 16 * refine;
  const GaussRule& g = gauss_rule(npts);

  double total = 0.0;
  for (std::size_t kr = 0; kr + 1 < br.size(); ++kr) {
    double ra = br[kr], rb = br[kr + 1];
    double rc = 0.5 * (ra + rb), rh = 0.5 * (rb - ra);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      double r = rc + rh * g.x[i];
      double fr = F(r);
      if (fr == 0.0) continue;
      double inner = 0.0;
      for (std::size_t kt = 0; kt + 1 < tb.size(); ++kt) {
        double tc = 0.5 * (tb[kt] + tb[kt + 1]), th = 0.5 * (tb[kt + 1] - tb[kt]);
        double acc = 0.0;
        for (std::size_t jj = 0; jj < g.x.size(); ++jj) {
          double t = tc + th * g.x[jj];
          double s2 = r * r - 2.0 * r * dist * std::cos(t) + dist * dist;
          double s = std::sqrt(std::max(s2, 0.0));
          if (s > g_rmax) continue;
          double st = std::sin(t);
          acc += g.w[jj] * G(s) * st * st;
        }
        inner += acc * th;
      }
      total += g.w[i] * fr * r * r * r * inner * rh;
    }
  }
  return 4.0 * ncs::pi * total;
}

} // namespace

double overlap_integral(const Fn& F, double f_rmax, double f_scale, const Fn& G, double g_rmax,
                        double g_scale, double dist, double rel_tol) {
  if (dist < 0.0) throw HypothesisError("BadParameters", "overlap distance must be >= 0");
  // Decaying profiles: truncate where the product's tail is negligible.
  double fr = std::isfinite(f_rmax) ? f_rmax : std::ldexp(1.0, 14) * std::max(1.0, f_scale + dist);
  double gr = std::isfinite(g_rmax) ? g_rmax : fr + dist;
  double coarse = overlap_pass(F, fr, f_scale, G, gr, g_scale, dist, 1);
  double fine = overlap_pass(F, fr, f_scale, G, gr, g_scale, dist, 2);
  double scale = std::max({std::abs(fine), std::abs(coarse), 1e-300});
  if (std::abs(fine - coarse) > rel_tol * scale * 16.0)
    throw NumericalError("QuadratureNotConverged",
                         "offset overlap integral: refinement disagreement " +
                             std::to_string(std::abs(fine - coarse) / scale));
  return fine;
}

} // namespace ncs::quadrature
