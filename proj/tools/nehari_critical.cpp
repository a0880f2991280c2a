#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ncs/config.hpp"
#include "ncs/errors.hpp"
#include "ncs/estimates.hpp"
#include "ncs/nehari.hpp"
#include "ncs/report.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Args {
  std::string config_path;
  std::string out_dir; // overrides config when nonempty
  long long seed = -1; // overrides config when >= 0
};

ncs::config::Config load(const Args& args) {
  ncs::config::Config cfg = ncs::config::parse_config_file(args.config_path);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed >= 0) cfg.solver.seed = static_cast<unsigned long long>(args.seed);
  return cfg;
}

int run_thresholds(const Args& args) {
  auto t0 = Clock::now();
  ncs::config::Config cfg = load(args);
  ncs::functional::ProblemSpec spec = ncs::config::build_problem(cfg);
  double setup_ms = ms_since(t0);

  auto t1 = Clock::now();
  ncs::estimates::ThresholdSet ts = ncs::estimates::compute_thresholds(spec, cfg.sweep);
  double compute_ms = ms_since(t1);

  ncs::report::json timings{{"setup_ms", setup_ms}, {"compute_ms", compute_ms}};
  ncs::report::write_report(cfg.out_dir, "thresholds", cfg,
                            ncs::report::thresholds_json(ts), timings);
  ncs::report::write_sweep_csv(cfg.out_dir, ts.sweep);

  std::printf("S          = %.10g\n", ts.S);
  std::printf("C_bar      = %.10g\n", ts.C_bar);
  std::printf("Lambda1    = %.10g\n", ts.Lambda1);
  std::printf("eps*       = %.10g  (delta* = %.10g)\n", ts.eps_star, ts.delta_star);
  std::printf("Lambda2    = %.10g\n", ts.Lambda2);
  std::printf("Lambda3    = %.10g\n", ts.Lambda3);
  std::printf("Lambda4    = %.10g\n", ts.Lambda4);
  std::printf("Lambda     = %.10g\n", ts.Lambda);
  std::printf("theta      = %.10g   t_hat = %.10g\n", ts.theta, ts.t_hat);
  std::printf("wrote %s/report.json, %s/sweep.csv\n", cfg.out_dir.c_str(), cfg.out_dir.c_str());
  return 0;
}

int run_fmax(const Args& args) {
  auto t0 = Clock::now();
  ncs::config::Config cfg = load(args);
  const std::size_t d = cfg.lambdas.size();
  std::vector<double> flat(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) flat[i * d + j] = cfg.beta_rows[i][j];
  ncs::algebra::CouplingMatrix beta(d, std::move(flat));
  ncs::algebra::GroupDecomposition dec = ncs::algebra::make_decomposition(cfg.groups);

  ncs::algebra::SphereMaxResult full = ncs::algebra::fmax(beta);
  ncs::report::json groups = ncs::report::json::array();
  for (std::size_t h = 0; h < dec.m(); ++h)
    groups.push_back(ncs::report::fmax_json(ncs::algebra::fmax(beta.group_block(dec, h))));
  ncs::estimates::GroupLevelData lv = ncs::estimates::group_level_data(beta, dec, cfg.lambdas);

  ncs::report::json body;
  body["full"] = ncs::report::fmax_json(full);
  body["groups"] = std::move(groups);
  body["levels"] = ncs::report::levels_json(lv);
  ncs::report::json timings{{"compute_ms", ms_since(t0)}};
  ncs::report::write_report(cfg.out_dir, "fmax", cfg, std::move(body), timings);

  std::printf("fmax(full) = %.12g%s\n", full.value, full.degenerate ? "  [degenerate set]" : "");
  for (std::size_t h = 0; h < dec.m(); ++h)
    std::printf("group %zu: fmax = %.12g  l = %.12g  C = %.12g\n", h + 1, lv.f_max[h], lv.l[h],
                lv.C_h[h]);
  std::printf("wrote %s/report.json\n", cfg.out_dir.c_str());
  return 0;
}

int run_solve(const Args& args, bool classify_only) {
  auto t0 = Clock::now();
  ncs::config::Config cfg = load(args);
  ncs::functional::ProblemSpec spec = ncs::config::build_problem(cfg);
  double setup_ms = ms_since(t0);

  auto t1 = Clock::now();
  ncs::functional::GroupSet G = spec.all_groups();
  ncs::nehari::MinimizerResult mr = ncs::nehari::minimize(spec, G, cfg.solver);
  double solve_ms = ms_since(t1);
  ncs::nehari::Classification cls = ncs::nehari::classify_minimizer(spec, mr.state);

  ncs::report::json body;
  body["minimizer"] = ncs::report::minimizer_json(mr);
  body["classification"] = ncs::report::classification_json(cls);
  ncs::report::json timings{{"setup_ms", setup_ms}, {"solve_ms", solve_ms}};
  ncs::report::write_report(cfg.out_dir, classify_only ? "classify" : "solve", cfg,
                            std::move(body), timings);
  ncs::report::write_profiles_csv(cfg.out_dir, spec.grid, mr.state);

  std::printf("level         = %.12g\n", mr.level);
  std::printf("converged     = %s  (iterations %zu, seed %llu)\n", mr.converged ? "yes" : "no",
              mr.iterations, mr.seed);
  std::printf("grad_norm_rel = %.3e\n", mr.grad_norm_rel);
  std::printf("synchronized  = %s  (fit residual %.3e, direction distance %.3e)\n",
              cls.synchronized ? "yes" : "no", cls.fit_residual_rel, cls.direction_distance);
  for (const auto& w : mr.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("wrote %s/report.json, %s/profiles.csv\n", cfg.out_dir.c_str(),
              cfg.out_dir.c_str());
  return 0;
}

int run_verify(const Args& args) {
  auto t0 = Clock::now();
  ncs::config::Config cfg = load(args);
  ncs::functional::ProblemSpec spec = ncs::config::build_problem(cfg);
  double setup_ms = ms_since(t0);

  auto t1 = Clock::now();
  ncs::estimates::VerifyOptions opts;
  opts.thresholds = cfg.sweep;
  opts.run_mixed = cfg.run_mixed;
  opts.minimize = cfg.solver;
  ncs::estimates::VerificationReport ver = ncs::estimates::verify_energy_estimates(spec, opts);
  double verify_ms = ms_since(t1);
  ncs::estimates::HypothesisReport hyp =
      ncs::estimates::check_hypotheses(spec, ver.thresholds, cfg.theorem, cfg.alpha);

  ncs::report::json body;
  body["verification"] = ncs::report::verification_json(ver);
  body["hypotheses"] = ncs::report::hypotheses_json(hyp);
  ncs::report::json timings{{"setup_ms", setup_ms}, {"verify_ms", verify_ms}};
  ncs::report::write_report(cfg.out_dir, "verify", cfg, std::move(body), timings);
  ncs::report::write_sweep_csv(cfg.out_dir, ver.thresholds.sweep);

  std::printf("Lambda   = %.10g   eps* = %.10g\n", ver.thresholds.Lambda,
              ver.thresholds.eps_star);
  for (const auto& c : hyp.clauses)
    std::printf("[%s] %s (margin %.6g)\n", c.ok ? "ok" : "VIOLATED", c.description.c_str(),
                c.margin);
  for (const auto& row : ver.mixed) {
    std::string g;
    for (std::size_t h : row.attained) g += (g.empty() ? "" : ",") + std::to_string(h + 1);
    std::printf("mixed {%s}: level %.8g, eps %.4g, upper %.8g < target %.8g ? %s\n", g.c_str(),
                row.level_G, row.report.eps, row.report.upper_bound, row.report.target,
                row.report.satisfied ? "yes" : "NO");
  }
  std::printf("hypotheses %s, energy estimates %s\n", hyp.ok ? "hold" : "VIOLATED",
              ver.all_ok ? "verified" : "NOT verified");
  std::printf("wrote %s/report.json, %s/sweep.csv\n", cfg.out_dir.c_str(), cfg.out_dir.c_str());
  if (!hyp.ok) return 2;
  if (!ver.all_ok) return 3;
  return 0;
}

int run_competitor(const Args& args) {
  auto t0 = Clock::now();
  ncs::config::Config cfg = load(args);
  ncs::functional::ProblemSpec spec = ncs::config::build_problem(cfg);

  ncs::estimates::CompetitorGeometry geom =
      ncs::estimates::default_geometry(spec, cfg.sweep.ring_fraction);
  if (cfg.sweep.rho_override > 0.0) geom.rho = cfg.sweep.rho_override;
  std::vector<double> factors = cfg.sweep.eps_factors;
  if (factors.empty())
    for (int k = 2; k <= 8; ++k) factors.push_back(std::ldexp(1.0, -k));
  std::sort(factors.begin(), factors.end(), std::greater<double>());

  ncs::functional::GroupSet all = spec.all_groups();
  ncs::report::json reports = ncs::report::json::array();
  std::vector<ncs::estimates::SweepRow> rows;
  for (double f : factors) {
    ncs::estimates::CompetitorReport rep =
        ncs::estimates::competitor_disjoint(spec, all, f * geom.rho, geom);
    ncs::estimates::SweepRow row;
    row.eps = rep.eps;
    row.upper_bound = rep.upper_bound;
    row.target = rep.target;
    row.ok = rep.satisfied;
    row.all_subsets_ok = rep.satisfied;
    rows.push_back(row);
    reports.push_back(ncs::report::competitor_json(rep));
    std::printf("eps = %-12.6g upper = %-14.8g target = %-14.8g %s\n", rep.eps, rep.upper_bound,
                rep.target, rep.satisfied ? "ok" : "not verified");
  }
  ncs::report::json body;
  body["rho"] = geom.rho;
  ncs::report::json centers = ncs::report::json::array();
  for (const auto& c : geom.centers) centers.push_back({c[0], c[1], c[2], c[3]});
  body["centers"] = std::move(centers);
  body["reports"] = std::move(reports);
  ncs::report::json timings{{"compute_ms", ms_since(t0)}};
  ncs::report::write_report(cfg.out_dir, "competitor", cfg, std::move(body), timings);
  ncs::report::write_sweep_csv(cfg.out_dir, rows);
  std::printf("wrote %s/report.json, %s/sweep.csv\n", cfg.out_dir.c_str(), cfg.out_dir.c_str());
  return 0;
}

int run_limit_levels(const Args& args) {
  auto t0 = Clock::now();
  ncs::config::Config cfg = load(args);
  const std::size_t d = cfg.lambdas.size();
  std::vector<double> flat(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) flat[i * d + j] = cfg.beta_rows[i][j];
  ncs::algebra::CouplingMatrix beta(d, std::move(flat));
  ncs::algebra::GroupDecomposition dec = ncs::algebra::make_decomposition(cfg.groups);

  ncs::bubbles::LimitLevel lim = ncs::bubbles::limit_level(beta, dec);
  ncs::report::json body = ncs::report::limit_json(lim);
  ncs::report::json timings{{"compute_ms", ms_since(t0)}};
  ncs::report::write_report(cfg.out_dir, "limit-levels", cfg, std::move(body), timings);

  for (std::size_t h = 0; h < lim.per_group.size(); ++h)
    std::printf("group %zu: l = %.12g\n", h + 1, lim.per_group[h]);
  std::printf("limit level = %.12g (attained: %s)\n", lim.total, lim.attained ? "yes" : "no");
  std::printf("wrote %s/report.json\n", cfg.out_dir.c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"least-energy solver for coupled critical systems on a ball in R^4"};
  app.require_subcommand(1);

  Args args;
  auto add_sub = [&](const char* name, const char* desc) {
    CLI::App* s = app.add_subcommand(name, desc);
    s->add_option("--config", args.config_path, "configuration file")->required();
    s->add_option("--out", args.out_dir, "output directory (overrides config)");
    s->add_option("--seed", args.seed, "solver seed (overrides config)");
    return s;
  };
  CLI::App* s_thresholds =
      add_sub("thresholds", "explicit coupling thresholds and the eps sweep");
  CLI::App* s_fmax = add_sub("fmax", "sphere maxima of the coupling forms and group levels");
  CLI::App* s_solve = add_sub("solve", "constrained least-energy solve");
  CLI::App* s_verify = add_sub("verify", "energy estimates plus hypothesis checks");
  CLI::App* s_competitor = add_sub("competitor", "disjoint cutoff-bubble upper bounds");
  CLI::App* s_limit = add_sub("limit-levels", "whole-space limit levels per group");
  CLI::App* s_classify = add_sub("classify", "solve and test group synchronization");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (s_thresholds->parsed()) return run_thresholds(args);
    if (s_fmax->parsed()) return run_fmax(args);
    if (s_solve->parsed()) return run_solve(args, false);
    if (s_verify->parsed()) return run_verify(args);
    if (s_competitor->parsed()) return run_competitor(args);
    if (s_limit->parsed()) return run_limit_levels(args);
    if (s_classify->parsed()) return run_solve(args, true);
  } catch (const ncs::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const ncs::HypothesisError& e) {
    std::fprintf(stderr, "hypothesis violated: %s\n", e.what());
    return 2;
  } catch (const ncs::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
