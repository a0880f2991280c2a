#include "ncs/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ncs/errors.hpp"

namespace ncs::report {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw NumericalError("OutputDirectory", "cannot create '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw NumericalError("OutputDirectory", "cannot write '" + path + "'");
  return out;
}

} // namespace

json config_echo(const config::Config& cfg) {
  json j;
  json raw = json::object();
  for (const auto& [k, v] : cfg.raw) raw[k] = v;
  j["raw"] = std::move(raw);
  j["defaults_applied"] = cfg.defaults_applied;
  j["radius"] = cfg.radius;
  j["n"] = cfg.n;
  j["graded"] = cfg.graded;
  j["lambdas"] = cfg.lambdas;
  j["groups"] = cfg.groups;
  j["beta"] = cfg.beta_rows;
  j["mode"] = cfg.mode == functional::ProblemSpec::Mode::strict ? "strict" : "limit";
  j["theorem"] = config::theorem_name(cfg.theorem);
  return j;
}

json fmax_json(const algebra::SphereMaxResult& r) {
  json j;
  j["value"] = r.value;
  j["directions"] = r.directions;
  j["degenerate"] = r.degenerate;
  return j;
}

json levels_json(const estimates::GroupLevelData& lv) {
  json j;
  j["f_max"] = lv.f_max;
  j["X0"] = lv.X0;
  j["l"] = lv.l;
  j["C_h"] = lv.C_h;
  j["l_total"] = lv.l_total;
  return j;
}

json thresholds_json(const estimates::ThresholdSet& ts) {
  json j;
  j["S"] = ts.S;
  j["S_tilde_sq"] = ts.S_tilde_sq;
  j["levels"] = levels_json(ts.levels);
  j["C_bar"] = ts.C_bar;
  j["Lambda1"] = ts.Lambda1;
  j["eps_star"] = ts.eps_star;
  j["delta_star"] = ts.delta_star;
  j["Lambda2"] = ts.Lambda2;
  j["Lambda3"] = ts.Lambda3;
  j["Lambda4"] = ts.Lambda4;
  j["Lambda"] = ts.Lambda;
  j["theta"] = ts.theta;
  j["t_hat"] = ts.t_hat;
  j["rho"] = ts.geometry.rho;
  json centers = json::array();
  for (const auto& c : ts.geometry.centers) centers.push_back({c[0], c[1], c[2], c[3]});
  j["centers"] = std::move(centers);
  json sweep = json::array();
  for (const auto& row : ts.sweep) {
    json r;
    r["eps"] = row.eps;
    r["upper_bound"] = row.upper_bound;
    r["target"] = row.target;
    r["ok"] = row.ok;
    r["all_subsets_ok"] = row.all_subsets_ok;
    sweep.push_back(std::move(r));
  }
  j["sweep"] = std::move(sweep);
  return j;
}

json minimizer_json(const nehari::MinimizerResult& r) {
  json j;
  j["level"] = r.level;
  j["psi"] = r.psi;
  j["grad_norm_rel"] = r.grad_norm_rel;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["seed"] = r.seed;
  json restarts = json::array();
  for (const auto& rec : r.restarts) {
    json x;
    x["seed"] = rec.seed;
    x["level"] = rec.level;
    x["converged"] = rec.converged;
    x["collapsed"] = rec.collapsed;
    x["iterations"] = rec.iterations;
    restarts.push_back(std::move(x));
  }
  j["restarts"] = std::move(restarts);
  j["warnings"] = r.warnings;
  return j;
}

json classification_json(const nehari::Classification& c) {
  json j;
  j["direction"] = c.direction;
  j["fit_residual_rel"] = c.fit_residual_rel;
  j["direction_distance"] = c.direction_distance;
  j["synchronized"] = c.synchronized;
  return j;
}

json competitor_json(const estimates::CompetitorReport& r) {
  json j;
  j["eps"] = r.eps;
  j["gamma"] = r.gamma;
  j["attained"] = r.attained;
  j["ell"] = r.ell;
  j["gram"] = r.gram;
  j["t_star"] = r.t_star;
  j["upper_bound"] = r.upper_bound;
  j["target"] = r.target;
  j["delta"] = r.delta;
  j["gershgorin"] = r.gershgorin;
  j["Pi"] = r.Pi;
  j["t_positive"] = r.t_positive;
  j["satisfied"] = r.satisfied;
  return j;
}

json hypotheses_json(const estimates::HypothesisReport& r) {
  json j;
  j["theorem"] = config::theorem_name(r.theorem);
  j["ok"] = r.ok;
  json clauses = json::array();
  for (const auto& c : r.clauses) {
    json x;
    x["description"] = c.description;
    x["ok"] = c.ok;
    x["margin"] = c.margin;
    clauses.push_back(std::move(x));
  }
  j["clauses"] = std::move(clauses);
  return j;
}

json limit_json(const bubbles::LimitLevel& l) {
  json j;
  j["total"] = l.total;
  j["per_group"] = l.per_group;
  j["attained"] = l.attained;
  return j;
}

json verification_json(const estimates::VerificationReport& r) {
  json j;
  j["thresholds"] = thresholds_json(r.thresholds);
  json mixed = json::array();
  for (const auto& row : r.mixed) {
    json x;
    x["attained"] = row.attained;
    x["level_G"] = row.level_G;
    x["report"] = competitor_json(row.report);
    json trials = json::array();
    for (const auto& tr : row.trials) {
      json t;
      t["eps"] = tr.eps;
      t["upper_bound"] = tr.upper_bound;
      t["target"] = tr.target;
      t["satisfied"] = tr.ok;
      trials.push_back(std::move(t));
    }
    x["trials"] = std::move(trials);
    mixed.push_back(std::move(x));
  }
  j["mixed"] = std::move(mixed);
  j["all_ok"] = r.all_ok;
  return j;
}

void write_report(const std::string& dir, const std::string& command,
                  const config::Config& cfg, json body, json timings) {
  ensure_dir(dir);
  json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["config"] = config_echo(cfg);
  j["result"] = std::move(body);
  j["timings"] = std::move(timings);
  auto out = open_out(dir + "/report.json");
  out << j.dump(2) << "\n";
}

void write_profiles_csv(const std::string& dir, const discretization::RadialGrid& grid,
                        const functional::SystemState& state) {
  ensure_dir(dir);
  auto out = open_out(dir + "/profiles.csv");
  out << "r";
  for (std::size_t i = 1; i <= state.comp.size(); ++i) out << ",u" << i;
  out << "\n";
  for (std::size_t k = 0; k < grid.n; ++k) {
    out << fmt17(grid.r[k]);
    for (const auto& u : state.comp) out << "," << fmt17(u[k]);
    out << "\n";
  }
}

void write_sweep_csv(const std::string& dir, const std::vector<estimates::SweepRow>& rows) {
  ensure_dir(dir);
  auto out = open_out(dir + "/sweep.csv");
  out << "eps,upper_bound,target,satisfied\n";
  for (const auto& row : rows)
    out << fmt17(row.eps) << "," << fmt17(row.upper_bound) << "," << fmt17(row.target) << ","
        << (row.all_subsets_ok ? 1 : 0) << "\n";
}

} // namespace ncs::report
