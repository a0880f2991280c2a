#include "ncs/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "ncs/errors.hpp"

namespace ncs::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + v + "'", line);
  }
  if (pos != v.size()) throw ParseError("trailing characters after number '" + v + "'", line);
  return x;
}

long parse_int(const std::string& v, int line) {
  std::size_t pos = 0;
  long x;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected an integer, got '" + v + "'", line);
  }
  if (pos != v.size()) throw ParseError("trailing characters after integer '" + v + "'", line);
  return x;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError("expected a boolean (true/false), got '" + v + "'", line);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_double_list(const std::string& v, int line) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) {
    if (item.empty()) throw ParseError("empty entry in list", line);
    out.push_back(parse_double(item, line));
  }
  if (out.empty()) throw ParseError("expected a nonempty list", line);
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

} // namespace

const char* theorem_name(estimates::Theorem t) {
  switch (t) {
    case estimates::Theorem::existence_general: return "existence_general";
    case estimates::Theorem::existence_singletons: return "existence_singletons";
    case estimates::Theorem::existence_equal_lambda: return "existence_equal_lambda";
    case estimates::Theorem::existence_alpha: return "existence_alpha";
    case estimates::Theorem::limit_nonexistence: return "limit_nonexistence";
  }
  return "unknown";
}

Config parse_config_text(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::set<std::string> beta_keys;
  {
    std::stringstream ss(text);
    std::string rawline;
    std::string section;
    int line = 0;
    while (std::getline(ss, rawline)) {
      ++line;
      std::string s = rawline;
      std::size_t hash = s.find('#');
      if (hash != std::string::npos) s = s.substr(0, hash);
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ParseError("unterminated section header", line);
        section = trim(s.substr(1, s.size() - 2));
        static const std::set<std::string> known = {"domain", "grid",  "problem", "solver",
                                                    "sweep",  "verify", "output"};
        if (!known.count(section)) throw ParseError("unknown section [" + section + "]", line);
        continue;
      }
      std::size_t eq = s.find('=');
      if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
      if (section.empty()) throw ParseError("key outside any [section]", line);
      std::string key = trim(s.substr(0, eq));
      std::string value = trim(s.substr(eq + 1));
      if (key.empty()) throw ParseError("empty key", line);
      if (value.empty()) throw ParseError("empty value for '" + key + "'", line);
      std::string full = section + "." + key;
      if (entries.count(full)) throw ParseError("duplicate key '" + full + "'", line);
      entries[full] = {value, line};
      if (section == "problem" && key.rfind("beta_row_", 0) == 0) beta_keys.insert(key);
    }
  }

  Config cfg;
  for (const auto& [k, e] : entries) cfg.raw[k] = e.value;

  auto take = [&](const std::string& full) -> const Entry* {
    auto it = entries.find(full);
    if (it == entries.end()) return nullptr;
    return &it->second;
  };
  auto mark_default = [&](const std::string& full) { cfg.defaults_applied.push_back(full); };

  static const std::set<std::string> known_keys = {
      "domain.radius",    "grid.n",           "grid.graded",       "problem.lambdas",
      "problem.groups",   "problem.mode",     "solver.step",       "solver.tol",
      "solver.max_iter",  "solver.restarts",  "solver.seed",       "solver.precondition",
      "sweep.ring_fraction", "sweep.rho",     "sweep.eps_factors", "verify.theorem",
      "verify.alpha",     "verify.run_mixed", "output.dir"};
  for (const auto& [k, e] : entries) {
    if (known_keys.count(k)) continue;
    if (k.rfind("problem.beta_row_", 0) == 0) continue;
    throw ParseError("unknown key '" + k + "'", e.line);
  }

  if (const Entry* e = take("domain.radius")) cfg.radius = parse_double(e->value, e->line);
  else mark_default("domain.radius");
  if (const Entry* e = take("grid.n")) {
    long n = parse_int(e->value, e->line);
    if (n < 16) throw ParseError("grid.n must be at least 16", e->line);
    cfg.n = static_cast<std::size_t>(n);
  } else mark_default("grid.n");
  if (const Entry* e = take("grid.graded")) cfg.graded = parse_bool(e->value, e->line);
  else mark_default("grid.graded");

  const Entry* lam = take("problem.lambdas");
  if (!lam) throw ParseError("missing required key 'problem.lambdas'", 0);
  cfg.lambdas = parse_double_list(lam->value, lam->line);

  const Entry* grp = take("problem.groups");
  if (!grp) throw ParseError("missing required key 'problem.groups'", 0);
  for (const auto& item : split_list(grp->value)) {
    long a = parse_int(item, grp->line);
    if (a < 0) throw ParseError("group breakpoints must be nonnegative", grp->line);
    cfg.groups.push_back(static_cast<std::size_t>(a));
  }
  if (cfg.groups.size() < 2 || cfg.groups.front() != 0)
    throw ParseError("group breakpoints must start at 0", grp->line);
  if (cfg.groups.back() != cfg.lambdas.size())
    throw ParseError("group breakpoints must end at the number of components", grp->line);

  const std::size_t d = cfg.lambdas.size();
  cfg.beta_rows.resize(d);
  for (std::size_t i = 1; i <= d; ++i) {
    std::string key = "problem.beta_row_" + std::to_string(i);
    const Entry* e = take(key);
    if (!e) throw ParseError("missing required key '" + key + "'", 0);
    cfg.beta_rows[i - 1] = parse_double_list(e->value, e->line);
    if (cfg.beta_rows[i - 1].size() != d)
      throw ParseError("beta_row_" + std::to_string(i) + " must have " + std::to_string(d) +
                           " entries",
                       e->line);
  }
  for (const auto& key : beta_keys) {
    std::string idx = key.substr(std::string("beta_row_").size());
    bool numeric = !idx.empty() && std::all_of(idx.begin(), idx.end(),
                                               [](unsigned char c) { return std::isdigit(c); });
    long i = numeric ? std::stol(idx) : 0;
    if (!numeric || i < 1 || static_cast<std::size_t>(i) > d)
      throw ParseError("unknown key 'problem." + key + "'", entries["problem." + key].line);
  }

  if (const Entry* e = take("problem.mode")) {
    if (e->value == "strict") cfg.mode = functional::ProblemSpec::Mode::strict;
    else if (e->value == "limit") cfg.mode = functional::ProblemSpec::Mode::limit;
    else throw ParseError("mode must be 'strict' or 'limit'", e->line);
  } else mark_default("problem.mode");

  if (const Entry* e = take("solver.step")) {
    cfg.solver.step = parse_double(e->value, e->line);
    if (!(cfg.solver.step > 0.0)) throw ParseError("solver.step must be positive", e->line);
  } else mark_default("solver.step");
  if (const Entry* e = take("solver.tol")) {
    cfg.solver.tol = parse_double(e->value, e->line);
    if (!(cfg.solver.tol > 0.0)) throw ParseError("solver.tol must be positive", e->line);
  } else mark_default("solver.tol");
  if (const Entry* e = take("solver.max_iter")) {
    long v = parse_int(e->value, e->line);
    if (v < 1) throw ParseError("solver.max_iter must be positive", e->line);
    cfg.solver.max_iter = static_cast<std::size_t>(v);
  } else mark_default("solver.max_iter");
  if (const Entry* e = take("solver.restarts")) {
    long v = parse_int(e->value, e->line);
    if (v < 1) throw ParseError("solver.restarts must be positive", e->line);
    cfg.solver.restarts = static_cast<std::size_t>(v);
  } else mark_default("solver.restarts");
  if (const Entry* e = take("solver.seed")) {
    long v = parse_int(e->value, e->line);
    if (v < 0) throw ParseError("solver.seed must be nonnegative", e->line);
    cfg.solver.seed = static_cast<std::uint64_t>(v);
  } else mark_default("solver.seed");
  if (const Entry* e = take("solver.precondition"))
    cfg.solver.precondition = parse_bool(e->value, e->line);
  else mark_default("solver.precondition");

  if (const Entry* e = take("sweep.ring_fraction")) {
    cfg.sweep.ring_fraction = parse_double(e->value, e->line);
    if (!(cfg.sweep.ring_fraction > 0.0 && cfg.sweep.ring_fraction < 1.0))
      throw ParseError("sweep.ring_fraction must lie in (0, 1)", e->line);
  } else mark_default("sweep.ring_fraction");
  if (const Entry* e = take("sweep.rho")) {
    cfg.sweep.rho_override = parse_double(e->value, e->line);
    if (cfg.sweep.rho_override < 0.0) throw ParseError("sweep.rho must be nonnegative", e->line);
  } else mark_default("sweep.rho");
  if (const Entry* e = take("sweep.eps_factors")) {
    cfg.sweep.eps_factors = parse_double_list(e->value, e->line);
    for (double f : cfg.sweep.eps_factors)
      if (!(f > 0.0 && f < 1.0))
        throw ParseError("sweep.eps_factors entries must lie in (0, 1)", e->line);
  } else mark_default("sweep.eps_factors");

  if (const Entry* e = take("verify.theorem")) {
    static const std::map<std::string, estimates::Theorem> names = {
        {"existence_general", estimates::Theorem::existence_general},
        {"existence_singletons", estimates::Theorem::existence_singletons},
        {"existence_equal_lambda", estimates::Theorem::existence_equal_lambda},
        {"existence_alpha", estimates::Theorem::existence_alpha},
        {"limit_nonexistence", estimates::Theorem::limit_nonexistence}};
    auto it = names.find(e->value);
    if (it == names.end()) throw ParseError("unknown theorem '" + e->value + "'", e->line);
    cfg.theorem = it->second;
  } else mark_default("verify.theorem");
  if (const Entry* e = take("verify.alpha")) {
    cfg.alpha = parse_double(e->value, e->line);
    if (!(cfg.alpha > 1.0)) throw ParseError("verify.alpha must exceed 1", e->line);
  } else mark_default("verify.alpha");
  if (const Entry* e = take("verify.run_mixed")) cfg.run_mixed = parse_bool(e->value, e->line);
  else mark_default("verify.run_mixed");

  if (const Entry* e = take("output.dir")) cfg.out_dir = e->value;
  else mark_default("output.dir");

  std::sort(cfg.defaults_applied.begin(), cfg.defaults_applied.end());
  return cfg;
}

Config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

functional::ProblemSpec build_problem(const Config& cfg) {
  const std::size_t d = cfg.lambdas.size();
  std::vector<double> flat(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) flat[i * d + j] = cfg.beta_rows[i][j];
  algebra::CouplingMatrix beta(d, std::move(flat));
  algebra::GroupDecomposition dec = algebra::make_decomposition(cfg.groups);
  discretization::RadialGrid grid = discretization::make_grid(cfg.radius, cfg.n, cfg.graded);
  return functional::make_problem_spec(std::move(grid), cfg.lambdas, std::move(beta), dec,
                                       cfg.mode);
}

} // namespace ncs::config
