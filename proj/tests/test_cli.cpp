#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string binary() {
  const char* b = std::getenv("NEHARI_BIN");
  REQUIRE_MESSAGE(b != nullptr, "NEHARI_BIN must point at the CLI executable");
  return std::string(b);
}

int run(const std::string& args) {
  std::string cmd = "\"" + binary() + "\" " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -2;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

json load_report(const fs::path& dir) { return json::parse(slurp(dir / "report.json")); }

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("ncs_cli_" + tag);
  fs::remove_all(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << text;
}

json strip_timings(json r) {
  r.erase("timings");
  return r;
}

} // namespace

TEST_CASE("solve writes a versioned report and profile table") {
  auto dir = fresh_dir("solve");
  REQUIRE(run("solve --config configs/single.cfg --out " + dir.string()) == 0);

  json r = load_report(dir);
  CHECK(r.at("schema_version") == 1);
  CHECK(r.at("command") == "solve");
  CHECK(r.at("config").at("n") == 256);
  CHECK(r.at("config").at("raw").at("problem.lambdas") == "-7.0");
  CHECK(r.at("timings").is_object());

  double level = r.at("result").at("minimizer").at("level").get<double>();
  CHECK(level > 0.0);
  CHECK(level < 26.319); // below the decoupled single-group ceiling
  CHECK(r.at("result").at("minimizer").at("converged") == true);
  CHECK(r.at("result").at("classification").at("synchronized") == true);

  // profiles.csv: header r,u1 and one row per grid node
  std::string csv = slurp(dir / "profiles.csv");
  CHECK(csv.rfind("r,u1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 257); // header + 256 nodes

  // the echoed config re-parses to the same problem
  json raw = r.at("config").at("raw");
  std::string regen;
  for (const char* sec : {"domain", "grid", "problem", "solver", "sweep", "verify", "output"}) {
    std::string prefix = std::string(sec) + ".";
    std::string body;
    for (auto it = raw.begin(); it != raw.end(); ++it)
      if (it.key().rfind(prefix, 0) == 0)
        body += it.key().substr(prefix.size()) + " = " + it.value().get<std::string>() + "\n";
    if (!body.empty()) regen += "[" + std::string(sec) + "]\n" + body;
  }
  auto regen_path = dir / "regen.cfg";
  write_file(regen_path, regen);
  auto dir2 = fresh_dir("solve_regen");
  REQUIRE(run("solve --config " + regen_path.string() + " --out " + dir2.string()) == 0);
  json r2 = load_report(dir2);
  CHECK(r2.at("config").at("raw") == raw);
  CHECK(r2.at("result") == r.at("result"));
}

TEST_CASE("repeated runs are byte-identical up to timings") {
  auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  REQUIRE(run("solve --config configs/two_groups.cfg --out " + a.string()) == 0);
  REQUIRE(run("solve --config configs/two_groups.cfg --out " + b.string()) == 0);

  CHECK(strip_timings(load_report(a)) == strip_timings(load_report(b)));
  CHECK(slurp(a / "profiles.csv") == slurp(b / "profiles.csv"));

  // --seed overrides the config seed and changes the restart schedule
  auto c = fresh_dir("det_c");
  REQUIRE(run("solve --config configs/two_groups.cfg --seed 99 --out " + c.string()) == 0);
  json rc = load_report(c);
  CHECK(rc.at("result").at("minimizer").at("seed") != load_report(a).at("result").at("minimizer").at("seed"));
}

TEST_CASE("verify pipeline on the mixed example") {
  auto dir = fresh_dir("verify");
  REQUIRE(run("verify --config configs/two_groups.cfg --out " + dir.string()) == 0);

  json r = load_report(dir);
  CHECK(r.at("command") == "verify");
  CHECK(r.at("result").at("verification").at("all_ok") == true);
  CHECK(r.at("result").at("hypotheses").at("ok") == true);
  CHECK(r.at("result").at("hypotheses").at("theorem") == "existence_general");
  CHECK(r.at("result").at("verification").at("mixed").size() == 2);

  std::string csv = slurp(dir / "sweep.csv");
  CHECK(csv.rfind("eps,upper_bound,target,satisfied\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 2);
}

TEST_CASE("threshold and oracle subcommands") {
  auto dir = fresh_dir("thr");
  REQUIRE(run("thresholds --config configs/two_groups.cfg --out " + dir.string()) == 0);
  json r = load_report(dir);
  CHECK(r.at("result").at("Lambda").get<double>() > 0.0);
  CHECK(r.at("result").at("t_hat").get<double>() == doctest::Approx(28.0).epsilon(1e-10));
  CHECK((dir / "sweep.csv").string() != ""); // artifact exists
  CHECK(fs::exists(dir / "sweep.csv"));

  auto dir2 = fresh_dir("fmax");
  REQUIRE(run("fmax --config configs/two_groups.cfg --out " + dir2.string()) == 0);
  json f = load_report(dir2);
  CHECK(f.at("result").at("full").at("value").get<double>() == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(f.at("result").at("groups")[0].at("value").get<double>() ==
        doctest::Approx(1.75).epsilon(1e-12));
  CHECK(f.at("result").at("groups")[1].at("value").get<double>() ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.at("result").at("levels").at("l")[1].get<double>() ==
        doctest::Approx(26.318945069567146).epsilon(1e-9));

  auto dir3 = fresh_dir("lim");
  REQUIRE(run("limit-levels --config configs/two_groups.cfg --out " + dir3.string()) == 0);
  json l = load_report(dir3);
  CHECK(l.at("result").at("attained") == false);
  CHECK(l.at("result").at("total").get<double>() ==
        doctest::Approx(105.2757802782865 * 11.0 / 28.0).epsilon(1e-9));

  auto dir4 = fresh_dir("comp");
  REQUIRE(run("competitor --config configs/two_groups.cfg --out " + dir4.string()) == 0);
  json c = load_report(dir4);
  bool any = false;
  for (const auto& rep : c.at("result").at("reports"))
    if (rep.at("satisfied").get<bool>()) any = true;
  CHECK(any);

  auto dir5 = fresh_dir("cls");
  REQUIRE(run("classify --config configs/two_groups.cfg --out " + dir5.string()) == 0);
  json k = load_report(dir5);
  CHECK(k.at("result").at("classification").at("synchronized") == false);
  CHECK(k.at("result").at("classification").at("direction").size() == 3);
}

TEST_CASE("exit codes distinguish failure families") {
  // usage / parse problems -> 1
  CHECK(run("") == 1);
  CHECK(run("frobnicate --config configs/single.cfg") == 1);
  CHECK(run("solve") == 1); // --config is required
  CHECK(run("solve --config configs/does_not_exist.cfg --out /tmp/x") == 1);

  auto bad_key = fresh_dir("bad_key") / "bad.cfg";
  write_file(bad_key, "[domain]\nradius = 1\nvolume = 2\n[problem]\nlambdas = -7\ngroups = 0, "
                      "1\nbeta_row_1 = 1\n");
  CHECK(run("solve --config " + bad_key.string() + " --out /tmp/ncs_cli_sink") == 1);

  // hypothesis violations -> 2
  auto bad_lam = fresh_dir("bad_lam") / "bad.cfg";
  write_file(bad_lam,
             "[grid]\nn = 64\n[problem]\nlambdas = -20\ngroups = 0, 1\nbeta_row_1 = 1\n");
  CHECK(run("solve --config " + bad_lam.string() + " --out /tmp/ncs_cli_sink") == 2);

  // numerical certification failures -> 3
  auto fat = fresh_dir("fat") / "fat.cfg";
  write_file(fat, "[grid]\nn = 64\n[problem]\nlambdas = -7.0, -7.0, -7.0\ngroups = 0, 2, "
                  "3\nbeta_row_1 = 1.0, 2.5, -0.3\nbeta_row_2 = 2.5, 1.0, -0.3\nbeta_row_3 = "
                  "-0.3, -0.3, 1.0\n[sweep]\neps_factors = 0.9\n");
  CHECK(run("thresholds --config " + fat.string() + " --out /tmp/ncs_cli_sink") == 3);

  // --help succeeds
  CHECK(run("--help") == 0);
}
