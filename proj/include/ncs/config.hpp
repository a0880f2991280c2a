#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ncs/estimates.hpp"
#include "ncs/functional.hpp"
#include "ncs/nehari.hpp"

// Sectioned key = value configuration files:
//
//   [domain]            # radius of the ball
//   radius = 1.0
//   [grid]
//   n = 512
//   graded = false
//   [problem]
//   lambdas = -7, -7
//   groups = 0, 1, 2    # group breakpoints 0 = a_0 < a_1 < ... < a_m = d
//   beta_row_1 = 1, 2.5
//   beta_row_2 = 2.5, 1
//   mode = strict       # or: limit (lambda = 0, whole-space levels)
//   [solver]
//   step / tol / max_iter / restarts / seed / precondition
//   [sweep]
//   ring_fraction / rho / eps_factors
//   [verify]
//   theorem = existence_general | existence_singletons | existence_equal_lambda
//           | existence_alpha | limit_nonexistence
//   alpha = 2.0
//   run_mixed = true
//   [output]
//   dir = out
//
// '#' starts a comment; blank lines are ignored. Unknown sections or keys are
// rejected with the offending line number, as are malformed values.

namespace ncs::config {

struct Config {
  double radius = 1.0;
  std::size_t n = 512;
  bool graded = false;

  std::vector<double> lambdas;
  std::vector<std::size_t> groups; // breakpoints
  std::vector<std::vector<double>> beta_rows;
  functional::ProblemSpec::Mode mode = functional::ProblemSpec::Mode::strict;

  nehari::MinimizeOptions solver;
  estimates::ThresholdOptions sweep;
  bool run_mixed = true;
  estimates::Theorem theorem = estimates::Theorem::existence_general;
  double alpha = 2.0;
  std::string out_dir = "out";

  std::vector<std::string> defaults_applied;        // keys filled from defaults
  std::map<std::string, std::string> raw;           // "section.key" -> raw value
};

Config parse_config_text(const std::string& text);
Config parse_config_file(const std::string& path);

// Grid + spec from a parsed config (validates the mathematical hypotheses).
functional::ProblemSpec build_problem(const Config& cfg);

const char* theorem_name(estimates::Theorem t);

} // namespace ncs::config
