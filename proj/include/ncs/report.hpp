#pragma once

#include <string>

#include <json.hpp>

#include "ncs/algebra.hpp"
#include "ncs/bubbles.hpp"
#include "ncs/config.hpp"
#include "ncs/estimates.hpp"
#include "ncs/nehari.hpp"

// JSON / CSV serialization of computed results. report.json is deterministic
// for a fixed config and seed except for the "timings" block, which callers
// add last; key order is fixed (ordered_json) so byte comparison is
// meaningful after stripping timings.

namespace ncs::report {

using json = nlohmann::ordered_json;

json config_echo(const config::Config& cfg);
json fmax_json(const algebra::SphereMaxResult& r);
json levels_json(const estimates::GroupLevelData& lv);
json thresholds_json(const estimates::ThresholdSet& ts);
json minimizer_json(const nehari::MinimizerResult& r);
json classification_json(const nehari::Classification& c);
json competitor_json(const estimates::CompetitorReport& r);
json hypotheses_json(const estimates::HypothesisReport& r);
json limit_json(const bubbles::LimitLevel& l);
json verification_json(const estimates::VerificationReport& r);

// Wraps `body` with schema_version / command / config echo, writes
// <dir>/report.json (creating dir), pretty-printed, trailing newline.
void write_report(const std::string& dir, const std::string& command,
                  const config::Config& cfg, json body, json timings);

// r,u1,...,ud rows at every grid node, full double precision.
void write_profiles_csv(const std::string& dir, const discretization::RadialGrid& grid,
                        const functional::SystemState& state);

// eps,upper_bound,target,satisfied rows of the threshold sweep.
void write_sweep_csv(const std::string& dir, const std::vector<estimates::SweepRow>& rows);

} // namespace ncs::report
