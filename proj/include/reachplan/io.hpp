#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "reachplan/demos.hpp"
#include "reachplan/sim.hpp"

namespace reachplan::io {

using nlohmann::json;

/// Shortest round-trip decimal form; "nan"/"inf"/"-inf" for non-finite values.
std::string num(double x);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);

/// Reads and parses a JSON file; throws Error(Config) on I/O or syntax errors.
json read_json_file(const std::string& path);

/// Missing keys keep the defaults of reach_avoid_scenario(); unknown keys
/// throw Error(Config).
sim::Scenario scenario_from_json(const json& j);
json scenario_to_json(const sim::Scenario& s);

demos::LearnDemoConfig learn_demo_from_json(const json& j);
demos::ReachDemoConfig reach_demo_from_json(const json& j);

json to_json(const geometry::VPolytope& V);
json to_json(const geometry::HPolytope& P);
json to_json(const setlearn::LearnedSet& s);
json to_json(const sim::Metrics& m);
json to_json(const sim::ModeSummary& s);

void write_trace_csv(std::ostream& os, const sim::Trace& tr);
/// Full trace including occupancies when they were recorded.
json trace_to_json(const sim::Trace& tr);
void write_learn_csv(std::ostream& os, const demos::LearnDemoResult& r);
void write_reach_trajectories_csv(std::ostream& os, const demos::ReachDemoResult& r);
void write_reach_occupancy_csv(std::ostream& os, const demos::ReachDemoResult& r);
void write_mc_runs_csv(std::ostream& os, const sim::MonteCarloResult& r);
void write_mc_summary_csv(std::ostream& os, const sim::MonteCarloResult& r);

}  // namespace reachplan::io
