// SPDX-License-Identifier: Apache-2.0
//
// JSON and CSV serialization.

#pragma once

#include "cfmimo/access.hpp"
#include "cfmimo/harness.hpp"
#include "cfmimo/netgen.hpp"
#include "cfmimo/pilots.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace cfmimo {

using Json = nlohmann::json;

Json to_json(const NetworkConfig& cfg);
NetworkConfig network_config_from_json(const Json& j, NetworkConfig base = {});

/// Missing keys keep their defaults; unknown keys are rejected.
Json to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const Json& j);
ExperimentSpec load_spec(const std::filesystem::path& path);

Json to_json(const NetworkRealization& net);
Json to_json(const ServiceMap& map);
Json to_json(const PilotPlan& plan);

/// FNV-1a 64 of the canonical JSON form, as 16 hex digits.
std::string config_hash(const ExperimentSpec& spec);

void write_results_csv(const ResultStore& store, std::ostream& out);
ResultStore read_results_csv(std::istream& in);

Json summary_json(const ResultStore& store, const std::vector<std::string>& group_by,
                  bool per_drop);

void write_cdf_csv(const CdfCurve& curve, std::ostream& out);
CdfCurve read_cdf_csv(std::istream& in);

/// Filesystem-safe form of a group label.
std::string sanitize_label(const std::string& label);

/// results.csv, summary.json and one cdf_<group>.csv per group.
void write_outputs(const ResultStore& store, const std::filesystem::path& dir,
                   const std::vector<std::string>& group_by);

}  // namespace cfmimo
