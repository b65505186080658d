#pragma once

#include <string>

#include "bjq/simulation.hpp"

namespace bjq {

inline constexpr const char* kVersion = "0.1.0";

// Flat key-value configuration with [simulation] and [bj] sections. Every
// key has a default matching the reference scenario, so an empty document is
// valid. All offending keys are reported together.
SimConfig parse_sim_config(const std::string& text);
SimConfig load_sim_config(const std::string& path);  // empty path = defaults

// Canonical dump of a resolved configuration; parse(dump(c)) == c.
std::string dump_sim_config(const SimConfig& config);

}  // namespace bjq
