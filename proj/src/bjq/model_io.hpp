#pragma once

#include <string>

#include "bjq/qlearning.hpp"

namespace bjq {

// Plain-text policy persistence: `policy.txt` plus one `stage_<k>.txt` per
// stage under `dir`. Coefficients are written with shortest round-trip
// precision, so a reloaded policy reproduces Q-values bit-exactly.
void save_policy(const Policy& policy, const std::string& dir);
Policy load_policy(const std::string& dir);

}  // namespace bjq
