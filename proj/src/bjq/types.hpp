#pragma once

#include <map>
#include <string>
#include <vector>

namespace bjq {

// Two-arm treatment; the tie-breaking convention throughout is "B unless
// strictly better under A".
enum class Arm : int { B = 0, A = 1 };

inline Arm other_arm(Arm a) { return a == Arm::A ? Arm::B : Arm::A; }

// One stage of one subject's follow-up. A covariate that was masked or not
// recorded is simply absent from the map; the owning cohort knows the full
// column set.
struct StageRecord {
  std::map<std::string, double> covariates;
  Arm treatment = Arm::B;
  double time = 0.0;  // observed duration for this stage
  bool event = true;  // false = right-censored during this stage

  bool has_covariate(const std::string& name) const {
    return covariates.count(name) != 0;
  }
};

// A subject's observed follow-up. Stage k (1-based) is stages[k-1];
// a record is present exactly when the subject entered that stage, so a
// censored stage is always the last one.
struct Trajectory {
  std::string id;
  std::vector<StageRecord> stages;

  bool entered(int stage) const {
    return stage >= 1 && static_cast<std::size_t>(stage) <= stages.size();
  }
};

struct Cohort {
  std::vector<std::string> covariate_names;
  std::string label_a = "A";
  std::string label_b = "B";
  std::vector<Trajectory> subjects;

  int stage_count() const {
    std::size_t k = 0;
    for (const auto& t : subjects) k = std::max(k, t.stages.size());
    return static_cast<int>(k);
  }

  const std::string& arm_label(Arm a) const { return a == Arm::A ? label_a : label_b; }
};

}  // namespace bjq
