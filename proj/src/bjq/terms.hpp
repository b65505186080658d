#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "bjq/types.hpp"

namespace bjq {

// One column of a stage design matrix.
struct Term {
  enum class Kind { Intercept, Covariate, TreatmentIndicator, Interaction };
  Kind kind = Kind::Intercept;
  std::string covariate;  // for Covariate and Interaction terms

  bool depends_on_treatment() const {
    return kind == Kind::TreatmentIndicator || kind == Kind::Interaction;
  }
};

// Ordered model formula for the stage Q-regressions. Exactly one intercept,
// unique covariate names per kind, and at least one treatment-dependent term.
struct TermSpec {
  std::vector<Term> terms;

  void validate() const;
  int size() const { return static_cast<int>(terms.size()); }
  int intercept_index() const;

  // Formula syntax: terms joined by '+'. "intercept" (or "1"), "treatment",
  // a bare covariate name, or "name:treatment" for an interaction.
  static TermSpec parse(const std::string& formula);
  std::string to_string() const;
};

// Value of one term for a given record, with the treatment slot optionally
// overridden by a hypothetical arm.
double term_value(const Term& term, const StageRecord& rec, std::optional<Arm> treatment_override);

struct DesignBlock {
  Eigen::MatrixXd rows;
  std::vector<int> subject_index;  // row -> index into the cohort's subjects
};

// One design row per subject that entered stage k, in cohort order.
// treatment_override substitutes a hypothetical arm into every
// treatment-dependent column (counterfactual design).
DesignBlock build_design(const Cohort& cohort, int stage, const TermSpec& terms,
                         std::optional<Arm> treatment_override = std::nullopt);

// Design row for a single subject at stage k.
Eigen::RowVectorXd design_row(const Trajectory& subject, int stage, const TermSpec& terms,
                              std::optional<Arm> treatment_override = std::nullopt);

}  // namespace bjq
