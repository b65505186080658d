#include "bjq/terms.hpp"

#include <set>

#include "bjq/errors.hpp"
#include "bjq/util.hpp"

namespace bjq {

void TermSpec::validate() const {
  int intercepts = 0;
  bool treatment_dependent = false;
  std::set<std::string> covariate_names, interaction_names;
  int indicators = 0;
  for (const auto& t : terms) {
    switch (t.kind) {
      case Term::Kind::Intercept:
        ++intercepts;
        break;
      case Term::Kind::Covariate:
        if (!covariate_names.insert(t.covariate).second)
          throw validation_error("TermSpec: duplicate covariate term '" + t.covariate + "'");
        break;
      case Term::Kind::TreatmentIndicator:
        ++indicators;
        treatment_dependent = true;
        break;
      case Term::Kind::Interaction:
        if (!interaction_names.insert(t.covariate).second)
          throw validation_error("TermSpec: duplicate interaction term '" + t.covariate + "'");
        treatment_dependent = true;
        break;
    }
  }
  if (intercepts != 1) throw validation_error("TermSpec: exactly one intercept required");
  if (indicators > 1) throw validation_error("TermSpec: duplicate treatment indicator");
  if (!treatment_dependent)
    throw validation_error("TermSpec: at least one treatment-dependent term required");
}

int TermSpec::intercept_index() const {
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].kind == Term::Kind::Intercept) return static_cast<int>(i);
  return -1;
}

TermSpec TermSpec::parse(const std::string& formula) {
  TermSpec spec;
  for (auto& raw : split(formula, '+')) {
    const std::string tok = trim(raw);
    if (tok.empty()) throw validation_error("TermSpec: empty term in formula '" + formula + "'");
    Term t;
    if (tok == "intercept" || tok == "1") {
      t.kind = Term::Kind::Intercept;
    } else if (tok == "treatment") {
      t.kind = Term::Kind::TreatmentIndicator;
    } else if (auto pos = tok.find(':'); pos != std::string::npos) {
      const std::string left = trim(tok.substr(0, pos));
      const std::string right = trim(tok.substr(pos + 1));
      t.kind = Term::Kind::Interaction;
      if (left == "treatment") t.covariate = right;
      else if (right == "treatment") t.covariate = left;
      else throw validation_error("TermSpec: interaction '" + tok + "' must involve treatment");
      if (t.covariate.empty() || t.covariate == "treatment")
        throw validation_error("TermSpec: bad interaction '" + tok + "'");
    } else {
      t.kind = Term::Kind::Covariate;
      t.covariate = tok;
    }
    spec.terms.push_back(std::move(t));
  }
  spec.validate();
  return spec;
}

std::string TermSpec::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += " + ";
    switch (terms[i].kind) {
      case Term::Kind::Intercept: out += "intercept"; break;
      case Term::Kind::Covariate: out += terms[i].covariate; break;
      case Term::Kind::TreatmentIndicator: out += "treatment"; break;
      case Term::Kind::Interaction: out += terms[i].covariate + ":treatment"; break;
    }
  }
  return out;
}

double term_value(const Term& term, const StageRecord& rec,
                  std::optional<Arm> treatment_override) {
  const Arm arm = treatment_override.value_or(rec.treatment);
  const double indicator = arm == Arm::A ? 1.0 : 0.0;
  switch (term.kind) {
    case Term::Kind::Intercept:
      return 1.0;
    case Term::Kind::TreatmentIndicator:
      return indicator;
    case Term::Kind::Covariate:
    case Term::Kind::Interaction: {
      auto it = rec.covariates.find(term.covariate);
      if (it == rec.covariates.end())
        throw schema_error("design: covariate '" + term.covariate + "' is missing");
      return term.kind == Term::Kind::Covariate ? it->second : it->second * indicator;
    }
  }
  return 0.0;
}

Eigen::RowVectorXd design_row(const Trajectory& subject, int stage, const TermSpec& terms,
                              std::optional<Arm> treatment_override) {
  if (!subject.entered(stage))
    throw validation_error("design_row: subject '" + subject.id + "' did not enter stage " +
                           std::to_string(stage));
  const StageRecord& rec = subject.stages[static_cast<std::size_t>(stage - 1)];
  Eigen::RowVectorXd row(terms.size());
  for (int j = 0; j < terms.size(); ++j) {
    try {
      row(j) = term_value(terms.terms[static_cast<std::size_t>(j)], rec, treatment_override);
    } catch (const schema_error& e) {
      throw schema_error(std::string(e.what()) + " (subject '" + subject.id + "', stage " +
                         std::to_string(stage) + ")");
    }
  }
  return row;
}

DesignBlock build_design(const Cohort& cohort, int stage, const TermSpec& terms,
                         std::optional<Arm> treatment_override) {
  DesignBlock block;
  for (std::size_t i = 0; i < cohort.subjects.size(); ++i)
    if (cohort.subjects[i].entered(stage)) block.subject_index.push_back(static_cast<int>(i));

  block.rows.resize(static_cast<Eigen::Index>(block.subject_index.size()), terms.size());
  for (std::size_t r = 0; r < block.subject_index.size(); ++r) {
    const auto& subject = cohort.subjects[static_cast<std::size_t>(block.subject_index[r])];
    block.rows.row(static_cast<Eigen::Index>(r)) =
        design_row(subject, stage, terms, treatment_override);
  }
  return block;
}

}  // namespace bjq
