// bjq command-line interface: simulate / fit / recommend.
//
// Exit codes: 0 success, 2 validation error, 3 fit failure, 4 I/O error.
// Set BJQ_LOG=quiet to suppress progress output.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bjq/bjq.h"

namespace {

bool quiet() {
  const char* v = std::getenv("BJQ_LOG");
  return v && std::string(v) == "quiet";
}

void info(const std::string& message) {
  if (!quiet()) std::cerr << message << '\n';
}

int report(int status, const std::string& what) {
  if (status != BJQ_OK) std::cerr << "error: " << what << ": " << bjq_last_error() << '\n';
  return status;
}

struct SchemaFlags {
  std::string id = "id", stage = "stage", time = "time", event = "event",
              treatment = "treatment";
  std::string covariates;  // comma-separated; empty = all remaining columns
  std::string a_label;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--id-col", id, "Subject id column")->capture_default_str();
    cmd->add_option("--stage-col", stage, "Stage column")->capture_default_str();
    cmd->add_option("--time-col", time, "Observed time column")->capture_default_str();
    cmd->add_option("--event-col", event, "Event indicator column (1/0)")->capture_default_str();
    cmd->add_option("--treatment-col", treatment, "Treatment column")->capture_default_str();
    cmd->add_option("--covariates", covariates,
                    "Comma-separated covariate columns (default: all remaining)");
    cmd->add_option("--treatment-a-label", a_label,
                    "Treatment label to use as arm A (default: 'A', else '1')");
  }

  bjq_csv_schema build() const {
    bjq_csv_schema s{};
    s.subject_col = id.c_str();
    s.stage_col = stage.c_str();
    s.time_col = time.c_str();
    s.event_col = event.c_str();
    s.treatment_col = treatment.c_str();
    s.covariate_cols = covariates.empty() ? nullptr : covariates.c_str();
    s.treatment_a_label = a_label.empty() ? nullptr : a_label.c_str();
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic treatment regimes for right-censored survival data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bjq_version()));

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run a replicated simulation experiment");
  std::string sim_config, sim_out;
  int threads = 0;
  simulate->add_option("--config", sim_config, "Configuration file (omit for defaults)");
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--threads", threads, "Worker threads (default: logical cores)");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a treatment policy from CSV data");
  std::string fit_data, fit_method = "bj", fit_terms, fit_out;
  int fit_stages = 1;
  SchemaFlags fit_schema;
  fit->add_option("--data", fit_data, "Long-format CSV file")->required();
  fit->add_option("--stages", fit_stages, "Number of decision stages")->capture_default_str();
  fit->add_option("--method", fit_method, "bj or cox")->capture_default_str();
  fit->add_option("--terms", fit_terms,
                  "Model formula, e.g. 'intercept + sex + tumor_size + treatment + "
                  "tumor_size:treatment'");
  fit->add_option("--out", fit_out, "Output directory")->required();
  fit_schema.add_to(fit);

  // recommend
  auto* recommend = app.add_subcommand("recommend", "Apply a saved policy to new data");
  std::string rec_model, rec_data, rec_out;
  SchemaFlags rec_schema;
  recommend->add_option("--model", rec_model, "Policy directory written by 'fit'")->required();
  recommend->add_option("--data", rec_data, "Long-format CSV file")->required();
  recommend->add_option("--out", rec_out, "Output CSV path")->required();
  rec_schema.add_to(recommend);

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    const int status = bjq_simulate_file(sim_config.empty() ? nullptr : sim_config.c_str(),
                                         sim_out.c_str(), threads);
    if (status == BJQ_OK) info("wrote simulation outputs to " + sim_out);
    return report(status, "simulate");
  }

  if (fit->parsed()) {
    bjq_cohort* cohort = nullptr;
    const bjq_csv_schema schema = fit_schema.build();
    int status = bjq_cohort_read_csv(fit_data.c_str(), &schema, &cohort);
    if (status != BJQ_OK) return report(status, "fit: reading " + fit_data);
    bjq_policy* policy = nullptr;
    status = bjq_policy_fit_outputs(cohort, fit_stages, fit_method.c_str(),
                                    fit_terms.empty() ? nullptr : fit_terms.c_str(),
                                    fit_out.c_str(), &policy);
    if (status == BJQ_OK)
      info("fitted " + std::to_string(bjq_policy_stages(policy)) + "-stage " + fit_method +
           " policy on " + std::to_string(bjq_cohort_subjects(cohort)) + " subjects; outputs in " +
           fit_out);
    bjq_policy_free(policy);
    bjq_cohort_free(cohort);
    return report(status, "fit");
  }

  if (recommend->parsed()) {
    bjq_policy* policy = nullptr;
    int status = bjq_policy_load(rec_model.c_str(), &policy);
    if (status != BJQ_OK) return report(status, "recommend: loading " + rec_model);
    bjq_cohort* cohort = nullptr;
    const bjq_csv_schema schema = rec_schema.build();
    status = bjq_cohort_read_csv(rec_data.c_str(), &schema, &cohort);
    if (status == BJQ_OK) {
      status = bjq_policy_recommend_csv(policy, cohort, rec_out.c_str());
      if (status == BJQ_OK) info("wrote recommendations to " + rec_out);
    } else {
      report(status, "recommend: reading " + rec_data);
      bjq_policy_free(policy);
      return status;
    }
    bjq_cohort_free(cohort);
    bjq_policy_free(policy);
    return report(status, "recommend");
  }

  return 0;
}
