#include "bjq/bjq.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include "bjq/config.hpp"
#include "bjq/csv.hpp"
#include "bjq/errors.hpp"
#include "bjq/model_io.hpp"
#include "bjq/runner.hpp"
#include "bjq/util.hpp"

struct bjq_cohort_s {
  bjq::Cohort cohort;
};

struct bjq_policy_s {
  bjq::Policy policy;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Translate the C++ error taxonomy into status codes.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return BJQ_OK;
  } catch (const bjq::validation_error& e) {
    return fail(BJQ_ERR_VALIDATION, e.what());
  } catch (const bjq::fit_error& e) {
    return fail(BJQ_ERR_FIT, e.what());
  } catch (const bjq::io_error& e) {
    return fail(BJQ_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(BJQ_ERR_FIT, e.what());
  }
}

bjq::LongTableSchema to_schema(const bjq_csv_schema* schema) {
  bjq::LongTableSchema out;
  if (!schema) return out;
  if (schema->subject_col) out.subject_col = schema->subject_col;
  if (schema->stage_col) out.stage_col = schema->stage_col;
  if (schema->time_col) out.time_col = schema->time_col;
  if (schema->event_col) out.event_col = schema->event_col;
  if (schema->treatment_col) out.treatment_col = schema->treatment_col;
  if (schema->treatment_a_label) out.treatment_a_label = schema->treatment_a_label;
  if (schema->covariate_cols && *schema->covariate_cols) {
    for (auto& name : bjq::split(schema->covariate_cols, ','))
      out.covariate_cols.push_back(bjq::trim(name));
  }
  return out;
}

bjq::FitMethod to_method(const char* method) {
  const std::string m = bjq::lower(method ? method : "");
  if (m == "bj") return bjq::FitMethod::BJ;
  if (m == "cox") return bjq::FitMethod::Cox;
  throw bjq::validation_error("unknown method '" + std::string(method ? method : "") +
                              "' (expected 'bj' or 'cox')");
}

bjq::TermSpec to_terms(const char* terms, const bjq::Cohort& cohort) {
  if (terms && *terms) return bjq::TermSpec::parse(terms);
  std::string formula = "intercept";
  for (const auto& name : cohort.covariate_names) formula += " + " + name;
  formula += " + treatment";
  return bjq::TermSpec::parse(formula);
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

extern "C" {

const char* bjq_version(void) { return bjq::kVersion; }

const char* bjq_last_error(void) { return g_last_error.c_str(); }

int bjq_simulate_file(const char* config_path, const char* out_dir, int threads) {
  if (!out_dir) return fail(BJQ_ERR_VALIDATION, "out_dir is required");
  return guarded([&] {
    bjq::run_simulate(config_path ? config_path : "", out_dir, resolve_threads(threads));
  });
}

int bjq_simulate_text(const char* config_text, const char* out_dir, int threads) {
  if (!out_dir) return fail(BJQ_ERR_VALIDATION, "out_dir is required");
  return guarded([&] {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path tmp = fs::path(out_dir) / ".config.tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw bjq::io_error("cannot stage config under '" + std::string(out_dir) + "'");
      out << (config_text ? config_text : "");
    }
    bjq::run_simulate(tmp.string(), out_dir, resolve_threads(threads));
    fs::remove(tmp);
  });
}

int bjq_cohort_read_csv(const char* path, const bjq_csv_schema* schema, bjq_cohort** out) {
  if (!path || !out) return fail(BJQ_ERR_VALIDATION, "path and out are required");
  *out = nullptr;
  return guarded([&] { *out = new bjq_cohort_s{bjq::read_long_csv(path, to_schema(schema))}; });
}

int bjq_cohort_write_csv(const bjq_cohort* cohort, const char* path) {
  if (!cohort || !path) return fail(BJQ_ERR_VALIDATION, "cohort and path are required");
  return guarded([&] { bjq::write_long_csv(cohort->cohort, path); });
}

void bjq_cohort_free(bjq_cohort* cohort) { delete cohort; }

int bjq_cohort_subjects(const bjq_cohort* cohort) {
  return cohort ? static_cast<int>(cohort->cohort.subjects.size()) : 0;
}

int bjq_cohort_stages(const bjq_cohort* cohort) {
  return cohort ? cohort->cohort.stage_count() : 0;
}

int bjq_policy_fit(const bjq_cohort* cohort, int stages, const char* method, const char* terms,
                   bjq_policy** out) {
  if (!cohort || !out) return fail(BJQ_ERR_VALIDATION, "cohort and out are required");
  *out = nullptr;
  return guarded([&] {
    *out = new bjq_policy_s{bjq::fit_policy(cohort->cohort, stages, to_terms(terms, cohort->cohort),
                                            to_method(method))};
  });
}

int bjq_policy_fit_outputs(const bjq_cohort* cohort, int stages, const char* method,
                           const char* terms, const char* out_dir, bjq_policy** out) {
  if (!cohort || !out_dir) return fail(BJQ_ERR_VALIDATION, "cohort and out_dir are required");
  if (out) *out = nullptr;
  return guarded([&] {
    bjq::Policy policy = bjq::run_fit(cohort->cohort, stages, to_method(method),
                                      to_terms(terms, cohort->cohort), out_dir);
    if (out) *out = new bjq_policy_s{std::move(policy)};
  });
}

int bjq_policy_save(const bjq_policy* policy, const char* dir) {
  if (!policy || !dir) return fail(BJQ_ERR_VALIDATION, "policy and dir are required");
  return guarded([&] { bjq::save_policy(policy->policy, dir); });
}

int bjq_policy_load(const char* dir, bjq_policy** out) {
  if (!dir || !out) return fail(BJQ_ERR_VALIDATION, "dir and out are required");
  *out = nullptr;
  return guarded([&] { *out = new bjq_policy_s{bjq::load_policy(dir)}; });
}

void bjq_policy_free(bjq_policy* policy) { delete policy; }

int bjq_policy_stages(const bjq_policy* policy) {
  return policy ? policy->policy.stages() : 0;
}

int bjq_policy_coefficients(const bjq_policy* policy, int stage, double* buf, int buf_len,
                            int* n_out) {
  if (!policy || !n_out) return fail(BJQ_ERR_VALIDATION, "policy and n_out are required");
  return guarded([&] {
    if (stage < 1 || stage > policy->policy.stages())
      throw bjq::validation_error("stage out of range");
    const auto& beta = policy->policy.stage(stage).beta_hat;
    *n_out = static_cast<int>(beta.size());
    if (buf) {
      if (buf_len < *n_out)
        throw bjq::validation_error("buffer too small: need " + std::to_string(*n_out));
      std::memcpy(buf, beta.data(), sizeof(double) * static_cast<std::size_t>(*n_out));
    }
  });
}

int bjq_policy_recommend_csv(const bjq_policy* policy, const bjq_cohort* cohort,
                             const char* out_csv) {
  if (!policy || !cohort || !out_csv)
    return fail(BJQ_ERR_VALIDATION, "policy, cohort and out_csv are required");
  return guarded([&] { bjq::write_recommendations(policy->policy, cohort->cohort, out_csv); });
}

}  // extern "C"
