#include "bjq/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "bjq/config.hpp"
#include "bjq/errors.hpp"
#include "bjq/exports.hpp"
#include "bjq/model_io.hpp"
#include "bjq/util.hpp"

namespace fs = std::filesystem;

namespace bjq {

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory '" + dir + "': " + ec.message());
}

}  // namespace

std::vector<std::string> run_simulate(const std::string& config_path, const std::string& out_dir,
                                      int threads) {
  const SimConfig config = load_sim_config(config_path);
  ensure_dir(out_dir);
  const std::string started = utc_timestamp();

  const ExperimentResult result = run_experiment(config, threads);

  std::vector<SummaryRow> rows;
  for (const auto& s : result.summaries)
    rows.push_back({config.n, s.method, s.scope, s.min, s.q1, s.median, s.mean, s.q3, s.max});

  const fs::path base(out_dir);
  std::vector<std::string> outputs;
  auto emit = [&](const std::string& name) {
    outputs.push_back((base / name).string());
    return outputs.back();
  };
  write_summary_tables(rows, emit("summary.csv"));
  write_accuracies_csv(result.replicate_accuracies, emit("accuracies.csv"));
  write_qvalues_csv(result.q_values, config.stages, emit("qvalues.csv"));

  // Manifest last, written atomically.
  const fs::path manifest = base / "manifest.txt";
  const fs::path tmp = base / "manifest.txt.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw io_error("cannot write '" + tmp.string() + "'");
    out << "bjq-manifest v1\n";
    out << "version = " << kVersion << '\n';
    out << "seed = " << config.seed << '\n';
    out << "threads = " << threads << '\n';
    out << "started_utc = " << started << '\n';
    out << "finished_utc = " << utc_timestamp() << '\n';
    out << "failed_replicates = " << result.failed_replicates << '\n';
    for (const auto& msg : result.failure_messages) out << "failure = " << msg << '\n';
    for (const auto& path : outputs)
      out << "output = " << fs::path(path).filename().string() << '\n';
    out << "\n[config]\n" << dump_sim_config(config);
    if (!out) throw io_error("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, manifest);
  outputs.push_back(manifest.string());
  return outputs;
}

Policy run_fit(const Cohort& cohort, int stages, FitMethod method, const TermSpec& terms,
               const std::string& out_dir) {
  if (stages < 1 || stages > cohort.stage_count())
    throw validation_error("fit: requested " + std::to_string(stages) +
                           " stages but the data contains " +
                           std::to_string(cohort.stage_count()));
  ensure_dir(out_dir);
  const QFitOptions options;
  const Policy policy = fit_policy(cohort, stages, terms, method, options);
  const fs::path base(out_dir);

  save_policy(policy, (base / "model").string());
  write_recommendations(policy, cohort, (base / "recommendations.csv").string());

  // Stage-wise imputed (BJ) or model-predicted (Cox) outcome values.
  {
    std::ofstream out(base / "imputed.csv", std::ios::binary);
    if (!out) throw io_error("cannot write '" + (base / "imputed.csv").string() + "'");
    out << "id,stage,time,event,imputed_time\n";
    for (int k = 1; k <= stages; ++k) {
      const Eigen::VectorXd values = stage_outcome_estimates(cohort, k, terms, method, options);
      Eigen::Index r = 0;
      for (const auto& subject : cohort.subjects) {
        if (!subject.entered(k)) continue;
        const auto& rec = subject.stages[static_cast<std::size_t>(k - 1)];
        out << csv_escape(subject.id) << ',' << k << ',' << format_double(rec.time) << ','
            << (rec.event ? '1' : '0') << ',' << format_double(values(r)) << '\n';
        ++r;
      }
    }
    if (!out) throw io_error("failed writing imputed.csv");
  }

  if (stages == 1 && cohort.stage_count() == 1) {
    const Eigen::VectorXd imputed = stage_outcome_estimates(cohort, 1, terms, method, options);
    write_km_export_csv(export_km_pairs(cohort, imputed), (base / "km_curves.csv").string());
  }
  return policy;
}

void write_recommendations(const Policy& policy, const Cohort& cohort, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "id,stage,q_a,q_b,recommended\n";
  for (const auto& subject : cohort.subjects) {
    const std::vector<Arm> seq = recommend_sequence(policy, subject);
    for (std::size_t k = 0; k < seq.size(); ++k) {
      const int stage = static_cast<int>(k) + 1;
      const auto& model = policy.stage(stage);
      out << csv_escape(subject.id) << ',' << stage << ','
          << format_double(model.q_value(subject, stage, Arm::A)) << ','
          << format_double(model.q_value(subject, stage, Arm::B)) << ','
          << csv_escape(seq[k] == Arm::A ? policy.label_a : policy.label_b) << '\n';
    }
  }
  if (!out) throw io_error("failed writing '" + path + "'");
}

}  // namespace bjq
