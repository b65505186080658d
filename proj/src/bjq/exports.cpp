#include "bjq/exports.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "bjq/csv.hpp"
#include "bjq/errors.hpp"
#include "bjq/util.hpp"

namespace bjq {

namespace {

KMExport km_curve(const std::string& label, std::vector<double> times,
                  std::vector<bool> events) {
  const std::size_t n = times.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (times[a] != times[b]) return times[a] < times[b];
    return events[a] && !events[b];
  });

  KMExport curve;
  curve.label = label;
  curve.points.push_back({0.0, 1.0, static_cast<int>(n)});
  double surv = 1.0;
  std::size_t i = 0;
  while (i < n) {
    const double t = times[order[i]];
    const std::size_t at_risk = n - i;
    std::size_t d = 0;
    while (i < n && times[order[i]] == t) {
      if (events[order[i]]) ++d;
      ++i;
    }
    if (d > 0) {
      surv *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      curve.points.push_back({t, surv, static_cast<int>(at_risk)});
    }
  }
  return curve;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

std::vector<KMExport> export_km_pairs(const Cohort& cohort,
                                      const Eigen::VectorXd& imputed_times) {
  if (cohort.stage_count() != 1)
    throw validation_error("export_km_pairs: single-stage data required");
  if (imputed_times.size() != static_cast<Eigen::Index>(cohort.subjects.size()))
    throw validation_error("export_km_pairs: one imputed time per subject required");

  std::vector<KMExport> curves;
  for (Arm arm : {Arm::A, Arm::B}) {
    std::vector<double> obs_t, imp_t;
    std::vector<bool> obs_e, imp_e;
    for (std::size_t i = 0; i < cohort.subjects.size(); ++i) {
      const auto& rec = cohort.subjects[i].stages.front();
      if (rec.treatment != arm) continue;
      obs_t.push_back(rec.time);
      obs_e.push_back(rec.event);
      imp_t.push_back(imputed_times(static_cast<Eigen::Index>(i)));
      imp_e.push_back(true);
    }
    curves.push_back(km_curve("observed_" + cohort.arm_label(arm), obs_t, obs_e));
    curves.push_back(km_curve("imputed_" + cohort.arm_label(arm), imp_t, imp_e));
  }
  // observed_A, observed_B, imputed_A, imputed_B
  std::swap(curves[1], curves[2]);
  return curves;
}

void write_km_export_csv(const std::vector<KMExport>& curves, const std::string& path) {
  auto out = open_out(path);
  out << "label,time,survival,at_risk\n";
  for (const auto& curve : curves)
    for (const auto& p : curve.points)
      out << csv_escape(curve.label) << ',' << format_double(p.time) << ','
          << format_double(p.survival) << ',' << p.at_risk << '\n';
  if (!out) throw io_error("failed writing '" + path + "'");
}

void write_summary_tables(std::vector<SummaryRow> rows, const std::string& path) {
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    if (a.n != b.n) return a.n < b.n;
    if (a.method != b.method) return a.method == FitMethod::BJ;
    return static_cast<int>(a.scope) < static_cast<int>(b.scope);
  });
  auto out = open_out(path);
  out << "n,method,scope,min,q1,median,mean,q3,max\n";
  for (const auto& r : rows) {
    out << r.n << ',' << method_name(r.method) << ',' << scope_name(r.scope);
    for (double v : {r.min, r.q1, r.median, r.mean, r.q3, r.max})
      out << ',' << format_fixed(v, 3);
    out << '\n';
  }
  if (!out) throw io_error("failed writing '" + path + "'");
}

void write_qvalues_csv(const std::vector<QValueRow>& rows, int stages, const std::string& path) {
  auto out = open_out(path);
  out << "subject," << (stages == 1 ? "arm" : "sequence") << ",q_true,q_bj,q_cox\n";
  for (const auto& r : rows)
    out << r.subject << ',' << r.label << ',' << format_double(r.q_true) << ','
        << format_double(r.q_bj) << ',' << format_double(r.q_cox) << '\n';
  if (!out) throw io_error("failed writing '" + path + "'");
}

void write_accuracies_csv(const std::vector<ReplicateAccuracy>& rows, const std::string& path) {
  auto out = open_out(path);
  out << "replicate,method,scope,accuracy\n";
  for (const auto& r : rows)
    out << r.replicate << ',' << method_name(r.method) << ',' << scope_name(r.scope) << ','
        << format_double(r.accuracy) << '\n';
  if (!out) throw io_error("failed writing '" + path + "'");
}

}  // namespace bjq
