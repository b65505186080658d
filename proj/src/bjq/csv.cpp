#include "bjq/csv.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bjq/errors.hpp"
#include "bjq/util.hpp"

namespace bjq {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') { field += '"'; ++i; }
        else quoted = false;
      } else field += ch;
      continue;
    }
    switch (ch) {
      case '"': quoted = true; any = true; break;
      case ',': row.push_back(field); field.clear(); any = true; break;
      case '\r': break;
      case '\n':
        if (any || !field.empty() || !row.empty()) {
          row.push_back(field);
          rows.push_back(std::move(row));
        }
        row.clear(); field.clear(); any = false;
        break;
      default: field += ch; any = true; break;
    }
  }
  if (any || !field.empty() || !row.empty()) {
    row.push_back(field);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int require_column(const std::vector<std::string>& header, const std::string& name,
                   const std::string& path) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw schema_error("'" + path + "': missing required column '" + name + "'");
  return static_cast<int>(it - header.begin());
}

}  // namespace

Cohort read_long_csv(const std::string& path, const LongTableSchema& schema) {
  const auto rows = parse_csv(read_file(path));
  if (rows.empty()) throw schema_error("'" + path + "': empty file, header row required");
  const auto& header = rows.front();

  const int id_col = require_column(header, schema.subject_col, path);
  const int stage_col = require_column(header, schema.stage_col, path);
  const int time_col = require_column(header, schema.time_col, path);
  const int event_col = require_column(header, schema.event_col, path);
  const int treat_col = require_column(header, schema.treatment_col, path);

  std::vector<std::pair<std::string, int>> covariates;  // (name, column)
  if (schema.covariate_cols.empty()) {
    const std::set<int> reserved{id_col, stage_col, time_col, event_col, treat_col};
    for (std::size_t j = 0; j < header.size(); ++j)
      if (!reserved.count(static_cast<int>(j)))
        covariates.emplace_back(header[j], static_cast<int>(j));
  } else {
    for (const auto& name : schema.covariate_cols)
      covariates.emplace_back(name, require_column(header, name, path));
  }

  struct RawRow {
    long stage;
    std::size_t line;  // 1-based line number for error messages
    StageRecord record;
    std::string treatment_label;
  };
  std::map<std::string, std::vector<RawRow>> by_subject;
  std::vector<std::string> subject_order;
  std::set<std::string> treatment_labels;
  std::map<std::pair<std::string, long>, std::size_t> seen;  // (id, stage) -> line

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    if (row.size() != header.size())
      throw parse_error("'" + path + "' line " + std::to_string(line) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(row.size()));
    RawRow raw;
    raw.line = line;
    const std::string id = trim(row[static_cast<std::size_t>(id_col)]);
    if (id.empty())
      throw parse_error("'" + path + "' line " + std::to_string(line) + ": empty subject id");

    if (!parse_long(trim(row[static_cast<std::size_t>(stage_col)]), raw.stage) || raw.stage < 1)
      throw parse_error("'" + path + "' line " + std::to_string(line) +
                        ": stage must be a positive integer");
    if (!parse_double(trim(row[static_cast<std::size_t>(time_col)]), raw.record.time))
      throw parse_error("'" + path + "' line " + std::to_string(line) + ": non-numeric time '" +
                        row[static_cast<std::size_t>(time_col)] + "'");
    if (!(raw.record.time > 0.0))
      throw schema_error("'" + path + "' line " + std::to_string(line) +
                         ": time must be positive");
    const std::string ev = trim(row[static_cast<std::size_t>(event_col)]);
    if (ev == "0") raw.record.event = false;
    else if (ev == "1") raw.record.event = true;
    else
      throw schema_error("'" + path + "' line " + std::to_string(line) +
                         ": event must be 0 or 1, got '" + ev + "'");
    raw.treatment_label = trim(row[static_cast<std::size_t>(treat_col)]);
    if (raw.treatment_label.empty())
      throw parse_error("'" + path + "' line " + std::to_string(line) + ": empty treatment");
    treatment_labels.insert(raw.treatment_label);

    for (const auto& [name, col] : covariates) {
      const std::string cell = trim(row[static_cast<std::size_t>(col)]);
      if (cell.empty()) continue;  // missing value
      double v;
      if (!parse_double(cell, v))
        throw parse_error("'" + path + "' line " + std::to_string(line) +
                          ": non-numeric value '" + cell + "' for covariate '" + name + "'");
      raw.record.covariates[name] = v;
    }

    const auto key = std::make_pair(id, raw.stage);
    if (auto it = seen.find(key); it != seen.end())
      throw schema_error("'" + path + "': duplicate (subject, stage) = ('" + id + "', " +
                         std::to_string(raw.stage) + ") at lines " + std::to_string(it->second) +
                         " and " + std::to_string(line));
    seen[key] = line;

    if (!by_subject.count(id)) subject_order.push_back(id);
    by_subject[id].push_back(std::move(raw));
  }

  if (treatment_labels.size() > 2) {
    std::string labels;
    for (const auto& l : treatment_labels) labels += (labels.empty() ? "'" : ", '") + l + "'";
    throw schema_error("'" + path + "': more than two treatment labels: " + labels);
  }

  std::string label_a = schema.treatment_a_label;
  if (label_a.empty()) {
    if (treatment_labels.count("A")) label_a = "A";
    else if (treatment_labels.count("1")) label_a = "1";
    else
      throw schema_error("'" + path + "': cannot infer which treatment label is arm A; set it "
                         "explicitly (labels found: " +
                         (treatment_labels.empty() ? std::string("none")
                                                   : *treatment_labels.begin()) + "...)");
  }
  std::string label_b;
  for (const auto& l : treatment_labels)
    if (l != label_a) label_b = l;
  if (label_b.empty()) label_b = label_a == "B" ? "B_other" : "B";

  Cohort cohort;
  cohort.label_a = label_a;
  cohort.label_b = label_b;
  for (const auto& [name, col] : covariates) cohort.covariate_names.push_back(name);

  for (const auto& id : subject_order) {
    auto& raws = by_subject[id];
    std::sort(raws.begin(), raws.end(),
              [](const RawRow& a, const RawRow& b) { return a.stage < b.stage; });
    Trajectory subject;
    subject.id = id;
    for (std::size_t k = 0; k < raws.size(); ++k) {
      if (raws[k].stage != static_cast<long>(k + 1))
        throw schema_error("'" + path + "': subject '" + id +
                           "' has non-contiguous stages (expected stage " +
                           std::to_string(k + 1) + ", found " + std::to_string(raws[k].stage) +
                           " at line " + std::to_string(raws[k].line) + ")");
      if (k + 1 < raws.size() && !raws[k].record.event)
        throw schema_error("'" + path + "': subject '" + id + "' is censored at stage " +
                           std::to_string(k + 1) +
                           " but has later stages; censoring must end follow-up");
      raws[k].record.treatment = raws[k].treatment_label == label_a ? Arm::A : Arm::B;
      subject.stages.push_back(std::move(raws[k].record));
    }
    cohort.subjects.push_back(std::move(subject));
  }
  return cohort;
}

void write_long_csv(const Cohort& cohort, const std::string& path,
                    const LongTableSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");

  out << csv_escape(schema.subject_col) << ',' << csv_escape(schema.stage_col);
  for (const auto& name : cohort.covariate_names) out << ',' << csv_escape(name);
  out << ',' << csv_escape(schema.treatment_col) << ',' << csv_escape(schema.time_col) << ','
      << csv_escape(schema.event_col) << '\n';

  for (const auto& subject : cohort.subjects) {
    for (std::size_t k = 0; k < subject.stages.size(); ++k) {
      const auto& rec = subject.stages[k];
      out << csv_escape(subject.id) << ',' << (k + 1);
      for (const auto& name : cohort.covariate_names) {
        out << ',';
        auto it = rec.covariates.find(name);
        if (it != rec.covariates.end()) out << format_double(it->second);
      }
      out << ',' << csv_escape(cohort.arm_label(rec.treatment)) << ','
          << format_double(rec.time) << ',' << (rec.event ? '1' : '0') << '\n';
    }
  }
  if (!out) throw io_error("failed writing '" + path + "'");
}

}  // namespace bjq
