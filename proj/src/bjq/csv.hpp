#pragma once

#include <string>
#include <vector>

#include "bjq/types.hpp"

namespace bjq {

// Column mapping for the long-format table: one row per subject and stage,
// stages contiguous from 1, covariate cells may be empty (= missing).
struct LongTableSchema {
  std::string subject_col = "id";
  std::string stage_col = "stage";
  std::string time_col = "time";
  std::string event_col = "event";
  std::string treatment_col = "treatment";
  // Empty means "every column not otherwise mapped".
  std::vector<std::string> covariate_cols;
  // Label mapped to arm A; empty means auto ("A" if present, else "1").
  std::string treatment_a_label;
};

Cohort read_long_csv(const std::string& path, const LongTableSchema& schema = {});
void write_long_csv(const Cohort& cohort, const std::string& path,
                    const LongTableSchema& schema = {});

// Minimal CSV: comma separator, optional double-quoted fields, "\n" rows.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string csv_escape(const std::string& field);

}  // namespace bjq
