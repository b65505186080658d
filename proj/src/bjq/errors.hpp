#pragma once

#include <stdexcept>
#include <string>

namespace bjq {

// Error taxonomy. The three roots map onto process exit codes
// (validation = 2, fit = 3, io = 4); the leaf classes exist so callers
// and tests can react to specific failure modes.

struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct schema_error : validation_error {
  using validation_error::validation_error;
};

struct parse_error : validation_error {
  using validation_error::validation_error;
};

struct fit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a sample contains no (or too few) uncensored observations.
struct no_events_error : fit_error {
  using fit_error::fit_error;
};

// Raised when a design/Gram/information matrix is numerically singular.
struct rank_deficiency_error : fit_error {
  using fit_error::fit_error;
};

// Raised when a Cox partial likelihood is monotone in some coefficient.
struct separation_error : fit_error {
  using fit_error::fit_error;
};

// Raised when predictive mean matching has fewer complete cases than donors.
struct insufficient_donors_error : fit_error {
  using fit_error::fit_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bjq
