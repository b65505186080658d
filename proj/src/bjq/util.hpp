#pragma once

#include <string>
#include <vector>

namespace bjq {

// Empirical quantile with linear interpolation between order statistics
// (the convention used by R's default quantile type 7). x need not be sorted.
double quantile(std::vector<double> x, double p);

struct SixNumber {
  double min, q1, median, mean, q3, max;
};

SixNumber six_number_summary(const std::vector<double>& x);

// Locale-independent numeric formatting. `format_double` emits the shortest
// representation that round-trips through `parse_double` exactly.
std::string format_double(double v);
std::string format_fixed(double v, int decimals);
bool parse_double(const std::string& s, double& out);
bool parse_long(const std::string& s, long& out);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);
std::string lower(std::string s);

}  // namespace bjq
