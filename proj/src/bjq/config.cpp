#include "bjq/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bjq/errors.hpp"
#include "bjq/util.hpp"

namespace bjq {

namespace {

struct Parser {
  std::vector<std::string> problems;

  bool to_bool(const std::string& key, const std::string& value, bool& out) {
    const std::string v = lower(value);
    if (v == "true" || v == "on" || v == "yes" || v == "1") { out = true; return true; }
    if (v == "false" || v == "off" || v == "no" || v == "0") { out = false; return true; }
    problems.push_back(key + ": expected a boolean, got '" + value + "'");
    return false;
  }
  bool to_long(const std::string& key, const std::string& value, long& out) {
    if (parse_long(value, out)) return true;
    problems.push_back(key + ": expected an integer, got '" + value + "'");
    return false;
  }
  bool to_double(const std::string& key, const std::string& value, double& out) {
    if (parse_double(value, out)) return true;
    problems.push_back(key + ": expected a number, got '" + value + "'");
    return false;
  }
};

}  // namespace

SimConfig parse_sim_config(const std::string& text) {
  SimConfig config;
  Parser p;
  std::string section = "simulation";  // default section for sectionless keys
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        p.problems.push_back("bad section header '" + s + "'");
        continue;
      }
      section = lower(trim(s.substr(1, s.size() - 2)));
      if (section != "simulation" && section != "bj")
        p.problems.push_back("unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      p.problems.push_back("expected 'key = value', got '" + s + "'");
      continue;
    }
    const std::string key = lower(trim(s.substr(0, eq)));
    const std::string value = trim(s.substr(eq + 1));
    const std::string qualified = section + "." + key;

    long l;
    double d;
    bool b;
    if (section == "simulation") {
      if (key == "n") { if (p.to_long(qualified, value, l)) config.n = static_cast<int>(l); }
      else if (key == "stages") { if (p.to_long(qualified, value, l)) config.stages = static_cast<int>(l); }
      else if (key == "replicates") { if (p.to_long(qualified, value, l)) config.replicates = static_cast<int>(l); }
      else if (key == "seed") { if (p.to_long(qualified, value, l)) config.seed = static_cast<std::uint64_t>(l); }
      else if (key == "noise_sd") { if (p.to_double(qualified, value, d)) config.noise_sd = d; }
      else if (key == "censoring") { if (p.to_bool(qualified, value, b)) config.censoring_enabled = b; }
      else if (key == "censor_quantile_low") { if (p.to_double(qualified, value, d)) config.censor_quantile_low = d; }
      else if (key == "censor_quantile_high") { if (p.to_double(qualified, value, d)) config.censor_quantile_high = d; }
      else if (key == "literal_stagewise_censoring") { if (p.to_bool(qualified, value, b)) config.literal_stagewise_censoring = b; }
      else if (key == "missing_rate") { if (p.to_double(qualified, value, d)) config.missing_rate = d; }
      else if (key == "mask_stage2") { if (p.to_bool(qualified, value, b)) config.mask_stage2 = b; }
      else if (key == "pmm_donors") { if (p.to_long(qualified, value, l)) config.pmm_donors = static_cast<int>(l); }
      else if (key == "missing_mechanism") {
        const std::string v = lower(value);
        if (v == "mcar") config.missing_mechanism = MissingMechanism::MCAR;
        else if (v == "mar_on_sex") config.missing_mechanism = MissingMechanism::MAR_on_sex;
        else p.problems.push_back(qualified + ": expected 'mcar' or 'mar_on_sex', got '" + value + "'");
      } else if (key == "coefficients") {
        const auto parts = split(value, ',');
        if (parts.size() != 5) {
          p.problems.push_back(qualified + ": expected 5 comma-separated values");
        } else {
          double c[5];
          bool ok = true;
          for (int i = 0; i < 5; ++i)
            ok = p.to_double(qualified, trim(parts[static_cast<std::size_t>(i)]), c[i]) && ok;
          if (ok) {
            config.coefficients = {c[0], c[1], c[2], c[3], c[4]};
          }
        }
      } else {
        p.problems.push_back(qualified + ": unknown key");
      }
    } else if (section == "bj") {
      if (key == "tolerance") { if (p.to_double(qualified, value, d)) config.bj.tolerance = d; }
      else if (key == "max_iterations") { if (p.to_long(qualified, value, l)) config.bj.max_iterations = static_cast<int>(l); }
      else if (key == "tail_correction") { if (p.to_bool(qualified, value, b)) config.bj.tail_correction = b; }
      else p.problems.push_back(qualified + ": unknown key");
    }
  }

  // Merge syntactic problems with semantic validation so the caller sees
  // every offending key at once.
  for (const auto& b2 : config.problems()) p.problems.push_back(b2);
  if (!p.problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& b2 : p.problems) msg += "\n  - " + b2;
    throw validation_error(msg);
  }
  return config;
}

SimConfig load_sim_config(const std::string& path) {
  if (path.empty()) return SimConfig{};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_sim_config(ss.str());
}

std::string dump_sim_config(const SimConfig& c) {
  std::ostringstream out;
  out << "[simulation]\n";
  out << "n = " << c.n << '\n';
  out << "stages = " << c.stages << '\n';
  out << "replicates = " << c.replicates << '\n';
  out << "seed = " << c.seed << '\n';
  out << "coefficients = " << format_double(c.coefficients.intercept) << ", "
      << format_double(c.coefficients.sex) << ", " << format_double(c.coefficients.tumor) << ", "
      << format_double(c.coefficients.treat) << ", " << format_double(c.coefficients.treat_tumor)
      << '\n';
  out << "noise_sd = " << format_double(c.noise_sd) << '\n';
  out << "censoring = " << (c.censoring_enabled ? "true" : "false") << '\n';
  out << "censor_quantile_low = " << format_double(c.censor_quantile_low) << '\n';
  out << "censor_quantile_high = " << format_double(c.censor_quantile_high) << '\n';
  out << "literal_stagewise_censoring = " << (c.literal_stagewise_censoring ? "true" : "false")
      << '\n';
  out << "missing_rate = " << format_double(c.missing_rate) << '\n';
  out << "missing_mechanism = "
      << (c.missing_mechanism == MissingMechanism::MCAR ? "mcar" : "mar_on_sex") << '\n';
  out << "mask_stage2 = " << (c.mask_stage2 ? "true" : "false") << '\n';
  out << "pmm_donors = " << c.pmm_donors << '\n';
  out << "\n[bj]\n";
  out << "tolerance = " << format_double(c.bj.tolerance) << '\n';
  out << "max_iterations = " << c.bj.max_iterations << '\n';
  out << "tail_correction = " << (c.bj.tail_correction ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace bjq
