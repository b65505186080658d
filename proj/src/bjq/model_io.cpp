#include "bjq/model_io.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bjq/errors.hpp"
#include "bjq/util.hpp"

namespace fs = std::filesystem;

namespace bjq {

namespace {

constexpr const char* kPolicyMagic = "bjq-policy v1";

std::string stage_file(int k) { return "stage_" + std::to_string(k) + ".txt"; }

void write_vector(std::ofstream& out, const std::string& key, const Eigen::VectorXd& v) {
  out << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v(i));
  out << '\n';
}

Eigen::VectorXd parse_vector(const std::vector<std::string>& tokens, const std::string& where) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    double x;
    if (!parse_double(tokens[i], x))
      throw parse_error(where + ": bad numeric token '" + tokens[i] + "'");
    v(static_cast<Eigen::Index>(i)) = x;
  }
  return v;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

void save_policy(const Policy& policy, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory '" + dir + "': " + ec.message());

  {
    std::ofstream out(fs::path(dir) / "policy.txt", std::ios::binary);
    if (!out) throw io_error("cannot write '" + dir + "/policy.txt'");
    out << kPolicyMagic << '\n';
    out << "stages " << policy.stages() << '\n';
    out << "label_a " << policy.label_a << '\n';
    out << "label_b " << policy.label_b << '\n';
  }

  for (int k = 1; k <= policy.stages(); ++k) {
    const StageQModel& model = policy.stage(k);
    std::ofstream out(fs::path(dir) / stage_file(k), std::ios::binary);
    if (!out) throw io_error("cannot write '" + dir + "/" + stage_file(k) + "'");
    out << "stage " << k << '\n';
    out << "method " << (model.method == FitMethod::BJ ? "bj" : "cox") << '\n';
    out << "terms " << model.terms.to_string() << '\n';
    write_vector(out, "beta", model.beta_hat);
    if (model.method == FitMethod::Cox) {
      if (!model.cox) throw io_error("stage " + std::to_string(k) + ": Cox model has no fit");
      out << "max_time " << format_double(model.cox->max_time) << '\n';
      out << "log_likelihood " << format_double(model.cox->log_likelihood) << '\n';
      out << "baseline " << model.cox->baseline_cum_hazard.size() << '\n';
      for (const auto& [t, h] : model.cox->baseline_cum_hazard)
        out << format_double(t) << ' ' << format_double(h) << '\n';
    }
    if (!out) throw io_error("failed writing '" + dir + "/" + stage_file(k) + "'");
  }
}

Policy load_policy(const std::string& dir) {
  const fs::path policy_path = fs::path(dir) / "policy.txt";
  std::ifstream in(policy_path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + policy_path.string() + "'");

  std::string line;
  if (!std::getline(in, line) || trim(line) != kPolicyMagic)
    throw parse_error("'" + policy_path.string() + "': not a policy file");

  Policy policy;
  long stages = 0;
  while (std::getline(in, line)) {
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "stages" && tokens.size() == 2) {
      if (!parse_long(tokens[1], stages) || stages < 1)
        throw parse_error("'" + policy_path.string() + "': bad stage count");
    } else if (tokens[0] == "label_a" && tokens.size() == 2) {
      policy.label_a = tokens[1];
    } else if (tokens[0] == "label_b" && tokens.size() == 2) {
      policy.label_b = tokens[1];
    }
  }
  if (stages < 1) throw parse_error("'" + policy_path.string() + "': missing stage count");

  for (int k = 1; k <= stages; ++k) {
    const fs::path path = fs::path(dir) / stage_file(k);
    std::ifstream sin(path, std::ios::binary);
    if (!sin) throw io_error("cannot open '" + path.string() + "'");
    StageQModel model;
    model.stage_index = k;
    bool have_beta = false;
    long baseline_rows = -1;
    CoxFit cox;
    while (std::getline(sin, line)) {
      if (baseline_rows > 0) {
        const auto tokens = tokenize(line);
        if (tokens.size() != 2)
          throw parse_error("'" + path.string() + "': bad baseline hazard row '" + line + "'");
        double t, h;
        if (!parse_double(tokens[0], t) || !parse_double(tokens[1], h))
          throw parse_error("'" + path.string() + "': bad baseline hazard row '" + line + "'");
        cox.baseline_cum_hazard.emplace_back(t, h);
        --baseline_rows;
        continue;
      }
      const auto tokens = tokenize(line);
      if (tokens.empty()) continue;
      const std::string& key = tokens[0];
      if (key == "method" && tokens.size() == 2) {
        if (tokens[1] == "bj") model.method = FitMethod::BJ;
        else if (tokens[1] == "cox") model.method = FitMethod::Cox;
        else throw parse_error("'" + path.string() + "': unknown method '" + tokens[1] + "'");
      } else if (key == "terms") {
        const auto pos = line.find("terms");
        model.terms = TermSpec::parse(trim(line.substr(pos + 5)));
      } else if (key == "beta") {
        model.beta_hat = parse_vector({tokens.begin() + 1, tokens.end()}, path.string());
        have_beta = true;
      } else if (key == "max_time" && tokens.size() == 2) {
        if (!parse_double(tokens[1], cox.max_time))
          throw parse_error("'" + path.string() + "': bad max_time");
      } else if (key == "log_likelihood" && tokens.size() == 2) {
        if (!parse_double(tokens[1], cox.log_likelihood))
          throw parse_error("'" + path.string() + "': bad log_likelihood");
      } else if (key == "baseline" && tokens.size() == 2) {
        if (!parse_long(tokens[1], baseline_rows) || baseline_rows < 0)
          throw parse_error("'" + path.string() + "': bad baseline row count");
        if (baseline_rows == 0) baseline_rows = -1;
      }
    }
    if (!have_beta || model.terms.terms.empty())
      throw parse_error("'" + path.string() + "': incomplete stage model");
    if (model.method == FitMethod::Cox) {
      if (baseline_rows > 0)
        throw parse_error("'" + path.string() + "': truncated baseline hazard");
      cox.beta = model.beta_hat;
      cox.converged = true;
      model.cox = std::move(cox);
      if (model.beta_hat.size() != model.terms.size() - 1)
        throw parse_error("'" + path.string() + "': Cox beta length does not match terms");
    } else if (model.beta_hat.size() != model.terms.size()) {
      throw parse_error("'" + path.string() + "': beta length does not match terms");
    }
    policy.stage_models.push_back(std::move(model));
  }
  return policy;
}

}  // namespace bjq
