#include "bjq/linalg.hpp"

#include <cmath>

#include "bjq/errors.hpp"

namespace bjq {

double reciprocal_condition(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  if (smax <= 0.0) return 0.0;
  return sv(sv.size() - 1) / smax;
}

std::vector<int> dependent_columns(const Eigen::MatrixXd& x) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-7);
  const auto rank = qr.rank();
  std::vector<int> cols;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index j = rank; j < x.cols(); ++j) cols.push_back(perm(j));
  std::sort(cols.begin(), cols.end());
  return cols;
}

std::string column_list(const std::vector<int>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(cols[i]);
  }
  return s;
}

Eigen::VectorXd ols_solve_checked(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  double rcond_min, const std::string& context) {
  const Eigen::MatrixXd gram = x.transpose() * x;
  if (reciprocal_condition(gram) < rcond_min) {
    throw rank_deficiency_error(context + ": design is rank deficient (columns " +
                                column_list(dependent_columns(x)) + " are linearly dependent)");
  }
  return gram.ldlt().solve(x.transpose() * y);
}

}  // namespace bjq
