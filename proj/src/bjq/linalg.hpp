#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace bjq {

// Reciprocal condition number of a symmetric PSD matrix (smallest over
// largest singular value); 0 for an empty or zero matrix.
double reciprocal_condition(const Eigen::MatrixXd& m);

// Indices of columns of X that a rank-revealing QR rejects as linearly
// dependent on the preceding ones.
std::vector<int> dependent_columns(const Eigen::MatrixXd& x);

std::string column_list(const std::vector<int>& cols);

// Least squares of y on x via the normal equations, with a rank check on
// the Gram matrix; throws rank_deficiency_error naming offending columns.
Eigen::VectorXd ols_solve_checked(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  double rcond_min, const std::string& context);

}  // namespace bjq
