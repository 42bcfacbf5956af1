#pragma once

#include <Eigen/Dense>

namespace cavitylb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;        // column vector
using RowVector = Eigen::RowVectorXd;  // probability vectors

// Solves x·A = b for a row vector x (partial-pivoted LU on Aᵀ).
RowVector solve_left(const Matrix& a, const RowVector& b);

// Solves A·x = b.
Vector solve_right(const Matrix& a, const Vector& b);

}  // namespace cavitylb
