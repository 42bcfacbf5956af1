#include "linalg.hpp"

#include "error.hpp"

namespace cavitylb {

namespace {

constexpr double kMinRcond = 1e-14;

void check(const Eigen::PartialPivLU<Matrix>& lu, const Vector& x) {
  if (!(lu.rcond() > kMinRcond) || !x.allFinite())
    throw SolverError("linear solve on a singular or near-singular matrix");
}

}  // namespace

RowVector solve_left(const Matrix& a, const RowVector& b) {
  Eigen::PartialPivLU<Matrix> lu(a.transpose());
  Vector x = lu.solve(b.transpose());
  check(lu, x);
  return x.transpose();
}

Vector solve_right(const Matrix& a, const Vector& b) {
  Eigen::PartialPivLU<Matrix> lu(a);
  Vector x = lu.solve(b);
  check(lu, x);
  return x;
}

}  // namespace cavitylb
