#include <algorithm>
#include <cmath>

#include "uavmec/solver.hpp"

namespace uavmec {

double FeasibilityReport::worst() const { return std::max({equality, inequality, bounds, cones, 0.0}); }

FeasibilityReport check_solution(const LinearProgram& lp, const Eigen::VectorXd& x) {
  FeasibilityReport r;
  for (Eigen::Index i = 0; i < lp.A_eq.rows(); ++i)
    r.equality = std::max(r.equality, std::abs(lp.A_eq.row(i).dot(x) - lp.b_eq[i]));
  for (Eigen::Index i = 0; i < lp.A_ineq.rows(); ++i)
    r.inequality = std::max(r.inequality, lp.A_ineq.row(i).dot(x) - lp.b_ineq[i]);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (lp.lower.size()) r.bounds = std::max(r.bounds, lp.lower[i] - x[i]);
    if (lp.upper.size()) r.bounds = std::max(r.bounds, x[i] - lp.upper[i]);
  }
  return r;
}

FeasibilityReport check_solution(const ConeProgram& cp, const Eigen::VectorXd& x) {
  FeasibilityReport r = check_solution(cp.core, x);
  for (const SecondOrderCone& q : cp.cones) {
    const double lhs = q.A.rows() ? (q.A * x + q.b).norm() : 0.0;
    r.cones = std::max(r.cones, lhs - (q.c.dot(x) + q.d));
  }
  return r;
}

}  // namespace uavmec
