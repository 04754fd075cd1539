#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "uavmec/solver.hpp"

namespace uavmec::detail {

/// min c'x  s.t.  A x = b,  G x + s = h,  s in K = R+^orthant x SOC(q_1) x ... x SOC(q_k).
struct StandardForm {
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd h;
  int orthant = 0;
  std::vector<int> soc;
  /// Variables of the user problem; an epigraph variable for x'Qx follows when present.
  int user_vars = 0;
  bool has_epigraph = false;

  int n() const { return static_cast<int>(c.size()); }
  int p() const { return static_cast<int>(b.size()); }
  int m() const { return static_cast<int>(h.size()); }
  int degree() const { return orthant + static_cast<int>(soc.size()); }
};

StandardForm to_standard_form(const ConeProgram& cp);

struct IpmOutput {
  SolveStatus status = SolveStatus::numerical_error;
  Eigen::VectorXd x;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

IpmOutput solve_standard(const StandardForm& sf, const SolverOptions& opts);

}  // namespace uavmec::detail
