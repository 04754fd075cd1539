#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace uavmec {

/// min c'x + offset  s.t.  A_ineq x <= b_ineq,  A_eq x = b_eq,  lower <= x <= upper.
/// Empty bound vectors mean unbounded; individual entries may be +-infinity.
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd A_ineq;
  Eigen::VectorXd b_ineq;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double objective_offset = 0.0;

  int num_vars() const { return static_cast<int>(c.size()); }
  /// Throws ConfigError on inconsistent dimensions or lower > upper.
  void validate() const;
};

/// ||A x + b||_2 <= c'x + d
struct SecondOrderCone {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double d = 0.0;
};

/// LinearProgram core plus second-order cones and an optional PSD quadratic x'Qx
/// added to the objective (Q empty or n x n).
struct ConeProgram {
  LinearProgram core;
  std::vector<SecondOrderCone> cones;
  Eigen::MatrixXd Q;

  int num_vars() const { return core.num_vars(); }
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iterations, numerical_error };
std::string_view to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::numerical_error;
  Eigen::VectorXd x;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;

  bool optimal() const { return status == SolveStatus::optimal; }
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iterations = 200;
};

/// Objective of the original problem (linear + quadratic + offset) at x.
double evaluate_objective(const ConeProgram& cp, const Eigen::VectorXd& x);

class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const ConeProgram& cp, const SolverOptions& opts) const = 0;
};

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling and
/// Mehrotra predictor-corrector steps over a sparse quasi-definite KKT system.
class ReferenceBackend final : public ConicBackend {
 public:
  std::string name() const override { return "reference-ipm"; }
  SolveResult solve(const ConeProgram& cp, const SolverOptions& opts) const override;
};

const ConicBackend& default_backend();

SolveResult solve_lp(const LinearProgram& lp, const SolverOptions& opts = {});
SolveResult solve_socp(const ConeProgram& cp, const SolverOptions& opts = {});
SolveResult solve_socp(const ConeProgram& cp, const SolverOptions& opts, const ConicBackend& backend);

/// Constraint violations measured directly from the problem data, independent of
/// any solver state. Positive numbers are violations.
struct FeasibilityReport {
  double equality = 0.0;
  double inequality = 0.0;
  double bounds = 0.0;
  double cones = 0.0;

  double worst() const;
  bool feasible(double tol) const { return worst() <= tol; }
};

FeasibilityReport check_solution(const LinearProgram& lp, const Eigen::VectorXd& x);
FeasibilityReport check_solution(const ConeProgram& cp, const Eigen::VectorXd& x);

/// JSON debug format. Infinite bounds are written as the strings "inf" / "-inf".
std::string to_json(const LinearProgram& lp);
std::string to_json(const ConeProgram& cp);
ConeProgram cone_program_from_json(const std::string& text);
LinearProgram linear_program_from_json(const std::string& text);

}  // namespace uavmec
