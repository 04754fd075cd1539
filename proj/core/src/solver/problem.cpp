#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "solver/standard_form.hpp"
#include "uavmec/common.hpp"

namespace uavmec {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

void LinearProgram::validate() const {
  const Eigen::Index n = c.size();
  require(A_ineq.rows() == b_ineq.size(), "lp: A_ineq rows != b_ineq size");
  require(A_ineq.rows() == 0 || A_ineq.cols() == n, "lp: A_ineq cols != n");
  require(A_eq.rows() == b_eq.size(), "lp: A_eq rows != b_eq size");
  require(A_eq.rows() == 0 || A_eq.cols() == n, "lp: A_eq cols != n");
  require(lower.size() == 0 || lower.size() == n, "lp: lower bound size != n");
  require(upper.size() == 0 || upper.size() == n, "lp: upper bound size != n");
  require(c.allFinite(), "lp: non-finite objective");
  require(A_ineq.allFinite() && A_eq.allFinite() && b_eq.allFinite(), "lp: non-finite constraint data");
  for (Eigen::Index i = 0; i < b_ineq.size(); ++i) require(!std::isnan(b_ineq[i]) && b_ineq[i] != -kInf, "lp: bad b_ineq");
  if (lower.size() && upper.size())
    for (Eigen::Index i = 0; i < n; ++i) require(lower[i] <= upper[i], "lp: lower > upper at index " + std::to_string(i));
  for (Eigen::Index i = 0; i < lower.size(); ++i) require(!std::isnan(lower[i]) && lower[i] != kInf, "lp: bad lower bound");
  for (Eigen::Index i = 0; i < upper.size(); ++i) require(!std::isnan(upper[i]) && upper[i] != -kInf, "lp: bad upper bound");
}

void ConeProgram::validate() const {
  core.validate();
  const Eigen::Index n = core.c.size();
  for (std::size_t k = 0; k < cones.size(); ++k) {
    const SecondOrderCone& q = cones[k];
    const std::string tag = "cone " + std::to_string(k) + ": ";
    require(q.A.rows() == q.b.size(), tag + "A rows != b size");
    require(q.A.rows() == 0 || q.A.cols() == n, tag + "A cols != n");
    require(q.c.size() == n, tag + "c size != n");
    require(q.A.allFinite() && q.b.allFinite() && q.c.allFinite() && std::isfinite(q.d), tag + "non-finite data");
  }
  require(Q.size() == 0 || (Q.rows() == n && Q.cols() == n), "Q must be empty or n x n");
  require(Q.allFinite(), "Q has non-finite entries");
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::numerical_error: return "numerical_error";
  }
  return "unknown";
}

double evaluate_objective(const ConeProgram& cp, const Eigen::VectorXd& x) {
  double v = cp.core.c.dot(x) + cp.core.objective_offset;
  if (cp.Q.size()) v += x.dot(cp.Q * x);
  return v;
}

namespace detail {

namespace {

/// Q = F F' for symmetric PSD Q via pivoted LDL'. Throws if Q is not PSD.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& Q) {
  const Eigen::MatrixXd Qs = 0.5 * (Q + Q.transpose());
  const double scale = std::max(1.0, Qs.diagonal().cwiseAbs().maxCoeff());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Qs);
  if (ldlt.info() != Eigen::Success) throw ConfigError("Q factorization failed");
  const Eigen::VectorXd D = ldlt.vectorD();
  if ((D.array() < -1e-10 * scale).any()) throw ConfigError("Q is not positive semidefinite");
  const Eigen::MatrixXd L = ldlt.matrixL();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < D.size(); ++i)
    if (D[i] > 1e-14 * scale) keep.push_back(i);
  Eigen::MatrixXd M(Qs.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    M.col(static_cast<Eigen::Index>(k)) = L.col(keep[k]) * std::sqrt(D[keep[k]]);
  return ldlt.transpositionsP().transpose() * M;
}

using Triplet = Eigen::Triplet<double>;

void add_dense_rows(std::vector<Triplet>& t, int row0, const Eigen::MatrixXd& M, double sign) {
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (M(r, j) != 0.0) t.emplace_back(row0 + static_cast<int>(r), static_cast<int>(j), sign * M(r, j));
}

}  // namespace

StandardForm to_standard_form(const ConeProgram& cp) {
  const LinearProgram& lp = cp.core;
  const int n = lp.num_vars();
  StandardForm sf;
  sf.user_vars = n;

  Eigen::MatrixXd F;
  if (cp.Q.size() && cp.Q.cwiseAbs().maxCoeff() > 0.0) {
    F = psd_factor(cp.Q);
    sf.has_epigraph = F.cols() > 0;
  }
  const int nt = n + (sf.has_epigraph ? 1 : 0);
  sf.c = Eigen::VectorXd::Zero(nt);
  sf.c.head(n) = lp.c;
  if (sf.has_epigraph) sf.c[n] = 1.0;

  auto lo = [&](int i) { return lp.lower.size() ? lp.lower[i] : -kInf; };
  auto hi = [&](int i) { return lp.upper.size() ? lp.upper[i] : kInf; };

  // Equalities: user rows, then fixed variables.
  std::vector<Triplet> ta;
  std::vector<double> b;
  add_dense_rows(ta, 0, lp.A_eq, 1.0);
  for (Eigen::Index r = 0; r < lp.b_eq.size(); ++r) b.push_back(lp.b_eq[r]);
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(lo(i)) && lo(i) == hi(i)) {
      ta.emplace_back(static_cast<int>(b.size()), i, 1.0);
      b.push_back(lo(i));
    }
  }
  sf.A.resize(static_cast<Eigen::Index>(b.size()), nt);
  sf.A.setFromTriplets(ta.begin(), ta.end());
  sf.b = Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));

  // Cone rows: orthant first, then each second-order cone.
  std::vector<Triplet> tg;
  std::vector<double> h;
  for (Eigen::Index r = 0; r < lp.A_ineq.rows(); ++r) {
    if (lp.b_ineq[r] == kInf) continue;
    const int row = static_cast<int>(h.size());
    for (Eigen::Index j = 0; j < lp.A_ineq.cols(); ++j)
      if (lp.A_ineq(r, j) != 0.0) tg.emplace_back(row, static_cast<int>(j), lp.A_ineq(r, j));
    h.push_back(lp.b_ineq[r]);
  }
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(lo(i)) && lo(i) == hi(i)) continue;
    if (std::isfinite(hi(i))) {
      tg.emplace_back(static_cast<int>(h.size()), i, 1.0);
      h.push_back(hi(i));
    }
    if (std::isfinite(lo(i))) {
      tg.emplace_back(static_cast<int>(h.size()), i, -1.0);
      h.push_back(-lo(i));
    }
  }
  sf.orthant = static_cast<int>(h.size());

  for (const SecondOrderCone& q : cp.cones) {
    const int row0 = static_cast<int>(h.size());
    for (Eigen::Index j = 0; j < q.c.size(); ++j)
      if (q.c[j] != 0.0) tg.emplace_back(row0, static_cast<int>(j), -q.c[j]);
    h.push_back(q.d);
    add_dense_rows(tg, row0 + 1, q.A, -1.0);
    for (Eigen::Index r = 0; r < q.b.size(); ++r) h.push_back(q.b[r]);
    sf.soc.push_back(1 + static_cast<int>(q.A.rows()));
  }

  if (sf.has_epigraph) {
    // x'Qx <= t  <=>  ||(1 - t, 2 F'x)|| <= 1 + t
    const int row0 = static_cast<int>(h.size());
    tg.emplace_back(row0, n, -1.0);
    h.push_back(1.0);
    tg.emplace_back(row0 + 1, n, 1.0);
    h.push_back(1.0);
    add_dense_rows(tg, row0 + 2, F.transpose(), -2.0);
    for (Eigen::Index k = 0; k < F.cols(); ++k) h.push_back(0.0);
    sf.soc.push_back(2 + static_cast<int>(F.cols()));
  }

  sf.G.resize(static_cast<Eigen::Index>(h.size()), nt);
  sf.G.setFromTriplets(tg.begin(), tg.end());
  sf.h = Eigen::Map<Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
  return sf;
}

}  // namespace detail

SolveResult ReferenceBackend::solve(const ConeProgram& cp, const SolverOptions& opts) const {
  cp.validate();
  const detail::StandardForm sf = detail::to_standard_form(cp);
  const detail::IpmOutput out = detail::solve_standard(sf, opts);
  SolveResult r;
  r.status = out.status;
  r.iterations = out.iterations;
  r.primal_residual = out.primal_residual;
  r.dual_residual = out.dual_residual;
  r.gap = out.gap;
  r.x = out.x.size() ? Eigen::VectorXd(out.x.head(sf.user_vars)) : Eigen::VectorXd::Zero(sf.user_vars);
  r.objective = evaluate_objective(cp, r.x);
  return r;
}

const ConicBackend& default_backend() {
  static const ReferenceBackend backend;
  return backend;
}

SolveResult solve_lp(const LinearProgram& lp, const SolverOptions& opts) {
  ConeProgram cp;
  cp.core = lp;
  return default_backend().solve(cp, opts);
}

SolveResult solve_socp(const ConeProgram& cp, const SolverOptions& opts) { return default_backend().solve(cp, opts); }

SolveResult solve_socp(const ConeProgram& cp, const SolverOptions& opts, const ConicBackend& backend) {
  return backend.solve(cp, opts);
}

}  // namespace uavmec
