#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "solver/cone_algebra.hpp"

namespace uavmec::detail {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

constexpr double kStaticReg = 1e-8;
constexpr int kMaxRefine = 10;
constexpr double kStepFraction = 0.99;
constexpr double kPolishGap = 1e-5;
constexpr int kPolishIterations = 15;
// A stalled iterate within this multiple of the tolerance is still reported optimal.
constexpr double kInaccurateFactor = 100.0;

/// Regularised quasi-definite KKT matrix [[0, A', G'], [A, 0, 0], [G, 0, -W^2]].
class KktSystem {
 public:
  KktSystem(const StandardForm& sf, const ConeLayout& K) : n_(sf.n()), p_(sf.p()), K_(K) {
    const int N = n_ + p_ + K.m;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(N + sf.A.nonZeros() + sf.G.nonZeros()) + 16);
    reg_ = Vec::Zero(N);
    for (int i = 0; i < n_; ++i) {
      t.emplace_back(i, i, kStaticReg);
      reg_[i] = kStaticReg;
    }
    for (int k = 0; k < sf.A.outerSize(); ++k)
      for (SpMat::InnerIterator it(sf.A, k); it; ++it)
        t.emplace_back(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int i = 0; i < p_; ++i) {
      t.emplace_back(n_ + i, n_ + i, -kStaticReg);
      reg_[n_ + i] = -kStaticReg;
    }
    for (int k = 0; k < sf.G.outerSize(); ++k)
      for (SpMat::InnerIterator it(sf.G, k); it; ++it)
        t.emplace_back(n_ + p_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    const int z0 = n_ + p_;
    for (int i = 0; i < K.m; ++i) reg_[z0 + i] = -kStaticReg;
    std::vector<std::pair<int, int>> zpos;
    for (int i = 0; i < K.orthant; ++i) zpos.emplace_back(z0 + i, z0 + i);
    for (std::size_t k = 0; k < K.dim.size(); ++k)
      for (int j = 0; j < K.dim[k]; ++j)
        for (int i = j; i < K.dim[k]; ++i) zpos.emplace_back(z0 + K.offset[k] + i, z0 + K.offset[k] + j);
    for (auto [r, c] : zpos) t.emplace_back(r, c, 1.0);
    mat_.resize(N, N);
    mat_.setFromTriplets(t.begin(), t.end());
    mat_.makeCompressed();
    for (auto [r, c] : zpos) zval_.push_back(&mat_.coeffRef(r, c));
  }

  /// Identity scaling when W is null.
  bool factor(const Scaling* W) {
    std::size_t idx = 0;
    for (int i = 0; i < K_.orthant; ++i) {
      const double w2 = W ? W->w[i] * W->w[i] : 1.0;
      *zval_[idx++] = -w2 - kStaticReg;
    }
    for (std::size_t k = 0; k < K_.dim.size(); ++k) {
      const int d = K_.dim[k];
      for (int j = 0; j < d; ++j) {
        for (int i = j; i < d; ++i) {
          double v;
          if (W) {
            const Vec& wb = W->wbar[k];
            const double jij = (i == j) ? (i == 0 ? 1.0 : -1.0) : 0.0;
            v = W->eta[k] * W->eta[k] * (2.0 * wb[i] * wb[j] - jij);
          } else {
            v = (i == j) ? 1.0 : 0.0;
          }
          *zval_[idx++] = -v - (i == j ? kStaticReg : 0.0);
        }
      }
    }
    if (!analyzed_) {
      ldlt_.analyzePattern(mat_);
      analyzed_ = true;
    }
    ldlt_.factorize(mat_);
    return ldlt_.info() == Eigen::Success && ldlt_.vectorD().allFinite() &&
           (ldlt_.vectorD().array() != 0.0).all();
  }

  /// Solves the unregularised system by iterative refinement on the regularised factor.
  bool solve(const Vec& rhs, Vec& sol) const {
    sol = ldlt_.solve(rhs);
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    double prev = kInf;
    for (int it = 0; it < kMaxRefine; ++it) {
      const Vec r = rhs - (mat_.selfadjointView<Eigen::Lower>() * sol - reg_.cwiseProduct(sol));
      const double err = r.lpNorm<Eigen::Infinity>();
      if (!std::isfinite(err)) return false;
      if (err <= 1e-14 * scale || err > 0.5 * prev) break;
      prev = err;
      sol += ldlt_.solve(r);
    }
    return sol.allFinite();
  }

 private:
  int n_, p_;
  const ConeLayout& K_;
  SpMat mat_;
  Vec reg_;
  std::vector<double*> zval_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
};

struct Direction {
  Vec x, y, z, s;
  double tau = 0.0, kappa = 0.0;
};

IpmOutput solve_without_cones(const StandardForm& sf, const SolverOptions& opts) {
  // min c'x s.t. Ax = b: optimal iff feasible and c in range(A').
  IpmOutput out;
  const int n = sf.n();
  const Eigen::MatrixXd A = Eigen::MatrixXd(sf.A);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A.rows() ? A : Eigen::MatrixXd::Zero(1, n));
  Vec x = A.rows() ? Vec(cod.solve(sf.b)) : Vec(Vec::Zero(n));
  const double pres = A.rows() ? (A * x - sf.b).norm() / (1.0 + sf.b.norm()) : 0.0;
  Vec y = Vec::Zero(sf.p());
  double dres = sf.c.norm() / (1.0 + sf.c.norm());
  if (A.rows()) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> codt(A.transpose());
    y = codt.solve(Vec(-sf.c));
    dres = (A.transpose() * y + sf.c).norm() / (1.0 + sf.c.norm());
  }
  out.x = x;
  out.primal_residual = pres;
  out.dual_residual = dres;
  if (pres > opts.tol) {
    out.status = SolveStatus::infeasible;
  } else if (dres > opts.tol) {
    out.status = SolveStatus::unbounded;
  } else {
    out.status = SolveStatus::optimal;
  }
  return out;
}

}  // namespace

IpmOutput solve_standard(const StandardForm& sf, const SolverOptions& opts) {
  if (sf.m() == 0) return solve_without_cones(sf, opts);

  const ConeLayout K(sf);
  const int n = sf.n(), p = sf.p(), m = K.m;
  const SpMat At = sf.A.transpose();
  const SpMat Gt = sf.G.transpose();
  const Vec e = identity_element(K);
  const double bnorm = sf.b.norm(), hnorm = sf.h.norm(), cnorm = sf.c.norm();

  KktSystem kkt(sf, K);
  IpmOutput out;
  out.x = Vec::Zero(n);

  auto split = [&](const Vec& v, Vec& x, Vec& y, Vec& z) {
    x = v.head(n);
    y = v.segment(n, p);
    z = v.tail(m);
  };
  auto stack = [&](const Vec& x, const Vec& y, const Vec& z) {
    Vec v(n + p + m);
    v << x, y, z;
    return v;
  };

  // Initial point from two least-squares KKT solves with identity scaling.
  if (!kkt.factor(nullptr)) return out;
  Vec x, y, z, s, sol, tmp;
  if (!kkt.solve(stack(Vec::Zero(n), sf.b, sf.h), sol)) return out;
  split(sol, x, tmp, s);
  s = -s;
  if (!kkt.solve(stack(-sf.c, Vec::Zero(p), Vec::Zero(m)), sol)) return out;
  split(sol, tmp, y, z);
  {
    const double ap = -min_eigen(K, s);
    if (ap >= 0.0) s += (1.0 + ap) * e;
    const double ad = -min_eigen(K, z);
    if (ad >= 0.0) z += (1.0 + ad) * e;
  }
  double tau = 1.0, kappa = 1.0;

  Scaling W;
  IpmOutput best;
  int first_met = -1;
  bool near_optimal = false;
  for (int iter = 0; iter <= opts.max_iterations; ++iter) {
    out.iterations = iter;
    const Vec rx = At * y + Gt * z + sf.c * tau;
    const Vec ry = sf.A * x - sf.b * tau;
    const Vec rz = sf.G * x + s - sf.h * tau;
    const double cx = sf.c.dot(x), by_hz = sf.b.dot(y) + sf.h.dot(z);
    const double rt = kappa + cx + by_hz;

    const double pres = std::max(ry.norm() / (1.0 + bnorm), rz.norm() / (1.0 + hnorm)) / tau;
    const double dres = rx.norm() / (1.0 + cnorm) / tau;
    const double pcost = cx / tau, dcost = -by_hz / tau;
    const double gap = s.dot(z) / (tau * tau);
    out.x = x / tau;
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.gap = gap;

    const double cost_scale = std::max(1.0, std::min(std::abs(pcost), std::abs(dcost)));
    const double loose = kInaccurateFactor * opts.tol;
    near_optimal = pres <= loose && dres <= loose &&
                   (gap <= loose * cost_scale || std::abs(pcost - dcost) <= loose * cost_scale);
    if (pres <= opts.tol && dres <= opts.tol &&
        (gap <= opts.tol * cost_scale || std::abs(pcost - dcost) <= opts.tol * cost_scale)) {
      // Keep going for a few iterations: on degenerate problems the primal point
      // converges like sqrt(gap), so a tighter gap sharpens x considerably.
      out.status = SolveStatus::optimal;
      best = out;
      if (first_met < 0) first_met = iter;
      if (gap <= kPolishGap * opts.tol * cost_scale || iter - first_met >= kPolishIterations) return out;
    } else if (first_met >= 0) {
      return best;
    }
    if (first_met < 0 && kappa > tau) {
      const double dual_ray = (At * y + Gt * z).norm();
      if (by_hz < 0.0 && dual_ray <= opts.tol * -by_hz) {
        out.status = SolveStatus::infeasible;
        return out;
      }
      const double primal_ray = std::max((sf.A * x).norm(), (sf.G * x + s).norm());
      if (cx < 0.0 && primal_ray <= opts.tol * -cx) {
        out.status = SolveStatus::unbounded;
        return out;
      }
    }
    if (iter == opts.max_iterations) break;

    if (!compute_scaling(K, s, z, W) || !kkt.factor(&W)) {
      if (first_met >= 0) return best;
      out.status = near_optimal ? SolveStatus::optimal : SolveStatus::numerical_error;
      return out;
    }
    const double mu = (s.dot(z) + tau * kappa) / (K.degree + 1);

    Vec u1x, u1y, u1z;
    if (!kkt.solve(stack(-sf.c, sf.b, sf.h), sol)) break;
    split(sol, u1x, u1y, u1z);
    const double u1_dot = sf.c.dot(u1x) + sf.b.dot(u1y) + sf.h.dot(u1z);

    auto direction = [&](double eta, const Vec& ds, double dk, Direction& d) {
      Vec wl;
      apply_w(K, W, cone_division(K, W.lambda, ds), wl, false);
      if (!kkt.solve(stack(-eta * rx, -eta * ry, -eta * rz - wl), sol)) return false;
      Vec u2x, u2y, u2z;
      split(sol, u2x, u2y, u2z);
      const double u2_dot = sf.c.dot(u2x) + sf.b.dot(u2y) + sf.h.dot(u2z);
      d.tau = (-eta * rt - dk / tau - u2_dot) / (u1_dot - kappa / tau);
      d.x = u2x + d.tau * u1x;
      d.y = u2y + d.tau * u1y;
      d.z = u2z + d.tau * u1z;
      Vec wdz;
      apply_w(K, W, d.z, wdz, false);
      apply_w(K, W, cone_division(K, W.lambda, ds) - wdz, d.s, false);
      d.kappa = (dk - kappa * d.tau) / tau;
      return d.x.allFinite() && d.s.allFinite() && std::isfinite(d.tau);
    };
    auto step_length = [&](const Direction& d) {
      Vec sd, zd;
      apply_w(K, W, d.s, sd, true);
      apply_w(K, W, d.z, zd, false);
      double a = std::min(max_step(K, W.lambda, sd), max_step(K, W.lambda, zd));
      if (d.tau < 0.0) a = std::min(a, -tau / d.tau);
      if (d.kappa < 0.0) a = std::min(a, -kappa / d.kappa);
      return a;
    };

    // Predictor.
    Direction aff;
    const Vec ll = cone_product(K, W.lambda, W.lambda);
    if (!direction(1.0, -ll, -kappa * tau, aff)) break;
    const double a_aff = std::min(1.0, step_length(aff));
    const double sigma = std::clamp(std::pow(1.0 - a_aff, 3), 0.0, 1.0);

    // Corrector.
    Vec sa, za;
    apply_w(K, W, aff.s, sa, true);
    apply_w(K, W, aff.z, za, false);
    const Vec ds = -ll - cone_product(K, sa, za) + sigma * mu * e;
    const double dk = -kappa * tau - aff.kappa * aff.tau + sigma * mu;
    Direction d;
    if (!direction(1.0 - sigma, ds, dk, d)) break;
    const double alpha = std::min(1.0, kStepFraction * step_length(d));
    if (!(alpha > 1e-12)) break;

    x += alpha * d.x;
    y += alpha * d.y;
    z += alpha * d.z;
    s += alpha * d.s;
    tau += alpha * d.tau;
    kappa += alpha * d.kappa;
  }
  if (first_met >= 0) return best;
  if (near_optimal && out.iterations < opts.max_iterations) out.status = SolveStatus::optimal;
  if (out.status != SolveStatus::optimal)
    out.status = out.iterations >= opts.max_iterations ? SolveStatus::max_iterations : SolveStatus::numerical_error;
  return out;
}

}  // namespace uavmec::detail
