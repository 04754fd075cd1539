#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "solver/standard_form.hpp"
#include "uavmec/common.hpp"

namespace uavmec::detail {

using Vec = Eigen::VectorXd;

struct ConeLayout {
  int orthant = 0;
  std::vector<int> dim;
  std::vector<int> offset;
  int m = 0;
  int degree = 0;

  explicit ConeLayout(const StandardForm& sf) : ConeLayout(sf.orthant, sf.soc) {}
  ConeLayout(int orthant_dim, std::vector<int> soc_dims) : orthant(orthant_dim), dim(std::move(soc_dims)) {
    int o = orthant;
    for (int d : dim) {
      offset.push_back(o);
      o += d;
    }
    m = o;
    degree = orthant + static_cast<int>(dim.size());
  }
};

/// Nesterov-Todd scaling W (symmetric, W z = W^{-1} s = lambda).
struct Scaling {
  Vec w;                 // orthant: sqrt(s / z)
  std::vector<double> eta;
  std::vector<Vec> wbar;  // J-normalised scaling point per cone
  Vec lambda;
};

inline double jnorm2(const Vec& u, int off, int d) {
  return u[off] * u[off] - u.segment(off + 1, d - 1).squaredNorm();
}

inline void apply_w(const ConeLayout& K, const Scaling& W, const Vec& v, Vec& out, bool inverse) {
  out.resize(K.m);
  for (int i = 0; i < K.orthant; ++i) out[i] = inverse ? v[i] / W.w[i] : v[i] * W.w[i];
  for (std::size_t k = 0; k < K.dim.size(); ++k) {
    const int o = K.offset[k], d = K.dim[k];
    const Vec& wb = W.wbar[k];
    const double w0 = wb[0];
    const auto w1 = wb.tail(d - 1);
    const double v0 = v[o];
    const auto v1 = v.segment(o + 1, d - 1);
    const double w1v1 = w1.dot(v1);
    if (!inverse) {
      out[o] = W.eta[k] * (w0 * v0 + w1v1);
      out.segment(o + 1, d - 1) = W.eta[k] * (v1 + (w1v1 / (1.0 + w0) + v0) * w1);
    } else {
      out[o] = (w0 * v0 - w1v1) / W.eta[k];
      out.segment(o + 1, d - 1) = (v1 + (w1v1 / (1.0 + w0) - v0) * w1) / W.eta[k];
    }
  }
}

inline bool compute_scaling(const ConeLayout& K, const Vec& s, const Vec& z, Scaling& W) {
  W.w.resize(K.orthant);
  for (int i = 0; i < K.orthant; ++i) {
    if (!(s[i] > 0.0 && z[i] > 0.0)) return false;
    W.w[i] = std::sqrt(s[i] / z[i]);
  }
  W.eta.assign(K.dim.size(), 0.0);
  W.wbar.resize(K.dim.size());
  for (std::size_t k = 0; k < K.dim.size(); ++k) {
    const int o = K.offset[k], d = K.dim[k];
    const double sres = jnorm2(s, o, d), zres = jnorm2(z, o, d);
    if (!(sres > 0.0 && zres > 0.0 && s[o] > 0.0 && z[o] > 0.0)) return false;
    const double sn = std::sqrt(sres), zn = std::sqrt(zres);
    const Vec sb = s.segment(o, d) / sn;
    const Vec zb = z.segment(o, d) / zn;
    const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
    Vec wb(d);
    wb[0] = (sb[0] + zb[0]) / (2.0 * gamma);
    wb.tail(d - 1) = (sb.tail(d - 1) - zb.tail(d - 1)) / (2.0 * gamma);
    W.wbar[k] = wb;
    W.eta[k] = std::sqrt(sn / zn);
  }
  apply_w(K, W, z, W.lambda, false);
  return W.lambda.allFinite();
}

/// u o v (Jordan product).
inline Vec cone_product(const ConeLayout& K, const Vec& u, const Vec& v) {
  Vec out(K.m);
  for (int i = 0; i < K.orthant; ++i) out[i] = u[i] * v[i];
  for (std::size_t k = 0; k < K.dim.size(); ++k) {
    const int o = K.offset[k], d = K.dim[k];
    out[o] = u.segment(o, d).dot(v.segment(o, d));
    out.segment(o + 1, d - 1) = u[o] * v.segment(o + 1, d - 1) + v[o] * u.segment(o + 1, d - 1);
  }
  return out;
}

/// x with lambda o x = v.
inline Vec cone_division(const ConeLayout& K, const Vec& lambda, const Vec& v) {
  Vec out(K.m);
  for (int i = 0; i < K.orthant; ++i) out[i] = v[i] / lambda[i];
  for (std::size_t k = 0; k < K.dim.size(); ++k) {
    const int o = K.offset[k], d = K.dim[k];
    const double l0 = lambda[o];
    const auto l1 = lambda.segment(o + 1, d - 1);
    const double x0 = (l0 * v[o] - l1.dot(v.segment(o + 1, d - 1))) / jnorm2(lambda, o, d);
    out[o] = x0;
    out.segment(o + 1, d - 1) = (v.segment(o + 1, d - 1) - x0 * l1) / l0;
  }
  return out;
}

inline Vec identity_element(const ConeLayout& K) {
  Vec e = Vec::Zero(K.m);
  e.head(K.orthant).setOnes();
  for (int o : K.offset) e[o] = 1.0;
  return e;
}

/// Largest alpha with u + alpha d in the cone, for u strictly interior.
inline double max_step(const ConeLayout& K, const Vec& u, const Vec& d) {
  double alpha = kInf;
  for (int i = 0; i < K.orthant; ++i)
    if (d[i] < 0.0) alpha = std::min(alpha, -u[i] / d[i]);
  for (std::size_t k = 0; k < K.dim.size(); ++k) {
    const int o = K.offset[k], n = K.dim[k];
    const double un = std::sqrt(std::max(jnorm2(u, o, n), 1e-300));
    const double b0 = u[o] / un;
    const auto b1 = u.segment(o + 1, n - 1) / un;
    const double d0 = d[o];
    const auto d1 = d.segment(o + 1, n - 1);
    const double bd = b0 * d0 - b1.dot(d1);
    const double factor = (bd + d0) / (b0 + 1.0);
    const double rho0 = bd / un;
    const double rho1 = (d1 - factor * b1).norm() / un;
    const double sigma = rho1 - rho0;
    if (sigma > 0.0) alpha = std::min(alpha, 1.0 / sigma);
  }
  return alpha;
}

/// Smallest "eigenvalue" of u in the cone; negative when u is outside.
inline double min_eigen(const ConeLayout& K, const Vec& u) {
  double v = kInf;
  for (int i = 0; i < K.orthant; ++i) v = std::min(v, u[i]);
  for (std::size_t k = 0; k < K.dim.size(); ++k) {
    const int o = K.offset[k], d = K.dim[k];
    v = std::min(v, u[o] - u.segment(o + 1, d - 1).norm());
  }
  return v;
}

}  // namespace uavmec::detail
