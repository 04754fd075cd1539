#include <cmath>

#include "uavmec/drl.hpp"

namespace uavmec {

namespace {

constexpr double kLayerNormEps = 1e-5;

int layer_params(const LayerSpec& l) { return l.out * l.in + l.out + (l.layer_norm ? 2 * l.out : 0); }

using ConstMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using Map = Eigen::Map<Eigen::MatrixXd>;
using Vec = Eigen::Map<Eigen::VectorXd>;

}  // namespace

Mlp::Mlp(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    if (l.in <= 0 || l.out <= 0) throw ConfigError("mlp: layer sizes must be positive");
    if (i > 0 && layers_[i - 1].out != l.in) throw ConfigError("mlp: consecutive layer sizes do not chain");
    offsets_.push_back(num_params_);
    num_params_ += layer_params(l);
  }
}

Mlp Mlp::stack(int in, const std::vector<int>& hidden, int out, bool layer_norm, Activation output) {
  std::vector<LayerSpec> ls;
  int prev = in;
  for (int h : hidden) {
    ls.push_back({prev, h, layer_norm, Activation::relu});
    prev = h;
  }
  ls.push_back({prev, out, false, output});
  return Mlp(std::move(ls));
}

void Mlp::initialise(double* theta, Rng& rng, double final_scale) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    const bool last = i + 1 == layers_.size();
    const double bound = last ? final_scale : 1.0 / std::sqrt(static_cast<double>(l.in));
    std::uniform_real_distribution<double> U(-bound, bound);
    double* p = theta + offsets_[i];
    for (int k = 0; k < l.out * l.in + l.out; ++k) p[k] = U(rng);
    if (l.layer_norm) {
      double* g = p + l.out * l.in + l.out;
      for (int k = 0; k < l.out; ++k) {
        g[k] = 1.0;
        g[l.out + k] = 0.0;
      }
    }
  }
}

Eigen::MatrixXd Mlp::forward(const double* theta, const Eigen::MatrixXd& x, Tape* tape) const {
  if (x.rows() != input_dim()) throw ConfigError("mlp: input dimension mismatch");
  if (tape) *tape = Tape{};
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    const double* p = theta + offsets_[i];
    const ConstMap W(p, l.out, l.in);
    const ConstVec b(p + l.out * l.in, l.out);
    if (tape) tape->input.push_back(h);
    Eigen::MatrixXd z = (W * h).colwise() + b;
    if (l.layer_norm) {
      const ConstVec g(p + l.out * l.in + l.out, l.out);
      const ConstVec beta(p + l.out * l.in + 2 * l.out, l.out);
      const Eigen::RowVectorXd mean = z.colwise().mean();
      z.rowwise() -= mean;
      const Eigen::RowVectorXd inv = ((z.array().square().colwise().sum() / l.out) + kLayerNormEps).rsqrt().matrix();
      z = z * inv.asDiagonal();
      if (tape) {
        tape->normalised.push_back(z);
        tape->inv_std.push_back(inv);
      }
      z = (g.asDiagonal() * z).colwise() + beta;
    } else if (tape) {
      tape->normalised.emplace_back();
      tape->inv_std.emplace_back();
    }
    switch (l.activation) {
      case Activation::identity:
        break;
      case Activation::relu:
        z = z.cwiseMax(0.0);
        break;
      case Activation::sigmoid:
        z = (1.0 + (-z.array()).exp()).inverse().matrix();
        break;
    }
    if (tape) tape->output.push_back(z);
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd Mlp::backward(const double* theta, const Tape& tape, const Eigen::MatrixXd& dy, double* grad) const {
  Eigen::MatrixXd d = dy;
  for (std::size_t ii = layers_.size(); ii-- > 0;) {
    const LayerSpec& l = layers_[ii];
    const double* p = theta + offsets_[ii];
    double* gp = grad + offsets_[ii];
    const Eigen::MatrixXd& y = tape.output[ii];
    switch (l.activation) {
      case Activation::identity:
        break;
      case Activation::relu:
        d = (y.array() > 0.0).select(d, 0.0);
        break;
      case Activation::sigmoid:
        d = (d.array() * y.array() * (1.0 - y.array())).matrix();
        break;
    }
    if (l.layer_norm) {
      const ConstVec g(p + l.out * l.in + l.out, l.out);
      const Eigen::MatrixXd& xhat = tape.normalised[ii];
      Vec(gp + l.out * l.in + l.out, l.out) += (d.array() * xhat.array()).rowwise().sum().matrix();
      Vec(gp + l.out * l.in + 2 * l.out, l.out) += d.rowwise().sum();
      // d xhat -> d z through the per-column standardisation.
      const Eigen::MatrixXd dxhat = g.asDiagonal() * d;
      const Eigen::RowVectorXd mean_d = dxhat.colwise().mean();
      const Eigen::RowVectorXd mean_dx = (dxhat.array() * xhat.array()).colwise().mean().matrix();
      Eigen::MatrixXd dz = dxhat;
      dz.rowwise() -= mean_d;
      dz -= xhat * mean_dx.asDiagonal();
      d = dz * tape.inv_std[ii].asDiagonal();
    }
    const Eigen::MatrixXd& x = tape.input[ii];
    Map(gp, l.out, l.in) += d * x.transpose();
    Vec(gp + l.out * l.in, l.out) += d.rowwise().sum();
    d = ConstMap(p, l.out, l.in).transpose() * d;
  }
  return d;
}

Actor::Actor(int state_dim, int action_dim, const std::vector<int>& hidden)
    : net_(Mlp::stack(state_dim, hidden, action_dim, true, Activation::sigmoid)) {}

Eigen::MatrixXd Actor::forward(const Eigen::VectorXd& theta, const Eigen::MatrixXd& states, Mlp::Tape* tape) const {
  return net_.forward(theta.data(), states, tape);
}

Critic::Critic(int state_dim, int action_dim, const std::vector<int>& hidden) {
  if (hidden.empty()) throw ConfigError("critic: needs at least one hidden size");
  const int w = hidden.front();
  state_ = Mlp({{state_dim, w, false, Activation::relu}});
  action_ = Mlp({{action_dim, w, false, Activation::relu}});
  state_width_ = w;
  head_ = Mlp::stack(2 * w, std::vector<int>(hidden.begin() + 1, hidden.end()), 1, true, Activation::identity);
}

void Critic::initialise(Eigen::VectorXd& theta, Rng& rng) const {
  theta.resize(num_params());
  state_.initialise(theta.data(), rng, 1.0 / std::sqrt(static_cast<double>(state_.input_dim())));
  action_.initialise(theta.data() + state_.num_params(), rng, 1.0 / std::sqrt(static_cast<double>(action_.input_dim())));
  head_.initialise(theta.data() + state_.num_params() + action_.num_params(), rng);
}

Eigen::RowVectorXd Critic::forward(const Eigen::VectorXd& theta, const Eigen::MatrixXd& states,
                                   const Eigen::MatrixXd& actions, Tape* tape) const {
  const double* p = theta.data();
  const Eigen::MatrixXd hs = state_.forward(p, states, tape ? &tape->state : nullptr);
  const Eigen::MatrixXd ha = action_.forward(p + state_.num_params(), actions, tape ? &tape->action : nullptr);
  Eigen::MatrixXd joint(hs.rows() + ha.rows(), hs.cols());
  joint << hs, ha;
  return head_.forward(p + state_.num_params() + action_.num_params(), joint, tape ? &tape->head : nullptr);
}

void Critic::backward(const Eigen::VectorXd& theta, const Tape& tape, const Eigen::RowVectorXd& dq,
                      Eigen::VectorXd& grad, Eigen::MatrixXd* d_actions) const {
  if (grad.size() != num_params()) grad = Eigen::VectorXd::Zero(num_params());
  const double* p = theta.data();
  double* g = grad.data();
  const int ns = state_.num_params(), na = action_.num_params();
  const Eigen::MatrixXd dj = head_.backward(p + ns + na, tape.head, dq, g + ns + na);
  state_.backward(p, tape.state, dj.topRows(state_width_), g);
  const Eigen::MatrixXd da = action_.backward(p + ns, tape.action, dj.bottomRows(dj.rows() - state_width_), g + ns);
  if (d_actions) *d_actions = da;
}

Adam::Adam(int n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

void Adam::step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = b1_ * m_ + (1.0 - b1_) * grad;
  v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double den = a.norm() + b.norm();
  return den == 0.0 ? 0.0 : (a - b).norm() / den;
}

}  // namespace uavmec
