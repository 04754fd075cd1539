#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "uavmec/drl.hpp"

namespace uavmec {

void AgentConfig::validate() const {
  if (num_vehicles <= 0) throw ConfigError("agent.num_vehicles must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("agent.gamma must lie in [0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("agent.tau must lie in (0, 1]");
  if (!(actor_lr > 0.0 && critic_lr > 0.0)) throw ConfigError("agent learning rates must be positive");
  if (sigma_explore < 0.0 || !(sigma_decay > 0.0 && sigma_decay <= 1.0))
    throw ConfigError("agent.sigma_explore >= 0 and sigma_decay in (0, 1] required");
  if (batch_size <= 0 || buffer_capacity == 0) throw ConfigError("agent.batch_size and buffer_capacity must be positive");
  if (actor_hidden.empty() || critic_hidden.empty()) throw ConfigError("agent hidden sizes must be non-empty");
  for (int h : actor_hidden)
    if (h <= 0) throw ConfigError("agent.actor_hidden entries must be positive");
  for (int h : critic_hidden)
    if (h <= 0) throw ConfigError("agent.critic_hidden entries must be positive");
}

std::uint64_t AgentConfig::hash() const {
  std::ostringstream s;
  s << "M=" << num_vehicles << ";a=";
  for (int h : actor_hidden) s << h << ',';
  s << ";c=";
  for (int h : critic_hidden) s << h << ',';
  return fnv1a64(s.str());
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    return;
  }
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("replay buffer index");
  return data_[(head_ + i) % data_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (data_.empty()) throw std::out_of_range("sampling an empty replay buffer");
  std::uniform_int_distribution<std::size_t> U(0, data_.size() - 1);
  std::vector<const Transition*> out(n);
  for (auto& p : out) p = &data_[U(rng)];
  return out;
}

void soft_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double tau) {
  target = tau * online + (1.0 - tau) * target;
}

namespace {

Eigen::MatrixXd stack_states(const std::vector<const Transition*>& b, bool next) {
  Eigen::MatrixXd m(b.front()->state.size(), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = next ? b[i]->next_state : b[i]->state;
  return m;
}

Eigen::MatrixXd stack_actions(const std::vector<const Transition*>& b) {
  Eigen::MatrixXd m(b.front()->action.size(), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = b[i]->action;
  return m;
}

constexpr std::array<char, 8> kMagic{'U', 'A', 'V', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

void write_vec(std::ostream& out, const Eigen::VectorXd& v) {
  const std::uint64_t n = static_cast<std::uint64_t>(v.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_vec(std::istream& in, Eigen::VectorXd& v) {
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || n != static_cast<std::uint64_t>(v.size())) throw ConfigError("checkpoint: parameter count mismatch");
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ConfigError("checkpoint: truncated parameter block");
}

}  // namespace

DdpgAgent::DdpgAgent(AgentConfig cfg)
    : cfg_(std::move(cfg)), rng_(cfg_.seed), buffer_(cfg_.buffer_capacity), sigma_(cfg_.sigma_explore) {
  cfg_.validate();
  actor_ = Actor(cfg_.state_dim(), cfg_.action_dim(), cfg_.actor_hidden);
  critic_ = Critic(cfg_.state_dim(), cfg_.action_dim(), cfg_.critic_hidden);
  actor_theta_.resize(actor_.num_params());
  actor_.net().initialise(actor_theta_.data(), rng_);
  critic_.initialise(critic_theta_, rng_);
  actor_target_ = actor_theta_;
  critic_target_ = critic_theta_;
  actor_opt_ = Adam(actor_.num_params(), cfg_.actor_lr);
  critic_opt_ = Adam(critic_.num_params(), cfg_.critic_lr);
}

Eigen::VectorXd DdpgAgent::act(const Eigen::VectorXd& state, bool explore) {
  Eigen::VectorXd a = actor_.forward(actor_theta_, state).col(0);
  if (explore && sigma_ > 0.0) {
    std::normal_distribution<double> N(0.0, sigma_);
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = std::clamp(a[i] + N(rng_), 0.0, 1.0);
  }
  return a;
}

Eigen::RowVectorXd DdpgAgent::td_targets(const std::vector<const Transition*>& batch) const {
  const Eigen::MatrixXd s2 = stack_states(batch, true);
  const Eigen::MatrixXd a2 = actor_.forward(actor_target_, s2);
  const Eigen::RowVectorXd q2 = critic_.forward(critic_target_, s2, a2);
  Eigen::RowVectorXd y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    y[k] = batch[i]->terminal ? batch[i]->reward : batch[i]->reward + cfg_.gamma * q2[k];
  }
  return y;
}

double DdpgAgent::critic_loss_and_grad(const std::vector<const Transition*>& batch, const Eigen::RowVectorXd& targets,
                                       Eigen::VectorXd* grad) const {
  Critic::Tape tape;
  const Eigen::RowVectorXd q =
      critic_.forward(critic_theta_, stack_states(batch, false), stack_actions(batch), grad ? &tape : nullptr);
  const Eigen::RowVectorXd err = q - targets;
  const double n = static_cast<double>(batch.size());
  if (grad) {
    *grad = Eigen::VectorXd::Zero(critic_.num_params());
    critic_.backward(critic_theta_, tape, (2.0 / n) * err, *grad);
  }
  return err.squaredNorm() / n;
}

double DdpgAgent::actor_loss_and_grad(const std::vector<const Transition*>& batch, Eigen::VectorXd* grad) const {
  const Eigen::MatrixXd s = stack_states(batch, false);
  Mlp::Tape atape;
  const Eigen::MatrixXd a = actor_.forward(actor_theta_, s, grad ? &atape : nullptr);
  Critic::Tape ctape;
  const Eigen::RowVectorXd q = critic_.forward(critic_theta_, s, a, grad ? &ctape : nullptr);
  const double n = static_cast<double>(batch.size());
  if (grad) {
    Eigen::VectorXd scratch = Eigen::VectorXd::Zero(critic_.num_params());
    Eigen::MatrixXd da;
    critic_.backward(critic_theta_, ctape, Eigen::RowVectorXd::Constant(q.size(), -1.0 / n), scratch, &da);
    *grad = Eigen::VectorXd::Zero(actor_.num_params());
    actor_.net().backward(actor_theta_.data(), atape, da, grad->data());
  }
  return -q.mean();
}

UpdateStats DdpgAgent::update(const std::vector<const Transition*>& batch) {
  UpdateStats st;
  const Eigen::RowVectorXd y = td_targets(batch);
  Eigen::VectorXd gc;
  st.critic_loss = critic_loss_and_grad(batch, y, &gc);
  Eigen::VectorXd ga;
  if (gc.allFinite()) {
    critic_opt_.step(critic_theta_, gc);
    st.mean_q = -actor_loss_and_grad(batch, &ga);
  }
  if (!gc.allFinite() || !ga.allFinite()) {
    std::clog << "[ddpg] non-finite gradient, update skipped\n";
    st.skipped = true;
    return st;
  }
  actor_opt_.step(actor_theta_, ga);
  soft_update(actor_target_, actor_theta_, cfg_.tau);
  soft_update(critic_target_, critic_theta_, cfg_.tau);
  return st;
}

std::optional<UpdateStats> DdpgAgent::train_step() {
  if (buffer_.size() < static_cast<std::size_t>(cfg_.batch_size)) return std::nullopt;
  return update(buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_));
}

void DdpgAgent::end_episode() { sigma_ *= cfg_.sigma_decay; }

void DdpgAgent::save(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  const std::uint32_t version = kCheckpointVersion;
  const std::uint64_t h = cfg_.hash();
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&h), sizeof h);
  write_vec(out, actor_theta_);
  write_vec(out, critic_theta_);
  write_vec(out, actor_target_);
  write_vec(out, critic_target_);
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

void DdpgAgent::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  save(f);
}

void DdpgAgent::load(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ConfigError("checkpoint: bad magic");
  std::uint32_t version = 0;
  std::uint64_t h = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  if (!in || version != kCheckpointVersion) throw ConfigError("checkpoint: unsupported version");
  if (h != cfg_.hash()) throw ConfigError("checkpoint: network configuration differs");
  Eigen::VectorXd a = actor_theta_, c = critic_theta_, at = actor_target_, ct = critic_target_;
  read_vec(in, a);
  read_vec(in, c);
  read_vec(in, at);
  read_vec(in, ct);
  actor_theta_ = std::move(a);
  critic_theta_ = std::move(c);
  actor_target_ = std::move(at);
  critic_target_ = std::move(ct);
}

void DdpgAgent::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("checkpoint: cannot open " + path);
  load(f);
}

}  // namespace uavmec
