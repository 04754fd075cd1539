#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "uavmec/channel.hpp"
#include "uavmec/common.hpp"

namespace uavmec {

// ---------------------------------------------------------------------------
// Multilayer perceptron with hand-written reverse mode. Parameters live in an
// external flat vector so optimisers and target copies work on plain vectors.

enum class Activation { identity, relu, sigmoid };

struct LayerSpec {
  int in = 0;
  int out = 0;
  bool layer_norm = false;
  Activation activation = Activation::identity;
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<LayerSpec> layers);

  /// Linear -> LayerNorm -> activation per hidden size, then a final linear layer
  /// with `output` activation.
  static Mlp stack(int in, const std::vector<int>& hidden, int out, bool layer_norm, Activation output);

  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  int num_params() const { return num_params_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  /// Uniform fan-in initialisation; LayerNorm gains 1 and shifts 0.
  void initialise(double* theta, Rng& rng, double final_scale = 3e-3) const;

  /// Values kept by forward() for the backward pass, one entry per layer.
  struct Tape {
    std::vector<Eigen::MatrixXd> input;
    std::vector<Eigen::MatrixXd> normalised;
    std::vector<Eigen::RowVectorXd> inv_std;
    std::vector<Eigen::MatrixXd> output;
  };

  /// Columns of `x` are samples.
  Eigen::MatrixXd forward(const double* theta, const Eigen::MatrixXd& x, Tape* tape = nullptr) const;
  /// Accumulates dL/dtheta into `grad` and returns dL/dx for upstream gradient `dy`.
  Eigen::MatrixXd backward(const double* theta, const Tape& tape, const Eigen::MatrixXd& dy, double* grad) const;

 private:
  std::vector<LayerSpec> layers_;
  std::vector<int> offsets_;
  int num_params_ = 0;
};

/// Sigmoid-output policy network.
class Actor {
 public:
  Actor() = default;
  Actor(int state_dim, int action_dim, const std::vector<int>& hidden);

  const Mlp& net() const { return net_; }
  int num_params() const { return net_.num_params(); }
  Eigen::MatrixXd forward(const Eigen::VectorXd& theta, const Eigen::MatrixXd& states, Mlp::Tape* tape = nullptr) const;

 private:
  Mlp net_;
};

/// Dual-stream critic: state and action pass through separate linear layers,
/// are concatenated and mapped to a scalar by shared hidden layers.
class Critic {
 public:
  Critic() = default;
  Critic(int state_dim, int action_dim, const std::vector<int>& hidden);

  int num_params() const { return state_.num_params() + action_.num_params() + head_.num_params(); }
  void initialise(Eigen::VectorXd& theta, Rng& rng) const;

  struct Tape {
    Mlp::Tape state, action, head;
  };
  /// Row vector of Q values, one per column of `states` / `actions`.
  Eigen::RowVectorXd forward(const Eigen::VectorXd& theta, const Eigen::MatrixXd& states,
                             const Eigen::MatrixXd& actions, Tape* tape = nullptr) const;
  /// Accumulates dL/dtheta for upstream dL/dQ; optionally returns dL/dactions.
  void backward(const Eigen::VectorXd& theta, const Tape& tape, const Eigen::RowVectorXd& dq, Eigen::VectorXd& grad,
                Eigen::MatrixXd* d_actions = nullptr) const;

 private:
  Mlp state_, action_, head_;
  int state_width_ = 0;
};

class Adam {
 public:
  Adam() = default;
  Adam(int n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  /// Descent step on `theta` along `grad`.
  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad);
  double learning_rate() const { return lr_; }

 private:
  double lr_ = 1e-3, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

// ---------------------------------------------------------------------------
// DDPG

struct AgentConfig {
  int num_vehicles = 50;
  std::vector<int> actor_hidden{256, 256};
  std::vector<int> critic_hidden{256, 256};
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double gamma = 0.95;
  double tau = 0.005;
  double sigma_explore = 0.1;
  double sigma_decay = 0.999;
  int batch_size = 128;
  std::size_t buffer_capacity = 100000;
  std::uint64_t seed = 1;

  int state_dim() const { return 4 * num_vehicles; }
  int action_dim() const { return 2 * num_vehicles; }
  void validate() const;
  /// Fingerprint of every shape-determining field; stored in checkpoints.
  std::uint64_t hash() const;
};

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool terminal = false;
};

/// FIFO ring buffer with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000);
  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Oldest-first view index.
  const Transition& at(std::size_t i) const;
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> data_;
};

struct UpdateStats {
  double critic_loss = 0.0;
  double mean_q = 0.0;
  bool skipped = false;
};

class DdpgAgent {
 public:
  explicit DdpgAgent(AgentConfig cfg);

  const AgentConfig& config() const { return cfg_; }
  Eigen::VectorXd act(const Eigen::VectorXd& state, bool explore);
  /// y_i = r_i + gamma Q'(s', mu'(s')), or r_i for terminal transitions.
  Eigen::RowVectorXd td_targets(const std::vector<const Transition*>& batch) const;
  /// One critic step, one actor step and a soft update of both targets.
  UpdateStats update(const std::vector<const Transition*>& batch);
  /// Samples a batch when the buffer holds at least batch_size transitions.
  std::optional<UpdateStats> train_step();
  void end_episode();
  double sigma() const { return sigma_; }

  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }

  const Actor& actor() const { return actor_; }
  const Critic& critic() const { return critic_; }
  Eigen::VectorXd& actor_params() { return actor_theta_; }
  Eigen::VectorXd& critic_params() { return critic_theta_; }
  Eigen::VectorXd& actor_target_params() { return actor_target_; }
  Eigen::VectorXd& critic_target_params() { return critic_target_; }
  const Eigen::VectorXd& actor_params() const { return actor_theta_; }
  const Eigen::VectorXd& critic_params() const { return critic_theta_; }

  /// Critic MSE gradient on a batch against fixed targets.
  double critic_loss_and_grad(const std::vector<const Transition*>& batch, const Eigen::RowVectorXd& targets,
                              Eigen::VectorXd* grad) const;
  /// Gradient of -mean Q(s, mu(s)) with respect to the actor parameters.
  double actor_loss_and_grad(const std::vector<const Transition*>& batch, Eigen::VectorXd* grad) const;

  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  /// Throws ConfigError on a bad magic, version or config hash.
  void load(std::istream& in);
  void load(const std::string& path);

 private:
  AgentConfig cfg_;
  Rng rng_;
  Actor actor_;
  Critic critic_;
  Eigen::VectorXd actor_theta_, critic_theta_, actor_target_, critic_target_;
  Adam actor_opt_, critic_opt_;
  ReplayBuffer buffer_;
  double sigma_;
};

/// target <- tau * online + (1 - tau) * target, elementwise.
void soft_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double tau);

inline double compute_reward(double lp_cost) { return -lp_cost; }

/// Relative error |a - b| / (|a| + |b|), 0 when both vanish.
double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// ---------------------------------------------------------------------------
// State and action mapping

struct VehicleObservation {
  double load_bits = 0.0;
  double pathloss_v2i_db = 0.0;
  /// Mean G2A path loss to the serving UAV; empty when uncovered.
  std::optional<double> pathloss_v2u_db;
};

/// Per vehicle (load / 2 Mb, V2I quality, V2U quality, covered) with quality
/// (150 - path loss) / 100, all clamped to [0, 1].
Eigen::VectorXd build_state(const std::vector<VehicleObservation>& obs);

enum class LinkKind { v2i, v2u };
std::string_view to_string(LinkKind k);

struct LinkAllocation {
  bool active = false;
  /// Active but squeezed out when links outnumber RBs.
  bool dropped = false;
  std::vector<int> rbs;
  double power_dbm = 0.0;

  int rb_count() const { return static_cast<int>(rbs.size()); }
};

struct VehicleAllocation {
  int vehicle = 0;
  LinkAllocation v2i;
  LinkAllocation v2u;

  LinkAllocation& link(LinkKind k) { return k == LinkKind::v2i ? v2i : v2u; }
  const LinkAllocation& link(LinkKind k) const { return k == LinkKind::v2i ? v2i : v2u; }
};

struct ResourceAllocation {
  int total_rbs = 0;
  std::vector<VehicleAllocation> vehicles;
  /// True when some active link had to be dropped.
  bool overcommitted = false;

  int used_rbs() const;
  /// Index into `vehicles` for a vehicle id, or -1.
  int index_of(int vehicle) const;
};

/// Empty when every invariant holds; otherwise one message per violation.
std::vector<std::string> check_allocation(const ResourceAllocation& a, double p_min_dbm, double p_max_dbm);

struct LinkContext {
  int vehicle = 0;
  bool v2i_active = false;
  bool v2u_active = false;
  /// Linear gain per RB index for each link (size total_rbs, or empty for flat).
  std::vector<double> v2i_gain;
  std::vector<double> v2u_gain;
};

/// Action layout: [P_norm_0, r_f_0, P_norm_1, r_f_1, ...]. Both links of a vehicle
/// share its power and priority weight.
ResourceAllocation map_action_to_allocation(const Eigen::VectorXd& action, const std::vector<LinkContext>& links,
                                            const ChannelConfig& channel);

}  // namespace uavmec
