#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "uavmec/drl.hpp"

using namespace uavmec;

namespace {

// Central differences of a scalar function over a flat parameter vector.
Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                  double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = U(rng);
  return m;
}

AgentConfig small_config(int vehicles = 2) {
  AgentConfig c;
  c.num_vehicles = vehicles;
  c.actor_hidden = {6, 5};
  c.critic_hidden = {6, 5};
  c.batch_size = 8;
  c.buffer_capacity = 64;
  c.seed = 11;
  return c;
}

std::vector<Transition> synthetic_batch(const AgentConfig& c, int n, Rng& rng) {
  std::vector<Transition> out;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    Transition t;
    t.state = random_matrix(c.state_dim(), 1, rng, 0.0, 1.0).col(0);
    t.action = random_matrix(c.action_dim(), 1, rng, 0.0, 1.0).col(0);
    t.next_state = random_matrix(c.state_dim(), 1, rng, 0.0, 1.0).col(0);
    t.reward = -3.0 * U(rng);
    t.terminal = i % 4 == 3;
    out.push_back(t);
  }
  return out;
}

std::vector<const Transition*> pointers(const std::vector<Transition>& v) {
  std::vector<const Transition*> p;
  for (const Transition& t : v) p.push_back(&t);
  return p;
}

ChannelConfig channel() { return ChannelConfig{}; }

LinkContext ctx(int id, bool v2i, bool v2u) {
  LinkContext c;
  c.vehicle = id;
  c.v2i_active = v2i;
  c.v2u_active = v2u;
  return c;
}

}  // namespace

TEST_SUITE("drl") {
  TEST_CASE("mlp backward matches central differences") {
    Rng rng(3);
    for (bool ln : {false, true})
      for (Activation out : {Activation::identity, Activation::sigmoid}) {
        const Mlp net = Mlp::stack(5, {7, 4}, 3, ln, out);
        Eigen::VectorXd theta(net.num_params());
        net.initialise(theta.data(), rng, 0.5);
        if (ln) theta += 0.1 * random_matrix(theta.size(), 1, rng).col(0);
        const Eigen::MatrixXd x = random_matrix(5, 4, rng);
        const Eigen::MatrixXd w = random_matrix(3, 4, rng);
        auto loss = [&](const Eigen::VectorXd& th) { return (net.forward(th.data(), x).array() * w.array()).sum(); };
        Mlp::Tape tape;
        net.forward(theta.data(), x, &tape);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
        const Eigen::MatrixXd dx = net.backward(theta.data(), tape, w, g.data());
        CHECK(relative_error(g, finite_difference(loss, theta)) < 1e-4);

        auto loss_x = [&](const Eigen::VectorXd& xv) {
          const Eigen::MatrixXd xm = Eigen::Map<const Eigen::MatrixXd>(xv.data(), 5, 4);
          return (net.forward(theta.data(), xm).array() * w.array()).sum();
        };
        const Eigen::VectorXd xflat = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
        const Eigen::VectorXd dxflat = Eigen::Map<const Eigen::VectorXd>(dx.data(), dx.size());
        CHECK(relative_error(dxflat, finite_difference(loss_x, xflat)) < 1e-4);
      }
  }

  TEST_CASE("actor with zero parameters outputs one half") {
    const Actor a(8, 4, {16, 16});
    const Eigen::VectorXd theta = Eigen::VectorXd::Zero(a.num_params());
    Rng rng(1);
    const Eigen::MatrixXd y = a.forward(theta, random_matrix(8, 3, rng));
    CHECK(y.rows() == 4);
    for (Eigen::Index i = 0; i < y.size(); ++i) CHECK(y.data()[i] == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("actor outputs stay strictly inside the unit interval") {
    const Actor a(8, 4, {16, 16});
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd theta = random_matrix(a.num_params(), 1, rng, -2.0, 2.0).col(0);
      const Eigen::MatrixXd y = a.forward(theta, random_matrix(8, 100, rng, -3.0, 3.0));
      CHECK(y.minCoeff() > 0.0);
      CHECK(y.maxCoeff() < 1.0);
    }
  }

  TEST_CASE("critic with zero weights returns its output bias") {
    const Critic c(8, 4, {6, 5});
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(c.num_params());
    theta[theta.size() - 1] = 0.75;
    Rng rng(2);
    const Eigen::RowVectorXd q = c.forward(theta, random_matrix(8, 5, rng), random_matrix(4, 5, rng));
    CHECK(q.size() == 5);
    for (Eigen::Index i = 0; i < q.size(); ++i) CHECK(q[i] == doctest::Approx(0.75));
  }

  TEST_CASE("critic gradients match central differences") {
    const Critic c(6, 3, {5, 4});
    Rng rng(9);
    Eigen::VectorXd theta;
    c.initialise(theta, rng);
    theta += 0.2 * random_matrix(theta.size(), 1, rng).col(0);
    const Eigen::MatrixXd s = random_matrix(6, 5, rng);
    const Eigen::MatrixXd a = random_matrix(3, 5, rng, 0.0, 1.0);
    const Eigen::RowVectorXd w = random_matrix(1, 5, rng).row(0);
    auto loss = [&](const Eigen::VectorXd& th) { return c.forward(th, s, a).dot(w); };
    Critic::Tape tape;
    c.forward(theta, s, a, &tape);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(c.num_params());
    Eigen::MatrixXd da;
    c.backward(theta, tape, w, g, &da);
    CHECK(relative_error(g, finite_difference(loss, theta)) < 1e-4);

    auto loss_a = [&](const Eigen::VectorXd& av) {
      return c.forward(theta, s, Eigen::Map<const Eigen::MatrixXd>(av.data(), 3, 5)).dot(w);
    };
    const Eigen::VectorXd aflat = Eigen::Map<const Eigen::VectorXd>(a.data(), a.size());
    CHECK(relative_error(Eigen::Map<const Eigen::VectorXd>(da.data(), da.size()), finite_difference(loss_a, aflat)) <
          1e-4);
  }

  TEST_CASE("critic swaps of identical vehicle blocks keep shapes") {
    const AgentConfig cfg = small_config(2);
    const DdpgAgent agent(cfg);
    Eigen::VectorXd s(8), a(4);
    s << 0.3, 0.4, 0.5, 1, 0.3, 0.4, 0.5, 1;
    a << 0.2, 0.7, 0.2, 0.7;
    const Eigen::RowVectorXd q = agent.critic().forward(agent.critic_params(), s, a);
    CHECK(q.size() == 1);
    CHECK(std::isfinite(q[0]));
  }

  TEST_CASE("agent losses match central differences") {
    const AgentConfig cfg = small_config(2);
    DdpgAgent agent(cfg);
    Rng rng(4);
    agent.critic_params() += 0.2 * random_matrix(agent.critic_params().size(), 1, rng).col(0);
    agent.actor_params() += 0.2 * random_matrix(agent.actor_params().size(), 1, rng).col(0);
    const auto data = synthetic_batch(cfg, 8, rng);
    const auto batch = pointers(data);
    const Eigen::RowVectorXd y = agent.td_targets(batch);

    Eigen::VectorXd gc;
    agent.critic_loss_and_grad(batch, y, &gc);
    const Eigen::VectorXd theta_c = agent.critic_params();
    auto critic_loss = [&](const Eigen::VectorXd& th) {
      agent.critic_params() = th;
      const double l = agent.critic_loss_and_grad(batch, y, nullptr);
      agent.critic_params() = theta_c;
      return l;
    };
    CHECK(relative_error(gc, finite_difference(critic_loss, theta_c)) < 1e-4);

    Eigen::VectorXd ga;
    agent.actor_loss_and_grad(batch, &ga);
    const Eigen::VectorXd theta_a = agent.actor_params();
    auto actor_loss = [&](const Eigen::VectorXd& th) {
      agent.actor_params() = th;
      const double l = agent.actor_loss_and_grad(batch, nullptr);
      agent.actor_params() = theta_a;
      return l;
    };
    const Eigen::VectorXd fd = finite_difference(actor_loss, theta_a);
    CHECK(relative_error(ga, fd) < 1e-4);
    CHECK(ga.dot(fd) > 0.0);
  }

  TEST_CASE("soft update") {
    Eigen::VectorXd target = Eigen::VectorXd::Zero(3);
    soft_update(target, Eigen::VectorXd::Ones(3), 0.005);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(target[i] == doctest::Approx(0.005).epsilon(1e-15));

    DdpgAgent agent(small_config());
    Rng rng(7);
    agent.actor_params() = random_matrix(agent.actor_params().size(), 1, rng).col(0);
    agent.critic_params() = random_matrix(agent.critic_params().size(), 1, rng).col(0);
    soft_update(agent.actor_target_params(), agent.actor_params(), 1.0);
    soft_update(agent.critic_target_params(), agent.critic_params(), 1.0);
    CHECK(agent.actor_target_params() == agent.actor_params());
    CHECK(agent.critic_target_params() == agent.critic_params());
  }

  TEST_CASE("td targets") {
    AgentConfig cfg = small_config();
    Rng rng(8);
    auto data = synthetic_batch(cfg, 6, rng);
    SUBCASE("gamma zero is myopic") {
      cfg.gamma = 0.0;
      const DdpgAgent agent(cfg);
      const Eigen::RowVectorXd y = agent.td_targets(pointers(data));
      for (std::size_t i = 0; i < data.size(); ++i) CHECK(y[static_cast<Eigen::Index>(i)] == data[i].reward);
    }
    SUBCASE("bootstrap through the target critic") {
      cfg.gamma = 0.9;
      DdpgAgent agent(cfg);
      // Zero target critic weights with output bias 2 make Q' = 2 everywhere.
      agent.critic_target_params().setZero();
      agent.critic_target_params()[agent.critic_target_params().size() - 1] = 2.0;
      for (auto& t : data) t.reward = 1.0;
      data[0].terminal = true;
      const Eigen::RowVectorXd y = agent.td_targets(pointers(data));
      CHECK(y[0] == doctest::Approx(1.0));
      for (Eigen::Index i = 1; i < y.size(); ++i)
        if (!data[static_cast<std::size_t>(i)].terminal) CHECK(y[i] == doctest::Approx(1.0 + 0.9 * 2.0));
    }
  }

  TEST_CASE("critic loss decreases on a frozen batch") {
    AgentConfig cfg = small_config();
    cfg.critic_lr = 1e-3;
    DdpgAgent agent(cfg);
    Rng rng(12);
    const auto data = synthetic_batch(cfg, 16, rng);
    const auto batch = pointers(data);
    const Eigen::RowVectorXd y = agent.td_targets(batch);
    Adam opt(agent.critic().num_params(), cfg.critic_lr);
    double prev = agent.critic_loss_and_grad(batch, y, nullptr);
    const double first = prev;
    for (int step = 0; step < 100; ++step) {
      Eigen::VectorXd g;
      agent.critic_loss_and_grad(batch, y, &g);
      opt.step(agent.critic_params(), g);
      const double now = agent.critic_loss_and_grad(batch, y, nullptr);
      CHECK(now < prev);
      prev = now;
    }
    CHECK(prev < first);
  }

  TEST_CASE("full update keeps parameters finite and moves targets") {
    DdpgAgent agent(small_config());
    Rng rng(13);
    for (const Transition& t : synthetic_batch(agent.config(), 20, rng)) agent.buffer().push(t);
    const Eigen::VectorXd before = agent.actor_target_params();
    for (int i = 0; i < 5; ++i) {
      const auto st = agent.train_step();
      REQUIRE(st.has_value());
      CHECK_FALSE(st->skipped);
    }
    CHECK(agent.actor_params().allFinite());
    CHECK((agent.actor_target_params() - before).norm() > 0.0);
  }

  TEST_CASE("non-finite gradients skip the step") {
    DdpgAgent agent(small_config());
    Rng rng(14);
    auto data = synthetic_batch(agent.config(), 8, rng);
    data[0].reward = std::numeric_limits<double>::quiet_NaN();
    data[0].terminal = true;
    const Eigen::VectorXd a = agent.actor_params(), c = agent.critic_params();
    const UpdateStats st = agent.update(pointers(data));
    CHECK(st.skipped);
    CHECK(agent.actor_params() == a);
    CHECK(agent.critic_params() == c);
  }

  TEST_CASE("train step waits for a full batch") {
    DdpgAgent agent(small_config());
    Rng rng(15);
    for (const Transition& t : synthetic_batch(agent.config(), 7, rng)) agent.buffer().push(t);
    CHECK_FALSE(agent.train_step().has_value());
  }

  TEST_CASE("exploration noise stays in range and decays") {
    AgentConfig cfg = small_config();
    cfg.sigma_explore = 0.5;
    cfg.sigma_decay = 0.5;
    DdpgAgent agent(cfg);
    const Eigen::VectorXd s = Eigen::VectorXd::Constant(cfg.state_dim(), 0.5);
    CHECK(agent.act(s, false) == agent.act(s, false));
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd a = agent.act(s, true);
      CHECK(a.minCoeff() >= 0.0);
      CHECK(a.maxCoeff() <= 1.0);
    }
    agent.end_episode();
    CHECK(agent.sigma() == doctest::Approx(0.25));
  }

  TEST_CASE("replay buffer evicts oldest first and samples deterministically") {
    ReplayBuffer buf(3);
    for (int i = 0; i < 5; ++i) {
      Transition t;
      t.reward = i;
      buf.push(t);
    }
    CHECK(buf.size() == 3);
    CHECK(buf.at(0).reward == 2.0);
    CHECK(buf.at(1).reward == 3.0);
    CHECK(buf.at(2).reward == 4.0);
    CHECK_THROWS(buf.at(3));

    ReplayBuffer big(100);
    for (int i = 0; i < 100; ++i) {
      Transition t;
      t.reward = i;
      big.push(t);
    }
    Rng r1(42), r2(42);
    const auto s1 = big.sample(50, r1), s2 = big.sample(50, r2);
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i] == s2[i]);

    // Uniformity: each slot receives about 1% of 100000 draws.
    Rng r3(7);
    std::vector<int> counts(100, 0);
    for (const Transition* t : big.sample(100000, r3)) ++counts[static_cast<std::size_t>(t->reward)];
    for (int c : counts) CHECK(std::abs(c - 1000) < 200);
    CHECK_THROWS(ReplayBuffer(1).sample(1, r3));
  }

  TEST_CASE("checkpoint round trip and rejection") {
    const AgentConfig cfg = small_config();
    DdpgAgent a(cfg);
    Rng rng(21);
    a.actor_params() = random_matrix(a.actor_params().size(), 1, rng).col(0);
    std::stringstream blob;
    a.save(blob);
    AgentConfig other = cfg;
    other.seed = 99;
    DdpgAgent b(other);
    b.load(blob);
    CHECK(b.actor_params() == a.actor_params());
    CHECK(b.critic_params() == a.critic_params());
    CHECK(b.actor_target_params() == a.actor_target_params());

    AgentConfig wider = cfg;
    wider.actor_hidden = {7, 5};
    DdpgAgent c(wider);
    std::stringstream again;
    a.save(again);
    CHECK_THROWS_AS(c.load(again), ConfigError);

    std::stringstream junk("not a checkpoint at all");
    CHECK_THROWS_AS(b.load(junk), ConfigError);

    std::string bytes;
    {
      std::stringstream s;
      a.save(s);
      bytes = s.str();
    }
    std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
    const Eigen::VectorXd keep = b.actor_params();
    CHECK_THROWS_AS(b.load(truncated), ConfigError);
    CHECK(b.actor_params() == keep);
  }

  TEST_CASE("config validation") {
    AgentConfig c = small_config();
    CHECK_NOTHROW(c.validate());
    c.gamma = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.tau = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.num_vehicles = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(AgentConfig{}.state_dim() == 200);
    CHECK(AgentConfig{}.action_dim() == 100);
  }

  TEST_CASE("reward negates the cost") {
    CHECK(compute_reward(0.0) == 0.0);
    CHECK(compute_reward(3.2) == -3.2);
  }

  TEST_CASE("state vector") {
    const Eigen::VectorXd s = build_state({{2e6, 100.0, 100.0}, {0.0, 160.0, std::nullopt}, {5e6, 20.0, 90.0}});
    REQUIRE(s.size() == 12);
    CHECK(s[0] == 1.0);
    CHECK(s[1] == doctest::Approx(0.5));
    CHECK(s[2] == doctest::Approx(0.5));
    CHECK(s[3] == 1.0);
    CHECK(s[4] == 0.0);
    CHECK(s[5] == 0.0);
    CHECK(s[6] == 0.0);
    CHECK(s[7] == 0.0);
    CHECK(s[8] == 1.0);
    CHECK(s[9] == 1.0);
    CHECK(s[10] == doctest::Approx(0.6));
    CHECK(s[11] == 1.0);
  }

  TEST_CASE("single V2I link receives every RB") {
    Eigen::VectorXd a(2);
    a << 1.0, 0.01;
    const ResourceAllocation r = map_action_to_allocation(a, {ctx(0, true, false)}, channel());
    CHECK(r.total_rbs == 55);
    CHECK(r.vehicles[0].v2i.rb_count() == 55);
    CHECK(r.vehicles[0].v2u.rb_count() == 0);
    CHECK(r.vehicles[0].v2i.power_dbm == 23.0);
    CHECK(check_allocation(r, 5.0, 23.0).empty());
  }

  TEST_CASE("equal priorities split 28 / 27 towards the lower id") {
    Eigen::VectorXd a(4);
    a << 0.0, 0.5, 0.3, 0.5;
    const ResourceAllocation r = map_action_to_allocation(a, {ctx(3, true, false), ctx(8, true, false)}, channel());
    CHECK(r.vehicles[0].v2i.rb_count() == 28);
    CHECK(r.vehicles[1].v2i.rb_count() == 27);
    CHECK(r.vehicles[0].v2i.power_dbm == 5.0);
    CHECK(r.vehicles[1].v2i.power_dbm == doctest::Approx(5.0 + 0.3 * 18.0));
  }

  TEST_CASE("one vehicle's two links: V2I wins the tie") {
    Eigen::VectorXd a(2);
    a << 0.5, 0.4;
    const ResourceAllocation r = map_action_to_allocation(a, {ctx(0, true, true)}, channel());
    CHECK(r.vehicles[0].v2i.rb_count() == 28);
    CHECK(r.vehicles[0].v2u.rb_count() == 27);
  }

  TEST_CASE("greedy indices follow per-RB gains") {
    ChannelConfig ch = channel();
    LinkContext c0 = ctx(0, true, false), c1 = ctx(1, true, false);
    c0.v2i_gain.assign(55, 1.0);
    c1.v2i_gain.assign(55, 1.0);
    c0.v2i_gain[10] = 5.0;
    c0.v2i_gain[20] = 4.0;
    c1.v2i_gain[10] = 9.0;
    c1.v2i_gain[30] = 8.0;
    Eigen::VectorXd a(4);
    a << 0.5, 0.5, 0.5, 0.5;
    const ResourceAllocation r = map_action_to_allocation(a, {c0, c1}, ch);
    const auto& rb0 = r.vehicles[0].v2i.rbs;
    const auto& rb1 = r.vehicles[1].v2i.rbs;
    // Vehicle 0 wins the tie and claims RB 10 even though vehicle 1 values it more.
    CHECK(std::find(rb0.begin(), rb0.end(), 10) != rb0.end());
    CHECK(std::find(rb0.begin(), rb0.end(), 20) != rb0.end());
    CHECK(std::find(rb1.begin(), rb1.end(), 30) != rb1.end());
    CHECK(rb0.size() + rb1.size() == 55);
    CHECK(check_allocation(r, ch.p_min_dbm, ch.p_max_dbm).empty());
  }

  TEST_CASE("inactive links hold nothing") {
    Eigen::VectorXd a(4);
    a << 0.5, 0.5, 0.5, 0.5;
    const ResourceAllocation r = map_action_to_allocation(a, {ctx(0, false, false), ctx(1, true, false)}, channel());
    CHECK(r.vehicles[0].v2i.rb_count() == 0);
    CHECK(r.vehicles[1].v2i.rb_count() == 55);
  }

  TEST_CASE("more links than RBs drops the lowest priorities") {
    const int n = 60;
    Eigen::VectorXd a(2 * n);
    std::vector<LinkContext> links;
    for (int i = 0; i < n; ++i) {
      a[2 * i] = 0.5;
      a[2 * i + 1] = 0.01 * (i + 1);
      links.push_back(ctx(i, true, false));
    }
    const ResourceAllocation r = map_action_to_allocation(a, links, channel());
    CHECK(r.overcommitted);
    CHECK(r.used_rbs() == 55);
    for (int i = 0; i < 5; ++i) CHECK(r.vehicles[static_cast<std::size_t>(i)].v2i.dropped);
    for (int i = 5; i < n; ++i) CHECK(r.vehicles[static_cast<std::size_t>(i)].v2i.rb_count() == 1);
    CHECK(check_allocation(r, 5.0, 23.0).empty());
  }

  TEST_CASE("allocation invariants hold under fuzzing") {
    Rng rng(2024);
    const ChannelConfig ch = channel();
    std::uniform_int_distribution<int> nveh(1, 40);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int failures = 0;
    for (int trial = 0; trial < 100000; ++trial) {
      const int m = nveh(rng);
      std::vector<LinkContext> links;
      Eigen::VectorXd a(2 * m);
      int active = 0;
      for (int i = 0; i < m; ++i) {
        LinkContext c = ctx(i, U(rng) < 0.9, U(rng) < 0.6);
        if (trial % 7 == 0) {
          c.v2i_gain.resize(55);
          c.v2u_gain.resize(55);
          for (double& g : c.v2i_gain) g = U(rng);
          for (double& g : c.v2u_gain) g = U(rng);
        }
        active += c.v2i_active + c.v2u_active;
        links.push_back(std::move(c));
        a[2 * i] = U(rng);
        a[2 * i + 1] = trial % 11 == 0 ? 0.0 : U(rng);
      }
      const ResourceAllocation r = map_action_to_allocation(a, links, ch);
      const bool ok = check_allocation(r, ch.p_min_dbm, ch.p_max_dbm).empty() &&
                      r.used_rbs() == (active > 0 ? 55 : 0);
      if (!ok) ++failures;
    }
    CHECK(failures == 0);
  }

  TEST_CASE("allocation rejects a mis-sized action") {
    CHECK_THROWS_AS(map_action_to_allocation(Eigen::VectorXd::Zero(3), {ctx(0, true, false)}, channel()), ConfigError);
  }
}
