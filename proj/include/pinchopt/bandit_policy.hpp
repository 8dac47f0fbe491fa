#pragma once

// Contextual-bandit actor-critic for continuous PA placement.
//
// Each step is a one-shot decision: observe users and obstacles, emit PA x
// coordinates, get the WMMSE sum rate minus a softplus QoS penalty. With no
// future reward to bootstrap there are no target networks and no replay: the
// critic regresses the immediate reward and the actor climbs the critic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pinchopt/error.hpp"
#include "pinchopt/evaluation.hpp"
#include "pinchopt/mlp.hpp"
#include "pinchopt/rng.hpp"
#include "pinchopt/scenario.hpp"
#include "pinchopt/wmmse.hpp"

namespace pinchopt {

// (x_1, y_1, ..., x_M, y_M, cx_1, cy_1, ..., cx_B, cy_B, r_1, ..., r_B);
// positions scaled by the area sides, radii by the longer side.
struct StateEncoder {
  int num_users = 0;
  int num_obstacles = 0;
  double area_x = 1.0;
  double area_y = 1.0;

  static StateEncoder for_scenario(const Scenario& s) {
    return {s.num_users(), s.num_obstacles(), s.physics.area_x_m, s.physics.area_y_m};
  }

  int dim() const { return 2 * num_users + 3 * num_obstacles; }

  Eigen::VectorXd encode(const Scenario& s) const {
    if (s.num_users() != num_users || s.num_obstacles() != num_obstacles)
      throw DimensionMismatch("StateEncoder: scenario has a different number of users or obstacles");
    Eigen::VectorXd v(dim());
    Eigen::Index at = 0;
    for (const User& u : s.users) {
      v(at++) = u.position_m.x / area_x;
      v(at++) = u.position_m.y / area_y;
    }
    for (const Obstacle& o : s.obstacles) {
      v(at++) = o.center_m.x / area_x;
      v(at++) = o.center_m.y / area_y;
    }
    const double r_scale = std::max(area_x, area_y);
    for (const Obstacle& o : s.obstacles) v(at++) = o.radius_m / r_scale;
    return v;
  }
};

/// x_i = (L_x / 2)(tanh(u_i) + 1), kept inside the open interval (0, L_x).
inline Eigen::VectorXd squash_action(const Eigen::VectorXd& logits, double area_x) {
  if (!logits.allFinite()) throw InvalidArgument("squash_action: non-finite logits");
  Eigen::VectorXd x(logits.size());
  const double hi = std::nextafter(area_x, 0.0);
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    // L_x / (1 + e^{-2u}) is the same map and keeps precision for very negative u.
    const double v = area_x / (1.0 + std::exp(-2.0 * logits(i)));
    x(i) = std::clamp(v, std::numeric_limits<double>::denorm_min(), hi);
  }
  return x;
}

inline Eigen::VectorXd squash_derivative(const Eigen::VectorXd& logits, double area_x) {
  return (0.5 * area_x) * (1.0 - logits.array().tanh().square());
}

struct RewardConfig {
  double penalty_weight = 10.0;
  std::vector<double> penalty_weights;  // per user; overrides penalty_weight when set
  double temperature = 0.01;
  double target_rate = 0.5;

  double weight(std::size_t m) const { return penalty_weights.empty() ? penalty_weight : penalty_weights.at(m); }
};

/// g = tau log(1 + e^{(R_t - R)/tau}), evaluated without overflow.
inline double violation_score(double rate, double target_rate, double temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("violation_score: temperature must be positive");
  const double z = (target_rate - rate) / temperature;
  const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return temperature * softplus;
}

inline double reward_from_rates(const Eigen::VectorXd& rates, const RewardConfig& cfg) {
  double rd = rates.sum();
  for (Eigen::Index m = 0; m < rates.size(); ++m)
    rd -= cfg.weight(static_cast<std::size_t>(m)) * violation_score(rates(m), cfg.target_rate, cfg.temperature);
  return rd;
}

struct RewardOutcome {
  double reward = 0.0;
  LinkEvaluation link;
};

inline RewardOutcome reward(const Scenario& s, std::span<const double> placement, const RewardConfig& cfg,
                            const WmmseConfig& wmmse = {}) {
  RewardOutcome out;
  out.link = evaluate_general(s, placement, BeamformerKind::wmmse, wmmse, s.seed);
  out.reward = reward_from_rates(out.link.rates, cfg);
  return out;
}

struct TrainConfig {
  std::vector<int> hidden = {256, 256};
  Activation activation = Activation::relu;
  OptimizerKind optimizer = OptimizerKind::sgd;
  double actor_lr = 1e-4;
  double critic_lr = 1e-4;
  int steps = 20000;
  double noise_initial = 0.3;
  double noise_final = 0.01;
  int moving_average_window = 500;
  // Weight of the -||u||^2 term in the actor objective; keeps the logits out
  // of the flat tails of tanh, where logit noise stops exploring.
  double logit_penalty = 0.0;
  // Scenarios per step; gradients are averaged over the batch.
  int batch_size = 1;
  std::uint64_t seed = 0;
  RewardConfig reward;
  WmmseConfig wmmse;
};

struct CriticStep {
  double loss = 0.0;  // before the step
  bool applied = true;
};

struct ActorStep {
  double gradient_norm = 0.0;
  bool applied = true;
};

class Trainer {
 public:
  Trainer(int state_dim, int action_dim, double area_x, const TrainConfig& cfg)
      : area_x_(area_x), cfg_(cfg), rng_(Rng::substream(cfg.seed, "exploration")) {
    Rng init = Rng::substream(cfg.seed, "network-init");
    std::vector<int> actor_sizes{state_dim};
    actor_sizes.insert(actor_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    actor_sizes.push_back(action_dim);
    std::vector<int> critic_sizes{state_dim + action_dim};
    critic_sizes.insert(critic_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    critic_sizes.push_back(1);
    actor_ = Mlp(actor_sizes, cfg.activation, init);
    critic_ = Mlp(critic_sizes, cfg.activation, init);
    actor_opt_ = Optimizer(cfg.optimizer, cfg.actor_lr, actor_);
    critic_opt_ = Optimizer(cfg.optimizer, cfg.critic_lr, critic_);
  }

  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  double area_x() const { return area_x_; }
  long step_count() const { return step_; }
  Rng& rng() { return rng_; }

  double noise_scale(long step) const {
    if (cfg_.steps <= 1 || cfg_.noise_initial <= 0.0) return cfg_.noise_initial;
    const double frac = std::min(1.0, static_cast<double>(step) / (cfg_.steps - 1));
    return cfg_.noise_initial * std::pow(cfg_.noise_final / cfg_.noise_initial, frac);
  }

  Eigen::VectorXd logits(const Eigen::VectorXd& state) const { return actor_.forward(state); }

  Eigen::VectorXd act(const Eigen::VectorXd& state) const { return squash_action(logits(state), area_x_); }

  Eigen::VectorXd critic_input(const Eigen::VectorXd& state, const Eigen::VectorXd& placement) const {
    Eigen::VectorXd in(state.size() + placement.size());
    in << state, (2.0 / area_x_) * placement.array() - 1.0;
    return in;
  }

  double critic_value(const Eigen::VectorXd& state, const Eigen::VectorXd& placement) const {
    return critic_.forward(critic_input(state, placement))(0);
  }

  /// d/dtheta of (Q(s, a) - rd)^2.
  MlpGradient critic_loss_gradient(const Eigen::VectorXd& state, const Eigen::VectorXd& placement, double rd,
                                   double* loss = nullptr) const {
    Mlp::Tape tape;
    const double q = critic_.forward(critic_input(state, placement), tape)(0);
    if (loss) *loss = (q - rd) * (q - rd);
    MlpGradient g = critic_.zero_gradient();
    critic_.backward(tape, Eigen::VectorXd::Constant(1, 2.0 * (q - rd)), &g);
    return g;
  }

  /// d/dphi of an objective J(x) at x = squash(actor(s)), given dJ/dx.
  template <class Slope>
  MlpGradient actor_gradient(const Eigen::VectorXd& state, Slope&& dj_dx) const {
    Mlp::Tape tape;
    const Eigen::VectorXd u = actor_.forward(state, tape);
    const Eigen::VectorXd x = squash_action(u, area_x_);
    const Eigen::VectorXd dj_du =
        Eigen::VectorXd(dj_dx(x)).cwiseProduct(squash_derivative(u, area_x_)) - 2.0 * cfg_.logit_penalty * u;
    MlpGradient g = actor_.zero_gradient();
    actor_.backward(tape, dj_du, &g);
    return g;
  }

  /// d/dphi of Q(s, squash(actor(s))), chained through the critic's action input.
  MlpGradient actor_objective_gradient(const Eigen::VectorXd& state, double* value = nullptr) const {
    return actor_gradient(state, [&](const Eigen::VectorXd& x) {
      Mlp::Tape tape;
      const double q = critic_.forward(critic_input(state, x), tape)(0);
      if (value) *value = q;
      const Eigen::VectorXd dq_din = critic_.backward(tape, Eigen::VectorXd::Ones(1), nullptr);
      // The critic sees 2x/L_x - 1.
      return Eigen::VectorXd((2.0 / area_x_) * dq_din.tail(x.size()));
    });
  }

  template <class Slope>
  ActorStep actor_update_with(const Eigen::VectorXd& state, Slope&& dj_dx) {
    return apply_actor_step(actor_gradient(state, std::forward<Slope>(dj_dx)));
  }

  CriticStep critic_update(const Eigen::VectorXd& state, const Eigen::VectorXd& placement, double rd) {
    CriticStep out;
    const MlpGradient g = critic_loss_gradient(state, placement, rd, &out.loss);
    if (!g.all_finite() || !std::isfinite(out.loss)) {
      out.applied = false;
      return out;
    }
    critic_opt_.step(critic_, g);
    return out;
  }

  ActorStep actor_update(const Eigen::VectorXd& state) { return apply_actor_step(actor_objective_gradient(state)); }

  /// Batch forms: one step along the mean gradient over the samples.
  CriticStep critic_update(std::span<const Eigen::VectorXd> states, std::span<const Eigen::VectorXd> placements,
                           std::span<const double> rds) {
    if (states.empty() || states.size() != placements.size() || states.size() != rds.size())
      throw DimensionMismatch("critic_update: batch parts differ in length");
    CriticStep out;
    MlpGradient g = critic_.zero_gradient();
    for (std::size_t i = 0; i < states.size(); ++i) {
      double loss = 0.0;
      g += critic_loss_gradient(states[i], placements[i], rds[i], &loss);
      out.loss += loss;
    }
    const double inv = 1.0 / static_cast<double>(states.size());
    out.loss *= inv;
    g *= inv;
    if (!g.all_finite() || !std::isfinite(out.loss)) {
      out.applied = false;
      return out;
    }
    critic_opt_.step(critic_, g);
    return out;
  }

  ActorStep actor_update(std::span<const Eigen::VectorXd> states) {
    if (states.empty()) throw DimensionMismatch("actor_update: empty batch");
    MlpGradient g = actor_.zero_gradient();
    for (const Eigen::VectorXd& s : states) g += actor_objective_gradient(s);
    g *= 1.0 / static_cast<double>(states.size());
    return apply_actor_step(std::move(g));
  }

  /// Exploratory placement: Gaussian noise on the logits before squashing.
  Eigen::VectorXd explore(const Eigen::VectorXd& state, double noise) {
    Eigen::VectorXd u = logits(state);
    if (noise > 0.0)
      for (Eigen::Index i = 0; i < u.size(); ++i) u(i) += noise * rng_.normal();
    return squash_action(u, area_x_);
  }

 private:
  ActorStep apply_actor_step(MlpGradient g) {
    ActorStep out;
    out.gradient_norm = g.norm();
    if (!g.all_finite()) {
      out.applied = false;
      return out;
    }
    g *= -1.0;  // ascend
    actor_opt_.step(actor_, g);
    ++step_;
    return out;
  }

  Mlp actor_, critic_;
  Optimizer actor_opt_, critic_opt_;
  double area_x_;
  TrainConfig cfg_;
  Rng rng_;
  long step_ = 0;
};

struct TrainResult {
  std::vector<double> rewards;
  std::vector<double> critic_losses;
  std::vector<double> actor_gradient_norms;
  std::vector<double> moving_average;  // trailing mean of rewards over the window
  int skipped_updates = 0;
};

inline std::vector<double> trailing_mean(const std::vector<double>& v, int window) {
  std::vector<double> out(v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    acc += v[i];
    if (i >= static_cast<std::size_t>(window)) acc -= v[i - static_cast<std::size_t>(window)];
    out[i] = acc / static_cast<double>(std::min<std::size_t>(i + 1, static_cast<std::size_t>(window)));
  }
  return out;
}

/// Reads the optional "train" block of a configuration file; absent keys keep
/// their defaults.
inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  if (!j.is_object()) return c;
  if (j.contains("hidden")) c.hidden = j.at("hidden").get<std::vector<int>>();
  if (j.contains("activation")) c.activation = parse_activation(j.at("activation").get<std::string>());
  if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  c.actor_lr = j.value("actor_lr", c.actor_lr);
  c.critic_lr = j.value("critic_lr", c.critic_lr);
  c.steps = j.value("steps", c.steps);
  c.noise_initial = j.value("noise_initial", c.noise_initial);
  c.noise_final = j.value("noise_final", c.noise_final);
  c.moving_average_window = j.value("moving_average_window", c.moving_average_window);
  c.logit_penalty = j.value("logit_penalty", c.logit_penalty);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.reward.penalty_weight = j.value("penalty_weight", c.reward.penalty_weight);
  c.reward.temperature = j.value("temperature", c.reward.temperature);
  return c;
}

/// `source(i)` yields the i-th training scenario; `reward_fn(scenario,
/// placement)` scores a placement. Each step explores on `batch_size`
/// scenarios, then takes one critic step and one actor step.
template <class Source, class RewardFn>
TrainResult train(Trainer& trainer, Source&& source, RewardFn&& reward_fn, const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw InvalidArgument("train: batch_size must be >= 1");
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  TrainResult res;
  res.rewards.reserve(static_cast<std::size_t>(cfg.steps));
  std::vector<Eigen::VectorXd> states(batch), placements(batch);
  std::vector<double> rds(batch);
  for (int t = 0; t < cfg.steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      const Scenario s = source(t * cfg.batch_size + static_cast<int>(b));
      states[b] = StateEncoder::for_scenario(s).encode(s);
      placements[b] = trainer.explore(states[b], trainer.noise_scale(t));
      const Eigen::VectorXd& x = placements[b];
      rds[b] = reward_fn(s, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    }
    const CriticStep c = trainer.critic_update(states, placements, rds);
    const ActorStep a = trainer.actor_update(std::span<const Eigen::VectorXd>(states));
    res.skipped_updates += !c.applied + !a.applied;
    res.rewards.push_back(std::accumulate(rds.begin(), rds.end(), 0.0) / static_cast<double>(batch));
    res.critic_losses.push_back(c.loss);
    res.actor_gradient_norms.push_back(a.gradient_norm);
  }
  res.moving_average = trailing_mean(res.rewards, cfg.moving_average_window);
  return res;
}

/// Scenario stream for training: fresh users (and random obstacles, if so
/// configured) every step, seeded from (seed, step).
struct GeneratedSource {
  GeneratorConfig config;
  std::uint64_t seed = 0;
  Scenario operator()(int step) const {
    return generate_scenario(config, Rng::substream(seed, "train-scenarios", static_cast<std::uint64_t>(step))());
  }
};

inline TrainResult train(Trainer& trainer, const GeneratorConfig& gen, const TrainConfig& cfg) {
  RewardConfig rc = cfg.reward;
  rc.target_rate = gen.physics.target_rate_bps_hz;
  return train(trainer, GeneratedSource{gen, cfg.seed},
               [&](const Scenario& s, std::span<const double> x) { return reward(s, x, rc, cfg.wmmse).reward; }, cfg);
}

// A trained actor bundled with what it needs to turn a scenario into a placement.
struct ActorPolicy {
  StateEncoder encoder;
  Mlp net;

  std::vector<double> operator()(const Scenario& s) const {
    const Eigen::VectorXd x = squash_action(net.forward(encoder.encode(s)), s.physics.area_x_m);
    return {x.data(), x.data() + x.size()};
  }

  void save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error("cannot write '" + path + "'");
    os.precision(17);
    os << "pinchopt-actor 1\n"
       << "users " << encoder.num_users << "\nobstacles " << encoder.num_obstacles << "\narea_x "
       << encoder.area_x << "\narea_y " << encoder.area_y << '\n';
    net.write(os);
  }

  static ActorPolicy load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    std::string tag, key;
    int version = 0;
    ActorPolicy p;
    if (!(is >> tag >> version) || tag != "pinchopt-actor") throw Error("ActorPolicy::load: bad header");
    if (!(is >> key >> p.encoder.num_users >> key >> p.encoder.num_obstacles >> key >> p.encoder.area_x >> key >>
          p.encoder.area_y))
      throw Error("ActorPolicy::load: bad metadata");
    p.net = Mlp::read(is);
    return p;
  }
};

/// Mean sum rate of a deterministic policy (any callable Scenario -> placement).
template <class Policy>
double evaluate_policy(const Policy& policy, std::span<const Scenario> scenarios,
                       BeamformerKind bf = BeamformerKind::wmmse, const WmmseConfig& wmmse = {}) {
  if (scenarios.empty()) return 0.0;
  double total = 0.0;
  for (const Scenario& s : scenarios) {
    const std::vector<double> x = policy(s);
    total += evaluate_general(s, x, bf, wmmse, s.seed).sum_rate;
  }
  return total / static_cast<double>(scenarios.size());
}

}  // namespace pinchopt
