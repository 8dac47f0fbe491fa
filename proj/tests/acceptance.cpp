// Runs the acceptance suite and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "grad_check.hpp"
#include "oracles.hpp"
#include "pinchopt/pinchopt.hpp"
#include "test_util.hpp"

using namespace pinchopt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Point2 random_point(Rng& rng, double lo, double hi) { return {rng.uniform(lo, hi), rng.uniform(lo, hi)}; }

std::vector<Eigen::MatrixXd> raw(const PlacementContext& ctx) {
  std::vector<Eigen::MatrixXd> g;
  for (const PowerMatrix& p : ctx.powers) g.push_back(p.entries);
  return g;
}

std::vector<double> random_placement(Rng& rng, int k, double lx) {
  std::vector<double> x;
  for (int i = 0; i < k; ++i) x.push_back(rng.uniform(0.0, lx));
  return x;
}

GeneratorConfig desk_config(double power_dbm = 30.0) {
  return apply_sweep(testutil::diamond_config(4, 1.0), SweepVariable::transmit_power, power_dbm);
}

GeneratorConfig random_obstacle_config(int k, double radius) {
  GeneratorConfig c;
  c.num_waveguides = c.num_users = k;
  c.obstacles = {LayoutKind::random, 4, radius, 0.0, 0.0, {}};
  return c;
}

// SINR computed directly from the channel and precoder.
VectorXd direct_sinr(const MatrixXcd& h, const MatrixXcd& p, double sigma2) {
  VectorXd out(h.cols());
  for (Eigen::Index m = 0; m < h.cols(); ++m) {
    double interference = sigma2;
    for (Eigen::Index i = 0; i < p.cols(); ++i)
      if (i != m) interference += std::norm(h.col(m).dot(p.col(i)));
    out(m) = std::norm(h.col(m).dot(p.col(m))) / interference;
  }
  return out;
}

Outcome hungarian_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  int mismatches = 0, instances = 0;
  for (int k = 2; k <= 7; ++k) {
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::MatrixXd c(k, k);
      // Integer costs half the time so exact ties are common.
      const bool integral = trial % 2 == 0;
      for (Eigen::Index i = 0; i < c.size(); ++i)
        c.data()[i] = integral ? static_cast<double>(rng.below(10)) : rng.uniform(0.0, 100.0);
      const Assignment a = hungarian_solve(c);
      double cost = 0.0;
      for (int r = 0; r < k; ++r) cost += c(r, a.waveguide_of_user[static_cast<std::size_t>(r)]);
      mismatches += cost != testutil::brute_force_min_cost(c);
      ++instances;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          fmt("%d instances, %d cost mismatches, %.2f s", instances, mismatches, secs)};
}

Outcome blockage_soundness() {
  Rng rng(1002);
  int checked = 0, blocked = 0;
  while (checked < 100000) {
    const Point2 pa = random_point(rng, -10, 10), user = random_point(rng, -10, 10), c = random_point(rng, -10, 10);
    const double r = rng.uniform(0.01, 5.0);
    if (pa == user || distance(pa, c) <= r || distance(user, c) <= r) continue;
    const SegmentQuery q{pa, user, {c, r}};
    const double t = projection_param(q);
    if (t > 0.0 && t < 1.0) continue;
    blocked += is_blocked(q);
    ++checked;
  }
  return {blocked == 0, fmt("%d configurations, %d blocked verdicts", checked, blocked)};
}

Outcome incremental_coherence() {
  Rng rng(1003);
  const Scenario s = generate_scenario(testutil::grid_config(6, 2.0), 3);
  const std::vector<double> cand = candidate_positions(s.physics.area_x_m, 100);
  const std::vector<int> pi = best_assignment(s, random_placement(rng, 6, 30.0)).waveguide_of_user;
  const PlacementContext ctx = make_context(power_matrices(s, cand), pi, per_waveguide_power(s),
                                            s.physics.noise_power_watts);
  std::vector<int> pos;
  for (int k = 0; k < 6; ++k) pos.push_back(static_cast<int>(rng.below(100)));
  PlacementState st = make_state(ctx, pos);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int move = 0; move < 10000; ++move) {
    st = apply_move(ctx, st, static_cast<int>(rng.below(6)), static_cast<int>(rng.below(100)));
    const oracle::Links l = oracle::direct_links(raw(ctx), pi, st.position, ctx.power);
    const double f = oracle::total(oracle::direct_rates(l, ctx.sigma2));
    for (int m = 0; m < 6; ++m) {
      worst = std::max(worst, std::abs(st.signal(m) - l.s[m]));
      worst = std::max(worst, std::abs(st.interference(m) - l.i[m]));
    }
    worst = std::max(worst, std::abs(st.sum_rate - f));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5.0, fmt("10000 moves, max |cached - recomputed| %.3g, %.2f s", worst, secs)};
}

Outcome surrogate_fidelity() {
  Rng rng(1004);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Scenario s = generate_scenario(random_obstacle_config(4, 1.5), static_cast<std::uint64_t>(trial));
    const std::vector<double> cand = candidate_positions(s.physics.area_x_m, 50);
    std::vector<int> pi{0, 1, 2, 3};
    shuffle(pi, rng);
    const PlacementContext ctx = make_context(power_matrices(s, cand), pi, per_waveguide_power(s),
                                              s.physics.noise_power_watts);
    std::vector<int> pos;
    for (int k = 0; k < 4; ++k) pos.push_back(static_cast<int>(rng.below(50)));
    const PlacementState st = make_state(ctx, pos);
    const int k = static_cast<int>(rng.below(4)), n_new = static_cast<int>(rng.below(50));
    const int n_old = pos[static_cast<std::size_t>(k)];
    const Eigen::VectorXd q = surrogate_scores(ctx, st, k);

    // Chain rule on F = sum_j log2(S_j + I_j + s2) - log2(I_j + s2).
    const Eigen::MatrixXd& h = ctx.powers[static_cast<std::size_t>(k)].entries;
    const int served = ctx.user_of_waveguide[static_cast<std::size_t>(k)];
    double first_order = 0.0, magnitude = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double total = st.signal(j) + st.interference(j) + ctx.sigma2;
      const double noise = st.interference(j) + ctx.sigma2;
      const double delta = ctx.power * (h(j, n_new) - h(j, n_old));
      const double slope = j == served ? 1.0 / total : 1.0 / total - 1.0 / noise;
      first_order += slope * delta / std::numbers::ln2;
      magnitude += std::abs(slope * ctx.power) * (h(j, n_new) + h(j, n_old)) / std::numbers::ln2;
    }
    const double predicted = ctx.power * (q(n_new) - q(n_old));
    worst = std::max(worst, std::abs(first_order - predicted) / std::max(magnitude, 1e-300));
  }
  return {worst <= 1e-12, fmt("1000 states, max error relative to term magnitude %.3g", worst)};
}

Outcome exhaustive_equivalence() {
  Rng rng(1005);
  int trajectory_mismatch = 0, position_mismatch = 0, with_moves = 0;
  double worst_f = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Scenario s = generate_scenario(random_obstacle_config(4, 1.5), 5000 + static_cast<std::uint64_t>(trial));
    const std::vector<double> cand = candidate_positions(s.physics.area_x_m, 50);
    const std::vector<int> pi = best_assignment(s, random_placement(rng, 4, 30.0)).waveguide_of_user;
    const PlacementContext ctx = make_context(power_matrices(s, cand), pi, per_waveguide_power(s),
                                              s.physics.noise_power_watts);
    BcdConfig cfg;
    cfg.shortlist = 50;
    const BcdResult r = bcd_solve(ctx, cfg);
    const oracle::BcdTrace o =
        oracle::exhaustive_bcd(raw(ctx), pi, best_own_gain_positions(ctx), ctx.power, ctx.sigma2, cfg.target_rate,
                               cfg.max_sweeps);
    bool same = r.trajectory.size() == o.moves.size() && r.qos_feasible == o.feasible;
    for (std::size_t i = 0; same && i < o.moves.size(); ++i) {
      const BcdMove& a = r.trajectory[i];
      const oracle::Move& b = o.moves[i];
      same = a.sweep == b.sweep && a.waveguide == b.waveguide && a.from == b.from && a.to == b.to;
    }
    trajectory_mismatch += !same;
    position_mismatch += r.state.position != o.position;
    with_moves += !o.moves.empty();
    const double f = oracle::total(oracle::direct_rates(oracle::direct_links(raw(ctx), pi, o.position, ctx.power),
                                                        ctx.sigma2));
    worst_f = std::max(worst_f, std::abs(r.state.sum_rate - f));
  }
  return {trajectory_mismatch == 0 && position_mismatch == 0 && worst_f <= 1e-9,
          fmt("50 scenarios (%d with moves), %d trajectory and %d final-position mismatches, max |dF| %.3g",
              with_moves, trajectory_mismatch, position_mismatch, worst_f)};
}

Outcome wmmse_identities() {
  Rng rng(1006);
  double worst_e = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Scenario s = generate_scenario(desk_config(), 7000 + static_cast<std::uint64_t>(trial));
    const MatrixXcd h = channel_matrix(s, random_placement(rng, 4, 30.0)).entries;
    const double s2 = s.physics.noise_power_watts, pt = s.physics.total_power_watts;
    WmmseState st;
    st.p = matched_filter_init(h, pt);
    st.nu = VectorXd::Zero(4);
    for (int it = 0; it < 30; ++it) {
      const ReceiverUpdate rec = update_receivers(h, st.p, s2);
      const VectorXd sn = direct_sinr(h, st.p, s2);
      for (int m = 0; m < 4; ++m) {
        worst_e = std::max(worst_e, std::abs(rec.e(m) - 1.0 / (1.0 + sn(m))));
        worst_e = std::max(worst_e, std::abs(stream_mse(h, st.p, rec.u, s2)(m) - 1.0 / (1.0 + sn(m))));
      }
      st.u = rec.u;
      st.w = rec.w;
      st.lambda = bisection_lambda(h, st, pt);
      st.p = PrimalSystem(h, st.u, st.w, st.nu).precoder(st.lambda);
    }
  }

  double worst_cap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    MatrixXcd h(1, 1);
    const double scale = std::pow(10.0, rng.uniform(-6.0, -3.0));
    h(0, 0) = {scale * rng.normal(), scale * rng.normal()};
    const double s2 = 1e-15, pt = std::pow(10.0, rng.uniform(-1.0, 1.0));
    WmmseConfig cfg;
    cfg.qos_duals = false;
    const WmmseResult r = wmmse_solve(h, s2, pt, cfg);
    worst_cap = std::max(worst_cap, std::abs(r.sum_rate - std::log2(1.0 + pt * std::norm(h(0, 0)) / s2)));
  }

  double worst_drop = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Scenario s = generate_scenario(desk_config(), 8000 + static_cast<std::uint64_t>(trial));
    const MatrixXcd h = channel_matrix(s, random_placement(rng, 4, 30.0)).entries;
    WmmseConfig cfg;
    cfg.qos_duals = false;
    const WmmseResult r = wmmse_solve(h, s.physics.noise_power_watts, s.physics.total_power_watts, cfg);
    for (std::size_t t = 1; t < r.trace.size(); ++t) worst_drop = std::max(worst_drop, r.trace[t - 1] - r.trace[t]);
  }
  return {worst_e <= 1e-12 && worst_cap <= 1e-9 && worst_drop <= 1e-9,
          fmt("max |e - 1/(1+SINR)| %.3g, single-user capacity error %.3g, largest trace drop %.3g", worst_e,
              worst_cap, worst_drop)};
}

Outcome gradient_checks() {
  Rng rng(1007);
  const Scenario probe = generate_scenario(desk_config(), 1);
  const int state_dim = StateEncoder::for_scenario(probe).dim();
  TrainConfig cfg;
  cfg.seed = 77;
  Trainer tr(state_dim, 4, probe.physics.area_x_m, cfg);
  // Move the critic away from its near-zero output initialization so the
  // composed gradient is not dominated by round-off.
  tr.critic() = Mlp({state_dim + 4, 256, 256, 1}, Activation::relu, rng, 0.3);
  tr.actor() = Mlp({state_dim, 256, 256, 4}, Activation::relu, rng, 0.3);
  double worst_actor = 0.0, worst_critic = 0.0, worst_composed = 0.0;
  for (int point = 0; point < 50; ++point) {
    const Scenario s = generate_scenario(desk_config(), 9000 + static_cast<std::uint64_t>(point));
    const Eigen::VectorXd state = StateEncoder::for_scenario(s).encode(s);

    Eigen::VectorXd dir(4);
    for (int i = 0; i < 4; ++i) dir(i) = rng.normal();
    Mlp::Tape tape;
    tr.actor().forward(state, tape);
    MlpGradient ga = tr.actor().zero_gradient();
    tr.actor().backward(tape, dir, &ga);
    worst_actor = std::max(worst_actor, gradcheck::check(tr.actor(), ga.flatten(), [&] {
      return dir.dot(tr.actor().forward(state));
    }, rng));

    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = rng.uniform(0.0, 30.0);
    const double rd = rng.uniform(0.0, 60.0);
    const Eigen::VectorXd gc = tr.critic_loss_gradient(state, x, rd).flatten();
    worst_critic = std::max(worst_critic, gradcheck::check(tr.critic(), gc, [&] {
      const double q = tr.critic_value(state, x);
      return (q - rd) * (q - rd);
    }, rng));

    const Eigen::VectorXd gj = tr.actor_objective_gradient(state).flatten();
    worst_composed = std::max(worst_composed, gradcheck::check(tr.actor(), gj, [&] {
      return tr.critic_value(state, tr.act(state));
    }, rng));
  }
  const double worst = std::max({worst_actor, worst_critic, worst_composed});
  return {worst < 1e-4, fmt("50 points each, max relative error actor %.2g, critic %.2g, composed %.2g",
                            worst_actor, worst_critic, worst_composed)};
}

// Shared grid-layout runs for the obstacle-size trend and the ordering check.
std::vector<ResultRow>& grid_rows() {
  static std::vector<ResultRow> rows = [] {
    ExperimentSpec e;
    e.generator = testutil::grid_config(6, 2.0);
    e.variable = SweepVariable::obstacle_radius;
    e.values = {0.5, 2.0};
    e.methods = {"bcd_ao", "fix_antenna", "random_closest", "hungarian_random", "random_random"};
    for (std::uint64_t seed = 0; seed < 100; ++seed) e.seeds.push_back(seed);
    return run_experiment(e, 8);
  }();
  return rows;
}

Outcome obstacle_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<ResultRow>& rows = grid_rows();
  const double secs = seconds_since(t0);
  int errors = 0;
  for (const ResultRow& r : rows) errors += !r.error.empty();
  const PairedComparison bcd = compare_paired(select_sum_rates(rows, "bcd_ao", 2.0),
                                              select_sum_rates(rows, "bcd_ao", 0.5));
  const PairedComparison fix = compare_paired(select_sum_rates(rows, "fix_antenna", 0.5),
                                              select_sum_rates(rows, "fix_antenna", 2.0));
  const bool pass = errors == 0 && bcd.mean_a >= bcd.mean_b && bcd.p_value < 0.05 && fix.mean_b <= fix.mean_a &&
                    fix.p_value < 0.05 && secs < 300.0;
  return {pass, fmt("BCD-AO mean r=2.0 %.3f vs r=0.5 %.3f (p=%.2g); FixAntenna r=2.0 %.3f vs r=0.5 %.3f (p=%.2g); "
                    "%d errors, %.2g s",
                    bcd.mean_a, bcd.mean_b, bcd.p_value, fix.mean_b, fix.mean_a, fix.p_value, errors, secs)};
}

Outcome baseline_ordering() {
  const std::vector<ResultRow>& rows = grid_rows();
  bool pass = true;
  std::string detail;
  for (double r : {0.5, 2.0}) {
    const std::vector<double> ours = select_sum_rates(rows, "bcd_ao", r);
    detail += fmt("r=%.1f BCD-AO %.3f", r, compare_paired(ours, ours).mean_a);
    for (const char* m : {"random_closest", "hungarian_random", "fix_antenna", "random_random"}) {
      const PairedComparison c = compare_paired(ours, select_sum_rates(rows, m, r));
      pass = pass && c.mean_a > c.mean_b && c.p_value < 0.05;
      detail += fmt(", %s %.3f (p=%.2g)", m, c.mean_b, c.p_value);
    }
    detail += "; ";
  }
  detail.resize(detail.size() - 2);
  return {pass, "100 seeds; " + detail};
}

struct DeskModel {
  TrainResult trace;
  ActorPolicy policy;
  double seconds = 0.0;
};

const DeskModel& desk_model(double power_dbm) {
  static std::map<double, DeskModel> cache;
  auto it = cache.find(power_dbm);
  if (it != cache.end()) return it->second;
  const auto t0 = std::chrono::steady_clock::now();
  // Same settings as `pinchopt train --scenario-config configs/train_desk.json`.
  const json file = read_json_file(PINCHOPT_SOURCE_DIR "/configs/train_desk.json");
  const GeneratorConfig gen = apply_sweep(generator_config_from_json(file.at("generator")),
                                          SweepVariable::transmit_power, power_dbm);
  const TrainConfig cfg = train_config_from_json(file.at("train"));
  const Scenario probe = generate_scenario(gen, 0);
  const StateEncoder enc = StateEncoder::for_scenario(probe);
  Trainer tr(enc.dim(), gen.num_waveguides, gen.physics.area_x_m, cfg);
  DeskModel m{train(tr, gen, cfg), {enc, tr.actor()}, 0.0};
  m.seconds = seconds_since(t0);
  return cache.emplace(power_dbm, std::move(m)).first->second;
}

Outcome training_trend() {
  const DeskModel& m = desk_model(30.0);
  const std::vector<double>& r = m.trace.rewards;
  const std::vector<double>& l = m.trace.critic_losses;
  auto mean = [](auto b, auto e) { return std::accumulate(b, e, 0.0) / static_cast<double>(e - b); };
  const double first = mean(r.begin(), r.begin() + 500), last = mean(r.end() - 500, r.end());
  const double loss_first = mean(l.begin(), l.begin() + 500), loss_last = mean(l.end() - 500, l.end());
  const bool pass = last >= first + 0.1 * std::abs(first) && loss_last < loss_first;
  return {pass, fmt("%zu steps, reward average first 500 %.3f, last 500 %.3f (%+.1f%%); critic loss %.3g -> %.3g; "
                    "%d skipped updates, %.0f s",
                    r.size(), first, last, 100.0 * (last - first) / std::abs(first), loss_first, loss_last,
                    m.trace.skipped_updates, m.seconds)};
}

Outcome learned_placement_ordering() {
  auto held_out = [](double power_dbm) {
    std::vector<Scenario> v;
    for (std::uint64_t i = 0; i < 50; ++i) v.push_back(generate_scenario(desk_config(power_dbm), 900000 + i));
    return v;
  };
  auto mean_rate = [](const std::vector<Scenario>& set, auto&& placement) {
    double total = 0.0;
    for (const Scenario& s : set)
      total += evaluate_general(s, placement(s), BeamformerKind::wmmse, {}, s.seed).sum_rate;
    return total / static_cast<double>(set.size());
  };
  auto fixed = [](const Scenario& s) {
    std::vector<double> x;
    for (const Waveguide& w : s.waveguides) x.push_back(w.feed_x_m);
    return x;
  };
  auto grid = [](const Scenario& s) { return grid_search_placement(s, BeamformerKind::wmmse, {}, s.seed).placement; };

  const std::vector<Scenario> set = held_out(30.0);
  const double ddpg = evaluate_policy(desk_model(30.0).policy, set);
  const double grid_rate = mean_rate(set, grid), fix_rate = mean_rate(set, fixed);
  bool pass = ddpg >= grid_rate && ddpg >= fix_rate;
  std::string detail = fmt("30 dBm: DDPG %.3f, grid %.3f, fixed %.3f; gap vs fixed", ddpg, grid_rate, fix_rate);

  double prev_gap = -1e300;
  for (double p : {20.0, 25.0, 30.0}) {
    const std::vector<Scenario> at = held_out(p);
    const double gap = evaluate_policy(desk_model(p).policy, at) - mean_rate(at, fixed);
    pass = pass && gap > prev_gap;
    prev_gap = gap;
    detail += fmt(" %g dBm %.3f", p, gap);
  }
  return {pass, "50 held-out scenarios; " + detail};
}

Outcome qos_enforcement() {
  Rng rng(1012);
  int bcd_states = 0, bcd_bad = 0, wmmse_feasible = 0, wmmse_bad = 0;
  double worst = 1e300;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Scenario s = generate_scenario(testutil::grid_config(6, seed % 2 ? 2.0 : 0.5), seed);
    const std::vector<double> cand = candidate_positions(s.physics.area_x_m, 100);
    const std::vector<int> pi = best_assignment(s, random_placement(rng, 6, 30.0)).waveguide_of_user;
    const PlacementContext ctx = make_context(power_matrices(s, cand), pi, per_waveguide_power(s),
                                              s.physics.noise_power_watts);
    const BcdResult r = bcd_solve(ctx, BcdConfig{});
    std::vector<int> pos = best_own_gain_positions(ctx);
    auto check = [&](const std::vector<int>& at) {
      const std::vector<double> rates =
          oracle::direct_rates(oracle::direct_links(raw(ctx), pi, at, ctx.power), ctx.sigma2);
      const double lo = *std::ranges::min_element(rates);
      worst = std::min(worst, lo);
      bcd_bad += lo < 0.5 - 1e-9;
      ++bcd_states;
    };
    for (const BcdMove& mv : r.trajectory) {
      pos[static_cast<std::size_t>(mv.waveguide)] = mv.to;
      if (mv.qos_gated) check(pos);
    }
    if (r.qos_feasible) check(r.state.position);
  }
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Scenario s = generate_scenario(desk_config(seed % 2 ? 20.0 : 30.0), 11000 + seed);
    const MatrixXcd h = channel_matrix(s, random_placement(rng, 4, 30.0)).entries;
    const WmmseResult r = wmmse_solve(h, s.physics.noise_power_watts, s.physics.total_power_watts, {});
    if (!r.qos_feasible) continue;
    ++wmmse_feasible;
    const VectorXd sn = direct_sinr(h, r.p, s.physics.noise_power_watts);
    const double lo = (1.0 + sn.array()).log2().minCoeff();
    worst = std::min(worst, lo);
    wmmse_bad += lo < 0.5 - 1e-9 || r.p.squaredNorm() > s.physics.total_power_watts * (1 + 1e-12);
  }
  return {bcd_bad == 0 && wmmse_bad == 0 && bcd_states > 0 && wmmse_feasible > 0,
          fmt("%d accepted BCD states, %d feasible WMMSE solutions, %d violations, lowest rate %.3f", bcd_states,
              wmmse_feasible, bcd_bad + wmmse_bad, worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"hungarian exactness", hungarian_exactness},
      {"blockage soundness", blockage_soundness},
      {"incremental update coherence", incremental_coherence},
      {"surrogate fidelity", surrogate_fidelity},
      {"exhaustive equivalence", exhaustive_equivalence},
      {"wmmse identities", wmmse_identities},
      {"gradient checks", gradient_checks},
      {"obstacle size trend", obstacle_trend},
      {"bcd-ao beats baselines", baseline_ordering},
      {"training trend", training_trend},
      {"learned placement ordering", learned_placement_ordering},
      {"qos enforcement", qos_enforcement},
  };
  int failed = 0, index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
