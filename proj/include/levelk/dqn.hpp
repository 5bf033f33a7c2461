#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "levelk/adam.hpp"
#include "levelk/episode.hpp"
#include "levelk/qnet.hpp"
#include "levelk/replay.hpp"

namespace levelk {

struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.01;
    std::int64_t decay_steps = 50000;

    // linear interpolation, constant after decay_steps
    double value(std::int64_t step) const {
        if (step >= decay_steps) return end;
        const double t = static_cast<double>(step) / static_cast<double>(decay_steps);
        return start + (end - start) * t;
    }
};

struct TrainConfig {
    std::int64_t total_steps = 500000;  // environment decision steps
    double gamma = 0.99;
    double learning_rate = 1e-4;
    int batch_size = 32;
    std::int64_t target_sync = 2000;  // gradient updates between target copies
    EpsilonSchedule epsilon;
    std::size_t buffer_capacity = 100000;
    std::size_t warmup = 1000;
    std::int64_t eval_interval = 10000;  // decision steps between greedy evaluations
    int eval_episodes = 20;
    double per_alpha = 0.6;
    double per_beta_start = 0.4;
    double per_beta_end = 1.0;  // annealed linearly over total_steps
    double per_epsilon = 1e-3;  // priority floor
    // exploration moves are held for up to this many extra decisions, so
    // random lane changes last long enough to produce real maneuvers
    int exploration_persistence = 5;
    // added to the value-head bias on fresh initialization; rarely-visited
    // states keep an attractive value until experience corrects them
    double optimistic_value_init = 0.0;
};

// Double Q-learning target: the online network picks the next action, the
// target network evaluates it. Terminal transitions do not bootstrap.
inline double double_dqn_target(double r, const Observation& s_next, bool done,
                                const NetworkWeights& online, const NetworkWeights& target,
                                double gamma) {
    if (done || gamma == 0.0) return r;
    const auto q_online = forward(online, s_next);
    int best = 0;
    for (int a = 1; a < kNumActions; ++a) {
        if (q_online[static_cast<std::size_t>(a)] > q_online[static_cast<std::size_t>(best)]) best = a;
    }
    const auto q_target = forward(target, s_next);
    return r + gamma * q_target[static_cast<std::size_t>(best)];
}

// Minimal episodic environment surface the trainer needs. `terminal` marks a
// true MDP terminal (no bootstrapping); `episode_over` additionally covers
// time-limit truncation, after which the trainer resets.
class Environment {
public:
    virtual ~Environment() = default;
    virtual Observation reset(Rng& rng) = 0;

    struct Step {
        Observation obs;
        double reward = 0.0;
        bool terminal = false;
        bool episode_over = false;
        Outcome outcome = Outcome::timeout;
    };
    virtual Step step(int action) = 0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

struct CurvePoint {
    std::int64_t step = 0;
    double success_rate = 0.0;
    double collision_rate = 0.0;
    double timeout_rate = 0.0;
    double mean_return = 0.0;
    double epsilon = 0.0;
};

struct TrainResult {
    NetworkWeights weights;
    std::vector<CurvePoint> curve;
    double train_seconds = 0.0;
    std::int64_t gradient_updates = 0;
};

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace dqn_detail {

inline CurvePoint evaluate_greedy(Environment& env, const NetworkWeights& weights,
                                  std::int64_t step, double eps, int episodes,
                                  std::uint64_t eval_seed) {
    CurvePoint pt;
    pt.step = step;
    pt.epsilon = eps;
    for (int e = 0; e < episodes; ++e) {
        Rng rng(seed_chain(eval_seed, static_cast<std::uint64_t>(e)));
        Observation obs = env.reset(rng);
        double ep_return = 0.0;
        Environment::Step sr;
        do {
            sr = env.step(greedy_action(weights, obs));
            ep_return += sr.reward;
            obs = sr.obs;
        } while (!sr.episode_over);
        pt.mean_return += ep_return;
        switch (sr.outcome) {
            case Outcome::success: pt.success_rate += 1.0; break;
            case Outcome::collision: pt.collision_rate += 1.0; break;
            case Outcome::timeout: pt.timeout_rate += 1.0; break;
        }
    }
    const double n = episodes > 0 ? static_cast<double>(episodes) : 1.0;
    pt.success_rate /= n;
    pt.collision_rate /= n;
    pt.timeout_rate /= n;
    pt.mean_return /= n;
    return pt;
}

}  // namespace dqn_detail

// One deep Q-learning run: epsilon-greedy rollouts, prioritized replay,
// double-DQN targets, one gradient update per decision step after warm-up,
// periodic target sync and greedy evaluation. Deterministic given the rng.
inline TrainResult train_level(const EnvFactory& make_env, const NetworkWeights* init,
                               const TrainConfig& cfg, Rng& rng) {
    const auto wall_start = std::chrono::steady_clock::now();

    TrainResult result;
    if (init) {
        result.weights = *init;
    } else {
        result.weights = init_weights(rng);
        result.weights.params[static_cast<std::size_t>(result.weights.offsets().value_b)] +=
            cfg.optimistic_value_init;
    }
    NetworkWeights& online = result.weights;
    online.validate();
    NetworkWeights target = online;

    const std::uint64_t eval_seed = rng.next();

    if (cfg.total_steps == 0) return result;

    OptimizerState opt(cfg.learning_rate, online.params.size());
    PrioritizedBuffer buffer(cfg.buffer_capacity, cfg.per_alpha, cfg.per_epsilon);

    std::unique_ptr<Environment> env = make_env();
    std::unique_ptr<Environment> eval_env = make_env();

    GradientBatch batch;
    Observation obs = env->reset(rng);
    std::int64_t updates = 0;
    int burst_action = 0;
    int burst_left = 0;

    for (std::int64_t step = 0; step < cfg.total_steps; ++step) {
        const double eps = cfg.epsilon.value(step);
        int action;
        if (burst_left > 0) {
            action = burst_action;
            --burst_left;
        } else if (rng.uniform() < eps) {
            burst_action = rng.uniform_int(0, kNumActions - 1);
            burst_left = cfg.exploration_persistence > 0
                             ? rng.uniform_int(0, cfg.exploration_persistence)
                             : 0;
            action = burst_action;
        } else {
            action = greedy_action(online, obs);
        }
        const Environment::Step sr = env->step(action);
        buffer.push({obs, action, sr.reward, sr.obs, sr.terminal});
        if (sr.episode_over) {
            obs = env->reset(rng);
            burst_left = 0;
        } else {
            obs = sr.obs;
        }

        if (buffer.size() >= cfg.warmup) {
            const double beta =
                cfg.per_beta_start + (cfg.per_beta_end - cfg.per_beta_start) *
                                         (static_cast<double>(step) /
                                          static_cast<double>(cfg.total_steps));
            const SampledBatch sampled =
                buffer.sample(static_cast<std::size_t>(cfg.batch_size), beta, rng);
            const std::size_t b = sampled.indices.size();
            batch.obs.resize(b);
            batch.action.resize(b);
            batch.target.resize(b);
            batch.weight.resize(b);
            for (std::size_t i = 0; i < b; ++i) {
                const Experience& e = buffer.at(sampled.indices[i]);
                batch.obs[i] = e.s;
                batch.action[i] = e.a;
                batch.target[i] = double_dqn_target(e.r, e.s_next, e.done, online, target, cfg.gamma);
                batch.weight[i] = sampled.weights[i];
            }
            GradientResult g = gradient(online, batch);
            if (!std::isfinite(g.loss)) {
                throw TrainingDiverged("train_level: non-finite loss at step " +
                                       std::to_string(step));
            }
            optimizer_step(online.params, g.grad, opt);
            ++updates;
            for (std::size_t i = 0; i < b; ++i) {
                buffer.update_priority(sampled.indices[i], std::abs(g.td_error[i]));
            }
            if (updates % cfg.target_sync == 0) target = online;
        }

        if (cfg.eval_interval > 0 && (step + 1) % cfg.eval_interval == 0) {
            result.curve.push_back(dqn_detail::evaluate_greedy(
                *eval_env, online, step + 1, eps, cfg.eval_episodes,
                seed_chain(eval_seed, static_cast<std::uint64_t>(step + 1))));
        }
    }

    result.gradient_updates = updates;
    result.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return result;
}

}  // namespace levelk
