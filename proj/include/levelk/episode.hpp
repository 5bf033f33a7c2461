#pragma once

#include <cmath>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "levelk/collision.hpp"
#include "levelk/driver_models.hpp"
#include "levelk/dynamics.hpp"
#include "levelk/observation.hpp"
#include "levelk/reward.hpp"
#include "levelk/scene_gen.hpp"

namespace levelk {

enum class Outcome { success = 0, collision = 1, timeout = 2 };

inline const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::success: return "success";
        case Outcome::collision: return "collision";
        default: return "timeout";
    }
}

// Ego experience over one decision period.
struct DecisionTransition {
    Observation s;
    int action = 0;
    double reward = 0.0;
    Observation s_next;
    bool done = false;
};

struct EpisodeResult {
    Outcome outcome = Outcome::timeout;
    double elapsed = 0.0;       // s
    double total_reward = 0.0;  // undiscounted sum of decision rewards
    bool passed_blockage = false;
    int nonego_collisions = 0;  // distinct non-ego pairs, logged only
    std::vector<DecisionTransition> transitions;
};

// Action resolver for trained opponent vehicles (greedy, own observation).
using OpponentPolicy = std::function<int(int level, Task role, const Observation&)>;

struct TraceRow {
    double time;
    int vehicle_id;
    int lane_id;
    double p_lon, p_lat, v_lon, v_lat, heading;
    bool has_action = false;
    int action_index = 0;
    bool has_reward = false;
    double reward = 0.0;
};
using TraceFn = std::function<void(const TraceRow&)>;

// One episode of the two-lane merge scenario. Every vehicle re-decides at the
// decision period (0.5 s); accelerations and states update every sim step
// (0.1 s). The externally driven ego receives its action through step(); with
// a rule-based ego the episode advances through step_auto().
class TrafficEnv {
public:
    TrafficEnv(Task task, const RoadGeometry& road, const SimConfig& sim,
               const InitialSceneParams& scene_params, const RewardWeights& reward,
               BehaviorSampler sampler = sample_level0_behavior,
               OpponentPolicy opponent_policy = {})
        : task_(task),
          road_(road),
          sim_(sim),
          scene_params_(scene_params),
          reward_(reward),
          sampler_(std::move(sampler)),
          opponent_policy_(std::move(opponent_policy)) {}

    // The ego drives itself with the rule-based model (level-0 evaluation row).
    void set_rule_based_ego(bool on) { rule_based_ego_ = on; }
    void set_trace(TraceFn fn) { trace_ = std::move(fn); }

    const Observation& reset(Rng& rng) {
        scene_ = generate_initial_scene(rng, scene_params_, road_, task_, sampler_);
        if (rule_based_ego_) {
            Vehicle& ego = scene_.vehicle(scene_.ego_id);
            ego.behavior.external = false;
            ego.behavior.level = 0;
            ego.behavior.cidm = sample_driver_params(rng);
            ego.behavior.yield_decision = rng.bernoulli(ego.behavior.cidm.coop);
        }
        if (task_ == Task::keep_lane) {
            reward_.v_desired = rng.uniform(2.0, 5.0);
        }
        intents_.assign(scene_.vehicles.size(), Intent{});
        for (std::size_t i = 0; i < scene_.vehicles.size(); ++i) {
            intents_[i].target_lane = scene_.vehicles[i].state.lane_id;
        }
        steps_ = 0;
        dwell_steps_ = 0;
        left_top_lane_ = false;
        done_ = false;
        outcome_ = Outcome::timeout;
        total_reward_ = 0.0;
        seen_pairs_.clear();
        nonego_collisions_ = 0;
        obs_ = build_observation(scene_, scene_.ego_id);
        return obs_;
    }

    struct StepResult {
        Observation obs;
        double reward = 0.0;
        bool done = false;
        Outcome outcome = Outcome::timeout;
    };

    // Advance one decision period with the given ego action.
    StepResult step(int action_index) {
        const Action action = decode_action(action_index);
        ego_action_index_ = action_index;
        decide(&action);
        return advance_window(action);
    }

    // Advance one decision period with a self-driven ego.
    StepResult step_auto() {
        ego_action_index_ = -1;
        decide(nullptr);
        return advance_window(Action{});
    }

    bool done() const { return done_; }
    Outcome outcome() const { return outcome_; }
    double time() const { return steps_ * sim_.dt; }
    double total_reward() const { return total_reward_; }
    bool passed_blockage() const { return ego_passed_blockage(scene_); }
    int nonego_collisions() const { return nonego_collisions_; }
    bool ego_external() const { return !rule_based_ego_; }
    const Scene& scene() const { return scene_; }
    const Observation& observation() const { return obs_; }
    Task task() const { return task_; }

private:
    struct Intent {
        int target_lane = 0;
        double desired_speed = 0.0;
    };

    void decide(const Action* ego_action) {
        for (std::size_t i = 0; i < scene_.vehicles.size(); ++i) {
            const Vehicle& v = scene_.vehicles[i];
            if (v.behavior.blocked) continue;
            if (v.behavior.external) {
                intents_[i].desired_speed = ego_action->desired_speed;
                intents_[i].target_lane = ego_action->lateral == LateralCommand::change_lane
                                              ? 1 - v.state.lane_id
                                              : v.state.lane_id;
            } else if (v.behavior.level == 0) {
                int target = v.state.lane_id;
                if (v.behavior.role == Task::merge &&
                    mobil_decision(scene_, v.id, mobil_) == LateralCommand::change_lane) {
                    target = 1 - v.state.lane_id;
                }
                intents_[i].target_lane = target;
            } else {
                const Observation obs = build_observation(scene_, v.id);
                const Action a =
                    decode_action(opponent_policy_(v.behavior.level, v.behavior.role, obs));
                intents_[i].desired_speed = a.desired_speed;
                intents_[i].target_lane = a.lateral == LateralCommand::change_lane
                                              ? 1 - v.state.lane_id
                                              : v.state.lane_id;
            }
        }
    }

    // The shield only follows the current lane's leader: no lateral safety
    // rule exists, squeezing into snug gaps must remain possible.
    double policy_lon_accel(const Vehicle& v, const Intent& intent) const {
        LeaderInfo best;
        if (const Vehicle* lead = nearest_ahead(scene_, v.state.p_lon, v.state.lane_id, {v.id})) {
            best = leader_info(v.state, *lead);
        }
        return shield_acceleration(v.state.v_lon, best.gap, best.closing_speed,
                                   intent.desired_speed, v.behavior.cidm);
    }

    StepResult advance_window(const Action& action) {
        const Scene window_start = scene_;
        std::vector<std::pair<double, double>> accels(scene_.vehicles.size());

        for (int k = 0; k < sim_.decision_period && !done_; ++k) {
            for (std::size_t i = 0; i < scene_.vehicles.size(); ++i) {
                const Vehicle& v = scene_.vehicles[i];
                if (v.behavior.blocked) {
                    accels[i] = {0.0, 0.0};
                    continue;
                }
                const double lat_err = global_lat(v.state, road_) -
                                       road_.lane_center(intents_[i].target_lane);
                const double a_lat = pd_lateral(lat_err, v.state.v_lat, gains_);
                const double a_lon = v.behavior.level == 0 && !v.behavior.external
                                         ? cidm_acceleration(scene_, v.id, v.behavior.cidm)
                                         : policy_lon_accel(v, intents_[i]);
                accels[i] = {a_lon, a_lat};
            }
            for (std::size_t i = 0; i < scene_.vehicles.size(); ++i) {
                Vehicle& v = scene_.vehicles[i];
                if (v.behavior.blocked) continue;
                VehicleState n = integrate_state(v.state, accels[i].first, accels[i].second, sim_);
                double glat = road_.lane_center(n.lane_id) + n.p_lat;
                if (glat < road_.lat_min()) {
                    glat = road_.lat_min();
                    n.v_lat = std::max(0.0, n.v_lat);
                } else if (glat > road_.lat_max()) {
                    glat = road_.lat_max();
                    n.v_lat = std::min(0.0, n.v_lat);
                }
                const LaneAttribution att = lane_attribution(glat, road_);
                n.lane_id = att.lane_id;
                n.p_lat = att.p_lat;
                v.state = n;
            }
            ++steps_;
            scene_.time = steps_ * sim_.dt;
            check_events();
            write_trace_rows();
        }

        StepResult r;
        r.reward = compute_reward(window_start, action, scene_, task_, reward_);
        total_reward_ += r.reward;
        r.done = done_;
        r.outcome = outcome_;
        obs_ = build_observation(scene_, scene_.ego_id);
        r.obs = obs_;
        flush_trace(r.reward);
        return r;
    }

    void check_events() {
        const auto hits = detect_collisions(scene_);
        for (const auto& pr : hits) {
            if (pr.first == scene_.ego_id || pr.second == scene_.ego_id) {
                done_ = true;
                outcome_ = Outcome::collision;
            } else if (seen_pairs_.insert(pr).second) {
                ++nonego_collisions_;
            }
        }
        if (done_) return;

        const Vehicle& ego = scene_.ego();
        if (ego.state.lane_id == 1) {
            ++dwell_steps_;
        } else {
            dwell_steps_ = 0;
            if (task_ == Task::keep_lane) left_top_lane_ = true;
        }
        const int dwell_required = static_cast<int>(std::lround(sim_.success_dwell / sim_.dt));
        if (task_ == Task::merge && dwell_steps_ >= dwell_required) {
            done_ = true;
            outcome_ = Outcome::success;
            return;
        }
        const int max_steps = static_cast<int>(std::lround(sim_.max_episode_time / sim_.dt));
        if (steps_ >= max_steps) {
            done_ = true;
            outcome_ = task_ == Task::keep_lane && !left_top_lane_ ? Outcome::success
                                                                   : Outcome::timeout;
        }
    }

    void write_trace_rows() {
        if (!trace_) return;
        for (const auto& v : scene_.vehicles) {
            TraceRow row;
            row.time = scene_.time;
            row.vehicle_id = v.id;
            row.lane_id = v.state.lane_id;
            row.p_lon = v.state.p_lon;
            row.p_lat = v.state.p_lat;
            row.v_lon = v.state.v_lon;
            row.v_lat = v.state.v_lat;
            row.heading = v.state.heading;
            if (v.id == scene_.ego_id) {
                if (ego_action_index_ >= 0) {
                    row.has_action = true;
                    row.action_index = ego_action_index_;
                }
                pending_rows_.push_back(row);
                continue;
            }
            pending_rows_.push_back(row);
        }
    }

    void flush_trace(double reward) {
        if (!trace_) return;
        // the reward of the window goes on the ego's last row
        for (auto it = pending_rows_.rbegin(); it != pending_rows_.rend(); ++it) {
            if (it->vehicle_id == scene_.ego_id) {
                it->has_reward = true;
                it->reward = reward;
                break;
            }
        }
        for (const auto& row : pending_rows_) trace_(row);
        pending_rows_.clear();
    }

    Task task_;
    RoadGeometry road_;
    SimConfig sim_;
    InitialSceneParams scene_params_;
    RewardWeights reward_;
    BehaviorSampler sampler_;
    OpponentPolicy opponent_policy_;
    MOBILParams mobil_;
    ControllerGains gains_;
    bool rule_based_ego_ = false;
    TraceFn trace_;

    Scene scene_;
    Observation obs_{};
    std::vector<Intent> intents_;
    int steps_ = 0;
    int dwell_steps_ = 0;
    bool left_top_lane_ = false;
    bool done_ = false;
    Outcome outcome_ = Outcome::timeout;
    double total_reward_ = 0.0;
    int ego_action_index_ = -1;
    std::set<std::pair<int, int>> seen_pairs_;
    int nonego_collisions_ = 0;
    std::vector<TraceRow> pending_rows_;
};

using EgoPolicy = std::function<int(const Observation&)>;

// Runs one full episode. With an externally driven ego the policy supplies an
// action index every decision period and the per-decision transitions are
// collected for training.
inline EpisodeResult run_episode(TrafficEnv& env, Rng& rng, const EgoPolicy& policy = {}) {
    EpisodeResult result;
    Observation obs = env.reset(rng);
    while (!env.done()) {
        if (env.ego_external()) {
            DecisionTransition t;
            t.s = obs;
            t.action = policy(obs);
            const auto sr = env.step(t.action);
            t.reward = sr.reward;
            t.s_next = sr.obs;
            t.done = sr.done;
            result.transitions.push_back(t);
            obs = sr.obs;
        } else {
            env.step_auto();
        }
    }
    result.outcome = env.outcome();
    result.elapsed = env.time();
    result.total_reward = env.total_reward();
    result.passed_blockage = env.passed_blockage();
    result.nonego_collisions = env.nonego_collisions();
    return result;
}

}  // namespace levelk
