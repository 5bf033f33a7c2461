#pragma once

#include <cmath>

#include "levelk/collision.hpp"
#include "levelk/scene.hpp"

namespace levelk {

struct RewardWeights {
    double collision = -1.0;
    double speed_coeff = -0.001;   // per m/s of |v_ego - v_desired|
    double top_lane_bonus = 0.01;  // merge task only
    double pass_bonus = 1.0;       // first time the ego clears the blockage
    double v_desired = 5.0;        // m/s, per task / episode
};

inline bool ego_passed_blockage(const Scene& scene) {
    return scene.ego().state.rear_bumper() >
           scene.vehicle(scene.blocked_id).state.front_bumper();
}

// Additive reward over one transition between consecutive scenes. The pass
// bonus fires on the prev -> next edge; longitudinal positions never decrease
// so it is earned at most once per episode.
inline double compute_reward(const Scene& prev, const Action& /*action*/, const Scene& next,
                             Task task, const RewardWeights& w) {
    double r = 0.0;
    if (ego_in_collision(next) && !ego_in_collision(prev)) r += w.collision;
    r += w.speed_coeff * std::abs(next.ego().state.v_lon - w.v_desired);
    if (task == Task::merge && next.ego().state.lane_id == 1) r += w.top_lane_bonus;
    if (ego_passed_blockage(next) && !ego_passed_blockage(prev)) r += w.pass_bonus;
    return r;
}

}  // namespace levelk
