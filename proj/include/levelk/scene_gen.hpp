#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "levelk/rng.hpp"
#include "levelk/scene.hpp"

namespace levelk {

struct InitialSceneParams {
    double v0_min = 1.0, v0_max = 2.0;     // m/s
    double t0_min = -0.75, t0_max = 0.75;  // m, lateral offset
    double phi0_min = -0.1, phi0_max = 0.1;  // rad, heading
    int n_cars_min = 10, n_cars_max = 50;
    double gap = 6.0;  // m, bumper-to-bumper at t = 0
    double vehicle_length = 4.0, vehicle_width = 1.8;  // m
};

// Assigns a behavior to a freshly placed vehicle; the default samples a
// rule-based driver. The curriculum supplies its own sampler that mixes in
// trained policies.
using BehaviorSampler = std::function<Behavior(int lane_id, Rng& rng)>;

inline Behavior sample_level0_behavior(int lane_id, Rng& rng) {
    Behavior b;
    b.level = 0;
    b.role = lane_id == 0 ? Task::merge : Task::keep_lane;
    b.cidm = sample_driver_params(rng);
    b.yield_decision = rng.bernoulli(b.cidm.coop);
    return b;
}

// Both lanes are filled alternately with bumper-to-bumper gaps of `gap`,
// queued up behind the blockage (bottom lane) and alongside it (top lane).
// The ego occupies its fixed slot in the lane its task starts from; the
// stopped vehicle sits in the bottom lane. Throws when the road cannot hold
// n_cars at the configured gap.
inline Scene generate_initial_scene(Rng& rng, const InitialSceneParams& p,
                                    const RoadGeometry& road, Task ego_task,
                                    const BehaviorSampler& sampler = sample_level0_behavior) {
    Scene scene;
    scene.road = road;
    const double pitch = p.vehicle_length + p.gap;
    const int ego_lane = ego_task == Task::merge ? 0 : 1;

    const int n_cars = rng.uniform_int(p.n_cars_min, p.n_cars_max);

    // ego
    {
        Vehicle ego;
        ego.id = 0;
        ego.state.p_lon = road.ego_start;
        ego.state.lane_id = ego_lane;
        ego.state.v_lon = rng.uniform(p.v0_min, p.v0_max);
        ego.state.length = p.vehicle_length;
        ego.state.width = p.vehicle_width;
        ego.behavior.external = true;
        ego.behavior.role = ego_task;
        ego.behavior.cidm = nominal_params();
        scene.vehicles.push_back(ego);
        scene.ego_id = 0;
    }
    // blocked vehicle
    {
        Vehicle blocked;
        blocked.id = 1;
        blocked.state.p_lon = road.blockage_position;
        blocked.state.lane_id = 0;
        blocked.state.length = p.vehicle_length;
        blocked.state.width = p.vehicle_width;
        blocked.behavior.blocked = true;
        blocked.behavior.cidm = nominal_params();
        scene.vehicles.push_back(blocked);
        scene.blocked_id = 1;
    }

    // slot cursors per lane, moving backwards from the blockage
    double cursor[2] = {road.blockage_position - pitch, road.blockage_position};
    const double lowest = 0.5 * p.vehicle_length;
    auto peek_slot = [&](int lane) -> double {
        double s = cursor[lane];
        while (lane == ego_lane && std::abs(s - road.ego_start) < pitch - 1e-9) {
            s -= pitch;  // the ego occupies this slot
        }
        return s;
    };

    int next_id = 2;
    for (int i = 0; i < n_cars; ++i) {
        int lane = i % 2;
        if (peek_slot(lane) < lowest) lane = 1 - lane;
        const double slot = peek_slot(lane);
        if (slot < lowest) {
            throw std::runtime_error("generate_initial_scene: road too short for n_cars=" +
                                     std::to_string(n_cars));
        }
        cursor[lane] = slot - pitch;
        Vehicle v;
        v.id = next_id++;
        v.behavior = sampler(lane, rng);
        const double v0 = rng.uniform(p.v0_min, p.v0_max);
        const double t0 = rng.uniform(p.t0_min, p.t0_max);
        const double phi0 = rng.uniform(p.phi0_min, p.phi0_max);
        v.state.p_lon = slot;
        v.state.p_lat = t0;
        v.state.lane_id = lane;
        v.state.heading = phi0;
        v.state.steering_angle = phi0;
        v.state.v_lon = v0 * std::cos(phi0);
        v.state.v_lat = v0 * std::sin(phi0);
        v.state.length = p.vehicle_length;
        v.state.width = p.vehicle_width;
        scene.vehicles.push_back(v);
    }
    return scene;
}

}  // namespace levelk
