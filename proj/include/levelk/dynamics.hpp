#pragma once

#include <algorithm>
#include <cmath>

#include "levelk/vehicle.hpp"

namespace levelk {

struct SimConfig {
    double dt = 0.1;                 // s, simulation step
    int decision_period = 5;         // sim steps between actions (0.5 s)
    double max_episode_time = 40.0;  // s, timeout
    double success_dwell = 5.0;      // s of continuous target-lane occupancy
    double steering_rate_max = 0.4;  // rad/s
    double steering_angle_max = 0.5; // rad
    double v_steer_ref = 0.5;        // m/s, speed floor in the angle mapping
};

// One explicit-Euler step:
//   p' = p + v dt,  v'_lon = max(0, v_lon + a_lon dt),  v'_lat = v_lat + a_lat dt
// The steering constraints act on the velocity-vector angle (slip-free, the
// wheels point along the path): the requested lateral velocity implies a
// target angle atan2(v_lat, v_lon), which is rate-limited and clamped before
// the lateral velocity is recovered as v_lon tan(angle). A stopped vehicle
// cannot move sideways.
inline VehicleState integrate_state(const VehicleState& s, double a_lon, double a_lat,
                                    const SimConfig& cfg) {
    VehicleState n = s;
    n.p_lon = s.p_lon + s.v_lon * cfg.dt;
    n.p_lat = s.p_lat + s.v_lat * cfg.dt;
    n.v_lon = std::max(0.0, s.v_lon + a_lon * cfg.dt);

    const double v_lat_requested = s.v_lat + a_lat * cfg.dt;
    const double target = std::atan2(v_lat_requested, std::max(n.v_lon, cfg.v_steer_ref));
    const double rate_cap = cfg.steering_rate_max * cfg.dt;
    double ang = std::clamp(target, s.steering_angle - rate_cap, s.steering_angle + rate_cap);
    ang = std::clamp(ang, -cfg.steering_angle_max, cfg.steering_angle_max);
    n.steering_angle = ang;
    n.heading = ang;
    n.v_lat = n.v_lon * std::tan(ang);
    return n;
}

}  // namespace levelk
