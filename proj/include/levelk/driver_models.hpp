#pragma once

#include <cmath>
#include <initializer_list>
#include <limits>
#include <stdexcept>

#include "levelk/scene.hpp"

namespace levelk {

inline constexpr double kNoLeader = std::numeric_limits<double>::infinity();
// Gap floor for queries against an already-overlapping leader; keeps the
// interaction term finite while producing a very strong braking command.
inline constexpr double kGapFloor = 0.01;  // m
// Longitudinal extent of the yield area ahead of a cooperative driver.
inline constexpr double kYieldAheadRange = 15.0;  // m

// Intelligent-driver-model acceleration.
//   a = a_max (1 - (v / v_des)^delta - (s*/s)^2)
//   s* = s_min + max(0, v T + v dv / (2 sqrt(a_max d_cmf)))
// No leader is encoded as gap = +inf, closing_speed = 0.
inline double idm_acceleration(double v, double gap, double closing_speed, const CIDMParams& p) {
    if (!(gap > 0.0)) {
        throw std::invalid_argument("idm_acceleration: non-positive gap with a leader present");
    }
    const double s_star =
        p.s_min + std::max(0.0, v * p.time_gap +
                                    v * closing_speed / (2.0 * std::sqrt(p.a_max * p.d_cmf)));
    const double interaction = std::isinf(gap) ? 0.0 : (s_star / gap) * (s_star / gap);
    return p.a_max * (1.0 - std::pow(v / p.v_des, p.delta) - interaction);
}

// Speed decision of a trained policy turned into a longitudinal acceleration
// through the IDM rule. desired_speed = 0 brakes to a stop at the comfortable
// deceleration; the interaction term stays active either way.
inline double shield_acceleration(double v, double gap, double closing_speed, double desired_speed,
                                  const CIDMParams& p) {
    const double s_star =
        p.s_min + std::max(0.0, v * p.time_gap +
                                    v * closing_speed / (2.0 * std::sqrt(p.a_max * p.d_cmf)));
    const double interaction = std::isinf(gap) ? 0.0 : (s_star / gap) * (s_star / gap);
    const double free_term =
        desired_speed > 0.0 ? p.a_max * (1.0 - std::pow(v / desired_speed, p.delta))
                            : (v > 0.0 ? -p.d_cmf : 0.0);
    return free_term - p.a_max * interaction;
}

struct LeaderInfo {
    double gap = kNoLeader;       // bumper-to-bumper, floored at kGapFloor
    double closing_speed = 0.0;   // v_subject - v_leader
    int id = -1;
};

namespace detail {

inline bool skipped(int id, std::initializer_list<int> skip) {
    for (int s : skip) {
        if (s == id) return true;
    }
    return false;
}

}  // namespace detail

// Nearest vehicle attributed to lane_id strictly ahead of p_lon.
inline const Vehicle* nearest_ahead(const Scene& scene, double p_lon, int lane_id,
                                    std::initializer_list<int> skip = {}) {
    const Vehicle* best = nullptr;
    for (const auto& v : scene.vehicles) {
        if (v.state.lane_id != lane_id || detail::skipped(v.id, skip)) continue;
        if (v.state.p_lon <= p_lon) continue;
        if (!best || v.state.p_lon < best->state.p_lon) best = &v;
    }
    return best;
}

inline const Vehicle* nearest_behind(const Scene& scene, double p_lon, int lane_id,
                                     std::initializer_list<int> skip = {}) {
    const Vehicle* best = nullptr;
    for (const auto& v : scene.vehicles) {
        if (v.state.lane_id != lane_id || detail::skipped(v.id, skip)) continue;
        if (v.state.p_lon >= p_lon) continue;
        if (!best || v.state.p_lon > best->state.p_lon) best = &v;
    }
    return best;
}

inline LeaderInfo leader_info(const VehicleState& follower, const Vehicle& leader) {
    const double gap = leader.state.rear_bumper() - follower.front_bumper();
    return {std::max(gap, kGapFloor), follower.v_lon - leader.state.v_lon, leader.id};
}

// True when `v` (in the lane adjacent to `subject_lane`) has crossed the
// yield boundary toward the subject's lane. The boundary sits at
// (0.5 - eta) of the half lane width from the vehicle's own centerline, so a
// merger that visibly angles toward the lane triggers yielding well before
// it reaches the lane boundary; positive eta enlarges the area (earlier
// perception), negative shrinks it.
inline bool in_yield_area(const Vehicle& v, int subject_lane, double subject_p_lon,
                          const RoadGeometry& road, double eta) {
    if (v.state.lane_id == subject_lane) return false;
    const double ahead = v.state.p_lon - subject_p_lon;
    if (ahead <= 0.0 || ahead > kYieldAheadRange) return false;
    const double toward = subject_lane > v.state.lane_id ? v.state.p_lat : -v.state.p_lat;
    return toward > (0.5 - eta) * 0.5 * road.lane_width;
}

// Cooperative IDM: plain IDM against the nearest effective leader, where a
// yielding driver also treats vehicles inside its yield area as leaders.
inline double cidm_acceleration(const Scene& scene, int subject_id, const CIDMParams& p) {
    const Vehicle& subject = scene.vehicle(subject_id);
    const VehicleState& s = subject.state;

    LeaderInfo best;
    if (const Vehicle* lead = nearest_ahead(scene, s.p_lon, s.lane_id, {subject_id})) {
        best = leader_info(s, *lead);
    }
    if (subject.behavior.yield_decision) {
        for (const auto& v : scene.vehicles) {
            if (v.id == subject_id) continue;
            if (!in_yield_area(v, s.lane_id, s.p_lon, scene.road, p.eta_percept)) continue;
            const LeaderInfo li = leader_info(s, v);
            if (li.gap < best.gap) best = li;
        }
    }
    return idm_acceleration(s.v_lon, best.gap, best.closing_speed, p);
}

// Proportional-derivative lateral controller; p_lat is measured relative to
// the target lane's centerline.
inline double pd_lateral(double p_lat, double v_lat, const ControllerGains& g) {
    return -g.k_p * p_lat - g.k_d * v_lat;
}

namespace detail {

inline double accel_against(const Vehicle& follower, const Vehicle* leader) {
    if (!leader) {
        return idm_acceleration(follower.state.v_lon, kNoLeader, 0.0, follower.behavior.cidm);
    }
    const LeaderInfo li = leader_info(follower.state, *leader);
    return idm_acceleration(follower.state.v_lon, li.gap, li.closing_speed, follower.behavior.cidm);
}

// Acceleration of `follower` if `virtual_leader` were directly ahead of it.
inline double accel_with_leader(const Vehicle& follower, const Vehicle& virtual_leader) {
    const LeaderInfo li = leader_info(follower.state, virtual_leader);
    return idm_acceleration(follower.state.v_lon, li.gap, li.closing_speed, follower.behavior.cidm);
}

}  // namespace detail

// MOBIL lane-change test: change iff the prospective new follower is not
// forced below -b_safe and the politeness-weighted acceleration gain clears
// the threshold.
inline LateralCommand mobil_decision(const Scene& scene, int subject_id, const MOBILParams& m) {
    const Vehicle& subject = scene.vehicle(subject_id);
    const VehicleState& s = subject.state;
    const int target = 1 - s.lane_id;

    const Vehicle* own_leader = nearest_ahead(scene, s.p_lon, s.lane_id, {subject_id});
    const Vehicle* target_leader = nearest_ahead(scene, s.p_lon, target, {subject_id});
    const Vehicle* new_follower = nearest_behind(scene, s.p_lon, target, {subject_id});
    const Vehicle* old_follower = nearest_behind(scene, s.p_lon, s.lane_id, {subject_id});

    const double a_self = detail::accel_against(subject, own_leader);
    const double a_self_new = detail::accel_against(subject, target_leader);

    double follower_gain = 0.0;
    if (new_follower) {
        const double a_nf_new = detail::accel_with_leader(*new_follower, subject);
        if (a_nf_new < -m.b_safe) return LateralCommand::stay;  // safety dominates
        const double a_nf = detail::accel_against(*new_follower,
                                                  nearest_ahead(scene, new_follower->state.p_lon,
                                                                target, {subject_id, new_follower->id}));
        follower_gain += a_nf_new - a_nf;
    }
    if (old_follower) {
        const double a_of = detail::accel_with_leader(*old_follower, subject);
        const double a_of_new = detail::accel_against(*old_follower, own_leader);
        follower_gain += a_of_new - a_of;
    }

    const double incentive = a_self_new - a_self + m.politeness * follower_gain;
    return incentive > m.a_threshold ? LateralCommand::change_lane : LateralCommand::stay;
}

struct Level0Command {
    double a_lon = 0.0;
    double a_lat = 0.0;
    int desired_lane = 0;
};

// Composed rule-based step: cooperative IDM for the longitudinal axis, MOBIL
// (merging role only) for the lane decision, PD tracking of the desired lane.
inline Level0Command level0_step(const Scene& scene, int subject_id, const MOBILParams& m,
                                 const ControllerGains& g) {
    const Vehicle& subject = scene.vehicle(subject_id);
    const VehicleState& s = subject.state;

    int desired_lane = s.lane_id;
    if (subject.behavior.role == Task::merge &&
        mobil_decision(scene, subject_id, m) == LateralCommand::change_lane) {
        desired_lane = 1 - s.lane_id;
    }
    const double lat_err = global_lat(s, scene.road) - scene.road.lane_center(desired_lane);
    return {cidm_acceleration(scene, subject_id, subject.behavior.cidm),
            pd_lateral(lat_err, s.v_lat, g), desired_lane};
}

}  // namespace levelk
