#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "levelk/driver_params.hpp"
#include "levelk/road.hpp"
#include "levelk/vehicle.hpp"

namespace levelk {

// Lane-level maneuver a vehicle is responsible for. Merging vehicles start in
// the bottom lane and want the top lane; keep-lane vehicles hold the top lane.
enum class Task { merge = 0, keep_lane = 1 };

inline const char* task_name(Task t) { return t == Task::merge ? "merge" : "keep_lane"; }

// How a vehicle picks its actions. Level 0 is the rule-based driver; levels
// >= 1 are trained policies acting greedily. The externally driven vehicle
// (the trainee or the policy under evaluation) receives its actions from the
// episode loop.
struct Behavior {
    int level = 0;
    Task role = Task::merge;
    bool blocked = false;   // permanently stopped
    bool external = false;  // actions injected by the episode driver
    CIDMParams cidm;        // sampled for level 0, nominal otherwise
    bool yield_decision = false;  // per-episode Bernoulli(coop) draw
};

struct Vehicle {
    int id = -1;
    VehicleState state;
    Behavior behavior;
};

struct Scene {
    double time = 0.0;
    RoadGeometry road;
    std::vector<Vehicle> vehicles;
    int ego_id = -1;
    int blocked_id = -1;

    const Vehicle& vehicle(int id) const {
        for (const auto& v : vehicles) {
            if (v.id == id) return v;
        }
        throw std::out_of_range("unknown vehicle id: " + std::to_string(id));
    }

    Vehicle& vehicle(int id) {
        for (auto& v : vehicles) {
            if (v.id == id) return v;
        }
        throw std::out_of_range("unknown vehicle id: " + std::to_string(id));
    }

    const Vehicle& ego() const { return vehicle(ego_id); }
};

// Lateral position in road coordinates (0 = bottom lane centerline).
inline double global_lat(const VehicleState& s, const RoadGeometry& road) {
    return road.lane_center(s.lane_id) + s.p_lat;
}

}  // namespace levelk
