#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <tuple>
#include <vector>

#include "levelk/scene.hpp"

namespace levelk {

inline constexpr int kNeighborSlots = 8;
inline constexpr int kEgoFeatures = 4;
inline constexpr int kSlotFeatures = 4;
inline constexpr int kObservationSize = kEgoFeatures + kNeighborSlots * kSlotFeatures;  // 36

inline constexpr double kFieldOfView = 30.0;  // m, longitudinal

// Normalization scales applied to every feature before it reaches the network.
inline constexpr double kPosScale = 30.0;      // m
inline constexpr double kVelScale = 5.0;       // m/s
inline constexpr double kHeadingScale = 0.5;   // rad

// Fixed-size ego-relative feature block: [p_lat, v_lon, v_lat, heading]
// followed by 8 neighbor slots of [rel_p_lon, rel_p_lat, rel_v_lon,
// rel_v_lat], sorted by ascending |rel_p_lon|. Empty slots hold the sentinel
// (+30 m, 0, 0, 0). All values are normalized.
using Observation = std::array<double, kObservationSize>;

inline Observation build_observation(const Scene& scene, int subject_id) {
    const Vehicle& subject = scene.vehicle(subject_id);
    const double sub_lat = global_lat(subject.state, scene.road);

    struct Candidate {
        double rel_p_lon, rel_p_lat, rel_v_lon, rel_v_lat;
        int id;
    };
    std::vector<Candidate> cands;
    cands.reserve(scene.vehicles.size());
    for (const auto& v : scene.vehicles) {
        if (v.id == subject_id) continue;
        const double rel_lon = v.state.p_lon - subject.state.p_lon;
        if (std::abs(rel_lon) > kFieldOfView) continue;
        cands.push_back({rel_lon, global_lat(v.state, scene.road) - sub_lat,
                         v.state.v_lon - subject.state.v_lon,
                         v.state.v_lat - subject.state.v_lat, v.id});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return std::tuple(std::abs(a.rel_p_lon), a.rel_p_lon, a.id) <
               std::tuple(std::abs(b.rel_p_lon), b.rel_p_lon, b.id);
    });

    Observation obs;
    obs[0] = subject.state.p_lat / kPosScale;
    obs[1] = subject.state.v_lon / kVelScale;
    obs[2] = subject.state.v_lat / kVelScale;
    obs[3] = subject.state.heading / kHeadingScale;

    for (int slot = 0; slot < kNeighborSlots; ++slot) {
        double* out = obs.data() + kEgoFeatures + slot * kSlotFeatures;
        if (slot < static_cast<int>(cands.size())) {
            const Candidate& c = cands[static_cast<std::size_t>(slot)];
            out[0] = c.rel_p_lon / kPosScale;
            out[1] = c.rel_p_lat / kPosScale;
            out[2] = c.rel_v_lon / kVelScale;
            out[3] = c.rel_v_lat / kVelScale;
        } else {
            out[0] = kFieldOfView / kPosScale;  // sentinel
            out[1] = 0.0;
            out[2] = 0.0;
            out[3] = 0.0;
        }
    }
    return obs;
}

}  // namespace levelk
