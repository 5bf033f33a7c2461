#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "levelk/scene.hpp"

namespace levelk {

// Oriented bounding box in road coordinates (x = longitudinal, y = lateral).
struct Obb {
    double cx, cy;      // center
    double ux, uy;      // unit axis along the vehicle (cos/sin heading)
    double half_len, half_wid;
};

inline Obb vehicle_obb(const VehicleState& s, const RoadGeometry& road) {
    return {s.p_lon, global_lat(s, road), std::cos(s.heading), std::sin(s.heading),
            0.5 * s.length, 0.5 * s.width};
}

// Separating-axis test for two oriented rectangles. Touching edges do not
// count as overlap.
inline bool obb_overlap(const Obb& a, const Obb& b) {
    const double axes[4][2] = {
        {a.ux, a.uy}, {-a.uy, a.ux}, {b.ux, b.uy}, {-b.uy, b.ux}};
    const double dx = b.cx - a.cx;
    const double dy = b.cy - a.cy;
    for (const auto& ax : axes) {
        const double ra = a.half_len * std::abs(ax[0] * a.ux + ax[1] * a.uy) +
                          a.half_wid * std::abs(-ax[0] * a.uy + ax[1] * a.ux);
        const double rb = b.half_len * std::abs(ax[0] * b.ux + ax[1] * b.uy) +
                          b.half_wid * std::abs(-ax[0] * b.uy + ax[1] * b.ux);
        if (std::abs(dx * ax[0] + dy * ax[1]) >= ra + rb) return false;
    }
    return true;
}

// All overlapping vehicle pairs, each reported once with id_a < id_b.
// Broad phase: sort by longitudinal position, test only pairs whose bounding
// circles can reach each other.
inline std::vector<std::pair<int, int>> detect_collisions(const Scene& scene) {
    const std::size_t n = scene.vehicles.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return scene.vehicles[i].state.p_lon < scene.vehicles[j].state.p_lon;
    });

    std::vector<Obb> boxes(n);
    std::vector<double> reach(n);
    for (std::size_t i = 0; i < n; ++i) {
        boxes[i] = vehicle_obb(scene.vehicles[i].state, scene.road);
        reach[i] = std::hypot(boxes[i].half_len, boxes[i].half_wid);
    }

    std::vector<std::pair<int, int>> hits;
    for (std::size_t oi = 0; oi < n; ++oi) {
        const std::size_t i = order[oi];
        for (std::size_t oj = oi + 1; oj < n; ++oj) {
            const std::size_t j = order[oj];
            if (boxes[j].cx - boxes[i].cx > reach[i] + reach[j]) break;
            if (obb_overlap(boxes[i], boxes[j])) {
                const int a = scene.vehicles[i].id;
                const int b = scene.vehicles[j].id;
                hits.emplace_back(std::min(a, b), std::max(a, b));
            }
        }
    }
    std::sort(hits.begin(), hits.end());
    return hits;
}

inline bool ego_in_collision(const Scene& scene) {
    const Vehicle& ego = scene.ego();
    const Obb ego_box = vehicle_obb(ego.state, scene.road);
    const double ego_reach = std::hypot(ego_box.half_len, ego_box.half_wid);
    for (const auto& v : scene.vehicles) {
        if (v.id == ego.id) continue;
        if (std::abs(v.state.p_lon - ego.state.p_lon) > ego_reach + v.state.length) continue;
        if (obb_overlap(ego_box, vehicle_obb(v.state, scene.road))) return true;
    }
    return false;
}

}  // namespace levelk
