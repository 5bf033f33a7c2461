#pragma once

namespace levelk {

// Straight two-lane corridor. Lane 0 is the bottom (start) lane, lane 1 the
// top (target) lane; the centerline of lane i lies at lateral coordinate
// i * lane_width. The blocked vehicle sits in the bottom lane.
struct RoadGeometry {
    int lane_count = 2;
    double lane_width = 3.0;           // m
    double road_length = 500.0;        // m
    double ego_start = 200.0;          // m, ego initial longitudinal position
    double blockage_position = 270.0;  // m, stopped vehicle, bottom lane

    double lane_center(int lane_id) const { return lane_id * lane_width; }

    // lateral road bounds: half a lane beyond each centerline
    double lat_min() const { return -0.5 * lane_width; }
    double lat_max() const { return lane_center(lane_count - 1) + 0.5 * lane_width; }
};

struct LaneAttribution {
    int lane_id;
    double p_lat;  // relative to the attributed lane's centerline
};

// Nearest-centerline attribution; the exact midpoint goes to the lower lane.
inline LaneAttribution lane_attribution(double p_lat_global, const RoadGeometry& road) {
    const int lane = p_lat_global > 0.5 * road.lane_width ? 1 : 0;
    return {lane, p_lat_global - road.lane_center(lane)};
}

}  // namespace levelk
