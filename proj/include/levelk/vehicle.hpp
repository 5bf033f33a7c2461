#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace levelk {

// Physical state of one vehicle. Longitudinal and lateral coordinates are
// taken along / across the corridor; p_lat is signed relative to the
// centerline of the lane the vehicle is currently attributed to.
struct VehicleState {
    double p_lon = 0.0;           // m
    double p_lat = 0.0;           // m, relative to lane centerline
    double v_lon = 0.0;           // m/s, >= 0
    double v_lat = 0.0;           // m/s
    double heading = 0.0;         // rad, relative to the centerline
    double steering_angle = 0.0;  // rad, |.| <= steering_angle_max
    int lane_id = 0;
    double length = 4.0;  // m
    double width = 1.8;   // m

    double front_bumper() const { return p_lon + 0.5 * length; }
    double rear_bumper() const { return p_lon - 0.5 * length; }
};

enum class LateralCommand { stay = 0, change_lane = 1 };

struct Action {
    double desired_speed = 0.0;  // m/s, one of {0, 3, 5}
    LateralCommand lateral = LateralCommand::stay;

    bool operator==(const Action&) const = default;
};

inline constexpr int kNumActions = 6;
inline constexpr std::array<double, 3> kDesiredSpeeds{0.0, 3.0, 5.0};

// index = 2 * speed_idx + lateral_idx, speeds ordered (0, 3, 5) m/s,
// lateral ordered (stay, change_lane)
inline Action decode_action(int index) {
    if (index < 0 || index >= kNumActions) {
        throw std::out_of_range("action index out of range: " + std::to_string(index));
    }
    return {kDesiredSpeeds[static_cast<std::size_t>(index / 2)],
            index % 2 == 0 ? LateralCommand::stay : LateralCommand::change_lane};
}

inline int encode_action(const Action& a) {
    int speed_idx = 0;
    if (a.desired_speed == kDesiredSpeeds[1]) speed_idx = 1;
    else if (a.desired_speed == kDesiredSpeeds[2]) speed_idx = 2;
    else if (a.desired_speed != kDesiredSpeeds[0]) {
        throw std::invalid_argument("desired speed not in action set");
    }
    return 2 * speed_idx + (a.lateral == LateralCommand::change_lane ? 1 : 0);
}

}  // namespace levelk
