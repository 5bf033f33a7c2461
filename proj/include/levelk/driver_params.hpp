#pragma once

#include "levelk/rng.hpp"

namespace levelk {

// One driver's cooperative-IDM parameter set. Supports of the sampling
// distribution are given next to each field.
struct CIDMParams {
    double eta_percept = 0.0;  // yield-area extent, fraction of lane width, [-0.15, 0.15]
    double coop = 0.5;         // probability of yielding, [0, 1]
    double delta = 4.0;        // acceleration exponent, [3.5, 4.5]
    double time_gap = 4.0;     // desired time gap T, s, [3.5, 4.5]
    double s_min = 1.5;        // minimum gap, m, [1, 2]
    double a_max = 3.0;        // maximum acceleration, m/s^2, [2.5, 3.5]
    double d_cmf = 2.0;        // comfortable deceleration, m/s^2, [1.5, 2.5]
    double v_des = 3.5;        // desired speed, m/s, [2, 5]
};

// Fixed parameter set used when a trained policy's speed decision is turned
// into an acceleration (midpoints of the sampling supports).
inline CIDMParams nominal_params() {
    return CIDMParams{};
}

struct MOBILParams {
    double politeness = 0.5;  // p >= 0
    double a_threshold = 0.1; // incentive threshold, m/s^2
    double b_safe = 2.0;      // safe braking limit for the new follower, m/s^2
};

struct ControllerGains {
    double k_p = 3.0;  // 1/s^2
    double k_d = 3.0;  // 1/s
};

// Each field drawn independently uniform over its support.
inline CIDMParams sample_driver_params(Rng& rng) {
    CIDMParams p;
    p.eta_percept = rng.uniform(-0.15, 0.15);
    p.coop = rng.uniform(0.0, 1.0);
    p.delta = rng.uniform(3.5, 4.5);
    p.time_gap = rng.uniform(3.5, 4.5);
    p.s_min = rng.uniform(1.0, 2.0);
    p.a_max = rng.uniform(2.5, 3.5);
    p.d_cmf = rng.uniform(1.5, 2.5);
    p.v_des = rng.uniform(2.0, 5.0);
    return p;
}

}  // namespace levelk
