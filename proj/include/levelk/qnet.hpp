#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "levelk/observation.hpp"
#include "levelk/rng.hpp"
#include "levelk/scene.hpp"

namespace levelk {

// Dueling Q-network over the 36-value observation: a weight-shared two-stage
// encoder maps each 4-value neighbor slot to 32 then 64 channels, an
// element-wise maximum pools the 8 slots, the 4 ego features pass through a
// dense 32 branch, the concatenation feeds a dense 64 trunk, and value /
// advantage heads produce q[a] = V + A[a] - mean(A). Hidden layers are
// rectified-linear, heads are identity.
struct NetworkConfig {
    int slot_features = kSlotFeatures;
    int slots = kNeighborSlots;
    int enc1 = 32;
    int enc2 = 64;
    int ego_features = kEgoFeatures;
    int ego_hidden = 32;
    int trunk = 64;
    int actions = kNumActions;

    bool operator==(const NetworkConfig&) const = default;

    int trunk_in() const { return enc2 + ego_hidden; }

    // layer sizes in declaration order: (weights, bias) per layer
    std::array<std::pair<int, int>, 6> layer_dims() const {
        return {{{enc1 * slot_features, enc1},
                 {enc2 * enc1, enc2},
                 {ego_hidden * ego_features, ego_hidden},
                 {trunk * trunk_in(), trunk},
                 {1 * trunk, 1},
                 {actions * trunk, actions}}};
    }

    int param_count() const {
        int n = 0;
        for (const auto& [w, b] : layer_dims()) n += w + b;
        return n;
    }

    // 64-bit FNV-1a over the architecture dimensions
    std::uint64_t fingerprint() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](int v) {
            for (int i = 0; i < 4; ++i) {
                h ^= static_cast<std::uint64_t>((static_cast<std::uint32_t>(v) >> (8 * i)) & 0xff);
                h *= 0x100000001b3ULL;
            }
        };
        for (int v : {slot_features, slots, enc1, enc2, ego_features, ego_hidden, trunk, actions}) {
            mix(v);
        }
        return h;
    }
};

// All parameters of the network as one flat 64-bit float vector, with the
// task tag and reasoning level carried alongside for persistence.
struct NetworkWeights {
    NetworkConfig config;
    Task task = Task::merge;
    int level = 1;
    std::vector<double> params;

    // offsets into params, declaration order
    struct Offsets {
        int enc1_w, enc1_b, enc2_w, enc2_b, ego_w, ego_b, trunk_w, trunk_b, value_w, value_b,
            adv_w, adv_b;
    };
    Offsets offsets() const {
        Offsets o{};
        int at = 0;
        const auto dims = config.layer_dims();
        int* fields[12] = {&o.enc1_w, &o.enc1_b, &o.enc2_w, &o.enc2_b, &o.ego_w, &o.ego_b,
                           &o.trunk_w, &o.trunk_b, &o.value_w, &o.value_b, &o.adv_w, &o.adv_b};
        int f = 0;
        for (const auto& [w, b] : dims) {
            *fields[f++] = at;
            at += w;
            *fields[f++] = at;
            at += b;
        }
        return o;
    }

    void validate() const {
        if (static_cast<int>(params.size()) != config.param_count()) {
            throw std::runtime_error("network weights: parameter count mismatch");
        }
        for (double v : params) {
            if (!std::isfinite(v)) throw std::runtime_error("network weights: non-finite entry");
        }
    }
};

// Scaled-uniform initialization, scale 1/sqrt(fan_in) per layer, zero biases.
inline NetworkWeights init_weights(Rng& rng, Task task = Task::merge, int level = 1,
                                   const NetworkConfig& cfg = {}) {
    NetworkWeights w;
    w.config = cfg;
    w.task = task;
    w.level = level;
    w.params.assign(static_cast<std::size_t>(cfg.param_count()), 0.0);
    const int fan_in[6] = {cfg.slot_features, cfg.enc1, cfg.ego_features,
                           cfg.trunk_in(), cfg.trunk, cfg.trunk};
    int at = 0;
    int layer = 0;
    for (const auto& [nw, nb] : cfg.layer_dims()) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in[layer++]));
        for (int i = 0; i < nw; ++i) w.params[static_cast<std::size_t>(at + i)] = rng.uniform(-scale, scale);
        at += nw + nb;  // biases stay zero
    }
    return w;
}

// q[a] = V + A[a] - mean(A)
inline std::array<double, kNumActions> aggregate_dueling(double value,
                                                         const std::array<double, kNumActions>& adv) {
    double mean = 0.0;
    for (double a : adv) mean += a;
    mean /= kNumActions;
    std::array<double, kNumActions> q;
    for (int i = 0; i < kNumActions; ++i) q[static_cast<std::size_t>(i)] = value + adv[static_cast<std::size_t>(i)] - mean;
    return q;
}

namespace qnet_detail {

struct Activations {
    std::array<double, kNeighborSlots * 32> h1;
    std::array<double, kNeighborSlots * 64> h2;
    std::array<double, 64> pooled;
    std::array<int, 64> pool_src;
    std::array<double, 32> ego_h;
    std::array<double, 96> trunk_in;
    std::array<double, 64> trunk_h;
    double value;
    std::array<double, kNumActions> adv;
    std::array<double, kNumActions> q;
};

inline void forward_impl(const NetworkWeights& w, const Observation& obs, Activations& act) {
    const auto off = w.offsets();
    const double* p = w.params.data();
    const NetworkConfig& c = w.config;

    for (int s = 0; s < c.slots; ++s) {
        const double* in = obs.data() + c.ego_features + s * c.slot_features;
        double* h1 = act.h1.data() + s * c.enc1;
        for (int r = 0; r < c.enc1; ++r) {
            const double* wr = p + off.enc1_w + r * c.slot_features;
            double z = p[off.enc1_b + r];
            for (int k = 0; k < c.slot_features; ++k) z += wr[k] * in[k];
            h1[r] = z > 0.0 ? z : 0.0;
        }
        double* h2 = act.h2.data() + s * c.enc2;
        for (int r = 0; r < c.enc2; ++r) {
            const double* wr = p + off.enc2_w + r * c.enc1;
            double z = p[off.enc2_b + r];
            for (int k = 0; k < c.enc1; ++k) z += wr[k] * h1[k];
            h2[r] = z > 0.0 ? z : 0.0;
        }
    }
    for (int r = 0; r < c.enc2; ++r) {
        double best = act.h2[static_cast<std::size_t>(r)];
        int src = 0;
        for (int s = 1; s < c.slots; ++s) {
            const double v = act.h2[static_cast<std::size_t>(s * c.enc2 + r)];
            if (v > best) {
                best = v;
                src = s;
            }
        }
        act.pooled[static_cast<std::size_t>(r)] = best;
        act.pool_src[static_cast<std::size_t>(r)] = src;
    }
    for (int r = 0; r < c.ego_hidden; ++r) {
        const double* wr = p + off.ego_w + r * c.ego_features;
        double z = p[off.ego_b + r];
        for (int k = 0; k < c.ego_features; ++k) z += wr[k] * obs[static_cast<std::size_t>(k)];
        act.ego_h[static_cast<std::size_t>(r)] = z > 0.0 ? z : 0.0;
    }
    std::copy(act.pooled.begin(), act.pooled.end(), act.trunk_in.begin());
    std::copy(act.ego_h.begin(), act.ego_h.end(), act.trunk_in.begin() + c.enc2);
    for (int r = 0; r < c.trunk; ++r) {
        const double* wr = p + off.trunk_w + r * c.trunk_in();
        double z = p[off.trunk_b + r];
        for (int k = 0; k < c.trunk_in(); ++k) z += wr[k] * act.trunk_in[static_cast<std::size_t>(k)];
        act.trunk_h[static_cast<std::size_t>(r)] = z > 0.0 ? z : 0.0;
    }
    {
        const double* wr = p + off.value_w;
        double z = p[off.value_b];
        for (int k = 0; k < c.trunk; ++k) z += wr[k] * act.trunk_h[static_cast<std::size_t>(k)];
        act.value = z;
    }
    for (int r = 0; r < c.actions; ++r) {
        const double* wr = p + off.adv_w + r * c.trunk;
        double z = p[off.adv_b + r];
        for (int k = 0; k < c.trunk; ++k) z += wr[k] * act.trunk_h[static_cast<std::size_t>(k)];
        act.adv[static_cast<std::size_t>(r)] = z;
    }
    act.q = aggregate_dueling(act.value, act.adv);
}

// Backward pass for one sample; dq is dL/dq. Gradient accumulates into grad.
inline void backward_impl(const NetworkWeights& w, const Observation& obs, const Activations& act,
                          const std::array<double, kNumActions>& dq, double* grad) {
    const auto off = w.offsets();
    const double* p = w.params.data();
    const NetworkConfig& c = w.config;

    double dq_sum = 0.0;
    for (double v : dq) dq_sum += v;
    const double d_value = dq_sum;
    std::array<double, kNumActions> d_adv;
    for (int a = 0; a < c.actions; ++a) {
        d_adv[static_cast<std::size_t>(a)] = dq[static_cast<std::size_t>(a)] - dq_sum / c.actions;
    }

    std::array<double, 64> d_trunk_h{};
    {
        const double* wr = p + off.value_w;
        for (int k = 0; k < c.trunk; ++k) d_trunk_h[static_cast<std::size_t>(k)] += d_value * wr[k];
        for (int k = 0; k < c.trunk; ++k) grad[off.value_w + k] += d_value * act.trunk_h[static_cast<std::size_t>(k)];
        grad[off.value_b] += d_value;
    }
    for (int a = 0; a < c.actions; ++a) {
        const double da = d_adv[static_cast<std::size_t>(a)];
        if (da == 0.0) continue;
        const double* wr = p + off.adv_w + a * c.trunk;
        for (int k = 0; k < c.trunk; ++k) d_trunk_h[static_cast<std::size_t>(k)] += da * wr[k];
        double* gr = grad + off.adv_w + a * c.trunk;
        for (int k = 0; k < c.trunk; ++k) gr[k] += da * act.trunk_h[static_cast<std::size_t>(k)];
        grad[off.adv_b + a] += da;
    }

    std::array<double, 96> d_trunk_in{};
    for (int r = 0; r < c.trunk; ++r) {
        if (act.trunk_h[static_cast<std::size_t>(r)] <= 0.0) continue;
        const double dz = d_trunk_h[static_cast<std::size_t>(r)];
        if (dz == 0.0) continue;
        const double* wr = p + off.trunk_w + r * c.trunk_in();
        double* gr = grad + off.trunk_w + r * c.trunk_in();
        for (int k = 0; k < c.trunk_in(); ++k) {
            d_trunk_in[static_cast<std::size_t>(k)] += dz * wr[k];
            gr[k] += dz * act.trunk_in[static_cast<std::size_t>(k)];
        }
        grad[off.trunk_b + r] += dz;
    }

    // ego branch
    for (int r = 0; r < c.ego_hidden; ++r) {
        if (act.ego_h[static_cast<std::size_t>(r)] <= 0.0) continue;
        const double dz = d_trunk_in[static_cast<std::size_t>(c.enc2 + r)];
        if (dz == 0.0) continue;
        double* gr = grad + off.ego_w + r * c.ego_features;
        for (int k = 0; k < c.ego_features; ++k) gr[k] += dz * obs[static_cast<std::size_t>(k)];
        grad[off.ego_b + r] += dz;
    }

    // pooled channels route to the winning slot
    std::array<double, kNeighborSlots * 64> d_h2{};
    for (int r = 0; r < c.enc2; ++r) {
        const double dp = d_trunk_in[static_cast<std::size_t>(r)];
        if (dp == 0.0) continue;
        d_h2[static_cast<std::size_t>(act.pool_src[static_cast<std::size_t>(r)] * c.enc2 + r)] = dp;
    }
    for (int s = 0; s < c.slots; ++s) {
        const double* h1 = act.h1.data() + s * c.enc1;
        const double* h2 = act.h2.data() + s * c.enc2;
        const double* dh2 = d_h2.data() + s * c.enc2;
        std::array<double, 32> d_h1{};
        bool any = false;
        for (int r = 0; r < c.enc2; ++r) {
            if (h2[r] <= 0.0) continue;
            const double dz = dh2[r];
            if (dz == 0.0) continue;
            any = true;
            const double* wr = p + off.enc2_w + r * c.enc1;
            double* gr = grad + off.enc2_w + r * c.enc1;
            for (int k = 0; k < c.enc1; ++k) {
                d_h1[static_cast<std::size_t>(k)] += dz * wr[k];
                gr[k] += dz * h1[k];
            }
            grad[off.enc2_b + r] += dz;
        }
        if (!any) continue;
        const double* in = obs.data() + c.ego_features + s * c.slot_features;
        for (int r = 0; r < c.enc1; ++r) {
            if (h1[r] <= 0.0) continue;
            const double dz = d_h1[static_cast<std::size_t>(r)];
            if (dz == 0.0) continue;
            double* gr = grad + off.enc1_w + r * c.slot_features;
            for (int k = 0; k < c.slot_features; ++k) gr[k] += dz * in[k];
            grad[off.enc1_b + r] += dz;
        }
    }
}

}  // namespace qnet_detail

// The activation workspace is sized for the shipped architecture.
inline void require_default_architecture(const NetworkWeights& w) {
    if (!(w.config == NetworkConfig{})) {
        throw std::runtime_error("unsupported network architecture");
    }
}

inline std::array<double, kNumActions> forward(const NetworkWeights& w, const Observation& obs) {
    require_default_architecture(w);
    qnet_detail::Activations act;
    qnet_detail::forward_impl(w, obs, act);
    for (double v : act.q) {
        if (!std::isfinite(v)) throw std::runtime_error("forward: non-finite network output");
    }
    return act.q;
}

// Lowest index wins ties, so greedy play is deterministic.
inline int greedy_action(const NetworkWeights& w, const Observation& obs) {
    const auto q = forward(w, obs);
    int best = 0;
    for (int a = 1; a < kNumActions; ++a) {
        if (q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
    }
    return best;
}

struct GradientBatch {
    std::vector<Observation> obs;
    std::vector<int> action;
    std::vector<double> target;
    std::vector<double> weight;  // importance weights

    std::size_t size() const { return obs.size(); }
};

struct GradientResult {
    double loss = 0.0;
    std::vector<double> grad;
    std::vector<double> td_error;  // y - Q(s, a), per sample
};

// Importance-weighted squared TD error on the taken actions:
//   loss = (1/B) sum_i w_i (y_i - Q(s_i, a_i))^2
inline GradientResult gradient(const NetworkWeights& w, const GradientBatch& batch) {
    if (batch.size() == 0) throw std::invalid_argument("gradient: empty batch");
    require_default_architecture(w);
    GradientResult res;
    res.grad.assign(w.params.size(), 0.0);
    res.td_error.resize(batch.size());
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    qnet_detail::Activations act;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (!std::isfinite(batch.target[i])) throw std::invalid_argument("gradient: non-finite target");
        qnet_detail::forward_impl(w, batch.obs[i], act);
        const int a = batch.action[i];
        const double td = batch.target[i] - act.q[static_cast<std::size_t>(a)];
        res.td_error[i] = td;
        res.loss += batch.weight[i] * td * td * inv_b;
        std::array<double, kNumActions> dq{};
        dq[static_cast<std::size_t>(a)] = -2.0 * batch.weight[i] * td * inv_b;
        qnet_detail::backward_impl(w, batch.obs[i], act, dq, res.grad.data());
    }
    return res;
}

}  // namespace levelk
