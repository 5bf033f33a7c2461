#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "levelk/observation.hpp"
#include "levelk/rng.hpp"

namespace levelk {

struct Experience {
    Observation s;
    int a = 0;
    double r = 0.0;
    Observation s_next;
    bool done = false;
};

// Fixed-capacity segment tree holding leaf priorities; maintains the sum (for
// proportional sampling) and the minimum (for the importance-weight
// normalizer). Parents are recomputed from their children on update, so the
// root stays consistent with the leaves.
class SumTree {
public:
    explicit SumTree(std::size_t capacity) : capacity_(capacity) {
        std::size_t leaves = 1;
        while (leaves < capacity_) leaves <<= 1;
        leaves_ = leaves;
        sum_.assign(2 * leaves_, 0.0);
        min_.assign(2 * leaves_, std::numeric_limits<double>::infinity());
    }

    std::size_t capacity() const { return capacity_; }
    double total() const { return sum_[1]; }
    double min_value() const { return min_[1]; }

    double value(std::size_t idx) const { return sum_[leaves_ + idx]; }

    void set(std::size_t idx, double value) {
        if (idx >= capacity_) throw std::out_of_range("sum tree index out of range");
        std::size_t node = leaves_ + idx;
        sum_[node] = value;
        min_[node] = value;
        node >>= 1;
        while (node >= 1) {
            sum_[node] = sum_[2 * node] + sum_[2 * node + 1];
            min_[node] = std::min(min_[2 * node], min_[2 * node + 1]);
            node >>= 1;
        }
    }

    // Index of the leaf whose prefix-sum interval contains u, u in [0, total).
    std::size_t sample(double u) const {
        std::size_t node = 1;
        while (node < leaves_) {
            const std::size_t left = 2 * node;
            if (u < sum_[left]) {
                node = left;
            } else {
                u -= sum_[left];
                node = left + 1;
            }
        }
        std::size_t idx = node - leaves_;
        if (idx >= capacity_) idx = capacity_ - 1;  // numeric edge at u ~ total
        return idx;
    }

private:
    std::size_t capacity_;
    std::size_t leaves_;
    std::vector<double> sum_;
    std::vector<double> min_;
};

struct SampledBatch {
    std::vector<std::size_t> indices;
    std::vector<double> weights;  // importance weights, normalized by the max
};

// Proportional prioritized replay: P(i) = p_i^alpha / sum_j p_j^alpha, with
// importance weights w_i = (N P(i))^-beta normalized by their maximum. New
// experiences enter with the largest priority seen so far.
class PrioritizedBuffer {
public:
    PrioritizedBuffer(std::size_t capacity, double alpha, double priority_floor = 1e-3)
        : capacity_(capacity), alpha_(alpha), priority_floor_(priority_floor), tree_(capacity) {
        data_.reserve(capacity);
    }

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    double max_priority() const { return max_priority_; }
    const Experience& at(std::size_t idx) const { return data_[idx]; }
    const SumTree& tree() const { return tree_; }

    void push(const Experience& e) { push(e, max_priority_); }

    void push(const Experience& e, double priority) {
        if (data_.size() < capacity_) {
            data_.push_back(e);
            set_priority(data_.size() - 1, priority);
        } else {
            data_[write_] = e;
            set_priority(write_, priority);
            write_ = (write_ + 1) % capacity_;
        }
    }

    void update_priority(std::size_t idx, double td_abs) {
        set_priority(idx, std::abs(td_abs) + priority_floor_);
    }

    SampledBatch sample(std::size_t batch_size, double beta, Rng& rng) {
        if (data_.empty()) throw std::runtime_error("sample from empty replay buffer");
        SampledBatch batch;
        batch.indices.resize(batch_size);
        batch.weights.resize(batch_size);
        const double total = tree_.total();
        const double n = static_cast<double>(data_.size());
        // max weight corresponds to the minimum sampling probability
        const double p_min = tree_.min_value() / total;
        const double w_max = std::pow(n * p_min, -beta);
        for (std::size_t i = 0; i < batch_size; ++i) {
            std::size_t idx = tree_.sample(rng.uniform() * total);
            if (idx >= data_.size()) idx = data_.size() - 1;  // rounding edge
            batch.indices[i] = idx;
            const double p = tree_.value(idx) / total;
            batch.weights[i] = std::pow(n * p, -beta) / w_max;
        }
        return batch;
    }

private:
    void set_priority(std::size_t idx, double priority) {
        if (!(priority > 0.0)) throw std::invalid_argument("priority must be positive");
        if (priority > max_priority_) max_priority_ = priority;
        tree_.set(idx, std::pow(priority, alpha_));
    }

    std::size_t capacity_;
    double alpha_;
    double priority_floor_;
    double max_priority_ = 1.0;
    std::size_t write_ = 0;
    SumTree tree_;
    std::vector<Experience> data_;
};

}  // namespace levelk
