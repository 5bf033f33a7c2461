#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "levelk/csv.hpp"
#include "levelk/dqn.hpp"
#include "levelk/episode.hpp"
#include "levelk/weights_io.hpp"

namespace levelk {

// Trained policies by reasoning level. Level 0 is the implicit rule-based
// driver; odd levels merge, even levels keep the top lane.
class PolicyRegistry {
public:
    static Task task_for_level(int level) {
        return level % 2 == 1 ? Task::merge : Task::keep_lane;
    }

    void add(NetworkWeights w) {
        if (w.level < 1) throw std::invalid_argument("registry: level must be >= 1");
        if (w.task != task_for_level(w.level)) {
            throw std::invalid_argument("registry: task does not match level parity");
        }
        entries_[w.level] = std::move(w);
    }

    bool has(int level) const { return level == 0 || entries_.count(level) > 0; }

    const NetworkWeights& weights(int level) const {
        const auto it = entries_.find(level);
        if (it == entries_.end()) {
            throw std::out_of_range("registry: missing level " + std::to_string(level));
        }
        return it->second;
    }

    int max_level() const { return entries_.empty() ? 0 : entries_.rbegin()->first; }

    // levels 0..max contiguous
    bool complete_to(int level) const {
        for (int k = 1; k <= level; ++k) {
            if (!has(k)) return false;
        }
        return true;
    }

private:
    std::map<int, NetworkWeights> entries_;
};

// Opponent levels admissible in a lane of a level-k trainee's environment:
// always level 0, plus trained levels below k whose task matches the lane
// (odd merge levels in the bottom lane, even keep-lane levels in the top).
inline std::vector<int> admissible_levels(int trainee_level, int lane_id) {
    std::vector<int> levels{0};
    for (int l = lane_id == 0 ? 1 : 2; l < trainee_level; l += 2) levels.push_back(l);
    return levels;
}

// Populates one vehicle: reasoning level drawn uniformly over the admissible
// set for its lane; level-0 vehicles get freshly sampled driver parameters.
inline BehaviorSampler make_population_sampler(int trainee_level, const PolicyRegistry& registry) {
    for (int lane = 0; lane < 2; ++lane) {
        for (int l : admissible_levels(trainee_level, lane)) {
            if (!registry.has(l)) {
                throw std::out_of_range("population: registry missing level " + std::to_string(l));
            }
        }
    }
    return [trainee_level](int lane_id, Rng& rng) {
        const std::vector<int> levels = admissible_levels(trainee_level, lane_id);
        const int pick = levels[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(levels.size()) - 1))];
        if (pick == 0) return sample_level0_behavior(lane_id, rng);
        Behavior b;
        b.level = pick;
        b.role = lane_id == 0 ? Task::merge : Task::keep_lane;
        b.cidm = nominal_params();
        return b;
    };
}

inline OpponentPolicy make_opponent_policy(const PolicyRegistry& registry) {
    return [&registry](int level, Task /*role*/, const Observation& obs) {
        return greedy_action(registry.weights(level), obs);
    };
}

// Warm start: levels 1 and 2 have no same-task predecessor and initialize
// fresh; higher levels copy the weights of level k-2.
inline NetworkWeights warm_start(int level, const PolicyRegistry& registry, Rng& rng) {
    if (level < 1) throw std::invalid_argument("warm_start: level must be >= 1");
    const Task task = PolicyRegistry::task_for_level(level);
    if (level <= 2) return init_weights(rng, task, level);
    NetworkWeights w = registry.weights(level - 2);
    w.level = level;
    return w;
}

// Environment adapter used by the trainer: one decision step per step() call,
// all three outcomes are true terminals.
class MergeEnvironment : public Environment {
public:
    explicit MergeEnvironment(TrafficEnv env) : env_(std::move(env)) {}

    Observation reset(Rng& rng) override { return env_.reset(rng); }

    Step step(int action) override {
        const TrafficEnv::StepResult sr = env_.step(action);
        return {sr.obs, sr.reward, sr.done, sr.done, sr.outcome};
    }

    TrafficEnv& traffic() { return env_; }

private:
    TrafficEnv env_;
};

struct CurriculumConfig {
    int max_level = 5;
    TrainConfig train;
    RoadGeometry road;
    SimConfig sim;
    InitialSceneParams scene;
    RewardWeights reward;  // v_desired applies to the merge task
    std::uint64_t master_seed = 0;
    std::string out_dir;  // when set, per-level weights/curves and a manifest are written
    std::string config_fingerprint;  // recorded in the manifest
    std::function<void(int level, const TrainResult&)> on_level_done;
};

inline EnvFactory make_env_factory(Task task, int trainee_level, const PolicyRegistry& registry,
                                   const CurriculumConfig& cfg) {
    RewardWeights reward = cfg.reward;
    return [task, trainee_level, &registry, cfg = cfg, reward]() -> std::unique_ptr<Environment> {
        return std::make_unique<MergeEnvironment>(
            TrafficEnv(task, cfg.road, cfg.sim, cfg.scene, reward,
                       make_population_sampler(trainee_level, registry),
                       make_opponent_policy(registry)));
    };
}

inline std::string level_weights_name(int level) {
    return "level_" + std::to_string(level) + ".lkqn";
}

inline std::string level_curve_name(int level) {
    return "level_" + std::to_string(level) + "_curve.csv";
}

inline void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "step,success_rate,collision_rate,timeout_rate,mean_return,epsilon\n";
    for (const auto& p : curve) {
        out << p.step << ',' << format_double(p.success_rate) << ','
            << format_double(p.collision_rate) << ',' << format_double(p.timeout_rate) << ','
            << format_double(p.mean_return) << ',' << format_double(p.epsilon) << '\n';
    }
}

// Runs the iterative-reasoning curriculum: for k = 1..N the trainee faces a
// population drawn from the levels below k (parity-filtered per lane), warm
// started from the same-task predecessor. Fully reproducible from the master
// seed.
inline PolicyRegistry run_curriculum(const CurriculumConfig& cfg) {
    namespace fs = std::filesystem;
    PolicyRegistry registry;
    const bool persist = !cfg.out_dir.empty();
    nlohmann::json manifest;
    nlohmann::json timings;
    if (persist) {
        fs::create_directories(cfg.out_dir);
        manifest["master_seed"] = cfg.master_seed;
        manifest["max_level"] = cfg.max_level;
        manifest["config_hash"] = cfg.config_fingerprint;
        manifest["levels"] = nlohmann::json::array();
    }

    for (int k = 1; k <= cfg.max_level; ++k) {
        const Task task = PolicyRegistry::task_for_level(k);
        Rng rng(seed_chain(cfg.master_seed, static_cast<std::uint64_t>(k)));
        NetworkWeights init = warm_start(k, registry, rng);
        if (k <= 2) {  // fresh initializations get the optimism offset
            init.params[static_cast<std::size_t>(init.offsets().value_b)] +=
                cfg.train.optimistic_value_init;
        }
        TrainResult res;
        try {
            res = train_level(make_env_factory(task, k, registry, cfg), &init, cfg.train, rng);
        } catch (const TrainingDiverged& e) {
            throw TrainingDiverged("level " + std::to_string(k) + ": " + e.what());
        }
        res.weights.level = k;
        res.weights.task = task;
        registry.add(res.weights);

        if (persist) {
            const std::string wpath = (fs::path(cfg.out_dir) / level_weights_name(k)).string();
            save_weights(registry.weights(k), wpath);
            write_curve_csv((fs::path(cfg.out_dir) / level_curve_name(k)).string(), res.curve);
            nlohmann::json entry;
            entry["level"] = k;
            entry["task"] = task_name(task);
            entry["weights"] = level_weights_name(k);
            entry["weights_fnv"] = hex64(hash_file(wpath));
            entry["curve"] = level_curve_name(k);
            entry["train_steps"] = cfg.train.total_steps;
            manifest["levels"].push_back(entry);
            timings[level_weights_name(k)] = res.train_seconds;
        }
        if (cfg.on_level_done) cfg.on_level_done(k, res);
    }

    if (persist) {
        std::ofstream mf((fs::path(cfg.out_dir) / "manifest.json").string(),
                         std::ios::binary | std::ios::trunc);
        mf << manifest.dump(2) << '\n';
        std::ofstream tf((fs::path(cfg.out_dir) / "timings.json").string(),
                         std::ios::binary | std::ios::trunc);
        tf << timings.dump(2) << '\n';
    }
    return registry;
}

// Loads a persisted registry (level_k.lkqn files) from a directory.
inline PolicyRegistry load_registry(const std::string& dir, int max_level = -1) {
    namespace fs = std::filesystem;
    PolicyRegistry registry;
    for (int k = 1;; ++k) {
        if (max_level >= 0 && k > max_level) break;
        const fs::path p = fs::path(dir) / level_weights_name(k);
        if (!fs::exists(p)) {
            if (max_level >= 0) {
                throw std::runtime_error("registry incomplete: missing " + p.string());
            }
            break;
        }
        NetworkWeights w = load_weights(p.string());
        if (w.level != k) throw std::runtime_error("registry: level tag mismatch in " + p.string());
        registry.add(std::move(w));
    }
    return registry;
}

}  // namespace levelk
