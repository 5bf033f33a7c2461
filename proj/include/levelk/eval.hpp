#pragma once

#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "levelk/csv.hpp"
#include "levelk/curriculum.hpp"

namespace levelk {

struct CellMetrics {
    int policy_level = 0;
    int env_level = 0;
    int n_episodes = 0;
    double success_rate = 0.0;
    double collision_rate = 0.0;
    double timeout_rate = 0.0;
    double mean_time = 0.0;  // s
};

struct EvalConfig {
    RoadGeometry road;
    SimConfig sim;
    InitialSceneParams scene;
    RewardWeights reward;
    int n_cars = 50;  // evaluation runs in dense traffic; 0 keeps the scene's sampled range
    int n_episodes = 500;
    std::uint64_t master_seed = 0;
    int threads = 1;
};

struct EpisodeOutcomeRecord {
    Outcome outcome;
    double elapsed;
    double total_reward;
};

// One evaluation episode of `policy_level` against an environment populated
// with levels <= env_level. Episode seeds derive from (master seed, policy
// level, env level, episode index), so cells and episodes are order- and
// thread-independent.
inline EpisodeOutcomeRecord evaluate_episode(int policy_level, int env_level, int episode_index,
                                             const PolicyRegistry& registry,
                                             const EvalConfig& cfg) {
    const Task task = policy_level == 0 ? Task::merge : PolicyRegistry::task_for_level(policy_level);
    InitialSceneParams scene = cfg.scene;
    if (cfg.n_cars > 0) scene.n_cars_min = scene.n_cars_max = cfg.n_cars;

    TrafficEnv env(task, cfg.road, cfg.sim, scene, cfg.reward,
                   make_population_sampler(env_level + 1, registry),
                   make_opponent_policy(registry));
    Rng rng(seed_chain(cfg.master_seed, static_cast<std::uint64_t>(policy_level),
                       static_cast<std::uint64_t>(env_level),
                       static_cast<std::uint64_t>(episode_index)));
    EpisodeResult res;
    if (policy_level == 0) {
        env.set_rule_based_ego(true);
        res = run_episode(env, rng);
    } else {
        const NetworkWeights& w = registry.weights(policy_level);
        res = run_episode(env, rng, [&w](const Observation& obs) { return greedy_action(w, obs); });
    }
    return {res.outcome, res.elapsed, res.total_reward};
}

inline std::vector<EpisodeOutcomeRecord> evaluate_cell_outcomes(int policy_level, int env_level,
                                                                const PolicyRegistry& registry,
                                                                const EvalConfig& cfg) {
    if (!registry.complete_to(std::max(policy_level, env_level))) {
        throw std::runtime_error("evaluate: registry incomplete to level " +
                                 std::to_string(std::max(policy_level, env_level)));
    }
    std::vector<EpisodeOutcomeRecord> records(static_cast<std::size_t>(cfg.n_episodes));
    const int threads = std::max(1, cfg.threads);
    if (threads == 1) {
        for (int e = 0; e < cfg.n_episodes; ++e) {
            records[static_cast<std::size_t>(e)] =
                evaluate_episode(policy_level, env_level, e, registry, cfg);
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&]() {
                for (int e = next.fetch_add(1); e < cfg.n_episodes; e = next.fetch_add(1)) {
                    records[static_cast<std::size_t>(e)] =
                        evaluate_episode(policy_level, env_level, e, registry, cfg);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return records;
}

inline CellMetrics aggregate_cell(int policy_level, int env_level,
                                  const std::vector<EpisodeOutcomeRecord>& records) {
    CellMetrics m;
    m.policy_level = policy_level;
    m.env_level = env_level;
    m.n_episodes = static_cast<int>(records.size());
    for (const auto& r : records) {
        switch (r.outcome) {
            case Outcome::success: m.success_rate += 1.0; break;
            case Outcome::collision: m.collision_rate += 1.0; break;
            case Outcome::timeout: m.timeout_rate += 1.0; break;
        }
        m.mean_time += r.elapsed;
    }
    const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
    m.success_rate /= n;
    m.collision_rate /= n;
    m.timeout_rate /= n;
    m.mean_time /= n;
    return m;
}

inline CellMetrics evaluate_cell(int policy_level, int env_level, const PolicyRegistry& registry,
                                 const EvalConfig& cfg) {
    return aggregate_cell(policy_level, env_level,
                          evaluate_cell_outcomes(policy_level, env_level, registry, cfg));
}

// Full (max_level+1) x (max_level+1) matrix of policy level vs environment
// level, cells computed independently.
inline std::vector<CellMetrics> cross_matrix(const PolicyRegistry& registry, int max_level,
                                             const EvalConfig& cfg) {
    if (!registry.complete_to(max_level)) {
        throw std::runtime_error("cross_matrix: registry incomplete to level " +
                                 std::to_string(max_level));
    }
    const int n = max_level + 1;
    std::vector<CellMetrics> cells(static_cast<std::size_t>(n * n));
    const int threads = std::max(1, cfg.threads);
    std::atomic<int> next{0};
    auto worker = [&]() {
        EvalConfig cell_cfg = cfg;
        cell_cfg.threads = 1;
        for (int c = next.fetch_add(1); c < n * n; c = next.fetch_add(1)) {
            const int policy_level = c / n;
            const int env_level = c % n;
            cells[static_cast<std::size_t>(c)] =
                evaluate_cell(policy_level, env_level, registry, cell_cfg);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return cells;
}

inline constexpr const char* kMatrixCsvHeader =
    "policy_level,env_level,n_episodes,success_rate,collision_rate,timeout_rate,mean_time";

inline void write_matrix_csv(std::ostream& out, const std::vector<CellMetrics>& cells) {
    out << kMatrixCsvHeader << '\n';
    for (const auto& c : cells) {
        out << c.policy_level << ',' << c.env_level << ',' << c.n_episodes << ','
            << format_double(c.success_rate) << ',' << format_double(c.collision_rate) << ','
            << format_double(c.timeout_rate) << ',' << format_double(c.mean_time) << '\n';
    }
}

inline void write_matrix_csv(const std::string& path, const std::vector<CellMetrics>& cells) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path);
    write_matrix_csv(out, cells);
}

inline std::vector<CellMetrics> read_matrix_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kMatrixCsvHeader) {
        throw std::runtime_error("matrix csv: bad header in " + path);
    }
    std::vector<CellMetrics> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 7) throw std::runtime_error("matrix csv: bad row in " + path);
        CellMetrics c;
        c.policy_level = static_cast<int>(parse_double(f[0]));
        c.env_level = static_cast<int>(parse_double(f[1]));
        c.n_episodes = static_cast<int>(parse_double(f[2]));
        c.success_rate = parse_double(f[3]);
        c.collision_rate = parse_double(f[4]);
        c.timeout_rate = parse_double(f[5]);
        c.mean_time = parse_double(f[6]);
        cells.push_back(c);
    }
    return cells;
}

}  // namespace levelk
