// Command-line driver: trains the reasoning-level curriculum, evaluates the
// policy-vs-environment matrix, and rolls out single traced episodes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "levelk/config.hpp"
#include "levelk/curriculum.hpp"
#include "levelk/eval.hpp"
#include "levelk/trace.hpp"

namespace fs = std::filesystem;

namespace {

levelk::RunConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return levelk::RunConfig{};
    std::ifstream in(path, std::ios::binary);
    if (!in) throw levelk::ConfigError("config file not found: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const levelk::ParsedConfig parsed = levelk::parse_config(ss.str());
    for (const auto& w : parsed.warnings) {
        std::cerr << "warning: overriding canonical value: " << w << '\n';
    }
    return parsed.config;
}

int cmd_curriculum(const std::string& config_path, int max_level_flag, std::uint64_t seed,
                   const std::string& out_dir) {
    const levelk::RunConfig run = load_config_or_default(config_path);

    levelk::CurriculumConfig cfg;
    cfg.max_level = max_level_flag > 0 ? max_level_flag : run.max_level;
    cfg.train = run.train;
    cfg.road = run.road;
    cfg.sim = run.sim;
    cfg.scene = run.scene;
    cfg.reward = run.reward;
    cfg.master_seed = seed;
    cfg.out_dir = out_dir;
    cfg.config_fingerprint = levelk::config_fingerprint(run);
    cfg.on_level_done = [](int level, const levelk::TrainResult& res) {
        std::cout << "level " << level << " trained: " << res.gradient_updates << " updates, "
                  << levelk::format_double(res.train_seconds) << " s";
        if (!res.curve.empty()) {
            const auto& last = res.curve.back();
            std::cout << ", final eval success=" << levelk::format_double(last.success_rate)
                      << " collision=" << levelk::format_double(last.collision_rate)
                      << " timeout=" << levelk::format_double(last.timeout_rate);
        }
        std::cout << std::endl;
    };

    levelk::run_curriculum(cfg);
    std::cout << "registry written to " << out_dir << std::endl;
    return 0;
}

int cmd_evaluate(const std::string& registry_dir, int episodes, const std::string& out_file,
                 std::uint64_t seed, int threads, int max_level_flag,
                 const std::string& config_path) {
    const levelk::RunConfig run = load_config_or_default(config_path);
    if (!fs::is_directory(registry_dir)) {
        throw std::runtime_error("registry directory not found: " + registry_dir);
    }
    levelk::PolicyRegistry registry =
        levelk::load_registry(registry_dir, max_level_flag > 0 ? max_level_flag : -1);
    const int max_level = max_level_flag > 0 ? max_level_flag : registry.max_level();
    if (max_level < 1 || !registry.complete_to(max_level)) {
        throw std::runtime_error("registry at " + registry_dir + " incomplete to level " +
                                 std::to_string(std::max(max_level, 1)));
    }

    levelk::EvalConfig cfg;
    cfg.road = run.road;
    cfg.sim = run.sim;
    cfg.scene = run.scene;
    cfg.reward = run.reward;
    cfg.n_episodes = episodes;
    cfg.master_seed = seed;
    cfg.threads = threads;

    const auto cells = levelk::cross_matrix(registry, max_level, cfg);
    levelk::write_matrix_csv(out_file, cells);
    std::cout << "wrote " << cells.size() << " cells to " << out_file << std::endl;
    return 0;
}

int cmd_rollout(const std::string& policy_file, int env_level, std::uint64_t seed,
                const std::string& trace_file, const std::string& registry_dir,
                const std::string& config_path) {
    const levelk::RunConfig run = load_config_or_default(config_path);
    levelk::NetworkWeights policy = levelk::load_weights(policy_file);

    levelk::PolicyRegistry registry;
    if (!registry_dir.empty()) {
        registry = levelk::load_registry(registry_dir);
    }
    if (!registry.complete_to(env_level)) {
        throw std::runtime_error("env level " + std::to_string(env_level) +
                                 " requires --registry with levels 1.." + std::to_string(env_level));
    }

    levelk::TrafficEnv env(policy.task, run.road, run.sim, run.scene, run.reward,
                           levelk::make_population_sampler(env_level + 1, registry),
                           levelk::make_opponent_policy(registry));

    std::ofstream out(trace_file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open trace file " + trace_file);
    env.set_trace(levelk::make_csv_trace(out));

    levelk::Rng rng(seed);
    const levelk::EpisodeResult res = levelk::run_episode(
        env, rng, [&policy](const levelk::Observation& o) { return levelk::greedy_action(policy, o); });
    levelk::write_trace_footer(out, res.outcome, res.elapsed, res.total_reward);

    std::cout << "outcome=" << levelk::outcome_name(res.outcome)
              << " elapsed=" << levelk::format_double(res.elapsed)
              << " reward=" << levelk::format_double(res.total_reward) << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"level-k merge curriculum: training, evaluation, and episode rollout"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int threads = 1;

    auto* cur = app.add_subcommand("curriculum", "train the full reasoning-level curriculum");
    std::string out_dir;
    int max_level = 0;
    cur->add_option("--config", config_path, "run configuration file");
    cur->add_option("--max-level", max_level, "highest reasoning level to train");
    cur->add_option("--seed", seed, "master seed");
    cur->add_option("--out", out_dir, "output directory for weights/curves/manifest")->required();
    cur->add_option("--threads", threads, "worker threads (training itself is sequential)");

    auto* ev = app.add_subcommand("evaluate", "policy level vs environment level matrix");
    std::string registry_dir, out_file;
    int episodes = 500;
    int eval_max_level = 0;
    ev->add_option("--registry", registry_dir, "directory with level_k.lkqn files")->required();
    ev->add_option("--episodes", episodes, "episodes per matrix cell");
    ev->add_option("--out", out_file, "output matrix CSV")->required();
    ev->add_option("--seed", seed, "master seed");
    ev->add_option("--threads", threads, "worker threads");
    ev->add_option("--max-level", eval_max_level, "highest level to evaluate");
    ev->add_option("--config", config_path, "run configuration file");

    auto* ro = app.add_subcommand("rollout", "run one traced episode");
    std::string policy_file, trace_file;
    int env_level = 0;
    ro->add_option("--policy", policy_file, "weights file of the ego policy")->required();
    ro->add_option("--env-level", env_level, "environment reasoning level");
    ro->add_option("--seed", seed, "episode seed");
    ro->add_option("--trace", trace_file, "output trace CSV")->required();
    ro->add_option("--registry", registry_dir, "registry directory (required for env-level >= 1)");
    ro->add_option("--config", config_path, "run configuration file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << '\n';
        return 2;
    }

    try {
        if (cur->parsed()) return cmd_curriculum(config_path, max_level, seed, out_dir);
        if (ev->parsed()) {
            return cmd_evaluate(registry_dir, episodes, out_file, seed, threads, eval_max_level,
                                config_path);
        }
        return cmd_rollout(policy_file, env_level, seed, trace_file, registry_dir, config_path);
    } catch (const levelk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
