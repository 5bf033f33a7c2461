#include <filesystem>
#include <fstream>
#include <map>

#include "gtest/gtest.h"
#include "levelk/curriculum.hpp"
#include "test_util.hpp"

namespace levelk {
namespace {

TEST(Admissible, ParityFilteredSets) {
    EXPECT_EQ(admissible_levels(1, 0), (std::vector<int>{0}));
    EXPECT_EQ(admissible_levels(1, 1), (std::vector<int>{0}));
    EXPECT_EQ(admissible_levels(3, 0), (std::vector<int>{0, 1}));
    EXPECT_EQ(admissible_levels(3, 1), (std::vector<int>{0, 2}));
    EXPECT_EQ(admissible_levels(5, 0), (std::vector<int>{0, 1, 3}));
    EXPECT_EQ(admissible_levels(5, 1), (std::vector<int>{0, 2, 4}));
    EXPECT_EQ(admissible_levels(6, 0), (std::vector<int>{0, 1, 3, 5}));
    EXPECT_EQ(admissible_levels(6, 1), (std::vector<int>{0, 2, 4}));
}

PolicyRegistry registry_to(int max_level) {
    PolicyRegistry reg;
    Rng rng(100);
    for (int k = 1; k <= max_level; ++k) {
        reg.add(init_weights(rng, PolicyRegistry::task_for_level(k), k));
    }
    return reg;
}

TEST(Registry, ParityEnforcedAndLookups) {
    PolicyRegistry reg;
    Rng rng(1);
    EXPECT_THROW(reg.add(init_weights(rng, Task::keep_lane, 1)), std::invalid_argument);
    EXPECT_THROW(reg.add(init_weights(rng, Task::merge, 0)), std::invalid_argument);
    reg.add(init_weights(rng, Task::merge, 1));
    EXPECT_TRUE(reg.has(0));
    EXPECT_TRUE(reg.has(1));
    EXPECT_FALSE(reg.has(2));
    EXPECT_THROW(reg.weights(2), std::out_of_range);
    EXPECT_EQ(reg.max_level(), 1);
    EXPECT_TRUE(reg.complete_to(1));
    EXPECT_FALSE(reg.complete_to(2));
}

TEST(Populate, TraineeLevelOneSeesOnlyRuleBasedDrivers) {
    const PolicyRegistry reg;
    const BehaviorSampler sampler = make_population_sampler(1, reg);
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        const Behavior b = sampler(i % 2, rng);
        EXPECT_EQ(b.level, 0);
        EXPECT_EQ(b.role, i % 2 == 0 ? Task::merge : Task::keep_lane);
    }
}

TEST(Populate, LevelsRespectLaneParityBelowTrainee) {
    const PolicyRegistry reg = registry_to(4);
    const BehaviorSampler sampler = make_population_sampler(5, reg);
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const Behavior bottom = sampler(0, rng);
        EXPECT_TRUE(bottom.level == 0 || bottom.level == 1 || bottom.level == 3);
        EXPECT_EQ(bottom.role, Task::merge);
        const Behavior top = sampler(1, rng);
        EXPECT_TRUE(top.level == 0 || top.level == 2 || top.level == 4);
        EXPECT_EQ(top.role, Task::keep_lane);
        EXPECT_LT(bottom.level, 5);
        EXPECT_LT(top.level, 5);
    }
}

TEST(Populate, UniformOverAdmissibleLevels) {
    const PolicyRegistry reg = registry_to(4);
    const BehaviorSampler sampler = make_population_sampler(5, reg);
    Rng rng(4);
    std::map<int, int> bottom_counts, top_counts;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        ++bottom_counts[sampler(0, rng).level];
        ++top_counts[sampler(1, rng).level];
    }
    for (int level : {0, 1, 3}) {
        EXPECT_NEAR(static_cast<double>(bottom_counts[level]) / n, 1.0 / 3.0, 1.0 / 3.0 * 0.02)
            << "bottom level " << level;
    }
    for (int level : {0, 2, 4}) {
        EXPECT_NEAR(static_cast<double>(top_counts[level]) / n, 1.0 / 3.0, 1.0 / 3.0 * 0.02)
            << "top level " << level;
    }
}

TEST(Populate, MissingRegistryLevelRejected) {
    const PolicyRegistry reg = registry_to(1);  // level 2 missing
    EXPECT_THROW(make_population_sampler(3, reg), std::out_of_range);
}

TEST(WarmStart, FreshForFirstTwoLevelsCopyAfterwards) {
    const PolicyRegistry reg = registry_to(3);
    Rng rng(5);
    const NetworkWeights w1 = warm_start(1, reg, rng);
    EXPECT_EQ(w1.level, 1);
    EXPECT_EQ(w1.task, Task::merge);

    const NetworkWeights w2 = warm_start(2, reg, rng);
    EXPECT_EQ(w2.task, Task::keep_lane);
    EXPECT_NE(w1.params, w2.params);  // independent fresh draws

    const NetworkWeights w3 = warm_start(3, reg, rng);
    EXPECT_EQ(w3.params, reg.weights(1).params);
    EXPECT_EQ(w3.level, 3);
    EXPECT_EQ(w3.task, Task::merge);

    const NetworkWeights w4 = warm_start(4, reg, rng);
    EXPECT_EQ(w4.params, reg.weights(2).params);
    EXPECT_EQ(w4.task, Task::keep_lane);

    PolicyRegistry incomplete;
    Rng rng2(6);
    incomplete.add(init_weights(rng2, Task::merge, 1));
    EXPECT_THROW(warm_start(4, incomplete, rng2), std::out_of_range);
    EXPECT_THROW(warm_start(0, reg, rng), std::invalid_argument);
}

CurriculumConfig tiny_curriculum(const std::string& out_dir, int max_level) {
    CurriculumConfig cfg;
    cfg.max_level = max_level;
    cfg.train.total_steps = 400;
    cfg.train.batch_size = 8;
    cfg.train.buffer_capacity = 2000;
    cfg.train.warmup = 50;
    cfg.train.target_sync = 100;
    cfg.train.eval_interval = 200;
    cfg.train.eval_episodes = 2;
    cfg.train.epsilon = {1.0, 0.1, 300};
    cfg.scene.n_cars_min = 3;
    cfg.scene.n_cars_max = 6;
    cfg.master_seed = 77;
    cfg.out_dir = out_dir;
    cfg.config_fingerprint = "test";
    return cfg;
}

TEST(Curriculum, TinyRunProducesContiguousRegistryAndArtifacts) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "levelk_curr_test";
    fs::remove_all(dir);
    const PolicyRegistry reg = run_curriculum(tiny_curriculum(dir.string(), 2));
    EXPECT_TRUE(reg.complete_to(2));
    EXPECT_EQ(reg.max_level(), 2);
    EXPECT_EQ(reg.weights(1).task, Task::merge);
    EXPECT_EQ(reg.weights(2).task, Task::keep_lane);

    EXPECT_TRUE(fs::exists(dir / "level_1.lkqn"));
    EXPECT_TRUE(fs::exists(dir / "level_2.lkqn"));
    EXPECT_TRUE(fs::exists(dir / "level_1_curve.csv"));
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    EXPECT_TRUE(fs::exists(dir / "timings.json"));

    // persisted weights round-trip through the registry loader
    const PolicyRegistry loaded = load_registry(dir.string());
    EXPECT_EQ(loaded.max_level(), 2);
    EXPECT_EQ(loaded.weights(1).params, reg.weights(1).params);
    EXPECT_EQ(loaded.weights(2).params, reg.weights(2).params);
    fs::remove_all(dir);
}

TEST(Curriculum, SameSeedReproducesWeightFilesBitExactly) {
    namespace fs = std::filesystem;
    const fs::path d1 = fs::temp_directory_path() / "levelk_curr_a";
    const fs::path d2 = fs::temp_directory_path() / "levelk_curr_b";
    fs::remove_all(d1);
    fs::remove_all(d2);
    run_curriculum(tiny_curriculum(d1.string(), 1));
    run_curriculum(tiny_curriculum(d2.string(), 1));
    for (const char* name : {"level_1.lkqn", "manifest.json", "level_1_curve.csv"}) {
        std::ifstream f1(d1 / name, std::ios::binary), f2(d2 / name, std::ios::binary);
        const std::string b1((std::istreambuf_iterator<char>(f1)),
                             std::istreambuf_iterator<char>());
        const std::string b2((std::istreambuf_iterator<char>(f2)),
                             std::istreambuf_iterator<char>());
        EXPECT_EQ(b1, b2) << name;
        EXPECT_FALSE(b1.empty());
    }
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(Curriculum, LoadRegistryRejectsGaps) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "levelk_gap_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    Rng rng(9);
    save_weights(init_weights(rng, Task::keep_lane, 2), (dir / "level_2.lkqn").string());
    // level 1 missing: stops before level 2 without explicit max, throws with it
    EXPECT_EQ(load_registry(dir.string()).max_level(), 0);
    EXPECT_THROW(load_registry(dir.string(), 2), std::runtime_error);
    fs::remove_all(dir);
}

}  // namespace
}  // namespace levelk
