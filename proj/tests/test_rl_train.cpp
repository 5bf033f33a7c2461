#include <algorithm>
#include <map>

#include "gtest/gtest.h"
#include "levelk/dqn.hpp"
#include "levelk/replay.hpp"
#include "test_util.hpp"

namespace levelk {
namespace {

Experience dummy_exp(Rng& rng) {
    Experience e;
    for (auto& v : e.s) v = rng.uniform(-1.0, 1.0);
    for (auto& v : e.s_next) v = rng.uniform(-1.0, 1.0);
    e.a = rng.uniform_int(0, kNumActions - 1);
    e.r = rng.uniform(-1.0, 1.0);
    e.done = rng.bernoulli(0.1);
    return e;
}

TEST(SumTree, RootMatchesLeafSumUnderRandomWorkload) {
    Rng rng(1);
    SumTree tree(1000);
    std::vector<double> leaves(1000, 0.0);
    for (int op = 0; op < 20000; ++op) {
        const std::size_t idx = static_cast<std::size_t>(rng.uniform_int(0, 999));
        const double v = rng.uniform(0.001, 10.0);
        tree.set(idx, v);
        leaves[idx] = v;
        if (op % 500 == 0) {
            double sum = 0.0;
            for (double l : leaves) sum += l;
            EXPECT_NEAR(tree.total(), sum, 1e-9);
        }
    }
    double sum = 0.0, mn = std::numeric_limits<double>::infinity();
    for (double l : leaves) {
        sum += l;
        if (l > 0.0) mn = std::min(mn, l);
    }
    EXPECT_NEAR(tree.total(), sum, 1e-9);
    EXPECT_DOUBLE_EQ(tree.min_value(), mn);
}

TEST(SumTree, PrefixSampleFindsCorrectLeaf) {
    SumTree tree(4);
    tree.set(0, 1.0);
    tree.set(1, 2.0);
    tree.set(2, 3.0);
    tree.set(3, 4.0);
    EXPECT_EQ(tree.sample(0.5), 0u);
    EXPECT_EQ(tree.sample(1.5), 1u);
    EXPECT_EQ(tree.sample(3.5), 2u);
    EXPECT_EQ(tree.sample(9.5), 3u);
}

TEST(Replay, EqualPrioritiesSampleUniformly) {
    Rng rng(2);
    PrioritizedBuffer buf(16, 0.6);
    Rng gen(3);
    for (int i = 0; i < 4; ++i) buf.push(dummy_exp(gen), 1.0);
    std::map<std::size_t, int> counts;
    const int draws = 100000;
    for (int i = 0; i < draws; i += 4) {
        const SampledBatch b = buf.sample(4, 0.4, rng);
        for (std::size_t idx : b.indices) ++counts[idx];
    }
    for (const auto& [idx, n] : counts) {
        EXPECT_LT(idx, 4u);
        EXPECT_NEAR(static_cast<double>(n) / draws, 0.25, 0.25 * 0.02) << "index " << idx;
    }
}

TEST(Replay, ProportionalProbabilitiesAndFrequencies) {
    Rng rng(4);
    PrioritizedBuffer buf(8, 1.0);  // alpha = 1
    Rng gen(5);
    buf.push(dummy_exp(gen), 1.0);
    buf.push(dummy_exp(gen), 3.0);
    // direct evaluation of the proportional law
    EXPECT_DOUBLE_EQ(buf.tree().value(0) / buf.tree().total(), 0.25);
    EXPECT_DOUBLE_EQ(buf.tree().value(1) / buf.tree().total(), 0.75);

    int hits1 = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const SampledBatch b = buf.sample(1, 0.4, rng);
        if (b.indices[0] == 1) ++hits1;
    }
    EXPECT_NEAR(static_cast<double>(hits1) / draws, 0.75, 0.75 * 0.02);
}

TEST(Replay, ImportanceWeightsHandCase) {
    // beta = 1, priorities [1, 3], alpha = 1:
    //   unnormalized w = [(2 * 0.25)^-1, (2 * 0.75)^-1] = [2, 2/3]
    //   normalized     = [1, 1/3]
    Rng rng(6);
    PrioritizedBuffer buf(8, 1.0);
    Rng gen(7);
    buf.push(dummy_exp(gen), 1.0);
    buf.push(dummy_exp(gen), 3.0);
    bool saw0 = false, saw1 = false;
    for (int i = 0; i < 200; ++i) {
        const SampledBatch b = buf.sample(2, 1.0, rng);
        for (std::size_t k = 0; k < b.indices.size(); ++k) {
            if (b.indices[k] == 0) {
                saw0 = true;
                EXPECT_NEAR(b.weights[k], 1.0, 1e-12);
            } else {
                saw1 = true;
                EXPECT_NEAR(b.weights[k], 1.0 / 3.0, 1e-12);
            }
        }
    }
    EXPECT_TRUE(saw0);
    EXPECT_TRUE(saw1);
}

TEST(Replay, NewExperiencesGetMaxPriority) {
    Rng gen(8);
    PrioritizedBuffer buf(8, 0.6);
    buf.push(dummy_exp(gen), 1.0);
    buf.update_priority(0, 4.0);  // priority 4 + floor
    buf.push(dummy_exp(gen));     // no explicit priority: inherits the max
    EXPECT_DOUBLE_EQ(buf.tree().value(1), std::pow(buf.max_priority(), 0.6));
    EXPECT_GE(buf.max_priority(), 4.0);
}

TEST(Replay, PositivePrioritiesEnforced) {
    Rng gen(9);
    PrioritizedBuffer buf(4, 0.6, 1e-3);
    buf.push(dummy_exp(gen), 1.0);
    buf.update_priority(0, 0.0);  // zero TD error still leaves the floor
    EXPECT_GT(buf.tree().value(0), 0.0);
    EXPECT_THROW(buf.push(dummy_exp(gen), 0.0), std::invalid_argument);
    PrioritizedBuffer empty(4, 0.6);
    Rng rng(10);
    EXPECT_THROW(empty.sample(1, 0.4, rng), std::runtime_error);
}

TEST(Replay, RingOverwritesOldest) {
    Rng gen(11);
    PrioritizedBuffer buf(8, 0.6);
    for (int i = 0; i < 30; ++i) buf.push(dummy_exp(gen), 1.0 + i);
    EXPECT_EQ(buf.size(), 8u);
    EXPECT_DOUBLE_EQ(buf.max_priority(), 30.0);
    Rng rng(12);
    const SampledBatch b = buf.sample(32, 0.4, rng);
    for (std::size_t idx : b.indices) EXPECT_LT(idx, 8u);
}

TEST(DoubleDqn, TerminalAndZeroGammaShortCircuit) {
    Rng rng(13);
    const NetworkWeights online = init_weights(rng);
    const NetworkWeights target = init_weights(rng);
    Observation s{};
    EXPECT_DOUBLE_EQ(double_dqn_target(0.7, s, true, online, target, 0.95), 0.7);
    EXPECT_DOUBLE_EQ(double_dqn_target(0.7, s, false, online, target, 0.0), 0.7);
}

TEST(DoubleDqn, OnlinePicksTargetEvaluates) {
    // online network prefers action 2; target network values everything at 1
    NetworkWeights online;
    online.params.assign(static_cast<std::size_t>(online.config.param_count()), 0.0);
    online.params[static_cast<std::size_t>(online.offsets().adv_b) + 2] = 1.0;
    NetworkWeights target;
    target.params.assign(static_cast<std::size_t>(target.config.param_count()), 0.0);
    target.params[static_cast<std::size_t>(target.offsets().value_b)] = 1.0;

    Observation s{};
    const double y = double_dqn_target(0.5, s, false, online, target, 0.95);
    EXPECT_DOUBLE_EQ(y, 0.5 + 0.95 * 1.0);
}

TEST(Epsilon, LinearSchedule) {
    const EpsilonSchedule eps{1.0, 0.01, 50000};
    EXPECT_DOUBLE_EQ(eps.value(0), 1.0);
    EXPECT_DOUBLE_EQ(eps.value(50000), 0.01);
    EXPECT_DOUBLE_EQ(eps.value(1000000), 0.01);
    EXPECT_NEAR(eps.value(25000), 0.505, 1e-12);
}

TrainConfig synthetic_config() {
    TrainConfig cfg;
    cfg.total_steps = 30000;
    cfg.gamma = 0.8;
    cfg.learning_rate = 7e-4;
    cfg.batch_size = 16;
    cfg.target_sync = 250;
    cfg.epsilon = {1.0, 0.2, 15000};
    cfg.buffer_capacity = 5000;
    cfg.warmup = 200;
    cfg.eval_interval = 0;
    return cfg;
}

EnvFactory synthetic_factory(double gamma) {
    return [gamma]() { return std::make_unique<testutil::SyntheticMdp>(gamma); };
}

TEST(TrainLevel, ZeroStepsReturnsInitUnchanged) {
    Rng init_rng(14);
    const NetworkWeights init = init_weights(init_rng);
    TrainConfig cfg = synthetic_config();
    cfg.total_steps = 0;
    Rng rng(15);
    const TrainResult res = train_level(synthetic_factory(0.8), &init, cfg, rng);
    EXPECT_EQ(res.weights.params, init.params);
    EXPECT_TRUE(res.curve.empty());
    EXPECT_EQ(res.gradient_updates, 0);
}

TEST(TrainLevel, DeterministicFromSeed) {
    TrainConfig cfg = synthetic_config();
    cfg.total_steps = 3000;
    cfg.eval_interval = 1000;
    cfg.eval_episodes = 5;
    Rng r1(16), r2(16);
    const TrainResult a = train_level(synthetic_factory(0.8), nullptr, cfg, r1);
    const TrainResult b = train_level(synthetic_factory(0.8), nullptr, cfg, r2);
    EXPECT_EQ(a.weights.params, b.weights.params);
    ASSERT_EQ(a.curve.size(), b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
        EXPECT_EQ(a.curve[i].step, b.curve[i].step);
        EXPECT_EQ(a.curve[i].mean_return, b.curve[i].mean_return);
        EXPECT_EQ(a.curve[i].success_rate, b.curve[i].success_rate);
    }
}

TEST(TrainLevel, GreedyActionConstantForFixedWeightsAndState) {
    Rng rng(17);
    const NetworkWeights w = init_weights(rng);
    const Observation obs = testutil::SyntheticMdp::encode(0);
    const int a0 = greedy_action(w, obs);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(greedy_action(w, obs), a0);
}

TEST(TrainLevel, DivergenceGuardAbortsOnNonFiniteLoss) {
    // rewards big enough that the squared TD error overflows
    class ExplodingEnv : public testutil::SyntheticMdp {
    public:
        ExplodingEnv() : SyntheticMdp(0.8) {}
        Step step(int action) override {
            Step s = SyntheticMdp::step(action);
            s.reward = 1e200;
            return s;
        }
    };
    TrainConfig cfg = synthetic_config();
    cfg.total_steps = 2000;
    Rng rng(18);
    EXPECT_THROW(
        train_level([]() { return std::make_unique<ExplodingEnv>(); }, nullptr, cfg, rng),
        TrainingDiverged);
}

TEST(TrainLevel, ConvergesToOptimalQOnSyntheticMdp) {
    // value-iteration oracle for the 2-state problem
    const auto q_star = testutil::SyntheticMdp(0.8).optimal_q();
    Rng rng(1234);
    const TrainResult res = train_level(synthetic_factory(0.8), nullptr, synthetic_config(), rng);
    double worst = 0.0;
    for (int s = 0; s < 2; ++s) {
        const auto q = forward(res.weights, testutil::SyntheticMdp::encode(s));
        for (int a = 0; a < kNumActions; ++a) {
            worst = std::max(worst, std::abs(q[a] - q_star[s][a % 2]));
        }
    }
    EXPECT_LT(worst, 1e-2);
}

}  // namespace
}  // namespace levelk
