#pragma once

#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "levelk/csv.hpp"
#include "levelk/curriculum.hpp"

namespace levelk {

// Full run configuration. Constants the training setup fixes (reward terms,
// scene distributions, timing) default to their canonical values; overriding
// one produces a warning but is allowed for experiments.
struct RunConfig {
    RoadGeometry road;
    SimConfig sim;
    InitialSceneParams scene;
    RewardWeights reward;
    TrainConfig train;
    int max_level = 5;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace config_detail {

struct FieldDef {
    const char* section;
    const char* key;
    bool fixed;  // canonical constant: warn when overridden
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

inline std::vector<FieldDef> field_table() {
    std::vector<FieldDef> t;
    auto dbl = [&t](const char* sec, const char* key, bool fixed, auto member) {
        t.push_back({sec, key, fixed,
                     [member](const RunConfig& c) { return format_double(c.*member); },
                     [member](RunConfig& c, const std::string& s) { c.*member = parse_double(s); }});
    };
    auto sub_dbl = [&t](const char* sec, const char* key, bool fixed, auto sub, auto member) {
        t.push_back({sec, key, fixed,
                     [sub, member](const RunConfig& c) { return format_double(c.*sub.*member); },
                     [sub, member](RunConfig& c, const std::string& s) {
                         c.*sub.*member = parse_double(s);
                     }});
    };
    auto sub_int = [&t](const char* sec, const char* key, bool fixed, auto sub, auto member) {
        t.push_back({sec, key, fixed,
                     [sub, member](const RunConfig& c) {
                         return std::to_string(c.*sub.*member);
                     },
                     [sub, member](RunConfig& c, const std::string& s) {
                         c.*sub.*member = static_cast<std::remove_reference_t<decltype(c.*sub.*member)>>(
                             std::stoll(s));
                     }});
    };
    (void)dbl;

    sub_dbl("road", "lane_width", false, &RunConfig::road, &RoadGeometry::lane_width);
    sub_dbl("road", "road_length", false, &RunConfig::road, &RoadGeometry::road_length);
    sub_dbl("road", "ego_start", false, &RunConfig::road, &RoadGeometry::ego_start);
    sub_dbl("road", "blockage_position", false, &RunConfig::road, &RoadGeometry::blockage_position);

    sub_dbl("sim", "dt", true, &RunConfig::sim, &SimConfig::dt);
    sub_int("sim", "decision_period", true, &RunConfig::sim, &SimConfig::decision_period);
    sub_dbl("sim", "max_episode_time", true, &RunConfig::sim, &SimConfig::max_episode_time);
    sub_dbl("sim", "success_dwell", true, &RunConfig::sim, &SimConfig::success_dwell);
    sub_dbl("sim", "steering_rate_max", true, &RunConfig::sim, &SimConfig::steering_rate_max);
    sub_dbl("sim", "steering_angle_max", true, &RunConfig::sim, &SimConfig::steering_angle_max);
    sub_dbl("sim", "v_steer_ref", false, &RunConfig::sim, &SimConfig::v_steer_ref);

    sub_dbl("scene", "v0_min", true, &RunConfig::scene, &InitialSceneParams::v0_min);
    sub_dbl("scene", "v0_max", true, &RunConfig::scene, &InitialSceneParams::v0_max);
    sub_dbl("scene", "t0_min", true, &RunConfig::scene, &InitialSceneParams::t0_min);
    sub_dbl("scene", "t0_max", true, &RunConfig::scene, &InitialSceneParams::t0_max);
    sub_dbl("scene", "phi0_min", true, &RunConfig::scene, &InitialSceneParams::phi0_min);
    sub_dbl("scene", "phi0_max", true, &RunConfig::scene, &InitialSceneParams::phi0_max);
    sub_int("scene", "n_cars_min", true, &RunConfig::scene, &InitialSceneParams::n_cars_min);
    sub_int("scene", "n_cars_max", true, &RunConfig::scene, &InitialSceneParams::n_cars_max);
    sub_dbl("scene", "gap", true, &RunConfig::scene, &InitialSceneParams::gap);
    sub_dbl("scene", "vehicle_length", false, &RunConfig::scene, &InitialSceneParams::vehicle_length);
    sub_dbl("scene", "vehicle_width", false, &RunConfig::scene, &InitialSceneParams::vehicle_width);

    sub_dbl("reward", "collision", true, &RunConfig::reward, &RewardWeights::collision);
    sub_dbl("reward", "speed_coeff", true, &RunConfig::reward, &RewardWeights::speed_coeff);
    sub_dbl("reward", "top_lane_bonus", true, &RunConfig::reward, &RewardWeights::top_lane_bonus);
    sub_dbl("reward", "pass_bonus", true, &RunConfig::reward, &RewardWeights::pass_bonus);
    sub_dbl("reward", "v_desired_merge", false, &RunConfig::reward, &RewardWeights::v_desired);

    sub_int("train", "total_steps", false, &RunConfig::train, &TrainConfig::total_steps);
    sub_dbl("train", "gamma", false, &RunConfig::train, &TrainConfig::gamma);
    sub_dbl("train", "learning_rate", false, &RunConfig::train, &TrainConfig::learning_rate);
    sub_int("train", "batch_size", false, &RunConfig::train, &TrainConfig::batch_size);
    sub_int("train", "target_sync", false, &RunConfig::train, &TrainConfig::target_sync);
    t.push_back({"train", "eps_start", false,
                 [](const RunConfig& c) { return format_double(c.train.epsilon.start); },
                 [](RunConfig& c, const std::string& s) { c.train.epsilon.start = parse_double(s); }});
    t.push_back({"train", "eps_end", false,
                 [](const RunConfig& c) { return format_double(c.train.epsilon.end); },
                 [](RunConfig& c, const std::string& s) { c.train.epsilon.end = parse_double(s); }});
    t.push_back({"train", "eps_decay_steps", false,
                 [](const RunConfig& c) { return std::to_string(c.train.epsilon.decay_steps); },
                 [](RunConfig& c, const std::string& s) { c.train.epsilon.decay_steps = std::stoll(s); }});
    sub_int("train", "buffer_capacity", false, &RunConfig::train, &TrainConfig::buffer_capacity);
    sub_int("train", "warmup", false, &RunConfig::train, &TrainConfig::warmup);
    sub_int("train", "eval_interval", false, &RunConfig::train, &TrainConfig::eval_interval);
    sub_int("train", "eval_episodes", false, &RunConfig::train, &TrainConfig::eval_episodes);
    sub_dbl("train", "per_alpha", false, &RunConfig::train, &TrainConfig::per_alpha);
    sub_dbl("train", "per_beta_start", false, &RunConfig::train, &TrainConfig::per_beta_start);
    sub_dbl("train", "per_beta_end", false, &RunConfig::train, &TrainConfig::per_beta_end);
    sub_dbl("train", "per_epsilon", false, &RunConfig::train, &TrainConfig::per_epsilon);
    sub_int("train", "exploration_persistence", false, &RunConfig::train,
            &TrainConfig::exploration_persistence);
    sub_dbl("train", "optimistic_value_init", false, &RunConfig::train,
            &TrainConfig::optimistic_value_init);

    t.push_back({"curriculum", "max_level", false,
                 [](const RunConfig& c) { return std::to_string(c.max_level); },
                 [](RunConfig& c, const std::string& s) { c.max_level = static_cast<int>(std::stoll(s)); }});
    return t;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace config_detail

struct ParsedConfig {
    RunConfig config;
    std::vector<std::string> warnings;  // canonical constants that were overridden
};

// Line-based "key = value" format with [section] headers; '#' starts a
// comment. Unknown sections or keys are rejected by name.
inline ParsedConfig parse_config(const std::string& text) {
    using namespace config_detail;
    const auto table = field_table();
    const RunConfig defaults;
    ParsedConfig out;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const auto& f : table) {
                if (section == f.section) {
                    known = true;
                    break;
                }
            }
            if (!known) throw ConfigError("unknown config section: [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const FieldDef* def = nullptr;
        for (const auto& f : table) {
            if (section == f.section && key == f.key) {
                def = &f;
                break;
            }
        }
        if (!def) throw ConfigError("unknown config key: " + section + "." + key);
        try {
            def->set(out.config, value);
        } catch (const std::exception&) {
            throw ConfigError("invalid value for " + section + "." + key + ": '" + value + "'");
        }
        if (def->fixed && def->get(out.config) != def->get(defaults)) {
            out.warnings.push_back(section + "." + key + " = " + def->get(out.config) +
                                   " (canonical: " + def->get(defaults) + ")");
        }
    }
    return out;
}

// Canonical serialization: every key in table order. parse(serialize(c)) == c.
inline std::string serialize_config(const RunConfig& cfg) {
    using namespace config_detail;
    std::string out;
    std::string section;
    for (const auto& f : field_table()) {
        if (section != f.section) {
            if (!out.empty()) out += '\n';
            section = f.section;
            out += '[' + section + "]\n";
        }
        out += std::string(f.key) + " = " + f.get(cfg) + '\n';
    }
    return out;
}

inline std::string config_fingerprint(const RunConfig& cfg) {
    return hex64(fnv1a64(serialize_config(cfg)));
}

}  // namespace levelk
