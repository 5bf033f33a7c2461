#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "levelk/qnet.hpp"

namespace levelk {

// Weights file: magic "LKQN", format version u32, architecture fingerprint
// u64, task tag byte, level byte, then all parameters in declaration order as
// little-endian 64-bit floats.
inline constexpr char kWeightsMagic[4] = {'L', 'K', 'Q', 'N'};
inline constexpr std::uint32_t kWeightsVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "weights files are written on little-endian hosts");

inline void save_weights(const NetworkWeights& w, const std::string& path) {
    w.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_weights: cannot open " + path);
    out.write(kWeightsMagic, 4);
    const std::uint32_t version = kWeightsVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t fp = w.config.fingerprint();
    out.write(reinterpret_cast<const char*>(&fp), sizeof(fp));
    const std::uint8_t task = w.task == Task::merge ? 0 : 1;
    const std::uint8_t level = static_cast<std::uint8_t>(w.level);
    out.write(reinterpret_cast<const char*>(&task), 1);
    out.write(reinterpret_cast<const char*>(&level), 1);
    out.write(reinterpret_cast<const char*>(w.params.data()),
              static_cast<std::streamsize>(w.params.size() * sizeof(double)));
    if (!out) throw std::runtime_error("save_weights: write failed for " + path);
}

inline NetworkWeights load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_weights: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kWeightsMagic, 4) != 0) {
        throw std::runtime_error("load_weights: bad magic in " + path);
    }
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kWeightsVersion) {
        throw std::runtime_error("load_weights: unsupported version in " + path);
    }
    std::uint64_t fp = 0;
    in.read(reinterpret_cast<char*>(&fp), sizeof(fp));
    NetworkWeights w;
    if (!in || fp != w.config.fingerprint()) {
        throw std::runtime_error("load_weights: architecture fingerprint mismatch in " + path);
    }
    std::uint8_t task = 0, level = 0;
    in.read(reinterpret_cast<char*>(&task), 1);
    in.read(reinterpret_cast<char*>(&level), 1);
    if (!in || task > 1) throw std::runtime_error("load_weights: bad task tag in " + path);
    w.task = task == 0 ? Task::merge : Task::keep_lane;
    w.level = level;
    w.params.resize(static_cast<std::size_t>(w.config.param_count()));
    in.read(reinterpret_cast<char*>(w.params.data()),
            static_cast<std::streamsize>(w.params.size() * sizeof(double)));
    if (!in || in.gcount() != static_cast<std::streamsize>(w.params.size() * sizeof(double))) {
        throw std::runtime_error("load_weights: truncated file " + path);
    }
    w.validate();
    return w;
}

}  // namespace levelk
