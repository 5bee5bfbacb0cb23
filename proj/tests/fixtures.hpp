#pragma once

#include <filesystem>
#include <string>
#include <unistd.h>

#include "hsn/hyperparams.hpp"
#include "hsn/synth.hpp"

namespace hsn::test {

/// Fresh, empty directory under the system temp dir, unique per process.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("hsn_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Small T=4, n=6 spec that trains in milliseconds.
inline SynthSpec tiny_spec(std::uint64_t seed = 7) {
    SynthSpec s;
    s.train_normal = 4;
    s.train_anomaly = 4;
    s.test_normal = 3;
    s.test_anomaly = 3;
    s.segments = 4;
    s.frames_per_segment = 3;
    s.channels = 6;
    s.tracklets = 3;
    s.seed = seed;
    return s;
}

inline Dataset synth_dataset(const SynthSpec& spec, const std::string& name) {
    const auto result = synthesize_dataset(spec, scratch_dir(name));
    return load_dataset(result.manifest_path);
}

inline HyperParams tiny_hyper(const SynthSpec& spec) {
    HyperParams hp = HyperParams::desk(spec.segments, spec.channels);
    hp.conv_channels = 6;
    hp.lstm_hidden = 6;
    hp.ranker_width = 6;
    return hp;
}

}  // namespace hsn::test
