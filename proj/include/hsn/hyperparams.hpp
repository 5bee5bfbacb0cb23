#pragma once

#include <cstddef>
#include <string>

#include "hsn/error.hpp"

namespace hsn {

/// Network dimensions shared by all components.
struct HyperParams {
    std::size_t segments = 32;            // T, segment count at granularity 1
    std::size_t channels = 0;             // n, feature channels (taken from data when 0)
    std::size_t conv_channels = 512;      // n_c
    std::size_t lstm_hidden = 512;        // n_h
    std::size_t selected_tracklets = 3;   // k^s
    std::size_t ranker_width = 64;        // m

    /// Desk-scale dimensions used throughout the tests.
    static HyperParams desk(std::size_t segments, std::size_t channels) {
        HyperParams hp;
        hp.segments = segments;
        hp.channels = channels;
        hp.conv_channels = 16;
        hp.lstm_hidden = 16;
        hp.selected_tracklets = 2;
        hp.ranker_width = 16;
        return hp;
    }

    void validate() const {
        auto positive = [](std::size_t v, const char* name) {
            detail::require(v > 0, std::string("hyperparameter ") + name + " must be positive");
        };
        positive(segments, "segments");
        positive(channels, "channels");
        positive(conv_channels, "conv_channels");
        positive(lstm_hidden, "lstm_hidden");
        positive(selected_tracklets, "selected_tracklets");
        positive(ranker_width, "ranker_width");
    }

    bool operator==(const HyperParams&) const = default;
};

}  // namespace hsn
