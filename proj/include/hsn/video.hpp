#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hsn/tensor.hpp"

namespace hsn {

enum class VideoLabel { normal, anomaly };

inline const char* to_string(VideoLabel label) { return label == VideoLabel::normal ? "normal" : "anomaly"; }

/// One video's pre-extracted features.
struct VideoFeatures {
    std::string id;
    VideoLabel label = VideoLabel::normal;
    std::string category;
    std::string split;  // "train" or "test"
    std::size_t frames = 0;
    std::array<Tensor, 3> scene;  // G=1,2,3: (G*T)×n
    Tensor tracklets;             // T×k×n, k may be zero
    std::optional<std::vector<int>> annotations;  // per-frame 0/1

    std::size_t segments() const { return scene[0].dim(0); }
    std::size_t channels() const { return scene[0].dim(1); }

    /// Per-frame ground truth; normal videos without annotations are all 0.
    std::vector<int> frame_labels() const {
        if (annotations) return *annotations;
        return std::vector<int>(frames, 0);
    }
};

}  // namespace hsn
