#pragma once

#include <cstdint>
#include <string>

#include "hsn/coupler.hpp"
#include "hsn/human_subnet.hpp"
#include "hsn/scene_subnet.hpp"
#include "hsn/video.hpp"

namespace hsn {

/// Which score vector a loss or an evaluation looks at.
enum class ScoreHead { scene, human, coupled };

inline const char* to_string(ScoreHead head) {
    switch (head) {
        case ScoreHead::scene:
            return "scene";
        case ScoreHead::human:
            return "human";
        case ScoreHead::coupled:
            break;
    }
    return "coupled";
}

enum class ParamGroup { scene, human, coupler };

struct HsnModel {
    static constexpr int kFormatVersion = 1;

    HyperParams hyper;
    SceneParams scene;
    HumanParams human;
    CouplerParams coupler;

    static HsnModel init(const HyperParams& hp, std::uint64_t seed) {
        hp.validate();
        Initializer init(seed);
        HsnModel m;
        m.hyper = hp;
        m.scene = SceneParams::init(init, hp);
        m.human = HumanParams::init(init, hp);
        m.coupler = CouplerParams::init(init, hp);
        return m;
    }

    ParamList parameters(ParamGroup group) const {
        ParamList out;
        switch (group) {
            case ParamGroup::scene:
                scene.collect("scene", out);
                break;
            case ParamGroup::human:
                human.collect("human", out);
                break;
            case ParamGroup::coupler:
                coupler.collect("coupler", out);
                break;
        }
        return out;
    }

    ParamList parameters() const {
        ParamList out;
        scene.collect("scene", out);
        human.collect("human", out);
        coupler.collect("coupler", out);
        return out;
    }

    /// Deep copy; the copy shares no storage with this model.
    HsnModel clone() const {
        HsnModel m = init(hyper, 0);
        auto src = parameters();
        auto dst = m.parameters();
        for (std::size_t i = 0; i < src.size(); ++i) {
            std::copy(src[i].tensor.values().begin(), src[i].tensor.values().end(),
                      dst[i].tensor.mutable_values().begin());
        }
        return m;
    }
};

/// Per-video score vectors, all T×1. Entries not produced by the requested
/// head are left undefined.
struct ScoreBundle {
    Tensor tracklet_scores;  // D_Tr
    Tensor scene_scores;     // D_Sc
    Tensor human_selection;  // S_HsN
    Tensor scene_selection;  // S_SsN
    Tensor coupled;          // D

    const Tensor& head(ScoreHead which) const {
        switch (which) {
            case ScoreHead::scene:
                return scene_scores;
            case ScoreHead::human:
                return tracklet_scores;
            case ScoreHead::coupled:
                break;
        }
        return coupled;
    }
};

struct ForwardOptions {
    ScoreHead head = ScoreHead::coupled;
    bool video_level = true;  // false: segment-level selection only
};

inline void check_compatible(const HsnModel& model, const VideoFeatures& video) {
    const auto& hp = model.hyper;
    const std::size_t t = hp.segments;
    const std::size_t n = hp.channels;
    for (std::size_t g = 0; g < 3; ++g) {
        const Tensor& s = video.scene[g];
        detail::require(s.defined() && s.rank() == 2 && s.dim(0) == (g + 1) * t && s.dim(1) == n,
                        "video " + video.id + ": scene G=" + std::to_string(g + 1) + " map " +
                            (s.defined() ? to_string(s.shape()) : std::string("missing")) + " does not match model " +
                            std::to_string((g + 1) * t) + "x" + std::to_string(n));
    }
    const Tensor& tr = video.tracklets;
    detail::require(tr.defined() && tr.rank() == 3 && tr.dim(0) == t && tr.dim(2) == n,
                    "video " + video.id + ": tracklet map " +
                        (tr.defined() ? to_string(tr.shape()) : std::string("missing")) + " does not match model " +
                        std::to_string(t) + "xKx" + std::to_string(n));
}

/// Runs the branches required by `options.head`.
inline ScoreBundle forward(const HsnModel& model, const VideoFeatures& video, const ForwardOptions& options = {}) {
    check_compatible(model, video);
    ScoreBundle out;
    SceneRank scene;
    TrackletRank human;
    if (options.head != ScoreHead::human) {
        scene = scene_forward(video.scene, model.scene);
        out.scene_scores = scene.scores;
    }
    if (options.head != ScoreHead::scene) {
        human = human_forward(video.tracklets, model.human, model.hyper.selected_tracklets);
        out.tracklet_scores = human.scores;
    }
    if (options.head == ScoreHead::coupled) {
        SegmentSelection seg = segment_level_selection(human.representation, scene.representation, model.coupler.segment);
        VideoSelection vid;
        if (options.video_level) {
            vid = video_level_selection(seg.pooled_tracklets, scene.representation, model.coupler.video);
        }
        FusedScores fused = fuse(seg, vid, human.scores, scene.scores);
        out.human_selection = fused.human_selection;
        out.scene_selection = fused.scene_selection;
        out.coupled = fused.coupled;
    }
    return out;
}

}  // namespace hsn
