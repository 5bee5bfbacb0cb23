#pragma once

// Soft-selection coupler: segment- and video-level attention over the two
// branches' intermediate representations, fused into the coupled score
// D = S_HsN * D_Tr + S_SsN * D_Sc.

#include <string>

#include "hsn/hyperparams.hpp"
#include "hsn/layers.hpp"

namespace hsn {

/// Parallel latent projections of the tracklet and scene representations,
/// followed by two parallel single-unit sigmoid heads on their concatenation.
struct SelectionBlock {
    Linear latent_human;  // m -> m, ReLU
    Linear latent_scene;  // m -> m, ReLU
    Linear head_human;    // 2m -> 1, sigmoid
    Linear head_scene;    // 2m -> 1, sigmoid

    static SelectionBlock init(Initializer& init, std::size_t width) {
        SelectionBlock b;
        b.latent_human = Linear::init(init, width, width);
        b.latent_scene = Linear::init(init, width, width);
        b.head_human = Linear::init(init, 2 * width, 1);
        b.head_scene = Linear::init(init, 2 * width, 1);
        return b;
    }

    void collect(const std::string& prefix, ParamList& out) const {
        latent_human.collect(prefix + ".latent_human", out);
        latent_scene.collect(prefix + ".latent_scene", out);
        head_human.collect(prefix + ".head_human", out);
        head_scene.collect(prefix + ".head_scene", out);
    }

    struct Attention {
        Tensor human;  // rows×1
        Tensor scene;  // rows×1
    };

    Attention operator()(const Tensor& human_rep, const Tensor& scene_rep) const {
        Tensor joint = concat(latent_human(human_rep, Activation::relu), latent_scene(scene_rep, Activation::relu), 1);
        return {head_human(joint, Activation::sigmoid), head_scene(joint, Activation::sigmoid)};
    }
};

struct CouplerParams {
    SelectionBlock segment;
    SelectionBlock video;

    static CouplerParams init(Initializer& init, const HyperParams& hp) {
        CouplerParams p;
        p.segment = SelectionBlock::init(init, hp.ranker_width);
        p.video = SelectionBlock::init(init, hp.ranker_width);
        return p;
    }

    void collect(const std::string& prefix, ParamList& out) const {
        segment.collect(prefix + ".segment", out);
        video.collect(prefix + ".video", out);
    }
};

struct SegmentSelection {
    Tensor pooled_tracklets;  // F_T^M: T×m
    Tensor human;             // A^S_HsN: T×1
    Tensor scene;             // A^S_SsN: T×1
};

/// Max-pools F_T over the tracklet axis and scores every segment.
inline SegmentSelection segment_level_selection(const Tensor& tracklet_rep, const Tensor& scene_rep,
                                                const SelectionBlock& block) {
    detail::require_rank(tracklet_rep, 3, "segment_level_selection", "F_T");
    detail::require_rank(scene_rep, 2, "segment_level_selection", "F_S");
    detail::require(tracklet_rep.dim(0) == scene_rep.dim(0) && tracklet_rep.dim(2) == scene_rep.dim(1) &&
                        scene_rep.dim(1) == block.latent_scene.weight.dim(0),
                    "segment_level_selection: width mismatch between F_T " + to_string(tracklet_rep.shape()) +
                        " and F_S " + to_string(scene_rep.shape()));
    Tensor pooled = pool(tracklet_rep, 1, PoolMode::max);
    auto att = block(pooled, scene_rep);
    return {pooled, att.human, att.scene};
}

struct VideoSelection {
    Tensor human;  // A^V_HsN: 1×1
    Tensor scene;  // A^V_SsN: 1×1
};

/// Mean-pools both maps over time and scores the whole video.
inline VideoSelection video_level_selection(const Tensor& pooled_tracklets, const Tensor& scene_rep,
                                            const SelectionBlock& block) {
    detail::require_rank(pooled_tracklets, 2, "video_level_selection", "F_T^M");
    detail::require_rank(scene_rep, 2, "video_level_selection", "F_S");
    detail::require(pooled_tracklets.shape() == scene_rep.shape(),
                    "video_level_selection: F_T^M " + to_string(pooled_tracklets.shape()) + " vs F_S " +
                        to_string(scene_rep.shape()));
    const std::size_t width = scene_rep.dim(1);
    Tensor human = reshape(pool(pooled_tracklets, 0, PoolMode::mean), {1, width});
    Tensor scene = reshape(pool(scene_rep, 0, PoolMode::mean), {1, width});
    auto att = block(human, scene);
    return {att.human, att.scene};
}

struct FusedScores {
    Tensor human_selection;  // S_HsN: T×1
    Tensor scene_selection;  // S_SsN: T×1
    Tensor coupled;          // D: T×1
};

/// Inflates the video-level factors across T and combines them with the
/// segment-level factors by Hadamard product. An undefined video-level
/// tensor means that block is disabled (factor 1).
inline FusedScores fuse(const SegmentSelection& segment, const VideoSelection& video, const Tensor& tracklet_scores,
                        const Tensor& scene_scores) {
    detail::require(segment.human.shape() == tracklet_scores.shape() &&
                        segment.scene.shape() == scene_scores.shape() &&
                        tracklet_scores.shape() == scene_scores.shape(),
                    "fuse: score shapes disagree");
    const std::size_t t = tracklet_scores.dim(0);
    Tensor s_human = video.human.defined() ? mul(segment.human, expand_rows(video.human, t)) : segment.human;
    Tensor s_scene = video.scene.defined() ? mul(segment.scene, expand_rows(video.scene, t)) : segment.scene;
    Tensor coupled = add(mul(s_human, tracklet_scores), mul(s_scene, scene_scores));
    return {s_human, s_scene, coupled};
}

}  // namespace hsn
