#pragma once

// Scene branch: multi-granularity temporal pyramid, recurrent encoding and
// the per-segment scene ranker.

#include <array>
#include <string>

#include "hsn/hyperparams.hpp"
#include "hsn/layers.hpp"

namespace hsn {

inline constexpr std::size_t kDownscaleKernels[2] = {5, 3};
inline constexpr std::size_t kDownscaleDilations[2] = {4, 8};

/// Two stacked dilated convolutions (k=5,d=4 then k=3,d=8).
struct DownscalerParams {
    Conv1dLayer first;
    Conv1dLayer second;

    static DownscalerParams init(Initializer& init, std::size_t in, std::size_t out) {
        Conv1dLayer a = Conv1dLayer::init(init, kDownscaleKernels[0], kDownscaleDilations[0], in, out);
        Conv1dLayer b = Conv1dLayer::init(init, kDownscaleKernels[1], kDownscaleDilations[1], out, out);
        return {a, b};
    }

    void collect(const std::string& prefix, ParamList& out) const {
        first.collect(prefix + ".conv1", out);
        second.collect(prefix + ".conv2", out);
    }
};

struct SceneParams {
    DownscalerParams level1;   // 3T×n   -> 2T×n_c
    DownscalerParams level2;   // 2T×2n_c -> T×n_c
    Conv1dLayer bottleneck2;   // 2T×n -> 2T×n_c, k=1
    Conv1dLayer bottleneck1;   // T×n  -> T×n_c,  k=1
    LstmLayer lstm;            // 2n_c -> n_h
    RankerMlp ranker;          // n_h -> m -> m -> 1

    static SceneParams init(Initializer& init, const HyperParams& hp) {
        SceneParams p;
        p.level1 = DownscalerParams::init(init, hp.channels, hp.conv_channels);
        p.level2 = DownscalerParams::init(init, 2 * hp.conv_channels, hp.conv_channels);
        p.bottleneck2 = Conv1dLayer::init(init, 1, 1, hp.channels, hp.conv_channels);
        p.bottleneck1 = Conv1dLayer::init(init, 1, 1, hp.channels, hp.conv_channels);
        p.lstm = LstmLayer::init(init, 2 * hp.conv_channels, hp.lstm_hidden);
        p.ranker = RankerMlp::init(init, hp.lstm_hidden, hp.ranker_width);
        return p;
    }

    void collect(const std::string& prefix, ParamList& out) const {
        level1.collect(prefix + ".down1", out);
        level2.collect(prefix + ".down2", out);
        bottleneck2.collect(prefix + ".bottleneck2", out);
        bottleneck1.collect(prefix + ".bottleneck1", out);
        lstm.collect(prefix + ".lstm", out);
        ranker.collect(prefix + ".ranker", out);
    }
};

/// Same-length dilated convolutions (ReLU) followed by adaptive mean pooling
/// to exactly `target_length` frames.
inline Tensor temporal_downscale(const Tensor& features, std::size_t target_length,
                                 const DownscalerParams& params) {
    detail::require_rank(features, 2, "temporal_downscale", "feature map");
    detail::require(target_length >= 1 && features.dim(0) > target_length,
                    "temporal_downscale: cannot reduce " + std::to_string(features.dim(0)) + " frames to " +
                        std::to_string(target_length));
    Tensor h = params.first(features, Activation::relu);
    h = params.second(h, Activation::relu);
    return adaptive_mean_pool(h, target_length);
}

/// Pointwise (k=1) convolution to n_c channels with ReLU.
inline Tensor bottleneck(const Tensor& features, const Conv1dLayer& layer) {
    return layer(features, Activation::relu);
}

/// Builds the T×2n_c pyramid from the three granularities and encodes it
/// with the LSTM. Returns F*_Sc: T×n_h.
inline Tensor mgtm_forward(const Tensor& f1, const Tensor& f2, const Tensor& f3, const SceneParams& params) {
    detail::require_rank(f1, 2, "mgtm_forward", "G=1 map");
    detail::require_rank(f2, 2, "mgtm_forward", "G=2 map");
    detail::require_rank(f3, 2, "mgtm_forward", "G=3 map");
    const std::size_t t = f1.dim(0);
    detail::require(t >= 1 && f2.dim(0) == 2 * t && f3.dim(0) == 3 * t,
                    "mgtm_forward: granularity lengths must be T, 2T, 3T; got " + to_string(f1.shape()) +
                        ", " + to_string(f2.shape()) + ", " + to_string(f3.shape()));
    detail::require(f1.dim(1) == f2.dim(1) && f2.dim(1) == f3.dim(1),
                    "mgtm_forward: granularities disagree on channel count");

    Tensor level1 = concat(temporal_downscale(f3, 2 * t, params.level1), bottleneck(f2, params.bottleneck2), 1);
    Tensor level2 = concat(temporal_downscale(level1, t, params.level2), bottleneck(f1, params.bottleneck1), 1);
    Tensor encoded = params.lstm(reshape(level2, {1, t, level2.dim(1)}));
    return reshape(encoded, {t, encoded.dim(2)});
}

struct SceneRank {
    Tensor scores;          // D_Sc: T×1
    Tensor representation;  // F_S: T×m
};

inline SceneRank scene_rank(const Tensor& encoded, const RankerMlp& ranker) {
    auto out = ranker(encoded);
    return {out.scores, out.intermediate};
}

inline SceneRank scene_forward(const std::array<Tensor, 3>& granularities, const SceneParams& params) {
    return scene_rank(mgtm_forward(granularities[0], granularities[1], granularities[2], params), params.ranker);
}

}  // namespace hsn
