#pragma once

// Human branch: feature-magnitude tracklet selection, relation modeling
// across the selected tracklets and the tracklet ranker.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "hsn/hyperparams.hpp"
#include "hsn/layers.hpp"

namespace hsn {

struct HumanParams {
    LstmLayer relation;  // n -> n_h, run across the tracklet axis
    RankerMlp ranker;    // n_h -> m -> m -> 1

    static HumanParams init(Initializer& init, const HyperParams& hp) {
        HumanParams p;
        p.relation = LstmLayer::init(init, hp.channels, hp.lstm_hidden);
        p.ranker = RankerMlp::init(init, hp.lstm_hidden, hp.ranker_width);
        return p;
    }

    void collect(const std::string& prefix, ParamList& out) const {
        relation.collect(prefix + ".relation", out);
        ranker.collect(prefix + ".ranker", out);
    }
};

/// FM_j = sum over segments of the L2 norm of tracklet j's feature vector.
/// `tracklets` is T×k×n; k may be zero.
inline std::vector<double> feature_magnitude(const Tensor& tracklets) {
    detail::require_rank(tracklets, 3, "feature_magnitude", "tracklet map");
    const std::size_t t = tracklets.dim(0);
    const std::size_t k = tracklets.dim(1);
    const std::size_t n = tracklets.dim(2);
    std::vector<double> fm(k, 0.0);
    const auto v = tracklets.values();
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double sq = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                const double x = v[(i * k + j) * n + c];
                sq += x * x;
            }
            fm[j] += std::sqrt(sq);
        }
    }
    return fm;
}

struct SelectedTracklets {
    Tensor features;          // T×k^s×n, ascending FM
    std::vector<int> source;  // original tracklet index per slot, -1 for padding
};

/// Keeps the k^s largest-FM tracklets for the whole video and orders them by
/// ascending FM (smaller original index first on ties). Missing tracklets
/// are zero pads placed in the leading slots.
inline SelectedTracklets select_tracklets(const Tensor& tracklets, std::size_t keep) {
    detail::require(keep >= 1, "select_tracklets: k^s must be at least 1");
    const std::vector<double> fm = feature_magnitude(tracklets);
    const std::size_t t = tracklets.dim(0);
    const std::size_t k = tracklets.dim(1);
    const std::size_t n = tracklets.dim(2);

    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fm[a] > fm[b]; });
    order.resize(std::min(k, keep));
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fm[a] < fm[b] || (fm[a] == fm[b] && a < b); });

    SelectedTracklets out;
    out.source.assign(keep - order.size(), -1);
    out.source.insert(out.source.end(), order.begin(), order.end());

    std::vector<double> values(t * keep * n, 0.0);
    const auto v = tracklets.values();
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t slot = 0; slot < keep; ++slot) {
            const int src = out.source[slot];
            if (src < 0) continue;
            std::copy_n(v.begin() + static_cast<std::ptrdiff_t>((i * k + static_cast<std::size_t>(src)) * n), n,
                        values.begin() + static_cast<std::ptrdiff_t>((i * keep + slot) * n));
        }
    }
    out.features = Tensor({t, keep, n}, std::move(values));
    return out;
}

/// Per segment, an LSTM runs over the k^s selected tracklets in ascending-FM
/// order; no state is carried between segments. T×k^s×n -> T×k^s×n_h.
inline Tensor relation_model(const Tensor& selected, const LstmLayer& relation) {
    detail::require_rank(selected, 3, "relation_model", "selected tracklets");
    return relation(selected);
}

struct TrackletRank {
    Tensor scores;            // D_Tr: T×1, max over tracklets
    Tensor tracklet_scores;   // T×k^s
    Tensor representation;    // F_T: T×k^s×m
};

inline TrackletRank tracklet_rank(const Tensor& relations, const RankerMlp& ranker) {
    detail::require_rank(relations, 3, "tracklet_rank", "relation features");
    const std::size_t t = relations.dim(0);
    const std::size_t ks = relations.dim(1);
    auto out = ranker(reshape(relations, {t * ks, relations.dim(2)}));
    Tensor per_tracklet = reshape(out.scores, {t, ks});
    Tensor scores = reshape(pool(per_tracklet, 1, PoolMode::max), {t, 1});
    Tensor representation = reshape(out.intermediate, {t, ks, out.intermediate.dim(1)});
    return {scores, per_tracklet, representation};
}

inline TrackletRank human_forward(const Tensor& tracklets, const HumanParams& params, std::size_t keep) {
    SelectedTracklets selected = select_tracklets(tracklets, keep);
    return tracklet_rank(relation_model(selected.features, params.relation), params.ranker);
}

}  // namespace hsn
