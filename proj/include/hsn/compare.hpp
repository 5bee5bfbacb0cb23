#pragma once

// Paired comparison of the self-rectifying and classical ranking losses.

#include <json.hpp>

#include "hsn/evaluator.hpp"
#include "hsn/trainer.hpp"

namespace hsn {

/// Videos marked "train", or every video when no split is marked.
inline Dataset training_videos(const Dataset& data) {
    Dataset d = data.split("train");
    return d.videos.empty() ? data : d;
}

/// Videos marked "test", or every video when no split is marked.
inline Dataset evaluation_videos(const Dataset& data) {
    Dataset d = data.split("test");
    return d.videos.empty() ? data : d;
}

struct LossComparison {
    double self_rectifying_auc = 0.0;
    double classical_ranking_auc = 0.0;
    double delta() const { return self_rectifying_auc - classical_ranking_auc; }
};

inline nlohmann::json to_json(const LossComparison& c) {
    return {{"self_rectifying_auc", c.self_rectifying_auc},
            {"classical_ranking_auc", c.classical_ranking_auc},
            {"delta", c.delta()}};
}

/// Twin runs that share seed, data order and every other setting; only the
/// loss differs.
inline LossComparison compare_losses(const TrainConfig& config, const Dataset& train_data, const Dataset& test_data,
                                     const HyperParams& hyper) {
    LossComparison out;
    for (LossKind kind : {LossKind::self_rectifying, LossKind::classical_ranking}) {
        TrainConfig c = config;
        c.loss.kind = kind;
        const TrainResult trained = train(c, train_data, hyper);
        const double auc = evaluate(trained.model, test_data, {c.eval_head(), c.video_level}).overall_auc;
        (kind == LossKind::self_rectifying ? out.self_rectifying_auc : out.classical_ranking_auc) = auc;
    }
    return out;
}

}  // namespace hsn
