#pragma once

// k-fold cross-validation: train on k-1 folds, evaluate on the held-out one.

#include <cstdint>
#include <vector>

#include "hsn/evaluator.hpp"
#include "hsn/trainer.hpp"

namespace hsn {

/// Seed of fold `fold`'s training run, derived from the run seed only.
inline std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (fold + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct KFoldResult {
    std::vector<std::size_t> assignment;
    std::vector<FoldAuc> folds;
    double mean_auc = 0.0;
};

inline KFoldResult kfold(const Dataset& data, std::size_t k, std::uint64_t seed, const TrainConfig& config,
                         const HyperParams& hyper) {
    KFoldResult result;
    result.assignment = assign_folds(data, k, seed);
    double total = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train_idx;
        std::vector<std::size_t> test_idx;
        for (std::size_t i = 0; i < data.videos.size(); ++i) {
            (result.assignment[i] == f ? test_idx : train_idx).push_back(i);
        }
        TrainConfig fold_config = config;
        fold_config.seed = fold_seed(seed, f);
        const Dataset held_out = data.subset(test_idx);
        TrainResult trained = train(fold_config, data.subset(train_idx), hyper);
        const EvalReport report =
            evaluate(trained.model, held_out, {fold_config.eval_head(), fold_config.video_level});
        result.folds.push_back({f, report.overall_auc, held_out.videos.size()});
        total += report.overall_auc;
    }
    result.mean_auc = total / static_cast<double>(k);
    return result;
}

}  // namespace hsn
