#pragma once

// Multiple-instance training over (anomaly, normal) video pairs.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hsn/dataset.hpp"
#include "hsn/loss.hpp"
#include "hsn/model.hpp"
#include "hsn/optim.hpp"

namespace hsn {

enum class Schedule { staged, joint };
enum class Subnets { both, scene, human };

inline const char* to_string(Schedule s) { return s == Schedule::staged ? "staged" : "joint"; }
inline const char* to_string(Subnets s) {
    return s == Subnets::both ? "both" : s == Subnets::scene ? "scene" : "human";
}

struct TrainConfig {
    LossSettings loss;
    AdamConfig adam;
    std::size_t steps = 1500;      // total pair-steps over all phases
    std::size_t batch_pairs = 1;   // pairs averaged per step
    std::uint64_t seed = 7;
    Schedule schedule = Schedule::staged;
    Subnets subnets = Subnets::both;
    bool video_level = true;       // false: segment-level selection only

    void validate() const {
        detail::require(adam.learning_rate >= 0.0, "learning rate must be non-negative");
        detail::require(steps > 0, "step count must be positive");
        detail::require(batch_pairs > 0, "batch size must be positive");
        detail::require(loss.lambda1 >= 0.0 && loss.lambda2 >= 0.0, "loss weights must be non-negative");
        detail::require(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0,
                        "moment decay rates must lie in [0, 1)");
    }

    /// Score vector a model trained with this configuration is judged by.
    ScoreHead eval_head() const {
        switch (subnets) {
            case Subnets::scene:
                return ScoreHead::scene;
            case Subnets::human:
                return ScoreHead::human;
            case Subnets::both:
                break;
        }
        return ScoreHead::coupled;
    }
};

struct TrainPhase {
    std::string name;
    ScoreHead head = ScoreHead::coupled;
    std::vector<ParamGroup> groups;
    std::size_t steps = 0;
};

/// Staged: scene branch on D_Sc, human branch on D_Tr, then the coupler on D
/// with both branches frozen. Joint: everything on D. Subnet-only runs train
/// just that branch on its own score.
inline std::vector<TrainPhase> plan_phases(const TrainConfig& config) {
    if (config.subnets == Subnets::scene) return {{"scene", ScoreHead::scene, {ParamGroup::scene}, config.steps}};
    if (config.subnets == Subnets::human) return {{"human", ScoreHead::human, {ParamGroup::human}, config.steps}};
    if (config.schedule == Schedule::joint) {
        return {{"joint", ScoreHead::coupled, {ParamGroup::scene, ParamGroup::human, ParamGroup::coupler}, config.steps}};
    }
    const std::size_t third = config.steps / 3;
    return {{"scene", ScoreHead::scene, {ParamGroup::scene}, third},
            {"human", ScoreHead::human, {ParamGroup::human}, third},
            {"coupler", ScoreHead::coupled, {ParamGroup::coupler}, config.steps - 2 * third}};
}

inline ParamList collect_groups(const HsnModel& model, const std::vector<ParamGroup>& groups) {
    ParamList out;
    for (ParamGroup g : groups) {
        auto part = model.parameters(g);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

/// Loss of a batch of pairs, averaged; the graph is left recorded.
inline Tensor pair_loss(const HsnModel& model, std::span<const VideoFeatures* const> anomalies,
                        std::span<const VideoFeatures* const> normals, ScoreHead head, const TrainConfig& config) {
    detail::require(!anomalies.empty() && anomalies.size() == normals.size(), "pair_loss: unmatched pair batch");
    const ForwardOptions options{head, config.video_level};
    Tensor total;
    for (std::size_t b = 0; b < anomalies.size(); ++b) {
        detail::require(anomalies[b]->label == VideoLabel::anomaly && normals[b]->label == VideoLabel::normal,
                        "pair_loss: expected one anomaly and one normal video");
        Tensor a = forward(model, *anomalies[b], options).head(head);
        Tensor n = forward(model, *normals[b], options).head(head);
        Tensor l = bag_loss(a, n, config.loss);
        total = total.defined() ? add(total, l) : l;
    }
    return anomalies.size() == 1 ? total : scale(total, 1.0 / static_cast<double>(anomalies.size()));
}

/// One optimization step: forward both bags, loss, backward, Adam update of
/// the optimizer's parameters. Returns the loss before the update.
inline double train_step(HsnModel& model, Adam& optimizer, std::span<const VideoFeatures* const> anomalies,
                         std::span<const VideoFeatures* const> normals, ScoreHead head, const TrainConfig& config) {
    for (auto& p : model.parameters()) p.tensor.zero_grad();
    Tensor loss = pair_loss(model, anomalies, normals, head, config);
    backward(loss);
    optimizer.step();
    return loss.item();
}

inline double train_step(HsnModel& model, Adam& optimizer, const VideoFeatures& anomaly, const VideoFeatures& normal,
                         ScoreHead head, const TrainConfig& config) {
    const VideoFeatures* a = &anomaly;
    const VideoFeatures* n = &normal;
    return train_step(model, optimizer, std::span(&a, 1), std::span(&n, 1), head, config);
}

struct PhaseRecord {
    std::string name;
    std::size_t first_step = 0;
    std::size_t steps = 0;
};

struct TrainLog {
    std::vector<PhaseRecord> phases;
    std::vector<double> losses;  // one per pair-step, in order
};

struct TrainResult {
    HsnModel model;
    TrainLog log;
};

/// Dimensions of a model trained on `data`, taking T and n from the data.
inline HyperParams fit_hyperparams(HyperParams hp, const Dataset& data) {
    if (hp.channels == 0) hp.channels = data.channels;
    if (hp.segments == 0) hp.segments = data.segments;
    detail::require(hp.channels == data.channels, "configured channel count " + std::to_string(hp.channels) +
                                                      " differs from dataset n=" + std::to_string(data.channels));
    detail::require(hp.segments == data.segments, "configured segment count " + std::to_string(hp.segments) +
                                                      " differs from dataset T=" + std::to_string(data.segments));
    return hp;
}

using StepObserver = std::function<void(const std::string& phase, std::size_t step, double loss)>;

/// Trains a fresh model on every video of `data`. Each pair-step samples one
/// anomaly and one normal video uniformly with the seeded generator.
inline TrainResult train(const TrainConfig& config, const Dataset& data, const HyperParams& hyper,
                         const StepObserver& observer = {}) {
    config.validate();
    std::vector<const VideoFeatures*> anomalies;
    std::vector<const VideoFeatures*> normals;
    for (const auto& v : data.videos) (v.label == VideoLabel::anomaly ? anomalies : normals).push_back(&v);
    detail::require(!anomalies.empty(), "training needs at least one anomaly video");
    detail::require(!normals.empty(), "training needs at least one normal video");

    TrainResult result{HsnModel::init(fit_hyperparams(hyper, data), config.seed), {}};
    for (const auto* v : anomalies) check_compatible(result.model, *v);
    for (const auto* v : normals) check_compatible(result.model, *v);

    std::mt19937_64 sampler(config.seed ^ 0x9E3779B97F4A7C15ULL);
    std::uniform_int_distribution<std::size_t> pick_anomaly(0, anomalies.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_normal(0, normals.size() - 1);
    std::vector<const VideoFeatures*> batch_a(config.batch_pairs);
    std::vector<const VideoFeatures*> batch_n(config.batch_pairs);

    for (const auto& phase : plan_phases(config)) {
        result.log.phases.push_back({phase.name, result.log.losses.size(), phase.steps});
        Adam optimizer(collect_groups(result.model, phase.groups), config.adam);
        for (std::size_t s = 0; s < phase.steps; ++s) {
            for (std::size_t b = 0; b < config.batch_pairs; ++b) {
                batch_a[b] = anomalies[pick_anomaly(sampler)];
                batch_n[b] = normals[pick_normal(sampler)];
            }
            const double loss = train_step(result.model, optimizer, batch_a, batch_n, phase.head, config);
            if (observer) observer(phase.name, result.log.losses.size(), loss);
            result.log.losses.push_back(loss);
        }
    }
    return result;
}

}  // namespace hsn
