#pragma once

// Frame-level ROC/AUC evaluation of per-segment scores.

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsn/dataset.hpp"
#include "hsn/model.hpp"

namespace hsn {

/// Piecewise-constant expansion: frame f takes the score of the G=1 segment
/// whose boundary range contains it.
inline std::vector<double> expand_to_frames(std::span<const double> segment_scores, std::size_t frames) {
    detail::require(!segment_scores.empty(), "expand_to_frames: no segments");
    detail::require(frames >= 1, "expand_to_frames: no frames");
    const auto ranges = segment_boundaries(frames, segment_scores.size(), 1);
    std::vector<double> out(frames);
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        for (std::size_t f = ranges[i].begin; f < ranges[i].end; ++f) out[f] = segment_scores[i];
    }
    return out;
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half (Mann-Whitney U / positives / negatives).
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    detail::require(scores.size() == labels.size(), "roc_auc: score and label counts differ");
    std::size_t positives = 0;
    for (int l : labels) positives += l != 0;
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw UndefinedMetric("roc_auc: both classes must be present (" + std::to_string(positives) + " positive, " +
                              std::to_string(negatives) + " negative)");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Sum of (1-based, tie-averaged) ranks of the positives.
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t q = i; q < j; ++q) {
            if (labels[order[q]] != 0) rank_sum += mid_rank;
        }
        i = j;
    }
    const double p = static_cast<double>(positives);
    const double u = rank_sum - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(negatives));
}

struct CategoryAuc {
    double auc = 0.0;
    std::size_t videos = 0;  // anomaly videos of the category
};

struct FoldAuc {
    std::size_t fold = 0;
    double auc = 0.0;
    std::size_t videos = 0;
};

struct EvalReport {
    double overall_auc = 0.0;
    std::map<std::string, CategoryAuc> categories;
    std::vector<FoldAuc> folds;
    std::optional<double> mean_fold_auc;
    std::size_t frames = 0;
    std::size_t videos = 0;
};

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json doc{{"overall_auc", r.overall_auc}, {"frames", r.frames}, {"videos", r.videos}};
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [name, c] : r.categories) cats[name] = {{"auc", c.auc}, {"videos", c.videos}};
    doc["categories"] = std::move(cats);
    if (!r.folds.empty()) {
        nlohmann::json folds = nlohmann::json::array();
        for (const auto& f : r.folds) folds.push_back({{"fold", f.fold}, {"auc", f.auc}, {"videos", f.videos}});
        doc["folds"] = std::move(folds);
        doc["mean_fold_auc"] = r.mean_fold_auc.value_or(0.0);
    }
    return doc;
}

/// Frame scores and labels of one video.
struct VideoScores {
    std::string id;
    VideoLabel label = VideoLabel::normal;
    std::string category;
    std::vector<double> segment_scores;
    std::vector<double> frame_scores;
    std::vector<int> frame_labels;
};

inline std::vector<VideoScores> score_videos(const HsnModel& model, const Dataset& data, const ForwardOptions& options) {
    std::vector<VideoScores> out;
    out.reserve(data.videos.size());
    for (const auto& v : data.videos) {
        Tensor d = forward(model, v, options).head(options.head);
        VideoScores s{v.id, v.label, v.category, {d.values().begin(), d.values().end()}, {}, v.frame_labels()};
        detail::require(s.frame_labels.size() == v.frames, "video " + v.id + ": annotation length mismatch");
        s.frame_scores = expand_to_frames(s.segment_scores, v.frames);
        out.push_back(std::move(s));
    }
    return out;
}

/// Overall AUC over all frames of all videos, plus one AUC per anomaly
/// category computed over that category's videos pooled with every normal
/// video.
inline EvalReport summarize(const std::vector<VideoScores>& videos) {
    EvalReport report;
    std::vector<double> scores;
    std::vector<int> labels;
    std::map<std::string, std::vector<const VideoScores*>> by_category;
    std::vector<const VideoScores*> normals;
    for (const auto& v : videos) {
        scores.insert(scores.end(), v.frame_scores.begin(), v.frame_scores.end());
        labels.insert(labels.end(), v.frame_labels.begin(), v.frame_labels.end());
        (v.label == VideoLabel::normal ? normals : by_category[v.category]).push_back(&v);
    }
    report.videos = videos.size();
    report.frames = scores.size();
    report.overall_auc = roc_auc(scores, labels);
    for (const auto& [name, members] : by_category) {
        std::vector<double> s;
        std::vector<int> l;
        auto append = [&](const VideoScores* v) {
            s.insert(s.end(), v->frame_scores.begin(), v->frame_scores.end());
            l.insert(l.end(), v->frame_labels.begin(), v->frame_labels.end());
        };
        std::for_each(members.begin(), members.end(), append);
        std::for_each(normals.begin(), normals.end(), append);
        report.categories[name] = {roc_auc(s, l), members.size()};
    }
    return report;
}

inline EvalReport evaluate(const HsnModel& model, const Dataset& data, const ForwardOptions& options) {
    return summarize(score_videos(model, data, options));
}

/// Stratified fold assignment: videos are grouped by (label, category), each
/// group is shuffled with the seeded generator and dealt round-robin with a
/// counter that continues across groups, so fold sizes and per-label counts
/// differ by at most one.
inline std::vector<std::size_t> assign_folds(const Dataset& data, std::size_t folds, std::uint64_t seed) {
    detail::require(folds >= 2, "k-fold needs at least two folds");
    detail::require(data.count(VideoLabel::normal) >= folds && data.count(VideoLabel::anomaly) >= folds,
                    "k-fold with k=" + std::to_string(folds) + " needs at least k videos of each class (have " +
                        std::to_string(data.count(VideoLabel::normal)) + " normal, " +
                        std::to_string(data.count(VideoLabel::anomaly)) + " anomaly)");
    std::map<std::pair<int, std::string>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < data.videos.size(); ++i) {
        const auto& v = data.videos[i];
        strata[{static_cast<int>(v.label), v.category}].push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> assignment(data.videos.size());
    std::size_t counter = 0;
    for (auto& [key, members] : strata) {
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i : members) assignment[i] = counter++ % folds;
    }
    return assignment;
}

}  // namespace hsn
