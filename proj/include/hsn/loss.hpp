#pragma once

// Bag-level objectives over one (anomaly, normal) pair of score vectors.

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "hsn/ops.hpp"

namespace hsn {

enum class LossKind { self_rectifying, classical_ranking };

inline const char* to_string(LossKind kind) {
    return kind == LossKind::self_rectifying ? "self-rectifying" : "classical-ranking";
}

/// Per-step pseudo labels of an anomaly bag. Constants for differentiation.
struct PseudoLabels {
    double reference = 0.0;       // D_ref = (max + min) / 2
    std::vector<double> anomaly;  // 1 where D_a[i] > D_ref
    std::vector<double> normal;   // all 0
};

inline PseudoLabels pseudo_labels(std::span<const double> anomaly_scores) {
    detail::require(!anomaly_scores.empty(), "pseudo_labels: empty bag");
    const auto [lo, hi] = std::minmax_element(anomaly_scores.begin(), anomaly_scores.end());
    PseudoLabels labels;
    labels.reference = (*hi + *lo) / 2.0;
    labels.anomaly.reserve(anomaly_scores.size());
    for (double d : anomaly_scores) {
        labels.anomaly.push_back(d > labels.reference ? 1.0 : 0.0);
    }
    labels.normal.assign(anomaly_scores.size(), 0.0);
    return labels;
}

namespace detail {

inline Tensor as_bag(const Tensor& scores, const char* op) {
    require(scores.size() >= 1, std::string(op) + ": empty bag");
    return scores.rank() == 1 ? scores : reshape(scores, {scores.size()});
}

inline void require_pair(const Tensor& anomaly, const Tensor& normal, const char* op) {
    require(anomaly.size() == normal.size(), std::string(op) + ": bag lengths differ (" +
                                                 std::to_string(anomaly.size()) + " vs " +
                                                 std::to_string(normal.size()) + ")");
}

}  // namespace detail

/// L_C = lambda1 * max(0, 1 - sum(D_a) + sum(D_n)). With `normalize` the sums
/// become means over T.
inline Tensor context_loss(const Tensor& anomaly, const Tensor& normal, double lambda1, bool normalize = false) {
    detail::require_pair(anomaly, normal, "context_loss");
    Tensor a = detail::as_bag(anomaly, "context_loss");
    Tensor n = detail::as_bag(normal, "context_loss");
    Tensor gap = sub(sum(n), sum(a));
    const double s = normalize ? 1.0 / static_cast<double>(a.size()) : 1.0;
    return scale(relu(affine_scalar(gap, s, 1.0)), lambda1);
}

/// L_I = lambda2 * |MSE(D_n, 0) - MSE(D_a, P_a)|.
inline Tensor instance_loss(const Tensor& anomaly, const Tensor& normal, const PseudoLabels& labels, double lambda2) {
    detail::require_pair(anomaly, normal, "instance_loss");
    detail::require(labels.anomaly.size() == anomaly.size() && labels.normal.size() == normal.size(),
                    "instance_loss: pseudo labels do not match bag length");
    Tensor a = detail::as_bag(anomaly, "instance_loss");
    Tensor n = detail::as_bag(normal, "instance_loss");
    Tensor target_a({labels.anomaly.size()}, labels.anomaly);
    Tensor target_n({labels.normal.size()}, labels.normal);
    Tensor err_correct = mean(square(sub(n, target_n)));
    Tensor err_noisy = mean(square(sub(a, target_a)));
    return scale(abs(sub(err_correct, err_noisy)), lambda2);
}

/// L_SR = L_C + L_I with labels recomputed from the current D_a.
inline Tensor self_rectifying_loss(const Tensor& anomaly, const Tensor& normal, double lambda1, double lambda2,
                                   bool normalize = false) {
    const PseudoLabels labels = pseudo_labels(anomaly.values());
    return add(context_loss(anomaly, normal, lambda1, normalize), instance_loss(anomaly, normal, labels, lambda2));
}

/// max(0, 1 - max(D_a) + max(D_n)).
inline Tensor classical_ranking_loss(const Tensor& anomaly, const Tensor& normal) {
    detail::require_pair(anomaly, normal, "classical_ranking_loss");
    detail::require(anomaly.size() >= 1, "classical_ranking_loss: empty bag");
    return relu(affine_scalar(sub(max_all(normal), max_all(anomaly)), 1.0, 1.0));
}

struct LossSettings {
    LossKind kind = LossKind::self_rectifying;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    bool normalize_context = false;
};

inline Tensor bag_loss(const Tensor& anomaly, const Tensor& normal, const LossSettings& settings) {
    if (settings.kind == LossKind::classical_ranking) {
        return classical_ranking_loss(anomaly, normal);
    }
    return self_rectifying_loss(anomaly, normal, settings.lambda1, settings.lambda2, settings.normalize_context);
}

}  // namespace hsn
