#pragma once

// Finite-difference checks over every differentiable primitive and the
// composite blocks of the network and the losses.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hsn/coupler.hpp"
#include "hsn/gradcheck.hpp"
#include "hsn/human_subnet.hpp"
#include "hsn/loss.hpp"
#include "hsn/scene_subnet.hpp"

namespace hsn {

inline constexpr double kGradCheckTolerance = 1e-4;

struct GradCheckRow {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t probes = 0;
    bool passed() const { return max_rel_error < kGradCheckTolerance; }
};

namespace detail {

inline Tensor uniform_tensor(std::mt19937_64& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> values(numel(shape));
    for (double& v : values) v = dist(rng);
    return Tensor(std::move(shape), std::move(values));
}

/// Random linear functional of x, so every output element gets a distinct
/// upstream gradient.
inline Tensor linear_probe(const Tensor& x, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sum(mul(x, uniform_tensor(rng, x.shape())));
}

inline std::vector<Tensor> tensors_of(const ParamList& params, std::vector<Tensor> extra = {}) {
    for (const auto& p : params) extra.push_back(p.tensor);
    return extra;
}

}  // namespace detail

/// Runs the whole table with double precision, eps = 1e-5 and all extents
/// at most 8. Loss checks use points well away from the hinge, the |.| kink
/// and label-flip boundaries.
inline std::vector<GradCheckRow> run_gradcheck_suite(std::uint64_t seed = 1) {
    using detail::linear_probe;
    using detail::uniform_tensor;
    std::mt19937_64 rng(seed);
    std::vector<GradCheckRow> rows;
    auto check = [&](const std::string& name, const std::function<Tensor()>& build, std::vector<Tensor> inputs) {
        const auto r = grad_check(build, std::move(inputs));
        rows.push_back({name, r.max_rel_error, r.probes});
    };

    Tensor a = uniform_tensor(rng, {4, 3});
    Tensor b = uniform_tensor(rng, {4, 3});
    Tensor row = uniform_tensor(rng, {1, 3});
    Tensor seq = uniform_tensor(rng, {6, 3});
    check("add", [&] { return linear_probe(add(a, b), 1); }, {a, b});
    check("sub", [&] { return linear_probe(sub(a, b), 2); }, {a, b});
    check("mul", [&] { return linear_probe(mul(a, b), 3); }, {a, b});
    check("square", [&] { return linear_probe(square(a), 4); }, {a});
    check("abs", [&] { return linear_probe(abs(a), 5); }, {a});
    check("relu", [&] { return linear_probe(relu(a), 6); }, {a});
    check("sigmoid", [&] { return linear_probe(sigmoid(a), 7); }, {a});
    check("tanh", [&] { return linear_probe(tanh(a), 8); }, {a});
    check("affine_scalar", [&] { return linear_probe(affine_scalar(a, -2.5, 0.3), 9); }, {a});
    check("scale", [&] { return linear_probe(scale(a, 1.75), 10); }, {a});
    check("reshape", [&] { return linear_probe(reshape(a, {3, 4}), 11); }, {a});
    check("concat", [&] { return linear_probe(concat(a, b, 1), 12); }, {a, b});
    check("expand_rows", [&] { return linear_probe(expand_rows(row, 5), 13); }, {row});
    check("sum", [&] { return square(sum(a)); }, {a});
    check("mean", [&] { return square(mean(a)); }, {a});
    check("max_all", [&] { return square(max_all(a)); }, {a});
    check("max_pool", [&] { return linear_probe(pool(a, 1, PoolMode::max), 14); }, {a});
    check("mean_pool", [&] { return linear_probe(pool(a, 0, PoolMode::mean), 15); }, {a});
    check("adaptive_mean_pool", [&] { return linear_probe(adaptive_mean_pool(seq, 4), 16); }, {seq});

    Tensor x = uniform_tensor(rng, {5, 4});
    Tensor w = uniform_tensor(rng, {4, 3});
    Tensor bias = uniform_tensor(rng, {3});
    for (auto act : {Activation::none, Activation::relu, Activation::sigmoid, Activation::tanh}) {
        const char* names[] = {"affine", "affine+relu", "affine+sigmoid", "affine+tanh"};
        check(names[static_cast<int>(act)], [&, act] { return linear_probe(affine(x, w, bias, act), 17); }, {x, w, bias});
    }

    Tensor cx = uniform_tensor(rng, {8, 3});
    Tensor cw = uniform_tensor(rng, {3, 3, 2});
    Tensor cb = uniform_tensor(rng, {2});
    check("conv1d", [&] { return linear_probe(conv1d(cx, cw, cb, 2), 18); }, {cx, cw, cb});

    Tensor lx = uniform_tensor(rng, {3, 4, 2});
    Tensor lwx = uniform_tensor(rng, {2, 8});
    Tensor lwh = uniform_tensor(rng, {2, 8});
    Tensor lb = uniform_tensor(rng, {8});
    check("lstm", [&] { return linear_probe(lstm(lx, lwx, lwh, lb), 19); }, {lx, lwx, lwh, lb});

    // Composites at T=4, n=n_c=n_h=m=4, k^s=2.
    HyperParams hp;
    hp.segments = 4;
    hp.channels = 4;
    hp.conv_channels = 4;
    hp.lstm_hidden = 4;
    hp.selected_tracklets = 2;
    hp.ranker_width = 4;
    Initializer init(seed + 100);
    const SceneParams scene = SceneParams::init(init, hp);
    const HumanParams human = HumanParams::init(init, hp);
    const CouplerParams coupler = CouplerParams::init(init, hp);
    Tensor f1 = uniform_tensor(rng, {4, 4});
    Tensor f2 = uniform_tensor(rng, {8, 4});
    Tensor f3 = uniform_tensor(rng, {12, 4});
    ParamList scene_params;
    scene.collect("scene", scene_params);
    check("mgtm_forward", [&] { return linear_probe(mgtm_forward(f1, f2, f3, scene), 20); },
          detail::tensors_of(scene_params, {f1, f2, f3}));

    Tensor selected = uniform_tensor(rng, {4, 2, 4});
    ParamList human_params;
    human.collect("human", human_params);
    check("relation_model+tracklet_rank", [&] {
        auto r = tracklet_rank(relation_model(selected, human.relation), human.ranker);
        return add(linear_probe(r.scores, 21), linear_probe(r.representation, 22));
    }, detail::tensors_of(human_params, {selected}));

    Tensor f_t = uniform_tensor(rng, {4, 2, 4});
    Tensor f_s = uniform_tensor(rng, {4, 4});
    ParamList segment_params;
    coupler.segment.collect("segment", segment_params);
    check("segment_level_selection", [&] {
        auto s = segment_level_selection(f_t, f_s, coupler.segment);
        return add(linear_probe(s.human, 23), linear_probe(s.scene, 24));
    }, detail::tensors_of(segment_params, {f_t, f_s}));

    Tensor pooled = uniform_tensor(rng, {4, 4});
    ParamList video_params;
    coupler.video.collect("video", video_params);
    check("video_level_selection", [&] {
        auto v = video_level_selection(pooled, f_s, coupler.video);
        return add(linear_probe(v.human, 25), linear_probe(v.scene, 26));
    }, detail::tensors_of(video_params, {pooled, f_s}));

    Tensor ash = uniform_tensor(rng, {4, 1}, 0.05, 0.95);
    Tensor ass = uniform_tensor(rng, {4, 1}, 0.05, 0.95);
    Tensor avh = uniform_tensor(rng, {1, 1}, 0.05, 0.95);
    Tensor avs = uniform_tensor(rng, {1, 1}, 0.05, 0.95);
    Tensor d_tr = uniform_tensor(rng, {4, 1}, 0.0, 1.0);
    Tensor d_sc = uniform_tensor(rng, {4, 1}, 0.0, 1.0);
    check("fuse", [&] {
        auto f = fuse({Tensor(), ash, ass}, {avh, avs}, d_tr, d_sc);
        return add(linear_probe(f.coupled, 27), add(linear_probe(f.human_selection, 28), linear_probe(f.scene_selection, 29)));
    }, {ash, ass, avh, avs, d_tr, d_sc});

    // Hinge active with margin 0.65; pseudo-label midpoint 0.55 with every
    // score at least 0.15 away; Err(Noisy) - Err(Correct) = 0.015.
    Tensor da = Tensor::matrix({{0.2}, {0.7}, {0.35}, {0.9}});
    Tensor dn = Tensor::matrix({{0.1}, {0.3}, {0.2}, {0.25}});
    check("context_loss", [&] { return context_loss(da, dn, 1.3); }, {da, dn});
    check("context_loss (normalized)", [&] { return context_loss(da, dn, 1.3, true); }, {da, dn});
    check("instance_loss", [&] { return instance_loss(da, dn, pseudo_labels(da.values()), 0.8); }, {da, dn});
    check("self_rectifying_loss", [&] { return self_rectifying_loss(da, dn, 1.0, 1.0); }, {da, dn});
    check("classical_ranking_loss", [&] { return classical_ranking_loss(da, dn); }, {da, dn});
    return rows;
}

}  // namespace hsn
