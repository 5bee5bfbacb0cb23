#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hsn/gradcheck.hpp"
#include "hsn/scene_subnet.hpp"
#include "test_util.hpp"

using namespace hsn;
using hsn::test::fill_params;
using hsn::test::random_tensor;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

HyperParams small(std::size_t t, std::size_t n) { return HyperParams::desk(t, n); }

SceneParams make_params(const HyperParams& hp, std::uint64_t seed = 3) {
    Initializer init(seed);
    return SceneParams::init(init, hp);
}

ParamList params_of(const SceneParams& p) {
    ParamList out;
    p.collect("scene", out);
    return out;
}

}  // namespace

TEST(TemporalDownscale, ThreeTToTwoT) {
    const HyperParams hp = small(8, 16);
    const SceneParams p = make_params(hp);
    std::mt19937_64 rng(1);
    Tensor f3 = random_tensor(rng, {24, 16});
    const Tensor out = temporal_downscale(f3, 16, p.level1);
    EXPECT_EQ(out.shape(), (Shape{16, 16}));
}

TEST(TemporalDownscale, PoolingBinsOfFourToTwo) {
    Tensor x = Tensor::matrix({{1.0}, {2.0}, {3.0}, {4.0}});
    const Tensor y = adaptive_mean_pool(x, 2);
    EXPECT_DOUBLE_EQ(y.values()[0], 1.5);
    EXPECT_DOUBLE_EQ(y.values()[1], 3.5);
}

TEST(TemporalDownscale, PoolingOfConstantIsConstant) {
    const Tensor y = adaptive_mean_pool(Tensor::full({9, 3}, 0.7), 4);
    for (double v : y.values()) EXPECT_DOUBLE_EQ(v, 0.7);
}

TEST(TemporalDownscale, RejectsNonShrinkingTarget) {
    const SceneParams p = make_params(small(4, 2));
    EXPECT_THROW(temporal_downscale(Tensor::zeros({8, 2}), 8, p.level1), InvalidInput);
}

TEST(TemporalDownscale, StackedReceptiveFieldIs33) {
    // Impulse response of the k=5,d=4 then k=3,d=8 stack with all-ones
    // kernels: first to last nonzero tap covers the combined span.
    const std::size_t len = 81;
    std::vector<double> impulse(len, 0.0);
    impulse[40] = 1.0;
    Tensor x({len, 1}, impulse);
    Tensor h = conv1d(x, Tensor::ones({5, 1, 1}), Tensor::zeros({1}), 4);
    h = conv1d(h, Tensor::ones({3, 1, 1}), Tensor::zeros({1}), 8);
    const auto v = h.values();
    const auto first = std::find_if(v.begin(), v.end(), [](double x) { return x != 0.0; });
    const auto last = std::find_if(v.rbegin(), v.rend(), [](double x) { return x != 0.0; });
    EXPECT_EQ(std::distance(first, last.base()), 33);
    EXPECT_EQ(static_cast<std::size_t>(std::count(v.begin(), v.end(), 0.0)), len - 9);  // 5 x 3 taps, 9 distinct offsets
}

TEST(Bottleneck, ShapeContract) {
    const HyperParams hp = small(8, 12);
    const SceneParams p = make_params(hp);
    EXPECT_EQ(bottleneck(Tensor::zeros({16, 12}), p.bottleneck2).shape(), (Shape{16, 16}));
}

TEST(Bottleneck, ZeroWeightsGiveZeroOutput) {
    const HyperParams hp = small(8, 4);
    SceneParams p = make_params(hp);
    ParamList ps;
    p.bottleneck1.collect("b", ps);
    fill_params(ps, 0.0);
    std::mt19937_64 rng(2);
    const Tensor out = bottleneck(random_tensor(rng, {8, 4}), p.bottleneck1);
    for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(Bottleneck, SingleFrameEqualsAffine) {
    const HyperParams hp = small(1, 5);
    const SceneParams p = make_params(hp);
    std::mt19937_64 rng(4);
    Tensor x = random_tensor(rng, {1, 5});
    const Tensor got = bottleneck(x, p.bottleneck1);
    const auto w = p.bottleneck1.weight.values();  // 1×5×n_c
    const auto b = p.bottleneck1.bias.values();
    for (std::size_t o = 0; o < hp.conv_channels; ++o) {
        double acc = b[o];
        for (std::size_t i = 0; i < 5; ++i) acc += x.values()[i] * w[i * hp.conv_channels + o];
        EXPECT_NEAR(got.values()[o], std::max(acc, 0.0), 1e-14);
    }
}

TEST(Mgtm, OutputIsTByLstmHidden) {
    const HyperParams hp = small(8, 16);
    const SceneParams p = make_params(hp);
    std::mt19937_64 rng(5);
    const Tensor out = mgtm_forward(random_tensor(rng, {8, 16}), random_tensor(rng, {16, 16}),
                                    random_tensor(rng, {24, 16}), p);
    EXPECT_EQ(out.shape(), (Shape{8, 16}));
}

TEST(Mgtm, LengthIsTForEveryT) {
    for (std::size_t t : {1u, 2u, 3u, 5u, 8u}) {
        const HyperParams hp = small(t, 3);
        const SceneParams p = make_params(hp, t);
        std::mt19937_64 rng(t);
        const Tensor out =
            mgtm_forward(random_tensor(rng, {t, 3}), random_tensor(rng, {2 * t, 3}), random_tensor(rng, {3 * t, 3}), p);
        EXPECT_EQ(out.dim(0), t) << "T=" << t;
    }
}

TEST(Mgtm, ZeroInputsAndParamsGiveZeros) {
    const HyperParams hp = small(4, 6);
    SceneParams p = make_params(hp);
    fill_params(params_of(p), 0.0);
    const Tensor out = mgtm_forward(Tensor::zeros({4, 6}), Tensor::zeros({8, 6}), Tensor::zeros({12, 6}), p);
    for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(Mgtm, RejectsMismatchedGranularities) {
    const SceneParams p = make_params(small(4, 6));
    EXPECT_THROW(mgtm_forward(Tensor::zeros({4, 6}), Tensor::zeros({9, 6}), Tensor::zeros({12, 6}), p), InvalidInput);
    EXPECT_THROW(mgtm_forward(Tensor::zeros({4, 6}), Tensor::zeros({8, 5}), Tensor::zeros({12, 6}), p), InvalidInput);
}

TEST(Mgtm, ParameterGradientsMatchFiniteDifferences) {
    HyperParams hp = small(4, 3);
    hp.conv_channels = 3;
    hp.lstm_hidden = 3;
    const SceneParams p = make_params(hp, 11);
    std::mt19937_64 rng(6);
    Tensor f1 = random_tensor(rng, {4, 3});
    Tensor f2 = random_tensor(rng, {8, 3});
    Tensor f3 = random_tensor(rng, {12, 3});
    std::vector<Tensor> inputs;
    for (const auto& q : params_of(p)) inputs.push_back(q.tensor);
    const auto r = grad_check([&] { return sum(mgtm_forward(f1, f2, f3, p)); }, inputs);
    EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(SceneRank, ZeroParamsGiveHalfAndZeroRepresentation) {
    const HyperParams hp = small(8, 16);
    SceneParams p = make_params(hp);
    fill_params(params_of(p), 0.0);
    std::mt19937_64 rng(7);
    const SceneRank r = scene_rank(random_tensor(rng, {8, 16}), p.ranker);
    EXPECT_EQ(r.scores.shape(), (Shape{8, 1}));
    EXPECT_EQ(r.representation.shape(), (Shape{8, 16}));
    for (double v : r.scores.values()) EXPECT_EQ(v, 0.5);
    for (double v : r.representation.values()) EXPECT_EQ(v, 0.0);
}

TEST(SceneRank, SingleUnitChainMatchesArithmetic) {
    HyperParams hp = small(3, 1);
    hp.lstm_hidden = 1;
    hp.ranker_width = 1;
    SceneParams p = make_params(hp);
    auto set = [](Tensor t, double v) { t.mutable_values()[0] = v; };
    set(p.ranker.fc1.weight, 2.0);
    set(p.ranker.fc1.bias, -0.5);
    set(p.ranker.fc2.weight, -1.5);
    set(p.ranker.fc2.bias, 1.0);
    set(p.ranker.head.weight, 0.8);
    set(p.ranker.head.bias, 0.1);
    const Tensor x = Tensor::matrix({{0.1}, {0.6}, {-0.4}});
    const SceneRank r = scene_rank(x, p.ranker);
    for (std::size_t i = 0; i < 3; ++i) {
        const double h1 = std::max(0.0, 2.0 * x.values()[i] - 0.5);
        const double h2 = std::max(0.0, -1.5 * h1 + 1.0);
        EXPECT_NEAR(r.representation.values()[i], h2, 1e-15);
        EXPECT_NEAR(r.scores.values()[i], sig(0.8 * h2 + 0.1), 1e-15);
    }
}

TEST(SceneForward, ScoresLieInUnitInterval) {
    const HyperParams hp = small(8, 16);
    const SceneParams p = make_params(hp);
    std::mt19937_64 rng(8);
    const SceneRank r = scene_forward({random_tensor(rng, {8, 16}, -3, 3), random_tensor(rng, {16, 16}, -3, 3),
                                       random_tensor(rng, {24, 16}, -3, 3)},
                                      p);
    for (double v : r.scores.values()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}
