#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "hsn/coupler.hpp"
#include "test_util.hpp"

using namespace hsn;
using hsn::test::fill_params;
using hsn::test::random_tensor;

namespace {

CouplerParams make_params(std::size_t width, std::uint64_t seed = 3) {
    HyperParams hp = HyperParams::desk(8, 4);
    hp.ranker_width = width;
    Initializer init(seed);
    return CouplerParams::init(init, hp);
}

CouplerParams zero_params(std::size_t width) {
    CouplerParams p = make_params(width);
    ParamList ps;
    p.collect("coupler", ps);
    fill_params(ps, 0.0);
    return p;
}

Tensor column(std::initializer_list<double> v) { return Tensor({v.size(), 1}, std::vector<double>(v)); }

}  // namespace

TEST(SegmentSelection, ZeroParamsGiveHalf) {
    const CouplerParams p = zero_params(16);
    std::mt19937_64 rng(1);
    const auto s = segment_level_selection(random_tensor(rng, {8, 3, 16}), random_tensor(rng, {8, 16}), p.segment);
    EXPECT_EQ(s.human.shape(), (Shape{8, 1}));
    EXPECT_EQ(s.scene.shape(), (Shape{8, 1}));
    for (double v : s.human.values()) EXPECT_EQ(v, 0.5);
    for (double v : s.scene.values()) EXPECT_EQ(v, 0.5);
}

TEST(SegmentSelection, SingleTrackletPoolIsIdentity) {
    const CouplerParams p = make_params(6);
    std::mt19937_64 rng(2);
    const Tensor ft = random_tensor(rng, {5, 1, 6});
    const auto s = segment_level_selection(ft, random_tensor(rng, {5, 6}), p.segment);
    EXPECT_TRUE(std::equal(ft.values().begin(), ft.values().end(), s.pooled_tracklets.values().begin()));
}

TEST(SegmentSelection, RejectsWidthMismatch) {
    const CouplerParams p = make_params(6);
    EXPECT_THROW(segment_level_selection(Tensor::zeros({4, 2, 5}), Tensor::zeros({4, 6}), p.segment), InvalidInput);
    EXPECT_THROW(segment_level_selection(Tensor::zeros({3, 2, 6}), Tensor::zeros({4, 6}), p.segment), InvalidInput);
}

TEST(VideoSelection, ZeroParamsGiveHalf) {
    const CouplerParams p = zero_params(16);
    std::mt19937_64 rng(3);
    const auto v = video_level_selection(random_tensor(rng, {8, 16}), random_tensor(rng, {8, 16}), p.video);
    EXPECT_EQ(v.human.shape(), (Shape{1, 1}));
    EXPECT_EQ(v.human.item(), 0.5);
    EXPECT_EQ(v.scene.item(), 0.5);
}

TEST(VideoSelection, ConstantInTimeMatchesSegmentHead) {
    // With the same block weights, mean pooling a time-constant map returns
    // that constant row, so the video head equals the segment head at any t.
    const CouplerParams p = make_params(5);
    std::mt19937_64 rng(4);
    const Tensor row_h = random_tensor(rng, {1, 5});
    const Tensor row_s = random_tensor(rng, {1, 5});
    const Tensor pooled = expand_rows(row_h, 6);
    const Tensor scene = expand_rows(row_s, 6);
    const auto vid = video_level_selection(pooled, scene, p.segment);
    const auto seg = segment_level_selection(reshape(pooled, {6, 1, 5}), scene, p.segment);
    for (std::size_t t = 0; t < 6; ++t) {
        EXPECT_NEAR(vid.human.item(), seg.human.values()[t], 1e-14);
        EXPECT_NEAR(vid.scene.item(), seg.scene.values()[t], 1e-14);
    }
}

TEST(VideoSelection, InvariantToSegmentPermutation) {
    const CouplerParams p = make_params(4);
    std::mt19937_64 rng(5);
    const std::size_t t = 7, m = 4;
    const Tensor h = random_tensor(rng, {t, m});
    const Tensor s = random_tensor(rng, {t, m});
    std::vector<std::size_t> perm(t);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> hp(t * m), sp(t * m);
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t c = 0; c < m; ++c) {
            hp[i * m + c] = h.values()[perm[i] * m + c];
            sp[i * m + c] = s.values()[perm[i] * m + c];
        }
    const auto a = video_level_selection(h, s, p.video);
    const auto b = video_level_selection(Tensor({t, m}, hp), Tensor({t, m}, sp), p.video);
    EXPECT_NEAR(a.human.item(), b.human.item(), 1e-14);
    EXPECT_NEAR(a.scene.item(), b.scene.item(), 1e-14);
}

TEST(Fuse, HumanOnlySelectionReturnsTrackletScores) {
    const Tensor d_tr = column({0.3, 0.9, 0.1});
    const Tensor d_sc = column({0.7, 0.2, 0.5});
    const auto f = fuse({Tensor(), Tensor::ones({3, 1}), Tensor::zeros({3, 1})}, {}, d_tr, d_sc);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(f.coupled.values()[i], d_tr.values()[i]);
}

TEST(Fuse, HalfAttentionsGiveQuarterFactors) {
    const Tensor d_tr = column({0.3, 0.9});
    const Tensor d_sc = column({0.7, 0.2});
    const Tensor half = Tensor::full({2, 1}, 0.5);
    const Tensor half1 = Tensor::full({1, 1}, 0.5);
    const auto f = fuse({Tensor(), half, half}, {half1, half1}, d_tr, d_sc);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(f.human_selection.values()[i], 0.25);
        EXPECT_EQ(f.scene_selection.values()[i], 0.25);
        EXPECT_NEAR(f.coupled.values()[i], 0.25 * (d_tr.values()[i] + d_sc.values()[i]), 1e-15);
    }
}

TEST(Fuse, HadamardWithInflatedVideoFactor) {
    const Tensor seg = column({0.2, 0.8});
    const Tensor vid = Tensor::full({1, 1}, 0.5);
    const auto f = fuse({Tensor(), seg, seg}, {vid, vid}, column({0.0, 0.0}), column({0.0, 0.0}));
    EXPECT_NEAR(f.human_selection.values()[0], 0.1, 1e-15);
    EXPECT_NEAR(f.human_selection.values()[1], 0.4, 1e-15);
}

TEST(Fuse, DisabledVideoLevelLeavesSegmentFactors) {
    const Tensor seg = column({0.2, 0.8});
    const auto f = fuse({Tensor(), seg, seg}, {}, column({1.0, 1.0}), column({0.0, 0.0}));
    EXPECT_EQ(f.human_selection.values()[1], 0.8);
    EXPECT_EQ(f.coupled.values()[0], 0.2);
}

TEST(Fuse, RejectsShapeMismatch) {
    EXPECT_THROW(fuse({Tensor(), column({0.5, 0.5}), column({0.5, 0.5})}, {}, column({0.1}), column({0.2})),
                 InvalidInput);
}

TEST(Fuse, OutputRangesOnRandomModels) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const CouplerParams p = make_params(4, static_cast<std::uint64_t>(trial));
        const auto seg = segment_level_selection(random_tensor(rng, {5, 2, 4}, -4, 4), random_tensor(rng, {5, 4}, -4, 4),
                                                 p.segment);
        const auto vid = video_level_selection(seg.pooled_tracklets, random_tensor(rng, {5, 4}, -4, 4), p.video);
        const auto f = fuse(seg, vid, random_tensor(rng, {5, 1}, 0, 1), random_tensor(rng, {5, 1}, 0, 1));
        for (std::size_t i = 0; i < 5; ++i) {
            EXPECT_GT(f.human_selection.values()[i], 0.0);
            EXPECT_LT(f.human_selection.values()[i], 1.0);
            EXPECT_GT(f.scene_selection.values()[i], 0.0);
            EXPECT_LT(f.scene_selection.values()[i], 1.0);
            EXPECT_GE(f.coupled.values()[i], 0.0);
            EXPECT_LE(f.coupled.values()[i], 2.0);
        }
    }
}
