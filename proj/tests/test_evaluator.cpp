#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "hsn/crossval.hpp"
#include "hsn/evaluator.hpp"

using namespace hsn;

namespace {

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& l) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!l[i]) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (l[j]) continue;
            pairs += 1.0;
            wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    }
    return wins / pairs;
}

VideoScores scored(const std::string& id, VideoLabel label, const std::string& category, std::vector<double> frames,
                   std::vector<int> labels) {
    VideoScores v;
    v.id = id;
    v.label = label;
    v.category = category;
    v.frame_scores = std::move(frames);
    v.frame_labels = std::move(labels);
    return v;
}

/// Annotation-free dataset with the given (label, category) counts.
Dataset labelled(std::size_t normals, std::map<std::string, std::size_t> anomalies) {
    Dataset d;
    auto add = [&](VideoLabel label, const std::string& category, std::size_t i) {
        VideoFeatures v;
        v.id = category + std::to_string(i);
        v.label = label;
        v.category = category;
        d.videos.push_back(v);
    };
    for (std::size_t i = 0; i < normals; ++i) add(VideoLabel::normal, "normal", i);
    for (const auto& [cat, n] : anomalies)
        for (std::size_t i = 0; i < n; ++i) add(VideoLabel::anomaly, cat, i);
    return d;
}

}  // namespace

TEST(ExpandToFrames, TwoSegmentsOverTenFrames) {
    const std::vector<double> d{0.2, 0.8};
    const auto f = expand_to_frames(d, 10);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(f[i], 0.2);
    for (std::size_t i = 5; i < 10; ++i) EXPECT_EQ(f[i], 0.8);
}

TEST(ExpandToFrames, FloorSplitOfSevenFrames) {
    const std::vector<double> d{1.0, 2.0};
    EXPECT_EQ(expand_to_frames(d, 7), (std::vector<double>{1, 1, 1, 2, 2, 2, 2}));
}

TEST(ExpandToFrames, SingleSegmentIsConstant) {
    const std::vector<double> d{0.4};
    for (double x : expand_to_frames(d, 13)) EXPECT_EQ(x, 0.4);
}

TEST(RocAuc, PerfectSeparation) {
    EXPECT_EQ(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
}

TEST(RocAuc, AllTiesGiveHalf) {
    EXPECT_EQ(roc_auc(std::vector<double>{0.3, 0.3, 0.3, 0.3, 0.3}, std::vector<int>{0, 1, 0, 1, 1}), 0.5);
}

TEST(RocAuc, ThreeOfFourPairsCorrect) {
    EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
}

TEST(RocAuc, SingleClassIsUndefined) {
    EXPECT_THROW(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), UndefinedMetric);
    EXPECT_THROW(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}), UndefinedMetric);
}

TEST(RocAuc, MatchesPairwiseOracle) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> len(2, 200);
    std::uniform_int_distribution<int> coarse(0, 9);  // many ties
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = len(rng);
        std::vector<double> s(n);
        std::vector<int> l(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = coarse(rng) / 10.0;
            l[i] = coin(rng);
        }
        l[0] = 0;
        l[1] = 1;
        EXPECT_NEAR(roc_auc(s, l), pairwise_auc(s, l), 1e-12);
    }
}

TEST(RocAuc, InvariantUnderIncreasingTransforms) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(150);
    std::vector<int> l(150);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = std::round(u(rng) * 20.0) / 20.0;
        l[i] = u(rng) < 0.4;
    }
    const double base = roc_auc(s, l);
    for (auto f : {+[](double x) { return std::exp(3.0 * x); }, +[](double x) { return x * x * x - 5.0; },
                   +[](double x) { return std::log1p(x); }}) {
        std::vector<double> t(s.size());
        std::transform(s.begin(), s.end(), t.begin(), f);
        EXPECT_NEAR(roc_auc(t, l), base, 1e-12);
    }
}

TEST(Summarize, NormalAndFullyAnomalousVideos) {
    std::vector<VideoScores> v{scored("n", VideoLabel::normal, "normal", {0, 0, 0}, {0, 0, 0}),
                               scored("a", VideoLabel::anomaly, "scene", {1, 1}, {1, 1})};
    const EvalReport r = summarize(v);
    EXPECT_EQ(r.overall_auc, 1.0);
    EXPECT_EQ(r.frames, 5u);
    EXPECT_EQ(r.videos, 2u);
}

TEST(Summarize, ConstantScoresGiveHalf) {
    std::vector<VideoScores> v{scored("n", VideoLabel::normal, "normal", {0.4, 0.4}, {0, 0}),
                               scored("a", VideoLabel::anomaly, "scene", {0.4, 0.4, 0.4}, {0, 1, 1})};
    EXPECT_EQ(summarize(v).overall_auc, 0.5);
}

TEST(Summarize, CategoriesPoolWithAllNormals) {
    std::vector<VideoScores> v{scored("n", VideoLabel::normal, "normal", {0.1, 0.5}, {0, 0}),
                               scored("s", VideoLabel::anomaly, "scene", {0.2, 0.9}, {0, 1}),
                               scored("h", VideoLabel::anomaly, "human", {0.3, 0.4}, {0, 1})};
    const EvalReport r = summarize(v);
    ASSERT_EQ(r.categories.size(), 2u);
    EXPECT_EQ(r.categories.at("scene").videos, 1u);
    EXPECT_DOUBLE_EQ(r.categories.at("scene").auc, pairwise_auc({0.1, 0.5, 0.2, 0.9}, {0, 0, 0, 1}));
    EXPECT_DOUBLE_EQ(r.categories.at("human").auc, pairwise_auc({0.1, 0.5, 0.3, 0.4}, {0, 0, 0, 1}));
    EXPECT_DOUBLE_EQ(r.overall_auc, pairwise_auc({0.1, 0.5, 0.2, 0.9, 0.3, 0.4}, {0, 0, 0, 1, 0, 1}));
}

TEST(Evaluate, TotalsMatchFrameCounts) {
    const SynthSpec spec = hsn::test::tiny_spec();
    const Dataset d = hsn::test::synth_dataset(spec, "eval_totals").split("test");
    const HsnModel m = HsnModel::init(hsn::test::tiny_hyper(spec), 1);
    const EvalReport r = evaluate(m, d, {});
    std::size_t frames = 0;
    for (const auto& v : d.videos) frames += v.frames;
    EXPECT_EQ(r.frames, frames);
    EXPECT_EQ(r.videos, d.videos.size());
    const EvalReport again = evaluate(m, d, {});
    EXPECT_EQ(to_json(r), to_json(again));
}

TEST(AssignFolds, TwentyVideosFiveFolds) {
    const Dataset d = labelled(10, {{"scene", 10}});
    const auto a = assign_folds(d, 5, 3);
    std::vector<std::size_t> size(5, 0), anomalies(5, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++size[a[i]];
        anomalies[a[i]] += d.videos[i].label == VideoLabel::anomaly;
    }
    for (std::size_t f = 0; f < 5; ++f) {
        EXPECT_EQ(size[f], 4u);
        EXPECT_EQ(anomalies[f], 2u);
    }
}

TEST(AssignFolds, StratificationWithinOneVideo) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Dataset d = labelled(13, {{"scene", 6}, {"human", 5}});
        const std::size_t k = 5;
        const auto a = assign_folds(d, k, seed);
        std::vector<double> size(k, 0), anomalies(k, 0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            size[a[i]] += 1;
            anomalies[a[i]] += d.videos[i].label == VideoLabel::anomaly;
        }
        const double ratio = 11.0 / 24.0;
        for (std::size_t f = 0; f < k; ++f) {
            EXPECT_LE(std::fabs(anomalies[f] - ratio * size[f]), 1.0) << "seed " << seed << " fold " << f;
            EXPECT_LE(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()), 1.0);
        }
    }
}

TEST(AssignFolds, SameSeedSameAssignment) {
    const Dataset d = labelled(12, {{"scene", 9}});
    EXPECT_EQ(assign_folds(d, 5, 42), assign_folds(d, 5, 42));
    EXPECT_NE(assign_folds(d, 5, 42), assign_folds(d, 5, 43));
}

TEST(AssignFolds, NeedsKVideosPerClass) {
    EXPECT_THROW(assign_folds(labelled(10, {{"scene", 4}}), 5, 1), InvalidInput);
    EXPECT_THROW(assign_folds(labelled(10, {{"scene", 10}}), 1, 1), InvalidInput);
}

TEST(KFold, TrainsEveryFoldAndAverages) {
    SynthSpec spec = hsn::test::tiny_spec();
    spec.train_normal = 3;
    spec.train_anomaly = 3;
    const Dataset d = hsn::test::synth_dataset(spec, "kfold");
    TrainConfig c;
    c.steps = 6;
    const auto r = kfold(d, 3, 9, c, hsn::test::tiny_hyper(spec));
    ASSERT_EQ(r.folds.size(), 3u);
    double total = 0.0;
    std::size_t videos = 0;
    for (const auto& f : r.folds) {
        total += f.auc;
        videos += f.videos;
    }
    EXPECT_NEAR(r.mean_auc, total / 3.0, 1e-15);
    EXPECT_EQ(videos, d.videos.size());
    EXPECT_EQ(to_json(EvalReport{0.0, {}, r.folds, r.mean_auc}).at("folds").size(), 3u);
    EXPECT_NE(fold_seed(9, 0), fold_seed(9, 1));
    EXPECT_EQ(fold_seed(9, 2), fold_seed(9, 2));
}
