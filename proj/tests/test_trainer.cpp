#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "hsn/checkpoint.hpp"
#include "hsn/evaluator.hpp"
#include "hsn/trainer.hpp"

using namespace hsn;
using hsn::test::synth_dataset;
using hsn::test::tiny_hyper;
using hsn::test::tiny_spec;

namespace {

class TrainerTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        spec_ = new SynthSpec(tiny_spec());
        data_ = new Dataset(synth_dataset(*spec_, "trainer").split("train"));
    }
    static void TearDownTestSuite() {
        delete data_;
        delete spec_;
    }

    static const Dataset& data() { return *data_; }
    static HyperParams hyper() { return tiny_hyper(*spec_); }
    static const VideoFeatures& first(VideoLabel label) {
        return *std::find_if(data_->videos.begin(), data_->videos.end(),
                             [&](const VideoFeatures& v) { return v.label == label; });
    }

    static TrainConfig quick(std::size_t steps = 30) {
        TrainConfig c;
        c.steps = steps;
        c.seed = 11;
        return c;
    }

private:
    static inline SynthSpec* spec_ = nullptr;
    static inline Dataset* data_ = nullptr;
};

std::vector<std::vector<double>> snapshot(const HsnModel& m) {
    std::vector<std::vector<double>> out;
    for (const auto& p : m.parameters()) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
    return out;
}

}  // namespace

TEST_F(TrainerTest, SameSeedGivesIdenticalLossTraces) {
    const auto a = train(quick(), data(), hyper());
    const auto b = train(quick(), data(), hyper());
    EXPECT_EQ(a.log.losses, b.log.losses);
    EXPECT_EQ(snapshot(a.model), snapshot(b.model));
}

TEST_F(TrainerTest, DifferentSeedsDiverge) {
    TrainConfig other = quick();
    other.seed = 12;
    EXPECT_NE(train(quick(), data(), hyper()).log.losses, train(other, data(), hyper()).log.losses);
}

TEST_F(TrainerTest, FixedPairDescends) {
    HsnModel model = HsnModel::init(hyper(), 5);
    TrainConfig c;
    c.schedule = Schedule::joint;
    Adam opt(model.parameters(), c.adam);
    std::vector<double> losses;
    for (int s = 0; s < 200; ++s) {
        losses.push_back(
            train_step(model, opt, first(VideoLabel::anomaly), first(VideoLabel::normal), ScoreHead::coupled, c));
    }
    double best = losses.front();
    for (double l : losses) {
        EXPECT_LE(std::min(best, l), best);
        best = std::min(best, l);
    }
    EXPECT_LE(losses.back(), losses.front());
    EXPECT_LT(best, losses.front());
}

TEST_F(TrainerTest, ZeroLearningRateLeavesParametersUnchanged) {
    TrainConfig c = quick(5);
    c.adam.learning_rate = 0.0;
    const auto before = snapshot(HsnModel::init(fit_hyperparams(hyper(), data()), c.seed));
    EXPECT_EQ(snapshot(train(c, data(), hyper()).model), before);
}

TEST_F(TrainerTest, StagedScheduleLogsThreePhases) {
    TrainConfig c = quick(31);
    const auto r = train(c, data(), hyper());
    ASSERT_EQ(r.log.phases.size(), 3u);
    EXPECT_EQ(r.log.phases[0].name, "scene");
    EXPECT_EQ(r.log.phases[1].name, "human");
    EXPECT_EQ(r.log.phases[2].name, "coupler");
    EXPECT_EQ(r.log.phases[1].first_step, 10u);
    EXPECT_EQ(r.log.phases[2].first_step, 20u);
    EXPECT_EQ(r.log.phases[2].steps, 11u);
    EXPECT_EQ(r.log.losses.size(), 31u);
}

TEST_F(TrainerTest, StagedPhasesOnlyMoveTheirGroup) {
    const HsnModel start = HsnModel::init(hyper(), 3);
    TrainConfig c = quick();
    for (const auto& phase : plan_phases(c)) {
        HsnModel m = start.clone();
        Adam opt(collect_groups(m, phase.groups), c.adam);
        train_step(m, opt, first(VideoLabel::anomaly), first(VideoLabel::normal), phase.head, c);
        for (ParamGroup g : {ParamGroup::scene, ParamGroup::human, ParamGroup::coupler}) {
            const bool trained = std::find(phase.groups.begin(), phase.groups.end(), g) != phase.groups.end();
            const auto a = m.parameters(g);
            const auto b = start.parameters(g);
            bool moved = false;
            for (std::size_t i = 0; i < a.size(); ++i)
                moved = moved || !std::equal(a[i].tensor.values().begin(), a[i].tensor.values().end(),
                                             b[i].tensor.values().begin());
            EXPECT_EQ(moved, trained) << phase.name << " group " << static_cast<int>(g);
        }
    }
}

TEST_F(TrainerTest, JointGradientReachesAllGroups) {
    HsnModel m = HsnModel::init(hyper(), 4);
    TrainConfig c = quick();
    c.schedule = Schedule::joint;
    c.loss.kind = LossKind::classical_ranking;  // hinge active at init
    const VideoFeatures* a = &first(VideoLabel::anomaly);
    const VideoFeatures* n = &first(VideoLabel::normal);
    Tensor loss = pair_loss(m, std::span(&a, 1), std::span(&n, 1), ScoreHead::coupled, c);
    ASSERT_GT(loss.item(), 0.0);
    backward(loss);
    for (ParamGroup g : {ParamGroup::scene, ParamGroup::human, ParamGroup::coupler}) {
        double norm = 0.0;
        for (const auto& p : m.parameters(g))
            for (double x : p.tensor.grad()) norm += x * x;
        EXPECT_GT(norm, 0.0) << "group " << static_cast<int>(g);
    }
}

TEST_F(TrainerTest, SubnetRunsTrainOneBranch) {
    TrainConfig c = quick(6);
    c.subnets = Subnets::human;
    const auto phases = plan_phases(c);
    ASSERT_EQ(phases.size(), 1u);
    EXPECT_EQ(phases[0].head, ScoreHead::human);
    EXPECT_EQ(c.eval_head(), ScoreHead::human);
    const auto r = train(c, data(), hyper());
    const auto start = HsnModel::init(fit_hyperparams(hyper(), data()), c.seed);
    EXPECT_EQ(snapshot(r.model).front(), snapshot(start).front());  // scene untouched
}

TEST_F(TrainerTest, CheckpointRoundTripPreservesScores) {
    const auto r = train(quick(), data(), hyper());
    const auto dir = hsn::test::scratch_dir("trainer_ckpt");
    save_checkpoint(dir / "run", {r.model, ScoreHead::coupled, true, {}});
    const Checkpoint back = load_checkpoint(dir / "run");
    EXPECT_EQ(back.model.hyper, r.model.hyper);
    for (const auto& v : data().videos) {
        const Tensor a = forward(r.model, v).coupled;
        const Tensor b = forward(back.model, v).coupled;
        EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin())) << v.id;
    }
    EXPECT_FALSE(std::filesystem::exists(dir / "run.partial"));
}

TEST_F(TrainerTest, CheckpointShapeMismatchNamesTensor) {
    const auto dir = hsn::test::scratch_dir("trainer_mismatch");
    HsnModel m = HsnModel::init(hyper(), 1);
    save_checkpoint(dir, {m, ScoreHead::coupled, true, {}});
    write_feature(dir / "params" / "scene.ranker.fc1.weight.hsnf", Tensor::zeros({6, 5}));
    try {
        load_checkpoint(dir);
        FAIL() << "expected a shape error";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("scene.ranker.fc1.weight"), std::string::npos) << e.what();
    }
}

TEST_F(TrainerTest, InvalidConfigsAbortBeforeTraining) {
    int calls = 0;
    auto count = [&](const std::string&, std::size_t, double) { ++calls; };
    TrainConfig c = quick();
    c.steps = 0;
    EXPECT_THROW(train(c, data(), hyper(), count), InvalidInput);
    c = quick();
    c.adam.learning_rate = -1.0;
    EXPECT_THROW(train(c, data(), hyper(), count), InvalidInput);
    HyperParams wrong = hyper();
    wrong.channels = 7;
    EXPECT_THROW(train(quick(), data(), wrong, count), InvalidInput);
    EXPECT_THROW(train(quick(), data().subset({0}), hyper(), count), InvalidInput);  // one class only
    EXPECT_EQ(calls, 0);
}
