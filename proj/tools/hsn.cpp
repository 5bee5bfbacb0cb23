#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsn/checkpoint.hpp"
#include "hsn/compare.hpp"
#include "hsn/config.hpp"
#include "hsn/crossval.hpp"
#include "hsn/evaluator.hpp"
#include "hsn/gradcheck_suite.hpp"
#include "hsn/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { ok = 0, usage = 1, runtime = 2 };

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw hsn::InvalidInput("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw hsn::InvalidInput(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& doc) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw hsn::Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

hsn::Dataset open_dataset(const std::string& data) {
    if (data.empty()) throw hsn::InvalidInput("no dataset given (--data)");
    const fs::path manifest = hsn::manifest_path(data);
    if (!fs::exists(manifest)) throw hsn::InvalidInput("dataset manifest not found: " + manifest.string());
    return hsn::load_dataset(manifest);
}

/// Training flags shared by train and compare-loss; unset ones leave the
/// config untouched.
struct TrainOverrides {
    std::string config;
    std::optional<std::string> loss, schedule, subnets;
    std::optional<std::size_t> steps, batch_pairs;
    std::optional<double> lr, lambda1, lambda2;
    std::optional<std::uint64_t> seed;
    bool no_video_level = false;
    bool normalize_context = false;

    void add_to(CLI::App* cmd, bool with_loss) {
        cmd->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
        if (with_loss) cmd->add_option("--loss", loss, "self-rectifying | classical-ranking");
        cmd->add_option("--schedule", schedule, "staged | joint");
        cmd->add_option("--subnets", subnets, "both | scene | human");
        cmd->add_option("--steps", steps, "total pair-steps");
        cmd->add_option("--batch-pairs", batch_pairs, "pairs per step");
        cmd->add_option("--lr", lr, "Adam learning rate");
        cmd->add_option("--lambda1", lambda1, "context loss weight");
        cmd->add_option("--lambda2", lambda2, "instance loss weight");
        cmd->add_option("--seed", seed, "run seed");
        cmd->add_flag("--no-video-level", no_video_level, "segment-level selection only");
        cmd->add_flag("--normalize-context", normalize_context, "mean instead of sum in the context loss");
    }

    hsn::RunConfig resolve() const {
        hsn::RunConfig c = config.empty() ? hsn::RunConfig{} : hsn::load_config(config);
        auto& t = c.train;
        if (loss) t.loss.kind = hsn::loss_kind_from_string(*loss);
        if (schedule) t.schedule = hsn::schedule_from_string(*schedule);
        if (subnets) t.subnets = hsn::subnets_from_string(*subnets);
        if (steps) t.steps = *steps;
        if (batch_pairs) t.batch_pairs = *batch_pairs;
        if (lr) t.adam.learning_rate = *lr;
        if (lambda1) t.loss.lambda1 = *lambda1;
        if (lambda2) t.loss.lambda2 = *lambda2;
        if (seed) t.seed = *seed;
        if (no_video_level) t.video_level = false;
        if (normalize_context) t.loss.normalize_context = true;
        t.validate();
        return c;
    }
};

int cmd_gen_data(const std::string& spec_path, const std::string& out) {
    const hsn::SynthSpec spec = hsn::synth_spec_from_json(read_json(spec_path));
    const auto result = hsn::synthesize_dataset(spec, out);
    std::cout << result.manifest_path.string() << '\n';
    return ok;
}

int cmd_train(const TrainOverrides& flags, std::string data, std::string out) {
    hsn::RunConfig config = flags.resolve();
    if (!data.empty()) config.paths.data = data;
    if (!out.empty()) config.paths.out = out;
    if (config.paths.out.empty()) throw hsn::InvalidInput("no output directory given (--out)");
    const hsn::Dataset all = open_dataset(config.paths.data);
    const hsn::Dataset train_data = hsn::training_videos(all);
    config.hyper = hsn::fit_hyperparams(config.hyper, train_data);
    config.hyper.validate();

    const auto result = hsn::train(config.train, train_data, config.hyper);
    const fs::path out_dir = config.paths.out;
    config.paths.checkpoint = (out_dir / "checkpoint.json").string();
    hsn::save_checkpoint(out_dir, {result.model, config.train.eval_head(), config.train.video_level,
                                   hsn::to_json(config.train)});

    json phases = json::array();
    for (const auto& p : result.log.phases)
        phases.push_back({{"name", p.name}, {"first_step", p.first_step}, {"steps", p.steps}});
    write_json(out_dir / "train_log.json", {{"config", hsn::to_json(config)},
                                            {"seed", config.train.seed},
                                            {"loss", hsn::to_string(config.train.loss.kind)},
                                            {"videos", train_data.videos.size()},
                                            {"phases", phases},
                                            {"losses", result.log.losses}});
    std::cout << config.paths.checkpoint << '\n';
    return ok;
}

struct EvalFlags {
    std::string ckpt, data, report, dump_scores;
    std::optional<std::size_t> kfold;
    std::uint64_t seed = 7;
};

int cmd_eval(const EvalFlags& f) {
    const hsn::Checkpoint ckpt = hsn::load_checkpoint(f.ckpt);
    const hsn::Dataset all = open_dataset(f.data);
    const hsn::Dataset test = hsn::evaluation_videos(all);
    const auto scores = hsn::score_videos(ckpt.model, test, ckpt.forward_options());
    hsn::EvalReport report = hsn::summarize(scores);

    if (f.kfold) {
        hsn::TrainConfig train_config;
        if (!ckpt.train.empty()) hsn::merge_train(ckpt.train, train_config);
        const auto folds = hsn::kfold(all, *f.kfold, f.seed, train_config, ckpt.model.hyper);
        report.folds = folds.folds;
        report.mean_fold_auc = folds.mean_auc;
    }
    if (!f.dump_scores.empty()) {
        fs::create_directories(f.dump_scores);
        for (const auto& v : scores) {
            std::ofstream out(fs::path(f.dump_scores) / (v.id + ".txt"));
            if (!out) throw hsn::Error("cannot write scores for " + v.id);
            out << std::setprecision(17);
            for (double s : v.frame_scores) out << s << '\n';
        }
    }
    json doc = hsn::to_json(report);
    doc["head"] = hsn::to_string(ckpt.head);
    write_json(f.report, doc);
    std::cout << std::fixed << std::setprecision(6) << report.overall_auc << '\n';
    return ok;
}

int cmd_gradcheck(bool inject_fault) {
    if (inject_fault) hsn::fault_injection::sigmoid_adjoint_scale() = 1.5;
    const auto rows = hsn::run_gradcheck_suite();
    bool all_passed = true;
    std::printf("%-32s %8s %14s  %s\n", "check", "probes", "max rel error", "result");
    for (const auto& r : rows) {
        std::printf("%-32s %8zu %14.3e  %s\n", r.name.c_str(), r.probes, r.max_rel_error, r.passed() ? "ok" : "FAIL");
        all_passed = all_passed && r.passed();
    }
    std::printf("%s (tolerance %.0e)\n", all_passed ? "all checks passed" : "gradient check FAILED", hsn::kGradCheckTolerance);
    return all_passed ? ok : runtime;
}

int cmd_compare_loss(const TrainOverrides& flags, const std::string& data, const std::string& out) {
    hsn::RunConfig config = flags.resolve();
    const hsn::Dataset all = open_dataset(data.empty() ? config.paths.data : data);
    const hsn::Dataset train_data = hsn::training_videos(all);
    const hsn::HyperParams hyper = hsn::fit_hyperparams(config.hyper, train_data);
    hyper.validate();
    const auto cmp = hsn::compare_losses(config.train, train_data, hsn::evaluation_videos(all), hyper);
    json doc = hsn::to_json(cmp);
    doc["config"] = hsn::to_json(config.train);
    write_json(out, doc);
    std::cout << std::showpos << std::fixed << std::setprecision(6) << cmp.delta() << '\n';
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human-scene anomaly detection: data generation, training and evaluation"};
    app.require_subcommand(1);
    int code = ok;

    std::string spec, gen_out;
    auto* gen = app.add_subcommand("gen-data", "synthesize a feature dataset from a JSON spec");
    gen->add_option("--spec", spec, "generator spec (JSON)")->required();
    gen->add_option("--out", gen_out, "output directory")->required();

    TrainOverrides train_flags;
    std::string train_data, train_out;
    auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
    train_flags.add_to(train, true);
    train->add_option("--data", train_data, "dataset directory or manifest");
    train->add_option("--out", train_out, "checkpoint directory");

    EvalFlags eval_flags;
    auto* eval = app.add_subcommand("eval", "frame-level AUC of a checkpoint");
    eval->add_option("--ckpt", eval_flags.ckpt, "checkpoint directory or index file")->required();
    eval->add_option("--data", eval_flags.data, "dataset directory or manifest")->required();
    eval->add_option("--report", eval_flags.report, "report file (JSON)")->required();
    eval->add_option("--kfold", eval_flags.kfold, "add a stratified k-fold block")->check(CLI::Range(2, 1000));
    eval->add_option("--seed", eval_flags.seed, "k-fold seed");
    eval->add_option("--dump-scores", eval_flags.dump_scores, "directory for per-video frame scores");

    bool inject_fault = false;
    auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every differentiable block");
    grad->add_flag("--inject-fault", inject_fault, "corrupt the sigmoid adjoint (tests the checker)");

    TrainOverrides cmp_flags;
    std::string cmp_data, cmp_out;
    auto* cmp = app.add_subcommand("compare-loss", "train twin models with each loss and compare AUC");
    cmp_flags.add_to(cmp, false);
    cmp->add_option("--data", cmp_data, "dataset directory or manifest");
    cmp->add_option("--out", cmp_out, "report file (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    try {
        if (*gen) code = cmd_gen_data(spec, gen_out);
        else if (*train) code = cmd_train(train_flags, train_data, train_out);
        else if (*eval) code = cmd_eval(eval_flags);
        else if (*grad) code = cmd_gradcheck(inject_fault);
        else if (*cmp) code = cmd_compare_loss(cmp_flags, cmp_data, cmp_out);
    } catch (const hsn::InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const hsn::CorruptFile& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return runtime;
    }
    return code;
}
