#pragma once

// Run configuration: JSON document, merged over defaults, then overridden by
// command-line flags.

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "hsn/trainer.hpp"

namespace hsn {

struct RunPaths {
    std::string data;        // dataset directory (holding manifest.json) or manifest file
    std::string out;         // output directory
    std::string checkpoint;  // checkpoint index file
};

struct RunConfig {
    HyperParams hyper = [] {
        HyperParams hp;
        hp.segments = 0;  // taken from the data
        return hp;
    }();
    TrainConfig train;
    RunPaths paths;
};

inline LossKind loss_kind_from_string(const std::string& s) {
    if (s == "self-rectifying") return LossKind::self_rectifying;
    if (s == "classical-ranking") return LossKind::classical_ranking;
    throw InvalidInput("unknown loss '" + s + "' (expected self-rectifying or classical-ranking)");
}

inline Schedule schedule_from_string(const std::string& s) {
    if (s == "staged") return Schedule::staged;
    if (s == "joint") return Schedule::joint;
    throw InvalidInput("unknown schedule '" + s + "' (expected staged or joint)");
}

inline Subnets subnets_from_string(const std::string& s) {
    if (s == "both") return Subnets::both;
    if (s == "scene") return Subnets::scene;
    if (s == "human") return Subnets::human;
    throw InvalidInput("unknown subnet selection '" + s + "' (expected both, scene or human)");
}

inline nlohmann::json to_json(const HyperParams& hp) {
    return {{"segments", hp.segments},           {"channels", hp.channels},
            {"conv_channels", hp.conv_channels}, {"lstm_hidden", hp.lstm_hidden},
            {"selected_tracklets", hp.selected_tracklets}, {"ranker_width", hp.ranker_width}};
}

inline nlohmann::json to_json(const TrainConfig& c) {
    return {{"loss", to_string(c.loss.kind)},
            {"lambda1", c.loss.lambda1},
            {"lambda2", c.loss.lambda2},
            {"normalize_context", c.loss.normalize_context},
            {"learning_rate", c.adam.learning_rate},
            {"beta1", c.adam.beta1},
            {"beta2", c.adam.beta2},
            {"steps", c.steps},
            {"batch_pairs", c.batch_pairs},
            {"seed", c.seed},
            {"schedule", to_string(c.schedule)},
            {"subnets", to_string(c.subnets)},
            {"video_level", c.video_level}};
}

inline nlohmann::json to_json(const RunConfig& c) {
    return {{"model", to_json(c.hyper)},
            {"train", to_json(c.train)},
            {"paths", {{"data", c.paths.data}, {"out", c.paths.out}, {"checkpoint", c.paths.checkpoint}}}};
}

namespace detail {

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& field) {
    if (obj.contains(key)) field = obj.at(key).get<T>();
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> keys, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) throw InvalidInput("unknown key '" + key + "' in " + where);
    }
}

}  // namespace detail

inline void merge_hyper(const nlohmann::json& obj, HyperParams& hp) {
    detail::reject_unknown(obj, {"segments", "channels", "conv_channels", "lstm_hidden", "selected_tracklets", "ranker_width"},
                           "model section");
    detail::read_field(obj, "segments", hp.segments);
    detail::read_field(obj, "channels", hp.channels);
    detail::read_field(obj, "conv_channels", hp.conv_channels);
    detail::read_field(obj, "lstm_hidden", hp.lstm_hidden);
    detail::read_field(obj, "selected_tracklets", hp.selected_tracklets);
    detail::read_field(obj, "ranker_width", hp.ranker_width);
}

inline void merge_train(const nlohmann::json& obj, TrainConfig& c) {
    detail::reject_unknown(obj, {"loss", "lambda1", "lambda2", "normalize_context", "learning_rate", "beta1", "beta2",
                                 "steps", "batch_pairs", "seed", "schedule", "subnets", "video_level"},
                           "train section");
    if (obj.contains("loss")) c.loss.kind = loss_kind_from_string(obj.at("loss").get<std::string>());
    detail::read_field(obj, "lambda1", c.loss.lambda1);
    detail::read_field(obj, "lambda2", c.loss.lambda2);
    detail::read_field(obj, "normalize_context", c.loss.normalize_context);
    detail::read_field(obj, "learning_rate", c.adam.learning_rate);
    detail::read_field(obj, "beta1", c.adam.beta1);
    detail::read_field(obj, "beta2", c.adam.beta2);
    detail::read_field(obj, "steps", c.steps);
    detail::read_field(obj, "batch_pairs", c.batch_pairs);
    detail::read_field(obj, "seed", c.seed);
    if (obj.contains("schedule")) c.schedule = schedule_from_string(obj.at("schedule").get<std::string>());
    if (obj.contains("subnets")) c.subnets = subnets_from_string(obj.at("subnets").get<std::string>());
    detail::read_field(obj, "video_level", c.video_level);
}

/// Overlays `doc` onto `config`; absent keys keep their current values.
inline void merge_config(const nlohmann::json& doc, RunConfig& config) {
    if (!doc.is_object()) throw InvalidInput("config must be a JSON object");
    detail::reject_unknown(doc, {"model", "train", "paths"}, "config");
    try {
        if (doc.contains("model")) merge_hyper(doc.at("model"), config.hyper);
        if (doc.contains("train")) merge_train(doc.at("train"), config.train);
        if (doc.contains("paths")) {
            const auto& p = doc.at("paths");
            detail::reject_unknown(p, {"data", "out", "checkpoint"}, "paths section");
            detail::read_field(p, "data", config.paths.data);
            detail::read_field(p, "out", config.paths.out);
            detail::read_field(p, "checkpoint", config.paths.checkpoint);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("config: ") + e.what());
    }
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
    RunConfig config;
    merge_config(doc, config);
    return config;
}

/// Accepts either a dataset directory or a manifest file.
inline std::filesystem::path manifest_path(const std::filesystem::path& data) {
    return std::filesystem::is_directory(data) ? data / "manifest.json" : data;
}

}  // namespace hsn
