#pragma once

// Checkpoints: a JSON index naming every parameter tensor, plus one feature
// container per tensor under params/.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "hsn/config.hpp"
#include "hsn/feature_io.hpp"
#include "hsn/model.hpp"

namespace hsn {

struct Checkpoint {
    HsnModel model;
    ScoreHead head = ScoreHead::coupled;  // score vector the model is judged by
    bool video_level = true;
    nlohmann::json train;  // echo of the training configuration, if any

    ForwardOptions forward_options() const { return {head, video_level}; }
};

inline ScoreHead score_head_from_string(const std::string& s) {
    if (s == "scene") return ScoreHead::scene;
    if (s == "human") return ScoreHead::human;
    if (s == "coupled") return ScoreHead::coupled;
    throw CorruptFile("unknown score head '" + s + "'");
}

/// Writes `dir`/checkpoint.json and `dir`/params/*.hsnf. The files are first
/// written to a sibling staging directory which is renamed into place, so a
/// failed save never leaves a partial checkpoint behind.
inline std::filesystem::path save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
    namespace fs = std::filesystem;
    fs::path target = dir.empty() ? fs::path(".") : dir;
    fs::path staging = target;
    staging += ".partial";
    fs::remove_all(staging);
    fs::create_directories(staging / "params");
    nlohmann::json tensors = nlohmann::json::array();
    try {
        for (const auto& p : ckpt.model.parameters()) {
            const std::string file = "params/" + p.name + ".hsnf";
            write_feature(staging / file, p.tensor, Precision::f64);
            tensors.push_back({{"name", p.name}, {"shape", p.tensor.shape()}, {"file", file}});
        }
        nlohmann::json index{{"format", "hsn-checkpoint"},
                             {"version", HsnModel::kFormatVersion},
                             {"model", to_json(ckpt.model.hyper)},
                             {"head", to_string(ckpt.head)},
                             {"video_level", ckpt.video_level},
                             {"train", ckpt.train},
                             {"tensors", std::move(tensors)}};
        std::ofstream out(staging / "checkpoint.json");
        if (!out) throw Error("cannot write " + (staging / "checkpoint.json").string());
        out << index.dump(2) << '\n';
    } catch (...) {
        fs::remove_all(staging);
        throw;
    }
    fs::create_directories(target);
    for (const char* entry : {"checkpoint.json", "params"}) fs::remove_all(target / entry);
    fs::rename(staging / "params", target / "params");
    fs::rename(staging / "checkpoint.json", target / "checkpoint.json");
    fs::remove_all(staging);
    return target / "checkpoint.json";
}

/// Accepts the index file or the directory holding it.
inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    const fs::path index_path = fs::is_directory(path) ? path / "checkpoint.json" : path;
    std::ifstream in(index_path);
    if (!in) throw InvalidInput("cannot open checkpoint " + index_path.string());
    nlohmann::json index;
    try {
        in >> index;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFile(index_path.string() + ": " + e.what());
    }
    if (!index.is_object() || index.value("format", "") != "hsn-checkpoint")
        throw CorruptFile(index_path.string() + ": not an hsn-checkpoint document");
    if (index.value("version", 0) != HsnModel::kFormatVersion)
        throw CorruptFile(index_path.string() + ": unsupported checkpoint version");

    Checkpoint ckpt;
    HyperParams hp;
    try {
        merge_hyper(index.at("model"), hp);
        ckpt.head = score_head_from_string(index.value("head", "coupled"));
        ckpt.video_level = index.value("video_level", true);
        ckpt.train = index.value("train", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFile(index_path.string() + ": " + e.what());
    }
    ckpt.model = HsnModel::init(hp, 0);

    std::map<std::string, std::string> files;
    for (const auto& t : index.at("tensors")) files[t.at("name").get<std::string>()] = t.at("file").get<std::string>();
    const fs::path base = index_path.parent_path();
    for (auto& p : ckpt.model.parameters()) {
        auto it = files.find(p.name);
        if (it == files.end()) throw InvalidInput("checkpoint is missing tensor " + p.name);
        const Tensor stored = read_feature(base / it->second);
        if (stored.shape() != p.tensor.shape())
            throw InvalidInput("checkpoint tensor " + p.name + " has shape " + to_string(stored.shape()) +
                               ", model expects " + to_string(p.tensor.shape()));
        std::copy(stored.values().begin(), stored.values().end(), p.tensor.mutable_values().begin());
        files.erase(it);
    }
    if (!files.empty()) throw InvalidInput("checkpoint has unexpected tensor " + files.begin()->first);
    return ckpt;
}

}  // namespace hsn
