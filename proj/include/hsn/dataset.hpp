#pragma once

// Dataset manifests, segment-boundary arithmetic and validated loading.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsn/feature_io.hpp"
#include "hsn/video.hpp"

namespace hsn {

/// Half-open frame range [begin, end).
struct FrameRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool operator==(const FrameRange&) const = default;
};

/// Segment i of G*T covers frames [floor(i*N/(G*T)), floor((i+1)*N/(G*T))).
/// When N < G*T that range can be empty; it is widened to the single frame
/// it falls on, so short videos repeat frames across segments.
inline std::vector<FrameRange> segment_boundaries(std::size_t frames, std::size_t segments, std::size_t granularity) {
    detail::require(frames >= 1, "segment_boundaries: need at least one frame");
    detail::require(segments >= 1, "segment_boundaries: need at least one segment");
    detail::require(granularity >= 1 && granularity <= 3, "segment_boundaries: granularity must be 1, 2 or 3");
    const std::size_t count = granularity * segments;
    std::vector<FrameRange> ranges(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t begin = i * frames / count;
        ranges[i] = {begin, std::max((i + 1) * frames / count, begin + 1)};
    }
    return ranges;
}

struct ManifestRecord {
    std::string id;
    VideoLabel label = VideoLabel::normal;
    std::string category = "normal";
    std::string split = "train";
    std::size_t frames = 0;
    std::array<std::string, 3> scene;  // relative to the manifest directory
    std::string tracklets;
    std::optional<std::string> annotations;
};

struct Manifest {
    static constexpr int kVersion = 1;
    std::vector<ManifestRecord> videos;
};

inline nlohmann::json to_json(const Manifest& manifest) {
    nlohmann::json videos = nlohmann::json::array();
    for (const auto& r : manifest.videos) {
        nlohmann::json v{{"id", r.id},
                         {"label", to_string(r.label)},
                         {"category", r.category},
                         {"split", r.split},
                         {"frames", r.frames},
                         {"scene", {{"g1", r.scene[0]}, {"g2", r.scene[1]}, {"g3", r.scene[2]}}},
                         {"tracklets", r.tracklets}};
        if (r.annotations) v["annotations"] = *r.annotations;
        videos.push_back(std::move(v));
    }
    return {{"format", "hsn-manifest"}, {"version", Manifest::kVersion}, {"videos", std::move(videos)}};
}

inline Manifest manifest_from_json(const nlohmann::json& doc, const std::string& origin) {
    auto bad = [&](const std::string& why) { return CorruptFile(origin + ": " + why); };
    if (!doc.is_object() || doc.value("format", "") != "hsn-manifest") throw bad("not an hsn-manifest document");
    if (doc.value("version", 0) != Manifest::kVersion) throw bad("unsupported manifest version");
    if (!doc.contains("videos") || !doc["videos"].is_array()) throw bad("missing videos array");
    Manifest m;
    try {
        for (const auto& v : doc["videos"]) {
            ManifestRecord r;
            r.id = v.at("id").get<std::string>();
            const auto label = v.at("label").get<std::string>();
            if (label != "normal" && label != "anomaly") throw bad("video " + r.id + ": unknown label '" + label + "'");
            r.label = label == "normal" ? VideoLabel::normal : VideoLabel::anomaly;
            r.category = v.value("category", r.label == VideoLabel::normal ? "normal" : "anomaly");
            r.split = v.value("split", "train");
            r.frames = v.at("frames").get<std::size_t>();
            const auto& scene = v.at("scene");
            r.scene = {scene.at("g1").get<std::string>(), scene.at("g2").get<std::string>(),
                       scene.at("g3").get<std::string>()};
            r.tracklets = v.at("tracklets").get<std::string>();
            if (v.contains("annotations")) r.annotations = v["annotations"].get<std::string>();
            m.videos.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw bad(e.what());
    }
    return m;
}

inline void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << to_json(manifest).dump(2) << '\n';
}

inline Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFile(path.string() + ": " + e.what());
    }
    return manifest_from_json(doc, path.string());
}

inline void write_annotations(const std::filesystem::path& path, const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (int l : labels) out << l << '\n';
}

inline std::vector<int> read_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open annotation file " + path.string());
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line != "0" && line != "1") throw CorruptFile(path.string() + ": annotation lines must be 0 or 1");
        labels.push_back(line == "1");
    }
    return labels;
}

struct Dataset {
    std::vector<VideoFeatures> videos;
    std::size_t segments = 0;  // T
    std::size_t channels = 0;  // n

    Dataset subset(const std::vector<std::size_t>& indices) const {
        Dataset d{{}, segments, channels};
        for (std::size_t i : indices) d.videos.push_back(videos.at(i));
        return d;
    }

    Dataset split(const std::string& name) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < videos.size(); ++i)
            if (videos[i].split == name) idx.push_back(i);
        return subset(idx);
    }

    std::size_t count(VideoLabel label) const {
        return static_cast<std::size_t>(std::count_if(videos.begin(), videos.end(),
                                                      [&](const VideoFeatures& v) { return v.label == label; }));
    }
};

/// Loads every video named by the manifest and checks all shape invariants:
/// scene maps T, 2T, 3T long with shared n; tracklets T×k×n; uniform T and n
/// across videos; annotation length equal to the frame count.
inline Dataset load_dataset(const std::filesystem::path& manifest_path) {
    const Manifest manifest = read_manifest(manifest_path);
    const auto base = manifest_path.parent_path();
    Dataset data;
    for (const auto& r : manifest.videos) {
        auto fail = [&](const std::string& file, const std::string& why) {
            return InvalidInput("video " + r.id + " (" + file + "): " + why);
        };
        VideoFeatures v;
        v.id = r.id;
        v.label = r.label;
        v.category = r.category;
        v.split = r.split;
        v.frames = r.frames;
        if (r.frames == 0) throw fail("manifest", "frame count must be positive");
        for (std::size_t g = 0; g < 3; ++g) {
            v.scene[g] = read_feature(base / r.scene[g]);
            if (v.scene[g].rank() != 2) throw fail(r.scene[g], "scene map must be 2-D, got " + to_string(v.scene[g].shape()));
        }
        const std::size_t t = v.scene[0].dim(0);
        const std::size_t n = v.scene[0].dim(1);
        if (t == 0 || n == 0) throw fail(r.scene[0], "empty scene map");
        for (std::size_t g = 1; g < 3; ++g) {
            const auto& s = v.scene[g];
            if (s.dim(0) != (g + 1) * t)
                throw fail(r.scene[g], "G=" + std::to_string(g + 1) + " map has " + std::to_string(s.dim(0)) +
                                           " segments, expected " + std::to_string((g + 1) * t));
            if (s.dim(1) != n) throw fail(r.scene[g], "channel count differs from the G=1 map");
        }
        v.tracklets = read_feature(base / r.tracklets);
        const auto& tr = v.tracklets;
        if (tr.rank() != 3 || tr.dim(0) != t || tr.dim(2) != n)
            throw fail(r.tracklets, "tracklet map " + to_string(tr.shape()) + " is not " + std::to_string(t) + "xKx" +
                                        std::to_string(n));
        if (r.annotations) {
            v.annotations = read_annotations(base / *r.annotations);
            if (v.annotations->size() != r.frames)
                throw fail(*r.annotations, std::to_string(v.annotations->size()) + " annotation lines for " +
                                               std::to_string(r.frames) + " frames");
        } else if (r.label == VideoLabel::anomaly && r.split == "test") {
            throw fail("manifest", "anomaly test video has no frame annotations");
        }
        if (data.videos.empty()) {
            data.segments = t;
            data.channels = n;
        } else if (t != data.segments) {
            throw fail(r.scene[0], "segment count " + std::to_string(t) + " differs from dataset T=" +
                                       std::to_string(data.segments));
        } else if (n != data.channels) {
            throw fail(r.scene[0], "channel count " + std::to_string(n) + " differs from dataset n=" +
                                       std::to_string(data.channels) + " (channel counts must be uniform)");
        }
        data.videos.push_back(std::move(v));
    }
    return data;
}

}  // namespace hsn
