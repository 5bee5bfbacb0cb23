#pragma once

// Synthetic feature datasets with planted anomalies.
//
// Each video draws a per-frame latent sequence of i.i.d. Gaussian noise; the
// scene maps at G=1,2,3 mean-pool that latent over the segment boundaries, so
// all granularities describe the same underlying frames. Tracklet features
// are independent noise per (segment, tracklet). An anomaly video receives
// one contiguous span, aligned to G=1 segments: scene anomalies shift the
// latent frames along a fixed unit direction, human anomalies shift one
// tracklet along a second direction.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsn/dataset.hpp"

namespace hsn {

enum class AnomalyKind {
    scene,  // scene latent shifted
    human,  // one tracklet shifted
    mixed,  // both at once
    split,  // alternates scene and human between anomaly videos
};

inline const char* to_string(AnomalyKind kind) {
    switch (kind) {
        case AnomalyKind::scene:
            return "scene";
        case AnomalyKind::human:
            return "human";
        case AnomalyKind::mixed:
            return "mixed";
        case AnomalyKind::split:
            break;
    }
    return "split";
}

inline AnomalyKind anomaly_kind_from_string(const std::string& s) {
    if (s == "scene") return AnomalyKind::scene;
    if (s == "human") return AnomalyKind::human;
    if (s == "mixed") return AnomalyKind::mixed;
    if (s == "split") return AnomalyKind::split;
    throw InvalidInput("unknown anomaly kind '" + s + "' (expected scene, human, mixed or split)");
}

struct SynthSpec {
    std::size_t train_normal = 20;
    std::size_t train_anomaly = 20;
    std::size_t test_normal = 10;
    std::size_t test_anomaly = 10;
    std::size_t segments = 8;            // T
    std::size_t frames_per_segment = 6;
    std::size_t channels = 16;           // n
    std::size_t tracklets = 4;           // k
    std::size_t selected_hint = 2;       // k^s suggested to the trainer
    AnomalyKind kind = AnomalyKind::scene;
    double min_duration = 0.125;         // fraction of T
    double max_duration = 0.5;
    double magnitude = 4.0;              // mu
    double noise = 1.0;                  // sigma
    Precision precision = Precision::f64;
    std::uint64_t seed = 7;

    void validate() const {
        detail::require(segments >= 1 && frames_per_segment >= 1 && channels >= 1, "synth: extents must be positive");
        detail::require(min_duration > 0.0 && min_duration <= max_duration && max_duration <= 1.0,
                        "synth: duration fractions must satisfy 0 < min <= max <= 1");
        detail::require(magnitude > 0.0, "synth: magnitude must be positive");
        detail::require(noise >= 0.0, "synth: noise scale must be non-negative");
        detail::require(selected_hint >= 1, "synth: selected_hint must be at least 1");
        detail::require(kind == AnomalyKind::scene || tracklets >= 1, "synth: human anomalies need tracklets");
    }

    std::size_t frames() const { return segments * frames_per_segment; }

    /// Inclusive range of anomaly lengths in G=1 segments.
    std::pair<std::size_t, std::size_t> span_lengths() const {
        const auto t = static_cast<double>(segments);
        auto lo = static_cast<std::size_t>(std::ceil(min_duration * t - 1e-9));
        auto hi = static_cast<std::size_t>(std::floor(max_duration * t + 1e-9));
        lo = std::clamp<std::size_t>(lo, 1, segments);
        hi = std::clamp<std::size_t>(hi, lo, segments);
        return {lo, hi};
    }
};

inline nlohmann::json to_json(const SynthSpec& s) {
    return {{"train_normal", s.train_normal},
            {"train_anomaly", s.train_anomaly},
            {"test_normal", s.test_normal},
            {"test_anomaly", s.test_anomaly},
            {"segments", s.segments},
            {"frames_per_segment", s.frames_per_segment},
            {"channels", s.channels},
            {"tracklets", s.tracklets},
            {"selected_hint", s.selected_hint},
            {"kind", to_string(s.kind)},
            {"min_duration", s.min_duration},
            {"max_duration", s.max_duration},
            {"magnitude", s.magnitude},
            {"noise", s.noise},
            {"precision", s.precision == Precision::f64 ? 64 : 32},
            {"seed", s.seed}};
}

/// Parses a generator spec; unknown keys are rejected.
inline SynthSpec synth_spec_from_json(const nlohmann::json& doc) {
    detail::require(doc.is_object(), "synth spec must be a JSON object");
    static const std::set<std::string> known = {
        "train_normal", "train_anomaly", "test_normal", "test_anomaly", "segments",  "frames_per_segment",
        "channels",     "tracklets",     "selected_hint", "kind",      "min_duration", "max_duration",
        "magnitude",    "noise",         "precision",   "seed"};
    for (const auto& [key, _] : doc.items()) {
        detail::require(known.count(key) > 0, "synth spec: unknown field '" + key + "'");
    }
    SynthSpec s;
    try {
        s.train_normal = doc.value("train_normal", s.train_normal);
        s.train_anomaly = doc.value("train_anomaly", s.train_anomaly);
        s.test_normal = doc.value("test_normal", s.test_normal);
        s.test_anomaly = doc.value("test_anomaly", s.test_anomaly);
        s.segments = doc.value("segments", s.segments);
        s.frames_per_segment = doc.value("frames_per_segment", s.frames_per_segment);
        s.channels = doc.value("channels", s.channels);
        s.tracklets = doc.value("tracklets", s.tracklets);
        s.selected_hint = doc.value("selected_hint", s.selected_hint);
        if (doc.contains("kind")) s.kind = anomaly_kind_from_string(doc["kind"].get<std::string>());
        s.min_duration = doc.value("min_duration", s.min_duration);
        s.max_duration = doc.value("max_duration", s.max_duration);
        s.magnitude = doc.value("magnitude", s.magnitude);
        s.noise = doc.value("noise", s.noise);
        const int bits = doc.value("precision", 64);
        detail::require(bits == 32 || bits == 64, "synth spec: precision must be 32 or 64");
        s.precision = bits == 64 ? Precision::f64 : Precision::f32;
        s.seed = doc.value("seed", s.seed);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("synth spec: ") + e.what());
    }
    s.validate();
    return s;
}

/// Where an anomaly was planted.
struct PlantedAnomaly {
    std::string id;
    std::string kind;               // "scene", "human" or "mixed"
    std::size_t first_segment = 0;  // G=1 segments [first, first + length)
    std::size_t length = 0;
    int tracklet = -1;              // shifted tracklet for human anomalies
};

struct SynthResult {
    std::filesystem::path manifest_path;
    Manifest manifest;
    std::vector<double> scene_direction;  // u_s
    std::vector<double> human_direction;  // u_h
    std::vector<PlantedAnomaly> planted;
};

namespace detail {

inline std::vector<double> unit_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> u(n);
    double norm = 0.0;
    while (norm < 1e-6) {
        norm = 0.0;
        for (double& x : u) {
            x = gauss(rng);
            norm += x * x;
        }
        norm = std::sqrt(norm);
    }
    for (double& x : u) x /= norm;
    return u;
}

/// Mean-pools per-frame rows over the segment ranges at granularity g.
inline Tensor pool_frames(const std::vector<double>& latent, std::size_t frames, std::size_t channels,
                          std::size_t segments, std::size_t granularity) {
    const auto ranges = segment_boundaries(frames, segments, granularity);
    std::vector<double> out(ranges.size() * channels, 0.0);
    for (std::size_t s = 0; s < ranges.size(); ++s) {
        const double w = 1.0 / static_cast<double>(ranges[s].end - ranges[s].begin);
        for (std::size_t f = ranges[s].begin; f < ranges[s].end; ++f)
            for (std::size_t c = 0; c < channels; ++c) out[s * channels + c] += w * latent[f * channels + c];
    }
    return Tensor({ranges.size(), channels}, std::move(out));
}

}  // namespace detail

/// Writes manifest.json, ground_truth.json and per-video feature files into
/// `out_dir` (created if missing).
inline SynthResult synthesize_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "videos");

    std::mt19937_64 rng(spec.seed);
    SynthResult result;
    result.scene_direction = detail::unit_vector(rng, spec.channels);
    result.human_direction = detail::unit_vector(rng, spec.channels);

    const std::size_t t = spec.segments;
    const std::size_t n = spec.channels;
    const std::size_t k = spec.tracklets;
    const std::size_t frames = spec.frames();
    const auto [min_len, max_len] = spec.span_lengths();
    std::normal_distribution<double> gauss(0.0, spec.noise);

    struct Plan {
        std::string split;
        VideoLabel label;
        std::size_t count;
    };
    const Plan plans[] = {{"train", VideoLabel::normal, spec.train_normal},
                          {"train", VideoLabel::anomaly, spec.train_anomaly},
                          {"test", VideoLabel::normal, spec.test_normal},
                          {"test", VideoLabel::anomaly, spec.test_anomaly}};

    std::size_t anomaly_counter = 0;
    for (const auto& plan : plans) {
        for (std::size_t v = 0; v < plan.count; ++v) {
            ManifestRecord rec;
            rec.id = plan.split + "_" + to_string(plan.label) + "_" + std::to_string(v);
            rec.label = plan.label;
            rec.split = plan.split;
            rec.frames = frames;

            std::vector<double> latent(frames * n);
            for (double& x : latent) x = gauss(rng);
            std::vector<double> tracks(t * k * n);
            for (double& x : tracks) x = gauss(rng);
            std::vector<int> labels(frames, 0);

            if (plan.label == VideoLabel::anomaly) {
                AnomalyKind kind = spec.kind;
                if (kind == AnomalyKind::split) {
                    kind = anomaly_counter % 2 == 0 ? AnomalyKind::scene : AnomalyKind::human;
                }
                ++anomaly_counter;
                std::uniform_int_distribution<std::size_t> len_dist(min_len, max_len);
                const std::size_t len = len_dist(rng);
                std::uniform_int_distribution<std::size_t> start_dist(0, t - len);
                const std::size_t first = start_dist(rng);
                const std::size_t f0 = first * spec.frames_per_segment;
                const std::size_t f1 = (first + len) * spec.frames_per_segment;

                PlantedAnomaly planted{rec.id, to_string(kind), first, len, -1};
                if (kind == AnomalyKind::scene || kind == AnomalyKind::mixed) {
                    for (std::size_t f = f0; f < f1; ++f)
                        for (std::size_t c = 0; c < n; ++c)
                            latent[f * n + c] += spec.magnitude * result.scene_direction[c];
                }
                if (kind == AnomalyKind::human || kind == AnomalyKind::mixed) {
                    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
                    const std::size_t j = pick(rng);
                    planted.tracklet = static_cast<int>(j);
                    for (std::size_t i = first; i < first + len; ++i)
                        for (std::size_t c = 0; c < n; ++c)
                            tracks[(i * k + j) * n + c] += spec.magnitude * result.human_direction[c];
                }
                std::fill(labels.begin() + static_cast<std::ptrdiff_t>(f0),
                          labels.begin() + static_cast<std::ptrdiff_t>(f1), 1);
                rec.category = planted.kind;
                result.planted.push_back(planted);
            }

            const fs::path rel = fs::path("videos") / rec.id;
            fs::create_directories(out_dir / rel);
            for (std::size_t g = 1; g <= 3; ++g) {
                const fs::path file = rel / ("scene_g" + std::to_string(g) + ".hsnf");
                write_feature(out_dir / file, detail::pool_frames(latent, frames, n, t, g), spec.precision);
                rec.scene[g - 1] = file.generic_string();
            }
            rec.tracklets = (rel / "tracklets.hsnf").generic_string();
            write_feature(out_dir / rec.tracklets, Tensor({t, k, n}, std::move(tracks)), spec.precision);
            rec.annotations = (rel / "annotations.txt").generic_string();
            write_annotations(out_dir / *rec.annotations, labels);
            result.manifest.videos.push_back(std::move(rec));
        }
    }

    result.manifest_path = out_dir / "manifest.json";
    write_manifest(result.manifest_path, result.manifest);

    nlohmann::json truth{{"spec", to_json(spec)},
                         {"scene_direction", result.scene_direction},
                         {"human_direction", result.human_direction},
                         {"anomalies", nlohmann::json::array()}};
    for (const auto& p : result.planted) {
        truth["anomalies"].push_back({{"id", p.id},
                                      {"kind", p.kind},
                                      {"first_segment", p.first_segment},
                                      {"length", p.length},
                                      {"tracklet", p.tracklet}});
    }
    std::ofstream(out_dir / "ground_truth.json") << truth.dump(2) << '\n';
    return result;
}

}  // namespace hsn
