#pragma once

// HSNF feature container.
//
//   offset  size      field
//   0       4         magic "HSNF" (0x48 0x53 0x4E 0x46)
//   4       2         version (u16, = 1)
//   6       1         precision (u8; 0 = float32, 1 = float64)
//   7       1         ndim (u8, 1..4)
//   8       4*ndim    extents (u32 each)
//   ...               row-major payload
//
// All multi-byte values are little-endian. 32-bit payloads are widened to
// double on load.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "hsn/tensor.hpp"

namespace hsn {

enum class Precision : std::uint8_t { f32 = 0, f64 = 1 };

inline constexpr std::array<std::uint8_t, 4> kFeatureMagic = {0x48, 0x53, 0x4E, 0x46};
inline constexpr std::uint16_t kFeatureVersion = 1;
inline constexpr std::size_t kMaxFeatureRank = 4;

constexpr std::size_t feature_header_size(std::size_t ndim) { return 4 + 2 + 1 + 1 + 4 * ndim; }

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
    }
}

template <typename T>
T get_le(const std::uint8_t* in) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bits |= static_cast<U>(static_cast<U>(in[i]) << (8 * i));
    }
    return std::bit_cast<T>(bits);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_feature(const Tensor& tensor, Precision precision = Precision::f64) {
    detail::require(tensor.rank() >= 1 && tensor.rank() <= kMaxFeatureRank,
                    "feature container holds 1 to 4 dimensions, got " + std::to_string(tensor.rank()));
    std::vector<std::uint8_t> out(kFeatureMagic.begin(), kFeatureMagic.end());
    detail::put_le<std::uint16_t>(out, kFeatureVersion);
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(precision));
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(tensor.rank()));
    for (std::size_t e : tensor.shape()) {
        detail::require(e <= 0xFFFFFFFFu, "feature extent exceeds 32 bits");
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e));
    }
    const std::size_t elem = precision == Precision::f64 ? 8 : 4;
    out.reserve(out.size() + tensor.size() * elem);
    for (double v : tensor.values()) {
        if (precision == Precision::f64) {
            detail::put_le<double>(out, v);
        } else {
            detail::put_le<float>(out, static_cast<float>(v));
        }
    }
    return out;
}

inline Tensor decode_feature(const std::vector<std::uint8_t>& bytes, const std::string& origin = "buffer") {
    auto corrupt = [&](const std::string& why) { return CorruptFile(origin + ": " + why); };
    if (bytes.size() < feature_header_size(0)) throw corrupt("truncated header");
    if (!std::equal(kFeatureMagic.begin(), kFeatureMagic.end(), bytes.begin())) throw corrupt("bad magic");
    const auto version = detail::get_le<std::uint16_t>(bytes.data() + 4);
    if (version != kFeatureVersion) throw corrupt("unsupported version " + std::to_string(version));
    const std::uint8_t precision = bytes[6];
    if (precision > 1) throw corrupt("unknown precision tag " + std::to_string(precision));
    const std::size_t ndim = bytes[7];
    if (ndim == 0) throw corrupt("zero-dimensional payload");
    if (ndim > kMaxFeatureRank) throw corrupt("too many dimensions (" + std::to_string(ndim) + ")");
    const std::size_t header = feature_header_size(ndim);
    if (bytes.size() < header) throw corrupt("truncated extents");
    Shape shape(ndim);
    for (std::size_t i = 0; i < ndim; ++i) {
        shape[i] = detail::get_le<std::uint32_t>(bytes.data() + 8 + 4 * i);
    }
    const std::size_t elem = precision == 1 ? 8 : 4;
    const std::size_t count = numel(shape);
    if (bytes.size() != header + count * elem) {
        throw corrupt("payload holds " + std::to_string(bytes.size() - header) + " bytes, expected " +
                      std::to_string(count * elem));
    }
    std::vector<double> values(count);
    const std::uint8_t* p = bytes.data() + header;
    for (std::size_t i = 0; i < count; ++i) {
        values[i] = elem == 8 ? detail::get_le<double>(p + 8 * i) : static_cast<double>(detail::get_le<float>(p + 4 * i));
    }
    return Tensor(std::move(shape), std::move(values));
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + path.string());
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_feature(const std::filesystem::path& path, const Tensor& tensor,
                          Precision precision = Precision::f64) {
    write_bytes(path, encode_feature(tensor, precision));
}

inline Tensor read_feature(const std::filesystem::path& path) { return decode_feature(read_bytes(path), path.string()); }

}  // namespace hsn
