#pragma once

// Binary cube file, all integers little-endian:
//
//   offset  size  field
//   0       4     magic "RADC"
//   4       2     version (u16) = 1
//   6       4     n_range (u32)
//   10      4     n_doppler (u32)
//   14      4     n_azimuth (u32)
//   18      1     dtype (u8), 0 = float32 little-endian
//   19      ...   n_range * n_doppler * n_azimuth values, range outermost,
//                 azimuth innermost
//
// The payload length must match the dimensions exactly.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "radarsim/cube.hpp"

namespace radarsim::io {

inline constexpr std::array<char, 4> kCubeMagic{'R', 'A', 'D', 'C'};
inline constexpr std::uint16_t kCubeVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0;
inline constexpr std::size_t kCubeHeaderSize = 19;

class CubeFormatError : public DataError {
public:
    enum class Kind { Io, TruncatedHeader, BadMagic, BadVersion, BadDtype, BadDimensions, TruncatedPayload, TrailingData, NonFinite, Negative };

    CubeFormatError(Kind kind, const std::string& msg) : DataError(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off)
{
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + static_cast<std::size_t>(i)]) << (8 * i);
    return v;
}

}  // namespace detail

/// Serializes a cube; values are converted to float32.
template <typename T>
std::vector<std::uint8_t> encode_cube(const BasicRadarCube<T>& cube)
{
    const auto& s = cube.shape();
    std::vector<std::uint8_t> out;
    out.reserve(kCubeHeaderSize + 4 * s.cells());
    out.insert(out.end(), kCubeMagic.begin(), kCubeMagic.end());
    detail::put_u16(out, kCubeVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(s.n_range));
    detail::put_u32(out, static_cast<std::uint32_t>(s.n_doppler));
    detail::put_u32(out, static_cast<std::uint32_t>(s.n_azimuth));
    out.push_back(kDtypeFloat32);
    for (T v : cube.values()) detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return out;
}

inline RadarCube decode_cube(std::span<const std::uint8_t> bytes)
{
    using K = CubeFormatError::Kind;
    if (bytes.size() < kCubeHeaderSize) throw CubeFormatError(K::TruncatedHeader, "cube file: truncated header");
    if (std::memcmp(bytes.data(), kCubeMagic.data(), 4) != 0) throw CubeFormatError(K::BadMagic, "cube file: bad magic");
    const auto version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
    if (version != kCubeVersion)
        throw CubeFormatError(K::BadVersion, "cube file: unsupported version " + std::to_string(version));
    const CubeShape shape{detail::get_u32(bytes, 6), detail::get_u32(bytes, 10), detail::get_u32(bytes, 14)};
    if (bytes[18] != kDtypeFloat32)
        throw CubeFormatError(K::BadDtype, "cube file: unsupported dtype " + std::to_string(bytes[18]));
    if (shape.n_range == 0 || shape.n_doppler == 0 || shape.n_azimuth == 0)
        throw CubeFormatError(K::BadDimensions, "cube file: zero dimension");
    const std::size_t payload = bytes.size() - kCubeHeaderSize;
    const std::size_t expected = shape.cells() * 4;
    if (payload < expected)
        throw CubeFormatError(K::TruncatedPayload, "cube file: truncated payload (" + std::to_string(payload) + " of " +
                                                       std::to_string(expected) + " bytes)");
    if (payload > expected) throw CubeFormatError(K::TrailingData, "cube file: trailing bytes after payload");

    std::vector<float> values(shape.cells());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const float v = std::bit_cast<float>(detail::get_u32(bytes, kCubeHeaderSize + 4 * i));
        if (!std::isfinite(v))
            throw CubeFormatError(K::NonFinite, "cube file: non-finite value at index " + std::to_string(i));
        if (v < 0) throw CubeFormatError(K::Negative, "cube file: negative value at index " + std::to_string(i));
        values[i] = v;
    }
    return RadarCube(shape, std::move(values), RadarCube::trusted_tag{});
}

template <typename T>
void write_cube(const std::filesystem::path& path, const BasicRadarCube<T>& cube)
{
    const auto bytes = encode_cube(cube);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CubeFormatError(CubeFormatError::Kind::Io, "cube file: cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw CubeFormatError(CubeFormatError::Kind::Io, "cube file: write failed for " + path.string());
}

inline RadarCube read_cube(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CubeFormatError(CubeFormatError::Kind::Io, "cube file: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_cube(bytes);
}

}  // namespace radarsim::io
