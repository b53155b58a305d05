#pragma once

// 8-bit grayscale PNG heatmaps of cube projections. Values are min-max
// normalized to [0, 255] with rounding; a constant image is all black.
// No time or text chunks are written, so output bytes depend only on the
// pixels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "radarsim/metrics.hpp"

namespace radarsim::io {

inline std::vector<std::uint8_t> to_gray8(const Image2D& img)
{
    std::vector<std::uint8_t> px(img.values.size(), 0);
    if (img.values.empty()) return px;
    const auto [lo_it, hi_it] = std::minmax_element(img.values.begin(), img.values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) return px;
    const double scale = 255.0 / (hi - lo);
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = static_cast<std::uint8_t>(std::clamp(std::lround((img.values[i] - lo) * scale), 0L, 255L));
    return px;
}

inline void write_png_gray8(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                            const std::vector<std::uint8_t>& px)
{
    if (rows == 0 || cols == 0 || px.size() != rows * cols)
        throw InvalidArgument("render: pixel buffer does not match " + std::to_string(rows) + " x " + std::to_string(cols));
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw DataError("render: cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw Error("render: libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw DataError("render: failed writing " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t r = 0; r < rows; ++r) png_write_row(png, const_cast<png_bytep>(px.data() + r * cols));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fclose(fp) != 0) throw DataError("render: failed closing " + path.string());
}

/// Writes <prefix>_ra.png (range rows x azimuth columns, max over Doppler)
/// and <prefix>_rd.png (range rows x Doppler columns, max over azimuth).
/// Returns the two paths.
template <typename T>
std::pair<std::filesystem::path, std::filesystem::path> render_slices(const BasicRadarCube<T>& cube,
                                                                      const std::string& prefix)
{
    const std::filesystem::path ra = prefix + "_ra.png";
    const std::filesystem::path rd = prefix + "_rd.png";
    const Image2D ra_img = ra_projection(cube);
    const Image2D rd_img = rd_projection(cube);
    write_png_gray8(ra, ra_img.rows, ra_img.cols, to_gray8(ra_img));
    write_png_gray8(rd, rd_img.rows, rd_img.cols, to_gray8(rd_img));
    return {ra, rd};
}

}  // namespace radarsim::io
