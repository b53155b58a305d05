#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "radarsim/cube.hpp"
#include "radarsim/types.hpp"

namespace radarsim {

/// Cell-averaging CFAR over a full 3D training shell.
///
/// The shell is the box of half-width guard + train around the cell minus
/// the box of half-width guard, clipped at the cube edges.
struct CfarConfig {
    int guard = 2;
    int train = 4;
    double alpha = 5.0;
    double min_peak = 0.0;

    void validate() const
    {
        detail::require(guard >= 0, "CfarConfig: guard must be >= 0");
        detail::require(train >= 1, "CfarConfig: train must be >= 1");
        detail::require(std::isfinite(alpha) && alpha > 0, "CfarConfig: alpha must be > 0");
        detail::require(std::isfinite(min_peak) && min_peak >= 0, "CfarConfig: min_peak must be >= 0");
    }
};

namespace detail {

/// Summed-volume table with a zero border: table(r, d, a) is the sum of all
/// cells strictly below (r, d, a) on every axis.
class SummedVolume {
public:
    template <typename T>
    explicit SummedVolume(const BasicRadarCube<T>& cube)
        : nr_(cube.shape().n_range + 1), nd_(cube.shape().n_doppler + 1), na_(cube.shape().n_azimuth + 1),
          table_(nr_ * nd_ * na_, 0.0)
    {
        for (std::size_t r = 1; r < nr_; ++r)
            for (std::size_t d = 1; d < nd_; ++d)
                for (std::size_t a = 1; a < na_; ++a) {
                    table_[idx(r, d, a)] = static_cast<double>(cube(r - 1, d - 1, a - 1)) + at(r - 1, d, a) +
                                           at(r, d - 1, a) + at(r, d, a - 1) - at(r - 1, d - 1, a) -
                                           at(r - 1, d, a - 1) - at(r, d - 1, a - 1) + at(r - 1, d - 1, a - 1);
                }
    }

    /// Sum over the half-open box [r0, r1) x [d0, d1) x [a0, a1).
    double box(std::size_t r0, std::size_t r1, std::size_t d0, std::size_t d1, std::size_t a0, std::size_t a1) const
    {
        return at(r1, d1, a1) - at(r0, d1, a1) - at(r1, d0, a1) - at(r1, d1, a0) + at(r0, d0, a1) + at(r0, d1, a0) +
               at(r1, d0, a0) - at(r0, d0, a0);
    }

private:
    std::size_t idx(std::size_t r, std::size_t d, std::size_t a) const { return (r * nd_ + d) * na_ + a; }
    double at(std::size_t r, std::size_t d, std::size_t a) const { return table_[idx(r, d, a)]; }

    std::size_t nr_, nd_, na_;
    std::vector<double> table_;
};

struct Span1 {
    std::size_t lo, hi;  // half-open
};

inline Span1 clip(std::size_t c, int half, std::size_t n)
{
    const long lo = static_cast<long>(c) - half;
    const long hi = static_cast<long>(c) + half + 1;
    return {static_cast<std::size_t>(std::max(lo, 0L)), static_cast<std::size_t>(std::min(hi, static_cast<long>(n)))};
}

template <typename T>
bool strict_local_max(const BasicRadarCube<T>& cube, std::size_t r, std::size_t d, std::size_t a)
{
    const auto& s = cube.shape();
    const T v = cube(r, d, a);
    const auto rs = clip(r, 1, s.n_range), ds = clip(d, 1, s.n_doppler), as = clip(a, 1, s.n_azimuth);
    for (std::size_t i = rs.lo; i < rs.hi; ++i)
        for (std::size_t j = ds.lo; j < ds.hi; ++j)
            for (std::size_t k = as.lo; k < as.hi; ++k) {
                if (i == r && j == d && k == a) continue;
                if (!(v > cube(i, j, k))) return false;
            }
    return true;
}

}  // namespace detail

/// Detections are cells that exceed alpha times the mean of their training
/// shell, are strict maxima of their 3x3x3 neighbourhood, and reach
/// min_peak. Returned in flat (range, doppler, azimuth) order with integer
/// bins and the cell value as intensity.
template <typename T>
std::vector<ReflectionPoint> cfar_extract(const BasicRadarCube<T>& cube, const CfarConfig& cfg)
{
    cfg.validate();
    const auto& s = cube.shape();
    const detail::SummedVolume sv(cube);
    const int outer = cfg.guard + cfg.train;
    std::vector<ReflectionPoint> out;
    for (std::size_t r = 0; r < s.n_range; ++r)
        for (std::size_t d = 0; d < s.n_doppler; ++d)
            for (std::size_t a = 0; a < s.n_azimuth; ++a) {
                const double v = static_cast<double>(cube(r, d, a));
                if (v < cfg.min_peak || v <= 0) continue;
                if (!detail::strict_local_max(cube, r, d, a)) continue;
                const auto ro = detail::clip(r, outer, s.n_range), doo = detail::clip(d, outer, s.n_doppler),
                           ao = detail::clip(a, outer, s.n_azimuth);
                const auto ri = detail::clip(r, cfg.guard, s.n_range), di = detail::clip(d, cfg.guard, s.n_doppler),
                           ai = detail::clip(a, cfg.guard, s.n_azimuth);
                const double n_outer = static_cast<double>((ro.hi - ro.lo) * (doo.hi - doo.lo) * (ao.hi - ao.lo));
                const double n_inner = static_cast<double>((ri.hi - ri.lo) * (di.hi - di.lo) * (ai.hi - ai.lo));
                const double count = n_outer - n_inner;
                double mean = 0;
                if (count > 0) {
                    const double shell = sv.box(ro.lo, ro.hi, doo.lo, doo.hi, ao.lo, ao.hi) -
                                         sv.box(ri.lo, ri.hi, di.lo, di.hi, ai.lo, ai.hi);
                    mean = std::max(shell, 0.0) / count;
                }
                if (!(v > cfg.alpha * mean)) continue;
                out.emplace_back(static_cast<double>(r), static_cast<double>(d), static_cast<double>(a), v);
            }
    return out;
}

}  // namespace radarsim
