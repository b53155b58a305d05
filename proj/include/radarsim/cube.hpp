#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "radarsim/error.hpp"
#include "radarsim/types.hpp"

namespace radarsim {

/// Dense non-negative range x doppler x azimuth tensor, azimuth innermost.
///
/// `T` is the storage precision. Synthesis always accumulates in double and
/// converts on output, so `RadarCube` (float) and `RadarCubeD` hold the same
/// values up to rounding.
template <typename T>
class BasicRadarCube {
public:
    using value_type = T;

    explicit BasicRadarCube(CubeShape shape) : shape_(shape), values_(shape.cells(), T(0))
    {
        detail::require(shape.cells() > 0, "RadarCube: every dimension must be >= 1");
    }

    BasicRadarCube(CubeShape shape, std::vector<T> values) : shape_(shape), values_(std::move(values))
    {
        detail::require(shape.cells() > 0, "RadarCube: every dimension must be >= 1");
        if (values_.size() != shape.cells())
            throw InvalidArgument("RadarCube: value count " + std::to_string(values_.size()) +
                                  " does not match shape (" + std::to_string(shape.cells()) + ")");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]) || values_[i] < T(0))
                throw InvalidArgument("RadarCube: value at flat index " + std::to_string(i) +
                                      " is negative or not finite");
        }
    }

    const CubeShape& shape() const { return shape_; }
    std::size_t size() const { return values_.size(); }

    std::size_t index(std::size_t r, std::size_t d, std::size_t a) const
    {
        return (r * shape_.n_doppler + d) * shape_.n_azimuth + a;
    }

    T operator()(std::size_t r, std::size_t d, std::size_t a) const { return values_[index(r, d, a)]; }
    T at(std::size_t r, std::size_t d, std::size_t a) const
    {
        if (r >= shape_.n_range || d >= shape_.n_doppler || a >= shape_.n_azimuth)
            throw InvalidArgument("RadarCube::at: index out of range");
        return values_[index(r, d, a)];
    }

    std::span<const T> values() const { return values_; }

    /// Mutable element access. Callers keep values finite and non-negative.
    T& mutable_at(std::size_t r, std::size_t d, std::size_t a) { return values_[index(r, d, a)]; }

    BinIndex argmax() const
    {
        auto it = std::max_element(values_.begin(), values_.end());
        auto flat = static_cast<std::size_t>(it - values_.begin());
        BinIndex b;
        b.a = flat % shape_.n_azimuth;
        flat /= shape_.n_azimuth;
        b.d = flat % shape_.n_doppler;
        b.r = flat / shape_.n_doppler;
        return b;
    }

    T max_value() const { return *std::max_element(values_.begin(), values_.end()); }

    template <typename U>
    BasicRadarCube<U> cast() const
    {
        std::vector<U> out(values_.begin(), values_.end());
        return BasicRadarCube<U>(shape_, std::move(out), typename BasicRadarCube<U>::trusted_tag{});
    }

    friend bool operator==(const BasicRadarCube&, const BasicRadarCube&) = default;

    // Used by producers that already guarantee the invariants.
    struct trusted_tag {};
    BasicRadarCube(CubeShape shape, std::vector<T> values, trusted_tag)
        : shape_(shape), values_(std::move(values))
    {
    }

private:
    template <typename>
    friend class BasicRadarCube;

    CubeShape shape_;
    std::vector<T> values_;
};

using RadarCube = BasicRadarCube<float>;
using RadarCubeD = BasicRadarCube<double>;

namespace detail {

/// Converts a double accumulator to storage precision, clamping the tiny
/// negative values cancellation can never actually produce (all terms >= 0).
template <typename T>
BasicRadarCube<T> finish_cube(CubeShape shape, const std::vector<double>& acc)
{
    std::vector<T> out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<T>(acc[i] > 0 ? acc[i] : 0.0);
    return BasicRadarCube<T>(shape, std::move(out), typename BasicRadarCube<T>::trusted_tag{});
}

}  // namespace detail
}  // namespace radarsim
