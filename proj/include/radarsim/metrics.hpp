#pragma once

// Cube comparison metrics: per-point error (global and scene restricted),
// per-point spectral error, range-azimuth projections and a Frechet distance
// between Gaussian statistics of image sets.
//
// The Frechet distance uses fixed block-mean pixel features, not a learned
// feature extractor, so its values are not comparable with Inception FID.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

#include "radarsim/cube.hpp"
#include "radarsim/types.hpp"

namespace radarsim {

namespace detail {

inline void require_same_shape(const CubeShape& a, const CubeShape& b, const char* who)
{
    if (!(a == b)) throw DataError(std::string(who) + ": cube dimensions differ");
}

inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

}  // namespace detail

/// Mean absolute elementwise difference.
template <typename T, typename U>
double ppe(const BasicRadarCube<T>& sim, const BasicRadarCube<U>& gt)
{
    detail::require_same_shape(sim.shape(), gt.shape(), "ppe");
    const auto a = sim.values();
    const auto b = gt.values();
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    return s / static_cast<double>(a.size());
}

/// Sum of absolute differences over the scene bins.
template <typename T, typename U>
double ppe_scene_sum(const BasicRadarCube<T>& sim, const BasicRadarCube<U>& gt, const ScenePointSet& scene)
{
    detail::require_same_shape(sim.shape(), gt.shape(), "ppe_scene");
    if (scene.empty()) throw DataError("ppe_scene: scene point set is empty");
    if (!scene.inside(sim.shape())) throw DataError("ppe_scene: scene point set has out-of-bounds bins");
    double s = 0;
    for (const auto& b : scene.indices())
        s += std::abs(static_cast<double>(sim(b.r, b.d, b.a)) - static_cast<double>(gt(b.r, b.d, b.a)));
    return s;
}

/// Mean absolute difference over the scene bins.
template <typename T, typename U>
double ppe_scene(const BasicRadarCube<T>& sim, const BasicRadarCube<U>& gt, const ScenePointSet& scene)
{
    return ppe_scene_sum(sim, gt, scene) / static_cast<double>(scene.size());
}

/// Mean magnitude of the difference of the unnormalized forward 3D DFTs.
template <typename T, typename U>
double ppse(const BasicRadarCube<T>& sim, const BasicRadarCube<U>& gt)
{
    detail::require_same_shape(sim.shape(), gt.shape(), "ppse");
    const auto& s = sim.shape();
    const std::size_t n = s.cells();
    // The transform is linear, so FFT(sim) - FFT(gt) = FFT(sim - gt).
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!buf) throw Error("ppse: allocation failed");
    fftw_plan plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan = fftw_plan_dft_3d(static_cast<int>(s.n_range), static_cast<int>(s.n_doppler), static_cast<int>(s.n_azimuth),
                                buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    const auto a = sim.values();
    const auto b = gt.values();
    for (std::size_t i = 0; i < n; ++i) {
        buf[i][0] = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        buf[i][1] = 0.0;
    }
    fftw_execute(plan);
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += std::hypot(buf[i][0], buf[i][1]);
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return sum / static_cast<double>(n);
}

/// Row-major 2D image.
struct Image2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

/// Range x azimuth image, maximum over Doppler.
template <typename T>
Image2D ra_projection(const BasicRadarCube<T>& cube)
{
    const auto& s = cube.shape();
    Image2D img{s.n_range, s.n_azimuth, std::vector<double>(s.n_range * s.n_azimuth, 0.0)};
    for (std::size_t r = 0; r < s.n_range; ++r)
        for (std::size_t d = 0; d < s.n_doppler; ++d)
            for (std::size_t a = 0; a < s.n_azimuth; ++a)
                img(r, a) = std::max(img(r, a), static_cast<double>(cube(r, d, a)));
    return img;
}

/// Range x Doppler image, maximum over azimuth.
template <typename T>
Image2D rd_projection(const BasicRadarCube<T>& cube)
{
    const auto& s = cube.shape();
    Image2D img{s.n_range, s.n_doppler, std::vector<double>(s.n_range * s.n_doppler, 0.0)};
    for (std::size_t r = 0; r < s.n_range; ++r)
        for (std::size_t d = 0; d < s.n_doppler; ++d)
            for (std::size_t a = 0; a < s.n_azimuth; ++a)
                img(r, d) = std::max(img(r, d), static_cast<double>(cube(r, d, a)));
    return img;
}

inline constexpr std::size_t kFrechetSide = 16;

/// 16 x 16 block means, flattened row-major. Block i spans
/// [floor(i n / 16), floor((i + 1) n / 16)), widened to one pixel when the
/// image is smaller than 16 along an axis.
inline Eigen::VectorXd block_mean_features(const Image2D& img)
{
    detail::require(img.rows > 0 && img.cols > 0, "block_mean_features: empty image");
    auto edges = [](std::size_t n, std::size_t i) {
        std::size_t lo = i * n / kFrechetSide;
        std::size_t hi = (i + 1) * n / kFrechetSide;
        if (hi <= lo) hi = lo + 1;
        return std::pair{std::min(lo, n - 1), std::min(hi, n)};
    };
    Eigen::VectorXd f(static_cast<Eigen::Index>(kFrechetSide * kFrechetSide));
    for (std::size_t i = 0; i < kFrechetSide; ++i) {
        const auto [r0, r1] = edges(img.rows, i);
        for (std::size_t j = 0; j < kFrechetSide; ++j) {
            const auto [c0, c1] = edges(img.cols, j);
            double s = 0;
            for (std::size_t r = r0; r < r1; ++r)
                for (std::size_t c = c0; c < c1; ++c) s += img(r, c);
            f[static_cast<Eigen::Index>(i * kFrechetSide + j)] = s / static_cast<double>((r1 - r0) * (c1 - c0));
        }
    }
    return f;
}

namespace detail {

/// Eigenvalues at or below the solver's resolution (dim * eps * largest) are
/// round-off from rank deficiency and are set to zero.
inline Eigen::VectorXd clamp_eigenvalues(Eigen::VectorXd ev)
{
    const double tol = static_cast<double>(ev.size()) * std::numeric_limits<double>::epsilon() *
                       ev.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] <= tol) ev[i] = 0.0;
    return ev;
}

inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd ev = clamp_eigenvalues(es.eigenvalues()).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

struct GaussianStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

inline GaussianStats feature_stats(std::span<const Image2D> images)
{
    const auto dim = static_cast<Eigen::Index>(kFrechetSide * kFrechetSide);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(images.size()), dim);
    for (std::size_t i = 0; i < images.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = block_mean_features(images[i]);
    GaussianStats st;
    st.mean = x.colwise().mean();
    const Eigen::MatrixXd c = x.rowwise() - st.mean.transpose();
    st.cov = (c.transpose() * c) / static_cast<double>(images.size() - 1);
    return st;
}

}  // namespace detail

/// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2) over block-mean
/// features, with eigenvalues clamped at zero (and round-off level ones
/// treated as zero).
inline double frechet_stats_distance(std::span<const Image2D> images_a, std::span<const Image2D> images_b)
{
    if (images_a.size() < 2 || images_b.size() < 2)
        throw DataError("frechet_stats_distance: each set needs at least 2 images");
    const auto rows = images_a.front().rows, cols = images_a.front().cols;
    auto same = [&](const Image2D& im) { return im.rows == rows && im.cols == cols; };
    if (!std::all_of(images_a.begin(), images_a.end(), same) || !std::all_of(images_b.begin(), images_b.end(), same))
        throw DataError("frechet_stats_distance: image dimensions differ");

    const auto a = detail::feature_stats(images_a);
    const auto b = detail::feature_stats(images_b);
    const Eigen::MatrixXd sa = detail::psd_sqrt(a.cov);
    Eigen::MatrixXd m = sa * b.cov * sa;
    m = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double tr_sqrt = detail::clamp_eigenvalues(es.eigenvalues()).cwiseSqrt().sum();
    const double d = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * tr_sqrt;
    return std::max(d, 0.0);
}

struct MetricReport {
    double ppe = 0;
    std::optional<double> ppe_scene;
    std::optional<double> ppe_scene_sum;
    double ppse = 0;
    std::optional<double> frechet;
    std::size_t cells = 0;
    std::size_t scene_cells = 0;
};

template <typename T, typename U>
MetricReport compare_cubes(const BasicRadarCube<T>& sim, const BasicRadarCube<U>& gt,
                           const ScenePointSet* scene = nullptr)
{
    MetricReport r;
    r.ppe = ppe(sim, gt);
    r.ppse = ppse(sim, gt);
    r.cells = sim.shape().cells();
    if (scene && !scene->empty()) {
        r.ppe_scene_sum = ppe_scene_sum(sim, gt, *scene);
        r.ppe_scene = *r.ppe_scene_sum / static_cast<double>(scene->size());
        r.scene_cells = scene->size();
    }
    return r;
}

}  // namespace radarsim
