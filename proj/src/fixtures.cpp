#include "oscgroup/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oscgroup/rng.hpp"

namespace oscgroup {
namespace fixtures {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
}  // namespace

LabeledPoints two_blob_points(std::uint64_t seed) {
    SeededRng rng(mix_seed(seed, 0xb10b));
    LabeledPoints out;
    const double centers[2][2] = {{25.0, 25.0}, {75.0, 75.0}};
    for (int blob = 0; blob < 2; ++blob) {
        for (int i = 0; i < 40; ++i) {
            out.points.x.push_back(rng.gaussian(centers[blob][0], 2.0));
            out.points.y.push_back(rng.gaussian(centers[blob][1], 2.0));
            out.truth.push_back(blob);
        }
    }
    return out;
}

LabeledPoints uniform_plus_cluster(std::uint64_t seed) {
    SeededRng rng(mix_seed(seed, 0xc157e2));
    LabeledPoints out;
    for (int i = 0; i < 300; ++i) {
        out.points.x.push_back(rng.uniform(0.0, 100.0));
        out.points.y.push_back(rng.uniform(0.0, 100.0));
        out.truth.push_back(-1);
    }
    const double cx = rng.uniform(25.0, 75.0);
    const double cy = rng.uniform(25.0, 75.0);
    for (int i = 0; i < 100; ++i) {
        out.points.x.push_back(rng.gaussian(cx, 3.0));
        out.points.y.push_back(rng.gaussian(cy, 3.0));
        out.truth.push_back(0);
    }
    return out;
}

LabeledGrid contour_vertical(int rows, int cols, double jitter_deg, std::uint64_t seed) {
    SeededRng rng(mix_seed(seed, 0xc07042));
    LabeledGrid out;
    out.grid.rows = rows;
    out.grid.cols = cols;
    out.grid.theta.resize(static_cast<std::size_t>(rows) * cols);
    for (auto& th : out.grid.theta) th = rng.uniform(0.0, kPi);

    const int col = cols / 2;
    const int len = std::min(10, rows);
    const int r0 = (rows - len) / 2;
    for (int r = r0; r < r0 + len; ++r) {
        // vertical path: orientation pi/2 in the row-down/col-right frame
        double th = kPi / 2.0 + rng.gaussian(0.0, jitter_deg * kDeg);
        th = std::fmod(th, kPi);
        if (th < 0.0) th += kPi;
        out.grid.theta[static_cast<std::size_t>(r) * cols + col] = th;
        out.contour_cells.push_back(r * cols + col);
    }
    return out;
}

TwoContourGrid contour_two_lines(int rows, int cols, double jitter_deg, std::uint64_t seed) {
    SeededRng rng(mix_seed(seed, 0x2c072));
    TwoContourGrid out;
    out.grid.rows = rows;
    out.grid.cols = cols;
    out.grid.theta.resize(static_cast<std::size_t>(rows) * cols);
    for (auto& th : out.grid.theta) th = rng.uniform(0.0, kPi);

    auto jittered = [&](double base) {
        double th = base + rng.gaussian(0.0, jitter_deg * kDeg);
        th = std::fmod(th, kPi);
        if (th < 0.0) th += kPi;
        return th;
    };

    // Full-height vertical contour near the right edge, crossed by a
    // horizontal contour. The crossing cell carries the vertical
    // orientation, which severs the horizontal path there; placing the
    // crossing two cells from the border leaves only a stub on the far
    // side, so the horizontal contour still pops out as one group.
    const int vcol = cols - 3;
    const int hrow = rows / 2;
    for (int c = 0; c < cols; ++c) {
        if (c == vcol) continue;
        out.grid.theta[static_cast<std::size_t>(hrow) * cols + c] = jittered(0.0);
        out.contour_b.push_back(hrow * cols + c);
    }
    for (int r = 0; r < rows; ++r) {
        const int idx = r * cols + vcol;
        out.grid.theta[idx] = jittered(kPi / 2.0);
        out.contour_a.push_back(idx);
    }
    return out;
}

OrientationGrid contour_random(int rows, int cols, std::uint64_t seed) {
    SeededRng rng(mix_seed(seed, 0x42a4d));
    OrientationGrid grid;
    grid.rows = rows;
    grid.cols = cols;
    grid.theta.resize(static_cast<std::size_t>(rows) * cols);
    for (auto& th : grid.theta) th = rng.uniform(0.0, kPi);
    return grid;
}

namespace {

LabeledImage banded(int rows, int cols, const std::vector<double>& levels, bool vertical,
                    double noise_sigma, std::uint64_t seed, std::uint64_t tag) {
    SeededRng rng(mix_seed(seed, tag));
    LabeledImage out;
    out.image.rows = rows;
    out.image.cols = cols;
    out.image.u.resize(static_cast<std::size_t>(rows) * cols);
    out.truth.rows = rows;
    out.truth.cols = cols;
    out.truth.labels.resize(out.image.u.size());
    const int bands = static_cast<int>(levels.size());
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int pos = vertical ? c : r;
            const int extent = vertical ? cols : rows;
            const int band = std::min(bands - 1, pos * bands / extent);
            double u = levels[band];
            if (noise_sigma > 0.0) u += rng.gaussian(0.0, noise_sigma);
            out.image.at(r, c) = std::clamp(u, 0.0, 255.0);
            out.truth.at(r, c) = band;
        }
    }
    return out;
}

}  // namespace

LabeledImage three_level_image(int rows, int cols, double noise_sigma, std::uint64_t seed) {
    return banded(rows, cols, {0.0, 128.0, 255.0}, true, noise_sigma, seed, 0x3111);
}

LabeledImage two_level_image(int rows, int cols, int split_col) {
    LabeledImage out;
    out.image.rows = rows;
    out.image.cols = cols;
    out.image.u.resize(static_cast<std::size_t>(rows) * cols);
    out.truth.rows = rows;
    out.truth.cols = cols;
    out.truth.labels.resize(out.image.u.size());
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int band = c < split_col ? 0 : 1;
            out.image.at(r, c) = band == 0 ? 0.0 : 255.0;
            out.truth.at(r, c) = band;
        }
    }
    return out;
}

LabeledImage banded_image(int rows, int cols, int bands, double noise_sigma,
                          std::uint64_t seed) {
    std::vector<double> levels(bands);
    for (int b = 0; b < bands; ++b) {
        levels[b] = 255.0 * b / (bands - 1);
    }
    return banded(rows, cols, levels, false, noise_sigma, seed, 0xba4d);
}

}  // namespace fixtures
}  // namespace oscgroup
