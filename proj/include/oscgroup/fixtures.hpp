#pragma once

#include <cstdint>
#include <vector>

#include "oscgroup/pipelines.hpp"

namespace oscgroup {
namespace fixtures {

/// Deterministic inputs mirroring the statistics of the reference
/// experiments; every generator is a pure function of its seed.

struct LabeledPoints {
    PointSet points;
    std::vector<int> truth;  // cluster id, -1 for background clutter
};

/// Two well-separated Gaussian blobs (40 points each, sigma 2, centers
/// (25,25) and (75,75)).
LabeledPoints two_blob_points(std::uint64_t seed);

/// 300 points uniform in [0,100]^2 plus a cluster of 100 Gaussian points
/// (sigma 3) around a seeded center well inside the domain.
LabeledPoints uniform_plus_cluster(std::uint64_t seed);

struct LabeledGrid {
    OrientationGrid grid;
    std::vector<int> contour_cells;  // embedded path, empty if none
};

/// Random orientation grid with a vertical 10-cell contour embedded at the
/// center column; element orientations get Gaussian jitter (degrees).
LabeledGrid contour_vertical(int rows, int cols, double jitter_deg, std::uint64_t seed);

/// Two intersecting straight contours (one vertical, one horizontal).
struct TwoContourGrid {
    OrientationGrid grid;
    std::vector<int> contour_a;
    std::vector<int> contour_b;
};
TwoContourGrid contour_two_lines(int rows, int cols, double jitter_deg, std::uint64_t seed);

/// Uniformly random orientations, no embedded structure.
OrientationGrid contour_random(int rows, int cols, std::uint64_t seed);

struct LabeledImage {
    GrayImage image;
    LabelMap truth;
};

/// Three vertical bands at gray 0/128/255 plus white Gaussian noise of the
/// given sigma, clipped to [0, 255].
LabeledImage three_level_image(int rows, int cols, double noise_sigma, std::uint64_t seed);

/// Noiseless two-level image (gray 0 / 255) split by a vertical boundary at
/// column `split_col`; regions span tile borders for any even tiling.
LabeledImage two_level_image(int rows, int cols, int split_col);

/// Horizontal bands of `bands` distinct gray levels plus light noise;
/// aerial-style stand-in for multi-layer segmentation.
LabeledImage banded_image(int rows, int cols, int bands, double noise_sigma,
                          std::uint64_t seed);

}  // namespace fixtures
}  // namespace oscgroup
