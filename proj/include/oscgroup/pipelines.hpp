#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "oscgroup/coupling.hpp"
#include "oscgroup/network.hpp"
#include "oscgroup/syncdetect.hpp"

namespace oscgroup {

/// Solo-oscillator calibration shared by every pipeline: the oscillation
/// threshold I*, the input band [input_lo, input_hi] = [I*+0.2, I*+0.7] that
/// keeps all units spiking while input diversity desynchronizes uncoupled
/// ones, and the period measured at the band midpoint. Memoized per params.
struct Calibration {
    double threshold = 0.0;
    double input_lo = 0.0;
    double input_hi = 0.0;
    double period = 0.0;
};

const Calibration& calibrate(const OscParams& params);

/// Knobs common to the grouping pipelines. dt = 0 picks the largest step
/// that keeps RK4 stable for the built graph (the v^7 term plus the
/// coupling stiffness bound the usable step).
struct PipelineConfig {
    OscParams params;
    double dt = 0.0;
    double periods = 20.0;
    std::uint64_t seed = 1;
    double corr_threshold = 0.95;
    double spike_level = 1.0;
    /// Traces are recorded roughly this many samples per period.
    int samples_per_period = 128;
    /// Width of the input band as a fraction of [input_lo, input_hi];
    /// contour integration narrows it (weak chain coupling needs less
    /// input diversity than clustering).
    double input_band_fraction = 1.0;
    /// Fraction of the run discarded before detection. Weakly coupled
    /// chains lock slowly, so contour detection uses a later window.
    double transient_fraction = 0.25;
};

/// Stable integration step for a graph under the config (Gershgorin bound on
/// the Laplacian plus the on-cycle Jacobian extent).
double stable_dt(const CouplingGraph& g, const PipelineConfig& cfg);

/// Network spec with seeded random inputs/initial states for a built graph.
NetworkSpec make_network(const CouplingGraph& graph, const PipelineConfig& cfg);

/// Simulate `cfg.periods` oscillation periods and return thinned traces.
TraceBuffer run_network(const NetworkSpec& spec, const PipelineConfig& cfg);

enum class ClusterMode {
    kBackground,  // threshold detection, singletons become outliers
    kFixedK,      // k-means with a known group count
};

/// Point-clustering result: per-point group label (kBackground = outlier)
/// plus the coincidence-peak estimate of the largest synchronized group.
struct ClusterResult {
    SyncPartition partition;
    int coincidence_peak = 0;
};

ClusterResult run_point_clustering(const PointSet& pts, int m_neighbors, double beta_t,
                                   ClusterMode mode, const PipelineConfig& cfg = {},
                                   int fixed_k = 0, TraceBuffer* traces_out = nullptr);

/// One detected contour: the grid cells of a synchronized group.
struct ContourResult {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<int>> contours;  // cell indices per contour
    SyncPartition partition;
};

/// Contour pop-out with defaults delta=20deg, gamma=10deg, w=1. Groups
/// smaller than min_cells are treated as background clutter.
ContourResult run_contour_integration(const OrientationGrid& grid, double delta, double gamma,
                                      int w, const PipelineConfig& cfg = {}, int min_cells = 5,
                                      TraceBuffer* traces_out = nullptr);

/// Dense per-pixel group ids.
struct LabelMap {
    int rows = 0;
    int cols = 0;
    std::vector<int> labels;

    int at(int r, int c) const { return labels[static_cast<std::size_t>(r) * cols + c]; }
    int& at(int r, int c) { return labels[static_cast<std::size_t>(r) * cols + c]; }
    int size() const { return rows * cols; }
    int group_count() const;
    bool operator==(const LabelMap&) const = default;
};

/// Basic segmentation: threshold detection when k_classes is absent (group
/// count emerges from the data), k-means otherwise.
LabelMap run_segmentation_basic(const GrayImage& img, double beta_t, int w,
                                std::optional<int> k_classes, const PipelineConfig& cfg = {},
                                TraceBuffer* traces_out = nullptr);

/// Inter-layer feedback configuration (second layer = one oscillator per
/// label class).
struct FeedbackConfig {
    /// Neighborhood offsets (dr, dc); default the 5-cell cross.
    std::vector<std::pair<int, int>> neighborhood = {{0, 0}, {-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    double k1 = 4.0;
    double k2 = 1.0;
    int max_periods = 12;
};

/// Pixel-to-class coupling weights W (M x N1): W[m, p] = share of pixels in
/// the neighborhood of p carrying label m. Columns sum to 1; border
/// neighborhoods are clipped to the image and normalized by the clipped
/// size. B is the identity on the class oscillators.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_feedback_matrices(const LabelMap& labels,
                                                                    const FeedbackConfig& cfg);

struct FeedbackResult {
    LabelMap final_labels;
    std::vector<LabelMap> history;  // label map at the end of each period
    bool converged = false;
    int periods_run = 0;
};

/// Segmentation with the error-correcting feedback layer: one basic period,
/// then per period rebuild the inter-layer coupling from the current labels,
/// integrate the hierarchy, and re-detect. Stops when the label map repeats.
FeedbackResult run_segmentation_feedback(const GrayImage& img, double beta_t, int w,
                                         int k_classes, const FeedbackConfig& fb,
                                         const PipelineConfig& cfg = {});

/// 4-connectivity adjacency over a dense region-id map (seams included).
std::vector<std::pair<int, int>> region_adjacency(const LabelMap& regions);

/// Two-layer segmentation: tiles are segmented independently (threshold
/// detection per tile), then a second-layer oscillator per region merges
/// regions whose mean gray levels synchronize. k_classes, when given,
/// selects k-means on the second layer. 1x1 tiling degenerates to the basic
/// pipeline. Throws TileError when the image does not divide evenly.
LabelMap run_segmentation_multilayer(const GrayImage& img, int tile_rows, int tile_cols,
                                     double beta_t, int w, std::optional<int> k_classes,
                                     const PipelineConfig& cfg = {});

/// Map an input value (e.g. a gray level in [0,255]) into the calibrated
/// oscillation band; used for second-layer oscillator inputs.
double input_from_gray(double gray, const OscParams& params);

/// Connected components (4-connectivity) of equal labels; returns the
/// component-id map and the component count.
std::pair<LabelMap, int> connected_regions(const LabelMap& labels);

}  // namespace oscgroup
