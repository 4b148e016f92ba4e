#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "oscgroup/network.hpp"

namespace oscgroup {

/// Assignment of oscillators to synchronized groups. Group ids are dense
/// 0..group_count-1; kBackground marks oscillators outside every group.
struct SyncPartition {
    static constexpr int kBackground = -1;

    std::vector<int> labels;
    int group_count = 0;

    int group_size(int g) const;
};

/// Time window [t_begin, t_end] of a trace buffer, in time units.
struct TimeWindow {
    double t_begin = 0.0;
    double t_end = 0.0;

    /// Tail of a run, dropping `transient_fraction` of it (default the
    /// first quarter).
    static TimeWindow post_transient(const TraceBuffer& traces,
                                     double transient_fraction = 0.25) {
        return {transient_fraction * traces.duration(), traces.duration()};
    }
};

enum class DegeneratePolicy {
    kLabelBackground,  // constant traces get zero correlation rows, flagged
    kThrow,            // raise DegenerateTraceError instead
};

struct TraceCorrelation {
    Eigen::MatrixXd corr;              // n x n, symmetric, unit diagonal
    std::vector<std::uint8_t> degenerate;  // 1 = trace constant over the window
};

/// Pearson correlation of the v-traces over the window. Constant traces are
/// handled per `policy`.
TraceCorrelation trace_correlation(const TraceBuffer& traces, const TimeWindow& window,
                                   DegeneratePolicy policy = DegeneratePolicy::kLabelBackground);

enum class PartitionMode {
    kBackground,  // singleton components become background (clustering/contour)
    kTotal,       // singletons stay as size-1 groups (segmentation)
};

/// Connected components of the graph { (i,j) : corr_ij >= theta }. Degenerate
/// traces are always background in kBackground mode.
SyncPartition partition_by_threshold(const TraceCorrelation& corr, double theta,
                                     PartitionMode mode = PartitionMode::kBackground);

struct KMeansOptions {
    int restarts = 4;
    int max_iterations = 100;
    std::uint64_t seed = 0;
};

/// k-means over windowed, per-trace standardized v-vectors; best of
/// `restarts` k-means++ initializations by within-cluster sum of squares.
/// An emptied cluster is re-seeded at the point farthest from its centroid.
SyncPartition kmeans_partition(const TraceBuffer& traces, int k, const TimeWindow& window,
                               const KMeansOptions& opts = {});

/// Ordered spike times per oscillator (interpolated upward threshold
/// crossings of v).
struct SpikeRaster {
    std::vector<std::vector<double>> times;
    double duration = 0.0;
};

SpikeRaster spike_raster(const TraceBuffer& traces, double spike_threshold);

/// Per-bin count of oscillators that spike at least once in the bin. Peak
/// height estimates the size of a synchronized group.
struct CoincidenceSeries {
    double bin_width = 0.0;
    std::vector<int> counts;

    double time(int bin) const { return (bin + 0.5) * bin_width; }
    int peak() const;
};

CoincidenceSeries coincidence_series(const SpikeRaster& raster, double bin_width);

}  // namespace oscgroup
