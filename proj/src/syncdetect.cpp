#include "oscgroup/syncdetect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "oscgroup/rng.hpp"

namespace oscgroup {

int SyncPartition::group_size(int g) const {
    return static_cast<int>(std::count(labels.begin(), labels.end(), g));
}

namespace {

struct WindowIdx {
    int first = 0;
    int count = 0;
};

WindowIdx window_indices(const TraceBuffer& traces, const TimeWindow& window) {
    if (window.t_begin < -1e-9 || window.t_end > traces.duration() + 1e-9 ||
        window.t_end <= window.t_begin) {
        throw DegenerateInputError("analysis window must lie within [0, duration]");
    }
    const int first = static_cast<int>(std::ceil(window.t_begin / traces.dt() - 1e-9));
    const int last = static_cast<int>(std::floor(window.t_end / traces.dt() + 1e-9));
    const int count = std::min(last, traces.sample_count() - 1) - first + 1;
    if (count < 2) throw DegenerateInputError("analysis window holds fewer than 2 samples");
    return {first, count};
}

/// Windowed traces standardized to zero mean / unit norm, row per oscillator.
/// Degenerate (constant) traces become zero rows and are flagged.
Eigen::MatrixXd standardized_window(const TraceBuffer& traces, const WindowIdx& w,
                                    std::vector<std::uint8_t>& degenerate) {
    const int n = traces.n();
    Eigen::MatrixXd z(n, w.count);
    degenerate.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        double mean = 0.0;
        for (int s = 0; s < w.count; ++s) mean += traces.v(w.first + s, i);
        mean /= w.count;
        double norm2 = 0.0;
        for (int s = 0; s < w.count; ++s) {
            const double x = traces.v(w.first + s, i) - mean;
            z(i, s) = x;
            norm2 += x * x;
        }
        const double scale = std::sqrt(norm2);
        if (scale < 1e-10 * (1.0 + std::abs(mean))) {
            degenerate[i] = 1;
            z.row(i).setZero();
        } else {
            z.row(i) /= scale;
        }
    }
    return z;
}

}  // namespace

TraceCorrelation trace_correlation(const TraceBuffer& traces, const TimeWindow& window,
                                   DegeneratePolicy policy) {
    const auto w = window_indices(traces, window);
    TraceCorrelation out;
    Eigen::MatrixXd z = standardized_window(traces, w, out.degenerate);
    if (policy == DegeneratePolicy::kThrow) {
        for (std::size_t i = 0; i < out.degenerate.size(); ++i) {
            if (out.degenerate[i]) {
                throw DegenerateTraceError("trace " + std::to_string(i) +
                                           " is constant over the window");
            }
        }
    }
    out.corr.noalias() = z * z.transpose();
    out.corr.diagonal().setOnes();
    return out;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

SyncPartition partition_by_threshold(const TraceCorrelation& corr, double theta,
                                     PartitionMode mode) {
    const int n = static_cast<int>(corr.corr.rows());
    if (corr.corr.cols() != n) throw DimensionError("partition_by_threshold: matrix not square");

    UnionFind uf(n);
    for (int i = 0; i < n; ++i) {
        if (!corr.degenerate.empty() && corr.degenerate[i]) continue;
        for (int j = i + 1; j < n; ++j) {
            if (!corr.degenerate.empty() && corr.degenerate[j]) continue;
            if (corr.corr(i, j) >= theta) uf.unite(i, j);
        }
    }

    std::vector<int> comp_size(n, 0);
    for (int i = 0; i < n; ++i) ++comp_size[uf.find(i)];

    SyncPartition part;
    part.labels.assign(n, SyncPartition::kBackground);
    std::vector<int> comp_label(n, -1);
    for (int i = 0; i < n; ++i) {
        const int root = uf.find(i);
        const bool degen = !corr.degenerate.empty() && corr.degenerate[i];
        const bool singleton = comp_size[root] == 1;
        if (mode == PartitionMode::kBackground && (singleton || degen)) continue;
        if (comp_label[root] < 0) comp_label[root] = part.group_count++;
        part.labels[i] = comp_label[root];
    }
    return part;
}

SyncPartition kmeans_partition(const TraceBuffer& traces, int k, const TimeWindow& window,
                               const KMeansOptions& opts) {
    const int n = traces.n();
    if (k < 1 || k > n) throw DegenerateInputError("kmeans_partition: need 1 <= k <= n");
    const auto w = window_indices(traces, window);
    std::vector<std::uint8_t> degenerate;
    const Eigen::MatrixXd z = standardized_window(traces, w, degenerate);
    const int d = static_cast<int>(z.cols());

    std::vector<int> best_labels(n, 0);
    double best_sse = std::numeric_limits<double>::infinity();

    Eigen::MatrixXd centroids(k, d);
    std::vector<int> labels(n);
    std::vector<int> counts(k);
    Eigen::VectorXd dist2(n);

    for (int restart = 0; restart < opts.restarts; ++restart) {
        SeededRng rng(mix_seed(opts.seed, 0x6b6d0000u + static_cast<unsigned>(restart)));

        // k-means++ seeding
        centroids.row(0) = z.row(rng.uniform_int(0, n - 1));
        dist2 = (z.rowwise() - centroids.row(0)).rowwise().squaredNorm();
        for (int c = 1; c < k; ++c) {
            const double total = dist2.sum();
            int pick = 0;
            if (total > 0.0) {
                double target = rng.uniform01() * total;
                for (pick = 0; pick < n - 1; ++pick) {
                    target -= dist2[pick];
                    if (target <= 0.0) break;
                }
            } else {
                pick = rng.uniform_int(0, n - 1);
            }
            centroids.row(c) = z.row(pick);
            dist2 = dist2.cwiseMin((z.rowwise() - centroids.row(c)).rowwise().squaredNorm());
        }

        double sse = 0.0;
        for (int iter = 0; iter < opts.max_iterations; ++iter) {
            bool changed = (iter == 0);
            sse = 0.0;
            for (int i = 0; i < n; ++i) {
                int arg = 0;
                double best = (z.row(i) - centroids.row(0)).squaredNorm();
                for (int c = 1; c < k; ++c) {
                    const double cur = (z.row(i) - centroids.row(c)).squaredNorm();
                    if (cur < best) {
                        best = cur;
                        arg = c;
                    }
                }
                if (iter > 0 && labels[i] != arg) changed = true;
                labels[i] = arg;
                sse += best;
            }
            if (!changed) break;

            centroids.setZero();
            std::fill(counts.begin(), counts.end(), 0);
            for (int i = 0; i < n; ++i) {
                centroids.row(labels[i]) += z.row(i);
                ++counts[labels[i]];
            }
            for (int c = 0; c < k; ++c) {
                if (counts[c] > 0) centroids.row(c) /= counts[c];
            }
            for (int c = 0; c < k; ++c) {
                if (counts[c] > 0) continue;
                // Empty cluster: re-seed at the point farthest from the
                // centroid it is currently assigned to.
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double cur = (z.row(i) - centroids.row(labels[i])).squaredNorm();
                    if (cur > far_d) {
                        far_d = cur;
                        far = i;
                    }
                }
                centroids.row(c) = z.row(far);
            }
        }
        if (sse < best_sse) {
            best_sse = sse;
            best_labels = labels;
        }
    }

    // Compact ids in first-appearance order so output is deterministic.
    SyncPartition part;
    part.labels.assign(n, SyncPartition::kBackground);
    std::vector<int> remap(k, -1);
    for (int i = 0; i < n; ++i) {
        int& m = remap[best_labels[i]];
        if (m < 0) m = part.group_count++;
        part.labels[i] = m;
    }
    return part;
}

SpikeRaster spike_raster(const TraceBuffer& traces, double spike_threshold) {
    SpikeRaster raster;
    raster.duration = traces.duration();
    raster.times.resize(traces.n());
    for (int i = 0; i < traces.n(); ++i) {
        auto& t = raster.times[i];
        for (int s = 1; s < traces.sample_count(); ++s) {
            const double prev = traces.v(s - 1, i);
            const double cur = traces.v(s, i);
            if (prev < spike_threshold && cur >= spike_threshold) {
                const double frac = (spike_threshold - prev) / (cur - prev);
                t.push_back(traces.time(s - 1) + frac * traces.dt());
            }
        }
    }
    return raster;
}

int CoincidenceSeries::peak() const {
    int best = 0;
    for (int c : counts) best = std::max(best, c);
    return best;
}

CoincidenceSeries coincidence_series(const SpikeRaster& raster, double bin_width) {
    if (!(bin_width > 0.0)) throw DegenerateInputError("coincidence_series: bin width > 0");
    CoincidenceSeries series;
    series.bin_width = bin_width;
    const int bins = static_cast<int>(std::ceil(raster.duration / bin_width)) + 1;
    series.counts.assign(bins, 0);
    std::vector<std::uint8_t> hit(bins);
    for (const auto& times : raster.times) {
        std::fill(hit.begin(), hit.end(), 0);
        for (double t : times) {
            const int b = std::min(bins - 1, static_cast<int>(t / bin_width));
            hit[b] = 1;
        }
        for (int b = 0; b < bins; ++b) series.counts[b] += hit[b];
    }
    return series;
}

}  // namespace oscgroup
