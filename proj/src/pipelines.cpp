#include "oscgroup/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

#include "oscgroup/rng.hpp"

namespace oscgroup {

namespace {

/// On-cycle extent of |J11|; the limit cycle stays inside |v| <= ~1.4 where
/// 3 - 3v^2 - 7v^6 is about -55, padded for transients.
constexpr double kJacobianRateBound = 60.0;
constexpr double kStabilitySafety = 2.0;
constexpr double kBaseDt = 0.05;

}  // namespace

const Calibration& calibrate(const OscParams& params) {
    static std::mutex mutex;
    static std::map<std::tuple<double, double, double>, Calibration> cache;
    std::lock_guard<std::mutex> lock(mutex);
    const auto key = std::make_tuple(params.alpha, params.c, params.beta_s);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    Calibration cal;
    cal.threshold = oscillation_threshold(params);
    cal.input_lo = cal.threshold + 0.2;
    cal.input_hi = cal.threshold + 0.7;
    cal.period = oscillation_period(params, 0.5 * (cal.input_lo + cal.input_hi));
    return cache.emplace(key, cal).first->second;
}

double stable_dt(const CouplingGraph& g, const PipelineConfig& cfg) {
    if (cfg.dt > 0.0) return cfg.dt;
    double max_degree = 0.0;
    for (int i = 0; i < g.n(); ++i) max_degree = std::max(max_degree, g.weighted_degree(i));
    const double rate = kJacobianRateBound + 2.0 * max_degree;
    return std::min(kBaseDt, kStabilitySafety / rate);
}

NetworkSpec make_network(const CouplingGraph& graph, const PipelineConfig& cfg) {
    const Calibration& cal = calibrate(cfg.params);
    const double mid = 0.5 * (cal.input_lo + cal.input_hi);
    const double half = 0.5 * (cal.input_hi - cal.input_lo) * cfg.input_band_fraction;
    NetworkSpec spec;
    spec.params = cfg.params;
    spec.seed = cfg.seed;
    spec.graph = graph;
    spec.inputs = make_random_inputs(graph.n(), mid - half, mid + half,
                                     mix_seed(cfg.seed, 0x1e9d));
    spec.initial = make_random_initial_states(graph.n(), mix_seed(cfg.seed, 0x57a7e));
    return spec;
}

namespace {

/// Run for the configured number of periods, recording about
/// samples_per_period samples per period regardless of integration step.
TraceBuffer run_thinned(const NetworkSpec& spec, const PipelineConfig& cfg, double dt,
                        double duration, std::vector<OscState>* final_states = nullptr) {
    const Calibration& cal = calibrate(cfg.params);
    const int stride =
        std::max(1, static_cast<int>(std::floor(cal.period / (cfg.samples_per_period * dt))));
    const int steps = static_cast<int>(std::floor(duration / dt + 1e-9));
    const int samples = steps / stride + 1;

    TraceBuffer out(spec.n(), dt * stride, samples, false);
    std::vector<OscState> state = spec.initial;
    NetworkSpec chunk = spec;
    for (int i = 0; i < spec.n(); ++i) out.set(0, i, state[i].v);
    int written = 1;
    int done = 0;
    while (done < steps) {
        const int todo = std::min(stride, steps - done);
        chunk.initial = state;
        simulate_with_final(chunk, todo * dt, dt, state);
        done += todo;
        if (done % stride == 0 && written < samples) {
            for (int i = 0; i < spec.n(); ++i) out.set(written, i, state[i].v);
            ++written;
        }
    }
    if (final_states) *final_states = state;
    return out;
}

}  // namespace

TraceBuffer run_network(const NetworkSpec& spec, const PipelineConfig& cfg) {
    const Calibration& cal = calibrate(cfg.params);
    const double dt = stable_dt(spec.graph, cfg);
    return run_thinned(spec, cfg, dt, cfg.periods * cal.period);
}

ClusterResult run_point_clustering(const PointSet& pts, int m_neighbors, double beta_t,
                                   ClusterMode mode, const PipelineConfig& cfg, int fixed_k,
                                   TraceBuffer* traces_out) {
    const CouplingGraph graph = build_cluster_coupling(pts, m_neighbors, beta_t);
    const NetworkSpec spec = make_network(graph, cfg);
    const TraceBuffer traces = run_network(spec, cfg);
    const TimeWindow window = TimeWindow::post_transient(traces, cfg.transient_fraction);

    ClusterResult result;
    if (mode == ClusterMode::kFixedK) {
        if (fixed_k < 1) throw DegenerateInputError("run_point_clustering: fixed_k required");
        KMeansOptions km;
        km.seed = mix_seed(cfg.seed, 0x6b);
        result.partition = kmeans_partition(traces, fixed_k, window, km);
    } else {
        const auto corr = trace_correlation(traces, window);
        result.partition = partition_by_threshold(corr, cfg.corr_threshold,
                                                  PartitionMode::kBackground);
    }

    const Calibration& cal = calibrate(cfg.params);
    const auto raster = spike_raster(traces, cfg.spike_level);
    const auto series = coincidence_series(raster, 0.01 * cal.period);
    result.coincidence_peak = series.peak();
    if (traces_out) *traces_out = traces;
    return result;
}

namespace {

/// Split a synchronized group into its connected components under the
/// coupling window (Chebyshev distance <= w). A contour is a connected set
/// by definition; cells that merely happened to phase-lock from afar are
/// clutter, not contour.
std::vector<std::vector<int>> window_components(const std::vector<int>& cells, int rows,
                                                int cols, int w) {
    std::vector<int> comp(cells.size(), -1);
    std::vector<std::size_t> stack;
    std::vector<std::vector<int>> out;
    for (std::size_t start = 0; start < cells.size(); ++start) {
        if (comp[start] >= 0) continue;
        const int id = static_cast<int>(out.size());
        out.emplace_back();
        comp[start] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            out[id].push_back(cells[cur]);
            const int r = cells[cur] / cols;
            const int c = cells[cur] % cols;
            for (std::size_t other = 0; other < cells.size(); ++other) {
                if (comp[other] >= 0) continue;
                const int ro = cells[other] / cols;
                const int co = cells[other] % cols;
                if (std::max(std::abs(r - ro), std::abs(c - co)) <= w) {
                    comp[other] = id;
                    stack.push_back(other);
                }
            }
        }
        std::sort(out[id].begin(), out[id].end());
    }
    (void)rows;
    return out;
}

}  // namespace

ContourResult run_contour_integration(const OrientationGrid& grid, double delta, double gamma,
                                      int w, const PipelineConfig& cfg, int min_cells,
                                      TraceBuffer* traces_out) {
    const CouplingGraph graph = build_contour_coupling(grid, delta, gamma, w);
    const NetworkSpec spec = make_network(graph, cfg);
    const TraceBuffer traces = run_network(spec, cfg);
    if (traces_out) *traces_out = traces;
    const TimeWindow window = TimeWindow::post_transient(traces, cfg.transient_fraction);
    const auto corr = trace_correlation(traces, window);
    const SyncPartition raw =
        partition_by_threshold(corr, cfg.corr_threshold, PartitionMode::kBackground);

    ContourResult result;
    result.rows = grid.rows;
    result.cols = grid.cols;
    result.partition.labels.assign(raw.labels.size(), SyncPartition::kBackground);
    for (int g = 0; g < raw.group_count; ++g) {
        std::vector<int> cells;
        for (std::size_t i = 0; i < raw.labels.size(); ++i) {
            if (raw.labels[i] == g) cells.push_back(static_cast<int>(i));
        }
        for (auto& piece : window_components(cells, grid.rows, grid.cols, w)) {
            if (static_cast<int>(piece.size()) < min_cells) continue;
            const int id = static_cast<int>(result.contours.size());
            for (int cell : piece) result.partition.labels[cell] = id;
            result.contours.push_back(std::move(piece));
        }
    }
    result.partition.group_count = static_cast<int>(result.contours.size());
    return result;
}

int LabelMap::group_count() const {
    int hi = -1;
    for (int l : labels) hi = std::max(hi, l);
    return hi + 1;
}

namespace {

LabelMap to_label_map(const SyncPartition& part, int rows, int cols) {
    LabelMap map;
    map.rows = rows;
    map.cols = cols;
    map.labels = part.labels;
    return map;
}

/// Dense first-appearance relabeling (row-major scan) so label maps from
/// different detector runs compare equal when the grouping is the same.
LabelMap canonical(const LabelMap& map) {
    LabelMap out = map;
    std::map<int, int> remap;
    int next = 0;
    for (auto& l : out.labels) {
        if (l < 0) continue;
        auto [it, inserted] = remap.emplace(l, next);
        if (inserted) ++next;
        l = it->second;
    }
    return out;
}

SyncPartition detect_segmentation(const TraceBuffer& traces, std::optional<int> k_classes,
                                  const PipelineConfig& cfg) {
    const TimeWindow window = TimeWindow::post_transient(traces, cfg.transient_fraction);
    if (k_classes) {
        KMeansOptions km;
        km.seed = mix_seed(cfg.seed, 0x6b5e9);
        return kmeans_partition(traces, *k_classes, window, km);
    }
    const auto corr = trace_correlation(traces, window);
    return partition_by_threshold(corr, cfg.corr_threshold, PartitionMode::kTotal);
}

}  // namespace

LabelMap run_segmentation_basic(const GrayImage& img, double beta_t, int w,
                                std::optional<int> k_classes, const PipelineConfig& cfg,
                                TraceBuffer* traces_out) {
    if (img.rows < 1 || img.cols < 1) throw DegenerateInputError("segmentation: empty image");
    const CouplingGraph graph = build_segmentation_coupling(img, beta_t, w);
    const NetworkSpec spec = make_network(graph, cfg);
    const TraceBuffer traces = run_network(spec, cfg);
    if (traces_out) *traces_out = traces;
    return canonical(to_label_map(detect_segmentation(traces, k_classes, cfg), img.rows,
                                  img.cols));
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_feedback_matrices(const LabelMap& labels,
                                                                    const FeedbackConfig& cfg) {
    const int m = labels.group_count();
    if (m < 1) throw DegenerateInputError("build_feedback_matrices: no labels");
    bool has_center = false;
    for (auto [dr, dc] : cfg.neighborhood) has_center |= (dr == 0 && dc == 0);
    if (!has_center) {
        throw DegenerateInputError("build_feedback_matrices: neighborhood must contain center");
    }

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, labels.size());
    for (int r = 0; r < labels.rows; ++r) {
        for (int c = 0; c < labels.cols; ++c) {
            const int p = r * labels.cols + c;
            int in_image = 0;
            for (auto [dr, dc] : cfg.neighborhood) {
                const int rr = r + dr;
                const int cc = c + dc;
                if (rr < 0 || rr >= labels.rows || cc < 0 || cc >= labels.cols) continue;
                ++in_image;
                a(labels.at(rr, cc), p) += 1.0;
            }
            a.col(p) /= static_cast<double>(in_image);
        }
    }
    return {std::move(a), Eigen::MatrixXd::Identity(m, m)};
}

namespace {

/// The published pixel-to-class weights make A x1 a per-class *sum*, which a
/// class oscillator cannot track (the v^7 confinement blows up at region
/// scale). Rescaling by D^{-1/2} on A and D^{1/2} on B, D = diag(A row
/// sums), keeps the pixel-side gains untouched (A^T B is unchanged) while
/// the class side relaxes to the weighted region mean.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> rescale_hierarchy(const Eigen::MatrixXd& a,
                                                              const Eigen::MatrixXd& b) {
    Eigen::VectorXd row_sums = a.rowwise().sum().cwiseMax(1e-12);
    Eigen::VectorXd inv_sqrt = row_sums.cwiseSqrt().cwiseInverse();
    return {inv_sqrt.asDiagonal() * a, row_sums.cwiseSqrt().asDiagonal() * b};
}

std::vector<double> region_mean_gray(const GrayImage& img, const LabelMap& labels, int m) {
    std::vector<double> sum(m, 0.0);
    std::vector<int> count(m, 0);
    for (int p = 0; p < labels.size(); ++p) {
        const int l = labels.labels[p];
        if (l < 0) continue;
        sum[l] += img.u[p];
        ++count[l];
    }
    for (int g = 0; g < m; ++g) sum[g] = count[g] > 0 ? sum[g] / count[g] : 0.0;
    return sum;
}

}  // namespace

double input_from_gray(double gray, const OscParams& params) {
    const Calibration& cal = calibrate(params);
    return cal.input_lo + (cal.input_hi - cal.input_lo) * std::clamp(gray, 0.0, 255.0) / 255.0;
}

FeedbackResult run_segmentation_feedback(const GrayImage& img, double beta_t, int w,
                                         int k_classes, const FeedbackConfig& fb,
                                         const PipelineConfig& cfg) {
    if (k_classes < 1) throw DegenerateInputError("feedback segmentation: k_classes >= 1");
    if (fb.max_periods < 1) throw DegenerateInputError("feedback segmentation: max_periods");
    const Calibration& cal = calibrate(cfg.params);
    const CouplingGraph graph = build_segmentation_coupling(img, beta_t, w);
    const double dt = stable_dt(graph, cfg);

    // Period one: plain first layer.
    NetworkSpec layer1 = make_network(graph, cfg);
    std::vector<OscState> state1;
    PipelineConfig per_period = cfg;
    TraceBuffer traces = run_thinned(layer1, per_period, dt, cal.period, &state1);
    LabelMap labels =
        canonical(to_label_map(detect_segmentation(traces, k_classes, cfg), img.rows, img.cols));

    FeedbackResult result;
    result.history.push_back(labels);
    result.periods_run = 1;

    std::vector<OscState> state2;
    for (int period = 2; period <= fb.max_periods; ++period) {
        const int m = labels.group_count();
        auto [a_raw, b_raw] = build_feedback_matrices(labels, fb);
        auto [a, b] = rescale_hierarchy(a_raw, b_raw);

        HierarchySpec h;
        h.layer1 = layer1;
        h.layer1.initial = state1;
        h.a = std::move(a);
        h.b = std::move(b);
        h.k1 = fb.k1;
        h.k2 = fb.k2;

        h.layer2.params = cfg.params;
        h.layer2.graph = CouplingGraph(m, {});
        h.layer2.seed = cfg.seed;
        const auto means = region_mean_gray(img, labels, m);
        h.layer2.inputs.resize(m);
        for (int g = 0; g < m; ++g) h.layer2.inputs[g] = input_from_gray(means[g], cfg.params);
        // Class oscillators start at the mean state of their pixels so the
        // inter-layer residual starts small.
        h.layer2.initial.assign(m, OscState{});
        std::vector<int> counts(m, 0);
        for (int p = 0; p < labels.size(); ++p) {
            const int l = labels.labels[p];
            h.layer2.initial[l].v += state1[p].v;
            h.layer2.initial[l].w += state1[p].w;
            ++counts[l];
        }
        for (int g = 0; g < m; ++g) {
            if (counts[g] > 0) {
                h.layer2.initial[g].v /= counts[g];
                h.layer2.initial[g].w /= counts[g];
            }
        }

        // Inter-layer terms add rate ~k1 on pixels and ~k2*C_m on classes.
        double max_region = 0.0;
        for (int g = 0; g < m; ++g) {
            max_region = std::max(max_region, a_raw.row(g).sum());
        }
        const double h_rate = fb.k1 + fb.k2 * max_region;
        const double dt_h = std::min(dt, kStabilitySafety / (kJacobianRateBound + h_rate));

        const int stride = std::max(
            1, static_cast<int>(std::floor(cal.period / (cfg.samples_per_period * dt_h))));
        const int steps = static_cast<int>(std::floor(cal.period / dt_h + 1e-9));
        const int samples = steps / stride + 1;
        TraceBuffer period_traces(layer1.n(), dt_h * stride, samples, false);
        for (int i = 0; i < layer1.n(); ++i) period_traces.set(0, i, state1[i].v);
        int written = 1;
        int done = 0;
        std::vector<OscState> s1 = state1;
        std::vector<OscState> s2 = h.layer2.initial;
        while (done < steps) {
            const int todo = std::min(stride, steps - done);
            h.layer1.initial = s1;
            h.layer2.initial = s2;
            simulate_hierarchy(h, todo * dt_h, dt_h, {}, &s1, &s2);
            done += todo;
            if (done % stride == 0 && written < samples) {
                for (int i = 0; i < layer1.n(); ++i) period_traces.set(written, i, s1[i].v);
                ++written;
            }
        }
        state1 = s1;
        state2 = s2;

        LabelMap next = canonical(to_label_map(
            detect_segmentation(period_traces, k_classes, cfg), img.rows, img.cols));
        result.history.push_back(next);
        result.periods_run = period;
        if (next == labels) {
            result.converged = true;
            labels = std::move(next);
            break;
        }
        labels = std::move(next);
    }

    result.final_labels = labels;
    return result;
}

std::vector<std::pair<int, int>> region_adjacency(const LabelMap& regions) {
    std::vector<std::pair<int, int>> pairs;
    auto visit = [&](int a, int b) {
        if (a == b || a < 0 || b < 0) return;
        pairs.emplace_back(std::min(a, b), std::max(a, b));
    };
    for (int r = 0; r < regions.rows; ++r) {
        for (int c = 0; c < regions.cols; ++c) {
            if (c + 1 < regions.cols) visit(regions.at(r, c), regions.at(r, c + 1));
            if (r + 1 < regions.rows) visit(regions.at(r, c), regions.at(r + 1, c));
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

std::pair<LabelMap, int> connected_regions(const LabelMap& labels) {
    LabelMap out;
    out.rows = labels.rows;
    out.cols = labels.cols;
    out.labels.assign(labels.labels.size(), -1);
    int next = 0;
    std::vector<int> stack;
    for (int start = 0; start < labels.size(); ++start) {
        if (out.labels[start] >= 0) continue;
        const int id = next++;
        stack.push_back(start);
        out.labels[start] = id;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int r = p / labels.cols;
            const int c = p % labels.cols;
            const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
            for (auto [rr, cc] : nbr) {
                if (rr < 0 || rr >= labels.rows || cc < 0 || cc >= labels.cols) continue;
                const int q = rr * labels.cols + cc;
                if (out.labels[q] >= 0 || labels.labels[q] != labels.labels[p]) continue;
                out.labels[q] = id;
                stack.push_back(q);
            }
        }
    }
    return {out, next};
}

LabelMap run_segmentation_multilayer(const GrayImage& img, int tile_rows, int tile_cols,
                                     double beta_t, int w, std::optional<int> k_classes,
                                     const PipelineConfig& cfg) {
    if (tile_rows < 1 || tile_cols < 1) throw TileError("multilayer: tile counts must be >= 1");
    if (img.rows % tile_rows != 0 || img.cols % tile_cols != 0) {
        throw TileError("multilayer: image " + std::to_string(img.rows) + "x" +
                        std::to_string(img.cols) + " not divisible into " +
                        std::to_string(tile_rows) + "x" + std::to_string(tile_cols) + " tiles");
    }
    if (tile_rows == 1 && tile_cols == 1) {
        // Degenerate tiling is exactly the basic pipeline.
        return run_segmentation_basic(img, beta_t, w, k_classes, cfg);
    }

    const int th = img.rows / tile_rows;
    const int tw = img.cols / tile_cols;

    // First layer: independent tile segmentations (threshold mode, so the
    // per-tile region count emerges from the data).
    std::vector<std::future<LabelMap>> jobs;
    for (int tr = 0; tr < tile_rows; ++tr) {
        for (int tc = 0; tc < tile_cols; ++tc) {
            jobs.push_back(std::async(std::launch::async, [&, tr, tc] {
                GrayImage tile;
                tile.rows = th;
                tile.cols = tw;
                tile.u.resize(static_cast<std::size_t>(th) * tw);
                for (int r = 0; r < th; ++r) {
                    for (int c = 0; c < tw; ++c) {
                        tile.at(r, c) = img.at(tr * th + r, tc * tw + c);
                    }
                }
                PipelineConfig tile_cfg = cfg;
                tile_cfg.seed = mix_seed(cfg.seed, 0x711e0000u + tr * 1024u + tc);
                return run_segmentation_basic(tile, beta_t, w, std::nullopt, tile_cfg);
            }));
        }
    }

    // Stitch tile labels into globally unique region ids.
    LabelMap regions;
    regions.rows = img.rows;
    regions.cols = img.cols;
    regions.labels.assign(static_cast<std::size_t>(img.rows) * img.cols, -1);
    int next_region = 0;
    int job = 0;
    for (int tr = 0; tr < tile_rows; ++tr) {
        for (int tc = 0; tc < tile_cols; ++tc) {
            const LabelMap tile = jobs[job++].get();
            for (int r = 0; r < th; ++r) {
                for (int c = 0; c < tw; ++c) {
                    const int l = tile.at(r, c);
                    regions.at(tr * th + r, tc * tw + c) =
                        l < 0 ? -1 : next_region + l;
                }
            }
            next_region += tile.group_count();
        }
    }

    // Second layer: one oscillator per region, coupled along region
    // adjacency with Gaussian tuning on mean gray.
    const auto means = region_mean_gray(img, regions, next_region);
    std::vector<Edge> edges;
    for (auto [a, b] : region_adjacency(regions)) {
        const double s_a[1] = {means[a]};
        const double s_b[1] = {means[b]};
        const double k = gaussian_gain(s_a, s_b, beta_t);
        if (k >= kMinGain) edges.push_back(Edge{a, b, k});
    }
    CouplingGraph layer2_graph(next_region, std::move(edges));

    PipelineConfig l2_cfg = cfg;
    l2_cfg.seed = mix_seed(cfg.seed, 0x1a2);
    NetworkSpec layer2 = make_network(layer2_graph, l2_cfg);
    for (int g = 0; g < next_region; ++g) {
        layer2.inputs[g] = input_from_gray(means[g], cfg.params);
    }
    const TraceBuffer traces = run_network(layer2, l2_cfg);
    const SyncPartition merged = detect_segmentation(traces, k_classes, l2_cfg);

    LabelMap out;
    out.rows = img.rows;
    out.cols = img.cols;
    out.labels.resize(regions.labels.size());
    for (std::size_t p = 0; p < regions.labels.size(); ++p) {
        const int region = regions.labels[p];
        out.labels[p] = region < 0 ? -1 : merged.labels[region];
    }
    return canonical(out);
}

}  // namespace oscgroup
