// Command-line front end: visual grouping by networks of coupled neural
// oscillators. Subcommands build the task coupling graph, integrate the
// network, identify synchronized groups and write the run artifacts.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oscgroup/fixtures.hpp"
#include "oscgroup/io.hpp"
#include "oscgroup/pipelines.hpp"
#include "oscgroup/stability.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace oscgroup;

namespace {

constexpr const char* kEngineVersion = "oscgroup 1.0";
constexpr double kDeg = std::numbers::pi / 180.0;

enum ExitCode {
    kOk = 0,
    kConfigError = 2,
    kDivergence = 3,
    kNonConvergence = 4,
};

struct RunConfig {
    std::string task;
    std::string input;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    double dt = 0.0;  // 0 = auto-stable
    double periods = 20.0;
    double beta_t = 10.0;
    int window = 5;
    int m_neighbors = 4;
    double delta_deg = 20.0;
    double gamma_deg = 10.0;
    double theta = 0.95;
    int k_classes = 0;  // 0 = emerge from the data
    int tiles_r = 1;
    int tiles_c = 1;
    bool feedback = false;
    double k1 = 4.0;
    double k2 = 1.0;
    int max_periods = 12;
    bool emit_traces = false;
    bool strict = false;
};

void to_json(json& j, const RunConfig& c) {
    j = json{{"format", "oscgroup-config"},
             {"version", 1},
             {"task", c.task},
             {"input", c.input},
             {"out_dir", c.out_dir},
             {"seed", c.seed},
             {"dt", c.dt},
             {"periods", c.periods},
             {"beta_t", c.beta_t},
             {"window", c.window},
             {"m_neighbors", c.m_neighbors},
             {"delta_deg", c.delta_deg},
             {"gamma_deg", c.gamma_deg},
             {"theta", c.theta},
             {"k_classes", c.k_classes},
             {"tiles_r", c.tiles_r},
             {"tiles_c", c.tiles_c},
             {"feedback", c.feedback},
             {"k1", c.k1},
             {"k2", c.k2},
             {"max_periods", c.max_periods},
             {"emit_traces", c.emit_traces},
             {"strict", c.strict}};
}

void from_json(const json& j, RunConfig& c) {
    if (j.value("format", "") != "oscgroup-config" || j.value("version", 0) != 1) {
        throw ParseError("config file: expected {\"format\":\"oscgroup-config\",\"version\":1}");
    }
    j.at("task").get_to(c.task);
    c.input = j.value("input", c.input);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.seed = j.value("seed", c.seed);
    c.dt = j.value("dt", c.dt);
    c.periods = j.value("periods", c.periods);
    c.beta_t = j.value("beta_t", c.beta_t);
    c.window = j.value("window", c.window);
    c.m_neighbors = j.value("m_neighbors", c.m_neighbors);
    c.delta_deg = j.value("delta_deg", c.delta_deg);
    c.gamma_deg = j.value("gamma_deg", c.gamma_deg);
    c.theta = j.value("theta", c.theta);
    c.k_classes = j.value("k_classes", c.k_classes);
    c.tiles_r = j.value("tiles_r", c.tiles_r);
    c.tiles_c = j.value("tiles_c", c.tiles_c);
    c.feedback = j.value("feedback", c.feedback);
    c.k1 = j.value("k1", c.k1);
    c.k2 = j.value("k2", c.k2);
    c.max_periods = j.value("max_periods", c.max_periods);
    c.emit_traces = j.value("emit_traces", c.emit_traces);
    c.strict = j.value("strict", c.strict);
}

PipelineConfig pipeline_config(const RunConfig& c) {
    PipelineConfig cfg;
    cfg.seed = c.seed;
    cfg.dt = c.dt;
    cfg.periods = c.periods;
    cfg.corr_threshold = c.theta;
    return cfg;
}

/// Collects output file names and wall-clock timings, then lands the run
/// manifest atomically at the end.
class ManifestWriter {
public:
    ManifestWriter(const RunConfig& config, const fs::path& out_dir)
        : config_(config), out_dir_(out_dir), start_(std::chrono::steady_clock::now()) {
        fs::create_directories(out_dir);
    }

    void add_input(const fs::path& path) {
        inputs_.push_back({{"path", path.string()}, {"fnv1a", io::file_digest(path)}});
    }

    fs::path out(const std::string& name) {
        outputs_.push_back(name);
        return out_dir_ / name;
    }

    void finish() {
        json manifest;
        manifest["format"] = "oscgroup-manifest";
        manifest["version"] = 1;
        manifest["engine"] = kEngineVersion;
        manifest["config"] = config_;
        manifest["inputs"] = inputs_;
        manifest["outputs"] = outputs_;
        manifest["wall_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        io::write_atomic(out_dir_ / "manifest.json", manifest.dump(2) + "\n");
    }

private:
    RunConfig config_;
    fs::path out_dir_;
    std::chrono::steady_clock::time_point start_;
    json inputs_ = json::array();
    std::vector<std::string> outputs_;
};

TraceBuffer run_network_for(const RunConfig& c, const CouplingGraph& graph) {
    const PipelineConfig cfg = pipeline_config(c);
    return run_network(make_network(graph, cfg), cfg);
}

int cmd_cluster(const RunConfig& c) {
    ManifestWriter manifest(c, c.out_dir);
    manifest.add_input(c.input);
    const PointSet pts = io::read_points_csv(c.input);

    PipelineConfig cfg = pipeline_config(c);
    const ClusterMode mode = c.k_classes > 0 ? ClusterMode::kFixedK : ClusterMode::kBackground;
    TraceBuffer traces;
    const ClusterResult res =
        run_point_clustering(pts, c.m_neighbors, c.beta_t, mode, cfg, c.k_classes, &traces);

    io::write_partition_csv(manifest.out("labels.csv"), res.partition.labels);
    const auto raster = spike_raster(traces, 1.0);
    const auto series = coincidence_series(raster, 0.01 * calibrate(cfg.params).period);
    io::write_coincidence_csv(manifest.out("coincidence.csv"), series);
    if (c.emit_traces) io::write_traces_csv(manifest.out("traces.csv"), traces);

    std::cout << "groups: " << res.partition.group_count
              << "  peak: " << res.coincidence_peak << "\n";
    manifest.finish();
    return kOk;
}

int cmd_contour(const RunConfig& c) {
    ManifestWriter manifest(c, c.out_dir);
    manifest.add_input(c.input);
    const OrientationGrid grid = io::read_grid(c.input);

    PipelineConfig cfg = pipeline_config(c);
    TraceBuffer traces;
    const ContourResult res = run_contour_integration(grid, c.delta_deg * kDeg,
                                                      c.gamma_deg * kDeg, c.window, cfg, 5,
                                                      c.emit_traces ? &traces : nullptr);

    io::write_partition_csv(manifest.out("labels.csv"), res.partition.labels);
    {
        std::ostringstream out;
        out << "# oscgroup contours v1\n";
        for (std::size_t i = 0; i < res.contours.size(); ++i) {
            out << "contour " << i << ':';
            for (int cell : res.contours[i]) {
                out << ' ' << cell / grid.cols << ',' << cell % grid.cols;
            }
            out << '\n';
        }
        io::write_atomic(manifest.out("contours.txt"), out.str());
    }
    io::write_pgm(manifest.out("overlay.pgm"), io::render_grid_overlay(grid, &res));
    if (c.emit_traces) io::write_traces_csv(manifest.out("traces.csv"), traces);

    std::cout << "contours: " << res.contours.size() << "\n";
    manifest.finish();
    return kOk;
}

int cmd_segment(const RunConfig& c) {
    ManifestWriter manifest(c, c.out_dir);
    manifest.add_input(c.input);
    const GrayImage img = io::read_pgm(c.input);

    PipelineConfig cfg = pipeline_config(c);
    const std::optional<int> k =
        c.k_classes > 0 ? std::optional<int>(c.k_classes) : std::nullopt;

    LabelMap labels;
    TraceBuffer traces;
    bool converged = true;
    if (c.feedback) {
        if (!k) throw DegenerateInputError("--feedback requires --classes");
        FeedbackConfig fb;
        fb.k1 = c.k1;
        fb.k2 = c.k2;
        fb.max_periods = c.max_periods;
        const FeedbackResult res = run_segmentation_feedback(img, c.beta_t, c.window, *k, fb, cfg);
        labels = res.final_labels;
        converged = res.converged;
        for (std::size_t p = 0; p < res.history.size(); ++p) {
            char name[48];
            std::snprintf(name, sizeof(name), "labels_period_%02zu.csv", p + 1);
            io::write_partition_csv(manifest.out(name), res.history[p].labels);
        }
        if (!converged) {
            std::cerr << "warning: label map still changing after " << res.periods_run
                      << " periods\n";
        }
    } else if (c.tiles_r != 1 || c.tiles_c != 1) {
        labels = run_segmentation_multilayer(img, c.tiles_r, c.tiles_c, c.beta_t, c.window, k,
                                             cfg);
    } else {
        labels = run_segmentation_basic(img, c.beta_t, c.window, k, cfg,
                                        c.emit_traces ? &traces : nullptr);
    }

    io::write_partition_csv(manifest.out("labels.csv"), labels.labels);
    io::write_pgm(manifest.out("labelmap.pgm"), io::render_label_map(labels, img));
    if (c.emit_traces && traces.n() > 0) {
        io::write_traces_csv(manifest.out("traces.csv"), traces);
    }

    std::cout << "classes: " << labels.group_count() << "\n";
    manifest.finish();
    return (!converged && c.strict) ? kNonConvergence : kOk;
}

int cmd_simulate(const RunConfig& c) {
    ManifestWriter manifest(c, c.out_dir);
    manifest.add_input(c.input);

    CouplingGraph graph;
    const std::string ext = fs::path(c.input).extension().string();
    if (ext == ".csv") {
        graph = build_cluster_coupling(io::read_points_csv(c.input), c.m_neighbors, c.beta_t);
    } else if (ext == ".txt") {
        graph = build_contour_coupling(io::read_grid(c.input), c.delta_deg * kDeg,
                                       c.gamma_deg * kDeg, c.window);
    } else if (ext == ".pgm") {
        graph = build_segmentation_coupling(io::read_pgm(c.input), c.beta_t, c.window);
    } else {
        throw ParseError("simulate: cannot infer input kind from extension '" + ext +
                         "' (expected .csv points, .txt grid or .pgm image)");
    }

    const TraceBuffer traces = run_network_for(c, graph);
    io::write_traces_csv(manifest.out("traces.csv"), traces);
    std::cout << "oscillators: " << graph.n() << "  samples: " << traces.sample_count() << "\n";
    manifest.finish();
    return kOk;
}

int cmd_check_stability(const RunConfig& c, bool validate) {
    ManifestWriter manifest(c, c.out_dir);
    manifest.add_input(c.input);

    CouplingGraph graph;
    const std::string ext = fs::path(c.input).extension().string();
    if (ext == ".graph") {
        graph = io::read_graph_csv(c.input);
    } else if (ext == ".csv") {
        graph = build_cluster_coupling(io::read_points_csv(c.input), c.m_neighbors, c.beta_t);
    } else if (ext == ".txt") {
        graph = build_contour_coupling(io::read_grid(c.input), c.delta_deg * kDeg,
                                       c.gamma_deg * kDeg, c.window);
    } else if (ext == ".pgm") {
        graph = build_segmentation_coupling(io::read_pgm(c.input), c.beta_t, c.window);
    } else {
        throw ParseError("check-stability: unknown input kind '" + ext + "'");
    }

    const OscParams params;
    const VRange range;
    StabilityReport report = check_sync_condition(graph, params, range);
    if (validate) {
        PipelineConfig cfg = pipeline_config(c);
        const TraceBuffer traces = run_network(make_network(graph, cfg), cfg);
        validate_v_range(traces, range);
    }

    io::write_report(manifest.out("stability.txt"), report);
    std::cout << "lhs=" << report.lhs << " rhs=" << report.rhs << " margin=" << report.margin
              << " satisfied=" << (report.satisfied ? "yes" : "no") << "\n"
              << "metric gain bound: " << metric_gain_bound(params) << "\n";
    manifest.finish();
    return kOk;
}

int cmd_fixtures(const std::string& name, std::uint64_t seed, const fs::path& out_dir,
                 double sigma, double jitter, int rows, int cols, int split, int bands) {
    fs::create_directories(out_dir);
    auto truth_csv = [&](const std::vector<int>& labels) {
        io::write_partition_csv(out_dir / "truth.csv", labels);
    };

    if (name == "two-blobs") {
        const auto fix = fixtures::two_blob_points(seed);
        io::write_points_csv(out_dir / "points.csv", fix.points);
        truth_csv(fix.truth);
    } else if (name == "uniform-plus-cluster") {
        const auto fix = fixtures::uniform_plus_cluster(seed);
        io::write_points_csv(out_dir / "points.csv", fix.points);
        truth_csv(fix.truth);
    } else if (name == "contour-vertical") {
        const auto fix = fixtures::contour_vertical(rows, cols, jitter, seed);
        io::write_grid(out_dir / "grid.txt", fix.grid);
        std::ostringstream out;
        out << "# oscgroup contours v1\ncontour 0:";
        for (int cell : fix.contour_cells) out << ' ' << cell / cols << ',' << cell % cols;
        out << '\n';
        io::write_atomic(out_dir / "truth.txt", out.str());
    } else if (name == "contour-two-lines") {
        const auto fix = fixtures::contour_two_lines(rows, cols, jitter, seed);
        io::write_grid(out_dir / "grid.txt", fix.grid);
        std::ostringstream out;
        out << "# oscgroup contours v1\ncontour 0:";
        for (int cell : fix.contour_a) out << ' ' << cell / cols << ',' << cell % cols;
        out << "\ncontour 1:";
        for (int cell : fix.contour_b) out << ' ' << cell / cols << ',' << cell % cols;
        out << '\n';
        io::write_atomic(out_dir / "truth.txt", out.str());
    } else if (name == "contour-random") {
        io::write_grid(out_dir / "grid.txt", fixtures::contour_random(rows, cols, seed));
    } else if (name == "three-level") {
        const auto fix = fixtures::three_level_image(rows, cols, sigma, seed);
        io::write_pgm(out_dir / "image.pgm", fix.image);
        truth_csv(fix.truth.labels);
    } else if (name == "two-level") {
        const auto fix = fixtures::two_level_image(rows, cols, split);
        io::write_pgm(out_dir / "image.pgm", fix.image);
        truth_csv(fix.truth.labels);
    } else if (name == "six-band") {
        const auto fix = fixtures::banded_image(rows, cols, bands, sigma, seed);
        io::write_pgm(out_dir / "image.pgm", fix.image);
        truth_csv(fix.truth.labels);
    } else {
        throw ParseError("unknown fixture '" + name + "'");
    }
    std::cout << "fixture " << name << " written to " << out_dir.string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Visual grouping by networks of diffusively coupled neural oscillators"};
    app.require_subcommand(1);

    RunConfig c;
    std::string config_file;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", c.seed, "random seed for inputs/initial states");
        sub->add_option("--dt", c.dt, "integration step (0 = largest stable step)");
        sub->add_option("--periods", c.periods, "run length in oscillation periods");
        sub->add_option("--out", c.out_dir, "output directory");
        sub->add_option("--config", config_file, "JSON config file (flags override it)");
        sub->add_option("--theta", c.theta, "correlation threshold for group detection");
        sub->add_flag("--emit-traces", c.emit_traces, "also write the trace CSV");
        sub->add_flag("--strict", c.strict, "non-convergence warnings become exit code 4");
    };

    auto* cluster = app.add_subcommand("cluster", "group 2D points by proximity");
    cluster->add_option("points", c.input, "points CSV")->required();
    cluster->add_option("--neighbors", c.m_neighbors, "nearest neighbors per point");
    cluster->add_option("--beta", c.beta_t, "Gaussian tuning width (position units)");
    cluster->add_option("--classes", c.k_classes, "known cluster count (k-means mode)");
    add_common(cluster);

    auto* contour = app.add_subcommand("contour", "integrate smooth contours in a grid");
    contour->add_option("grid", c.input, "orientation grid (degrees)")->required();
    contour->add_option("--delta", c.delta_deg, "element-to-element tuning (degrees)");
    contour->add_option("--gamma", c.gamma_deg, "element-to-path tuning (degrees)");
    contour->add_option("-w,--window", c.window, "coupling window radius");
    add_common(contour);

    auto* segment = app.add_subcommand("segment", "segment an 8-bit graymap");
    segment->add_option("image", c.input, "PGM image")->required();
    segment->add_option("--beta", c.beta_t, "Gaussian tuning width (gray levels)");
    segment->add_option("-w,--window", c.window, "coupling window (Chebyshev < w)");
    segment->add_option("--classes", c.k_classes, "class count (k-means mode)");
    segment->add_flag("--feedback", c.feedback, "error-correcting feedback layer");
    segment->add_option("--k1", c.k1, "feedback gain onto pixels");
    segment->add_option("--k2", c.k2, "feedback gain onto class oscillators");
    segment->add_option("--max-periods", c.max_periods, "feedback period budget");
    std::string tiles;
    segment->add_option("--tiles", tiles, "RxC tiling for the two-layer pipeline");
    add_common(segment);

    auto* simulate = app.add_subcommand("simulate", "integrate a task network, dump traces");
    simulate->add_option("input", c.input, "points .csv / grid .txt / image .pgm")->required();
    simulate->add_option("--neighbors", c.m_neighbors, "nearest neighbors (points input)");
    simulate->add_option("--beta", c.beta_t, "Gaussian tuning width");
    simulate->add_option("--delta", c.delta_deg, "element tuning (grid input, degrees)");
    simulate->add_option("--gamma", c.gamma_deg, "path tuning (grid input, degrees)");
    simulate->add_option("-w,--window", c.window, "coupling window");
    add_common(simulate);

    auto* check = app.add_subcommand("check-stability", "sufficient sync condition report");
    check->add_option("input", c.input, "graph .graph / points .csv / grid .txt / image .pgm")
        ->required();
    bool validate = false;
    check->add_flag("--validate", validate, "simulate and verify the v range covers traces");
    check->add_option("--neighbors", c.m_neighbors, "nearest neighbors (points input)");
    check->add_option("--beta", c.beta_t, "Gaussian tuning width");
    check->add_option("-w,--window", c.window, "coupling window");
    add_common(check);

    auto* fixtures_cmd = app.add_subcommand("fixtures", "generate reference inputs");
    std::string fixture_name;
    double sigma = 10.0, jitter = 10.0;
    int rows = 16, cols = 16, split = 0, bands = 6;
    fixtures_cmd->add_option("name", fixture_name,
                             "two-blobs | uniform-plus-cluster | contour-vertical | "
                             "contour-two-lines | contour-random | three-level | two-level | "
                             "six-band")
        ->required();
    fixtures_cmd->add_option("--seed", c.seed, "generator seed");
    fixtures_cmd->add_option("--out", c.out_dir, "output directory");
    fixtures_cmd->add_option("--sigma", sigma, "noise sigma (images)");
    fixtures_cmd->add_option("--jitter", jitter, "orientation jitter in degrees (grids)");
    fixtures_cmd->add_option("--rows", rows, "rows");
    fixtures_cmd->add_option("--cols", cols, "columns");
    fixtures_cmd->add_option("--split", split, "two-level boundary column (0 = 5/8 width)");
    fixtures_cmd->add_option("--bands", bands, "band count (six-band)");

    try {
        // --config seeds the defaults; explicit flags then override on the
        // second parse.
        app.allow_extras();
        app.parse(argc, argv);
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw ParseError("cannot open config file " + config_file);
            json j;
            in >> j;
            const std::string task_backup = c.task;
            from_json(j, c);
            c.task = task_backup;
            CLI::App reparse;
            (void)reparse;
            app.clear();
            app.parse(argc, argv);
        }

        if (cluster->parsed()) { c.task = "cluster"; return cmd_cluster(c); }
        if (contour->parsed()) { c.task = "contour"; return cmd_contour(c); }
        if (segment->parsed()) {
            c.task = "segment";
            if (!tiles.empty()) {
                const auto x = tiles.find('x');
                if (x == std::string::npos) throw ParseError("--tiles expects RxC, e.g. 2x2");
                c.tiles_r = std::stoi(tiles.substr(0, x));
                c.tiles_c = std::stoi(tiles.substr(x + 1));
            }
            return cmd_segment(c);
        }
        if (simulate->parsed()) { c.task = "simulate"; return cmd_simulate(c); }
        if (check->parsed()) { c.task = "check-stability"; return cmd_check_stability(c, validate); }
        if (fixtures_cmd->parsed()) {
            c.task = "fixtures";
            if (split == 0) split = cols * 5 / 8;
            return cmd_fixtures(fixture_name, c.seed, c.out_dir, sigma, jitter, rows, cols,
                                split, bands);
        }
        return kConfigError;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDivergence;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}
