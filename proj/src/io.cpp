#include "oscgroup/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace oscgroup {
namespace io {

namespace {

constexpr double kPi = std::numbers::pi;

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::ifstream open_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return in;
}

/// Reads the `# oscgroup <kind> v1` magic line and validates the kind.
void expect_magic(std::istream& in, const std::string& kind, const std::string& file) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(file + ": empty file");
    std::istringstream ss(line);
    std::string hash, name, got_kind, version;
    ss >> hash >> name >> got_kind >> version;
    if (hash != "#" || name != "oscgroup" || got_kind != kind) {
        throw ParseError(file + ": expected '# oscgroup " + kind + " v1' header");
    }
    if (version != "v1") {
        throw ParseError(file + ": unsupported " + kind + " format version '" + version + "'");
    }
}

bool is_blank_or_comment(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

double parse_double(const std::string& text, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double value = std::stod(text, &pos);
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return value;
    } catch (const std::exception&) {
        throw ParseError(context + ": cannot parse number '" + text + "'");
    }
}

}  // namespace

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

void write_points_csv(const std::filesystem::path& path, const PointSet& pts) {
    std::ostringstream out;
    out << "# oscgroup points v1\n";
    out << "x,y\n";
    for (int i = 0; i < pts.size(); ++i) {
        out << format_double(pts.x[i]) << ',' << format_double(pts.y[i]) << '\n';
    }
    write_atomic(path, out.str());
}

PointSet read_points_csv(const std::filesystem::path& path) {
    auto in = open_text(path);
    expect_magic(in, "points", path.string());
    std::string line;
    int line_no = 1;
    bool header_seen = false;
    PointSet pts;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line)) continue;
        if (!header_seen) {
            if (line != "x,y") {
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": expected header 'x,y'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 2) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected two fields");
        }
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        pts.x.push_back(parse_double(fields[0], ctx));
        pts.y.push_back(parse_double(fields[1], ctx));
    }
    if (pts.size() == 0) throw ParseError(path.string() + ": no points");
    return pts;
}

void write_grid(const std::filesystem::path& path, const OrientationGrid& grid) {
    std::ostringstream out;
    out << "# oscgroup grid v1\n";
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            if (c) out << ' ';
            out << format_double(grid.at(r, c) * 180.0 / kPi);
        }
        out << '\n';
    }
    write_atomic(path, out.str());
}

OrientationGrid read_grid(const std::filesystem::path& path) {
    auto in = open_text(path);
    expect_magic(in, "grid", path.string());
    OrientationGrid grid;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line)) continue;
        std::istringstream ss(line);
        std::vector<double> row;
        std::string token;
        while (ss >> token) {
            double deg = parse_double(token, path.string() + ":" + std::to_string(line_no));
            double rad = std::fmod(deg * kPi / 180.0, kPi);
            if (rad < 0.0) rad += kPi;
            row.push_back(rad);
        }
        if (grid.cols == 0) {
            grid.cols = static_cast<int>(row.size());
        } else if (static_cast<int>(row.size()) != grid.cols) {
            throw ParseError(path.string() + ": row " + std::to_string(grid.rows + 1) + " has " +
                             std::to_string(row.size()) + " entries, expected " +
                             std::to_string(grid.cols));
        }
        grid.theta.insert(grid.theta.end(), row.begin(), row.end());
        ++grid.rows;
    }
    if (grid.rows == 0) throw ParseError(path.string() + ": empty grid");
    return grid;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ostringstream out;
    out << "P5\n# oscgroup\n" << img.cols << ' ' << img.rows << "\n255\n";
    for (double u : img.u) {
        const int g = std::clamp(static_cast<int>(std::lround(u)), 0, 255);
        out.put(static_cast<char>(g));
    }
    write_atomic(path, out.str());
}

namespace {

int next_pnm_token(std::istream& in, const std::string& file) {
    // skip whitespace and '#' comments
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF) throw ParseError(file + ": truncated graymap header");
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) throw ParseError(file + ": malformed graymap header");
    return value;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '2' && m1 != '5')) {
        throw ParseError(path.string() + ": not a portable graymap (expected P2 or P5)");
    }
    const bool binary = m1 == '5';
    const int cols = next_pnm_token(in, path.string());
    const int rows = next_pnm_token(in, path.string());
    const int maxval = next_pnm_token(in, path.string());
    if (rows < 1 || cols < 1) throw ParseError(path.string() + ": bad graymap dimensions");
    if (maxval > 255) {
        throw ParseError(path.string() + ": unsupported graymap depth (maxval " +
                         std::to_string(maxval) + " > 255); only 8-bit graymaps are accepted");
    }
    if (maxval < 1) throw ParseError(path.string() + ": bad maxval");

    GrayImage img;
    img.rows = rows;
    img.cols = cols;
    img.u.resize(static_cast<std::size_t>(rows) * cols);
    if (binary) {
        for (auto& u : img.u) {
            const int c = in.get();
            if (c == EOF) throw ParseError(path.string() + ": truncated pixel data");
            u = static_cast<double>(c);
        }
    } else {
        for (auto& u : img.u) {
            u = static_cast<double>(next_pnm_token(in, path.string()));
        }
    }
    return img;
}

void write_partition_csv(const std::filesystem::path& path, const std::vector<int>& labels) {
    std::ostringstream out;
    out << "# oscgroup labels v1\n";
    out << "osc_id,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << i << ',' << labels[i] << '\n';
    }
    write_atomic(path, out.str());
}

void write_coincidence_csv(const std::filesystem::path& path, const CoincidenceSeries& series) {
    std::ostringstream out;
    out << "# oscgroup coincidence v1\n";
    out << "t,count\n";
    for (std::size_t b = 0; b < series.counts.size(); ++b) {
        out << format_double(series.time(static_cast<int>(b))) << ',' << series.counts[b]
            << '\n';
    }
    write_atomic(path, out.str());
}

void write_traces_csv(const std::filesystem::path& path, const TraceBuffer& traces) {
    std::ostringstream out;
    out << "# oscgroup traces v1\n";
    out << 't';
    for (int i = 0; i < traces.n(); ++i) out << ",osc_" << i;
    out << '\n';
    for (int s = 0; s < traces.sample_count(); ++s) {
        out << format_double(traces.time(s));
        for (int i = 0; i < traces.n(); ++i) out << ',' << format_double(traces.v(s, i));
        out << '\n';
    }
    write_atomic(path, out.str());
}

GrayImage render_label_map(const LabelMap& labels, const GrayImage& source) {
    if (labels.rows != source.rows || labels.cols != source.cols) {
        throw DimensionError("render_label_map: label/image dimensions differ");
    }
    const int groups = labels.group_count();
    std::vector<double> sum(groups, 0.0);
    std::vector<int> count(groups, 0);
    for (int p = 0; p < labels.size(); ++p) {
        const int l = labels.labels[p];
        if (l < 0) continue;
        sum[l] += source.u[p];
        ++count[l];
    }
    for (int g = 0; g < groups; ++g) sum[g] = count[g] > 0 ? sum[g] / count[g] : 0.0;

    GrayImage out;
    out.rows = labels.rows;
    out.cols = labels.cols;
    out.u.resize(labels.labels.size());
    for (int p = 0; p < labels.size(); ++p) {
        const int l = labels.labels[p];
        out.u[p] = l < 0 ? 0.0 : sum[l];
    }
    return out;
}

GrayImage render_grid_overlay(const OrientationGrid& grid, const ContourResult* contours) {
    constexpr int kCell = 9;
    GrayImage out;
    out.rows = grid.rows * kCell;
    out.cols = grid.cols * kCell;
    out.u.assign(static_cast<std::size_t>(out.rows) * out.cols, 128.0);

    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const int cell = r * grid.cols + c;
            const bool hot = contours && !contours->partition.labels.empty() &&
                             contours->partition.labels[cell] >= 0;
            const double stroke = hot ? 255.0 : 32.0;
            const double theta = grid.at(r, c);
            // stroke through the block center; y grows downward
            const double cx = c * kCell + kCell / 2.0;
            const double cy = r * kCell + kCell / 2.0;
            const double dx = std::cos(theta);
            const double dy = std::sin(theta);
            for (int t = -kCell / 2; t <= kCell / 2; ++t) {
                const int px = static_cast<int>(std::lround(cx + t * dx));
                const int py = static_cast<int>(std::lround(cy + t * dy));
                if (px < 0 || px >= out.cols || py < 0 || py >= out.rows) continue;
                out.at(py, px) = stroke;
            }
        }
    }
    return out;
}

void write_graph_csv(const std::filesystem::path& path, const CouplingGraph& g) {
    std::ostringstream out;
    out << "# oscgroup graph v1\n";
    out << "# n " << g.n() << '\n';
    out << "i,j,k\n";
    for (const auto& e : g.edges()) {
        out << e.i << ',' << e.j << ',' << format_double(e.k) << '\n';
    }
    write_atomic(path, out.str());
}

CouplingGraph read_graph_csv(const std::filesystem::path& path) {
    auto in = open_text(path);
    expect_magic(in, "graph", path.string());
    std::string line;
    int line_no = 1;
    int n = -1;
    bool header_seen = false;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '#') {
            std::istringstream ss(line);
            std::string hash, key;
            ss >> hash >> key;
            if (key == "n") ss >> n;
            continue;
        }
        if (is_blank_or_comment(line)) continue;
        if (!header_seen) {
            if (line != "i,j,k") {
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": expected header 'i,j,k'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 3) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected three fields");
        }
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        Edge e;
        e.i = static_cast<int>(parse_double(fields[0], ctx));
        e.j = static_cast<int>(parse_double(fields[1], ctx));
        e.k = parse_double(fields[2], ctx);
        edges.push_back(e);
    }
    if (n < 0) throw ParseError(path.string() + ": missing '# n <count>' line");
    try {
        return CouplingGraph(n, std::move(edges));
    } catch (const Error& err) {
        throw ParseError(path.string() + ": " + err.what());
    }
}

void write_report(const std::filesystem::path& path, const StabilityReport& report) {
    std::ostringstream out;
    out << "# oscgroup report v1\n";
    out << "lhs=" << format_double(report.lhs) << '\n';
    out << "rhs=" << format_double(report.rhs) << '\n';
    out << "margin=" << format_double(report.margin) << '\n';
    out << "satisfied=" << (report.satisfied ? 1 : 0) << '\n';
    out << "v_lo=" << format_double(report.v_lo) << '\n';
    out << "v_hi=" << format_double(report.v_hi) << '\n';
    out << "note=" << report.note << '\n';
    write_atomic(path, out.str());
}

StabilityReport read_report(const std::filesystem::path& path) {
    auto in = open_text(path);
    expect_magic(in, "report", path.string());
    StabilityReport report;
    std::string line;
    while (std::getline(in, line)) {
        if (is_blank_or_comment(line)) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path.string() + ": expected key=value, got '" + line + "'");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "lhs") report.lhs = parse_double(value, path.string());
        else if (key == "rhs") report.rhs = parse_double(value, path.string());
        else if (key == "margin") report.margin = parse_double(value, path.string());
        else if (key == "satisfied") report.satisfied = value == "1";
        else if (key == "v_lo") report.v_lo = parse_double(value, path.string());
        else if (key == "v_hi") report.v_hi = parse_double(value, path.string());
        else if (key == "note") report.note = value;
        else throw ParseError(path.string() + ": unknown report key '" + key + "'");
    }
    return report;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string() + " for digest");
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace io
}  // namespace oscgroup
