#include "oscgroup/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace oscgroup {

namespace {
constexpr double kPi = std::numbers::pi;
}

CouplingGraph::CouplingGraph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    if (n_ < 0) throw DimensionError("CouplingGraph: negative size");
    std::vector<std::size_t> degree(static_cast<std::size_t>(n_) + 1, 0);
    for (auto& e : edges_) {
        if (e.i == e.j) throw DegenerateInputError("CouplingGraph: self edge");
        if (e.i > e.j) std::swap(e.i, e.j);
        if (e.i < 0 || e.j >= n_) throw DimensionError("CouplingGraph: edge index out of range");
        if (!std::isfinite(e.k) || e.k < 0.0) {
            throw DegenerateInputError("CouplingGraph: gain must be finite and non-negative");
        }
        ++degree[static_cast<std::size_t>(e.i) + 1];
        ++degree[static_cast<std::size_t>(e.j) + 1];
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    row_begin_.assign(degree.begin(), degree.end());
    for (int i = 0; i < n_; ++i) row_begin_[i + 1] += row_begin_[i];
    adj_.resize(2 * edges_.size());
    std::vector<std::size_t> cursor(row_begin_.begin(), row_begin_.end() - 1);
    for (const auto& e : edges_) {
        adj_[cursor[e.i]++] = Neighbor{e.j, e.k};
        adj_[cursor[e.j]++] = Neighbor{e.i, e.k};
    }
    for (int i = 0; i < n_; ++i) {
        auto row = std::span<Neighbor>(adj_.data() + row_begin_[i], adj_.data() + row_begin_[i + 1]);
        std::sort(row.begin(), row.end(), [](const Neighbor& a, const Neighbor& b) { return a.j < b.j; });
    }
}

double CouplingGraph::gain(int i, int j) const {
    if (i == j) return 0.0;
    auto row = neighbors(i);
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const Neighbor& nb, int col) { return nb.j < col; });
    return (it != row.end() && it->j == j) ? it->k : 0.0;
}

double CouplingGraph::weighted_degree(int i) const {
    double sum = 0.0;
    for (const auto& nb : neighbors(i)) sum += nb.k;
    return sum;
}

double gaussian_gain(std::span<const double> s_i, std::span<const double> s_j, double beta_t) {
    if (s_i.size() != s_j.size()) {
        throw DimensionError("gaussian_gain: stimulus vectors differ in length");
    }
    if (!(beta_t > 0.0)) throw DegenerateInputError("gaussian_gain: beta_t must be positive");
    double d2 = 0.0;
    for (std::size_t k = 0; k < s_i.size(); ++k) {
        const double d = s_i[k] - s_j[k];
        d2 += d * d;
    }
    return std::exp(-d2 / (beta_t * beta_t));
}

double angular_distance_mod_pi(double a, double b) {
    double d = std::fmod(std::abs(a - b), kPi);
    return std::min(d, kPi - d);
}

double axial_mean(double a, double b) {
    const double s = std::sin(2.0 * a) + std::sin(2.0 * b);
    const double c = std::cos(2.0 * a) + std::cos(2.0 * b);
    double m = 0.5 * std::atan2(s, c);
    if (m < 0.0) m += kPi;
    if (m >= kPi) m -= kPi;
    return m;
}

CouplingGraph build_cluster_coupling(const PointSet& pts, int m_neighbors, double beta_t) {
    const int n = pts.size();
    if (n < 1) throw DegenerateInputError("build_cluster_coupling: empty point set");
    if (m_neighbors < 1 || m_neighbors >= n) {
        throw DegenerateInputError("build_cluster_coupling: need 1 <= m_neighbors < n");
    }

    // Union-symmetrized kNN: diffusive coupling needs a symmetric gain, and
    // the union keeps local coupling able to propagate outward.
    std::vector<std::pair<double, int>> dist(n);
    std::vector<Edge> edges;
    std::vector<std::size_t> seen;  // packed pair keys to dedupe the union
    seen.reserve(static_cast<std::size_t>(n) * m_neighbors);
    for (int i = 0; i < n; ++i) {
        dist.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = pts.x[i] - pts.x[j];
            const double dy = pts.y[i] - pts.y[j];
            dist.emplace_back(dx * dx + dy * dy, j);
        }
        std::partial_sort(dist.begin(), dist.begin() + m_neighbors, dist.end());
        for (int m = 0; m < m_neighbors; ++m) {
            const int j = dist[m].second;
            const int a = std::min(i, j);
            const int b = std::max(i, j);
            seen.push_back(static_cast<std::size_t>(a) * n + b);
        }
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (const auto key : seen) {
        const int a = static_cast<int>(key / n);
        const int b = static_cast<int>(key % n);
        const double si[2] = {pts.x[a], pts.y[a]};
        const double sj[2] = {pts.x[b], pts.y[b]};
        const double k = gaussian_gain(si, sj, beta_t);
        if (k >= kMinGain) edges.push_back(Edge{a, b, k});
    }
    return CouplingGraph(n, std::move(edges));
}

CouplingGraph build_contour_coupling(const OrientationGrid& grid, double delta, double gamma,
                                     int w) {
    if (w < 1) throw DegenerateInputError("build_contour_coupling: w must be >= 1");
    if (!(delta > 0.0) || !(gamma > 0.0)) {
        throw DegenerateInputError("build_contour_coupling: delta and gamma must be positive");
    }
    const int rows = grid.rows;
    const int cols = grid.cols;
    std::vector<Edge> edges;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int i = r * cols + c;
            const double oi = grid.at(r, c);
            // Scan only the forward half-window so each pair appears once.
            for (int dr = 0; dr <= w; ++dr) {
                const int cmin = (dr == 0) ? 1 : -w;
                for (int dc = cmin; dc <= w; ++dc) {
                    const int r2 = r + dr;
                    const int c2 = c + dc;
                    if (r2 < 0 || r2 >= rows || c2 < 0 || c2 >= cols) continue;
                    const int j = r2 * cols + c2;
                    const double oj = grid.at(r2, c2);
                    const double d_ee = angular_distance_mod_pi(oi, oj);
                    // x = column rightward, y = row downward.
                    double path = std::atan2(static_cast<double>(dr), static_cast<double>(dc));
                    const double d_ep = angular_distance_mod_pi(axial_mean(oi, oj), path);
                    const double k = std::exp(-(d_ee * d_ee) / (delta * delta) -
                                              (d_ep * d_ep) / (gamma * gamma));
                    if (k >= kMinGain) edges.push_back(Edge{i, j, k});
                }
            }
        }
    }
    return CouplingGraph(rows * cols, std::move(edges));
}

CouplingGraph build_segmentation_coupling(const GrayImage& img, double beta_t, int w) {
    if (w < 1) throw DegenerateInputError("build_segmentation_coupling: w must be >= 1");
    if (!(beta_t > 0.0)) throw DegenerateInputError("build_segmentation_coupling: beta_t > 0");
    const int rows = img.rows;
    const int cols = img.cols;
    const double inv_b2 = 1.0 / (beta_t * beta_t);
    std::vector<Edge> edges;
    // Chebyshev distance strictly below w, as printed in the coupling rule.
    const int reach = w - 1;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int i = r * cols + c;
            const double ui = img.at(r, c);
            for (int dr = 0; dr <= reach; ++dr) {
                const int cmin = (dr == 0) ? 1 : -reach;
                for (int dc = cmin; dc <= reach; ++dc) {
                    const int r2 = r + dr;
                    const int c2 = c + dc;
                    if (r2 < 0 || r2 >= rows || c2 < 0 || c2 >= cols) continue;
                    const int j = r2 * cols + c2;
                    const double du = ui - img.at(r2, c2);
                    const double k = std::exp(-du * du * inv_b2);
                    if (k >= kMinGain) edges.push_back(Edge{i, j, k});
                }
            }
        }
    }
    return CouplingGraph(rows * cols, std::move(edges));
}

Eigen::MatrixXd laplacian(const CouplingGraph& g) {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(g.n(), g.n());
    for (const auto& e : g.edges()) {
        l(e.i, e.j) -= e.k;
        l(e.j, e.i) -= e.k;
        l(e.i, e.i) += e.k;
        l(e.j, e.j) += e.k;
    }
    return l;
}

}  // namespace oscgroup
