#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "oscgroup/errors.hpp"

namespace oscgroup {

/// Gains smaller than this are dropped by the graph builders: they are
/// numerically irrelevant and would only inflate simulation cost.
inline constexpr double kMinGain = 1e-12;

struct Edge {
    int i = 0;
    int j = 0;  // i < j
    double k = 0.0;
};

struct Neighbor {
    int j = 0;
    double k = 0.0;
};

/// Sparse symmetric weighted coupling graph. Each unordered pair is stored
/// once; adjacency is materialized at construction so simulation cost per
/// step is proportional to n + |edges|. Immutable after construction.
class CouplingGraph {
public:
    CouplingGraph() = default;
    CouplingGraph(int n, std::vector<Edge> edges);

    int n() const { return n_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Gain of the unordered pair {i, j}; 0 when no edge is present.
    double gain(int i, int j) const;

    std::span<const Neighbor> neighbors(int i) const {
        return {adj_.data() + row_begin_[i], adj_.data() + row_begin_[i + 1]};
    }

    /// Sum of gains incident to i (the Laplacian diagonal entry).
    double weighted_degree(int i) const;

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> row_begin_;
    std::vector<Neighbor> adj_;
};

/// 2D point set (point clustering stimuli).
struct PointSet {
    std::vector<double> x;
    std::vector<double> y;

    int size() const { return static_cast<int>(x.size()); }
};

/// Per-cell element orientations in radians, stored modulo pi (contour
/// elements are undirected segments). Row-major.
struct OrientationGrid {
    int rows = 0;
    int cols = 0;
    std::vector<double> theta;

    int size() const { return rows * cols; }
    double at(int r, int c) const { return theta[static_cast<std::size_t>(r) * cols + c]; }
};

/// 8-bit-range gray image stored as doubles in [0, 255]. Row-major.
struct GrayImage {
    int rows = 0;
    int cols = 0;
    std::vector<double> u;

    int size() const { return rows * cols; }
    double at(int r, int c) const { return u[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return u[static_cast<std::size_t>(r) * cols + c]; }
};

/// Gaussian tuning exp(-|s_i - s_j|^2 / beta_t^2) on equal-length stimulus
/// vectors. Always in (0, 1].
double gaussian_gain(std::span<const double> s_i, std::span<const double> s_j, double beta_t);

/// Wraparound angular distance between two orientations modulo pi;
/// result in [0, pi/2].
double angular_distance_mod_pi(double a, double b);

/// Circular mean of two orientations treated as axial data (computed on the
/// doubled angles, so adding pi to either argument does not change it).
/// Result in [0, pi).
double axial_mean(double a, double b);

/// Couples every point to the union of its m nearest neighbors and of the
/// points that list it among theirs; gains by Gaussian tuning on position.
/// Distance ties break toward the lower index. Coincident points get gain 1.
CouplingGraph build_cluster_coupling(const PointSet& pts, int m_neighbors, double beta_t);

/// Good-continuation coupling on an orientation grid: cells within Chebyshev
/// distance w are coupled with gain exp(-d_ee^2/delta^2 - d_ep^2/gamma^2),
/// where d_ee is the element-to-element angle and d_ep the angle between the
/// mean element orientation and the path joining the two cell centers.
/// Angles in radians. Grid axes: x = column increasing rightward,
/// y = row increasing downward.
CouplingGraph build_contour_coupling(const OrientationGrid& grid, double delta, double gamma,
                                     int w);

/// Non-local gray-level coupling: pixels within Chebyshev distance strictly
/// less than w get gain exp(-|u_i - u_j|^2 / beta_t^2).
CouplingGraph build_segmentation_coupling(const GrayImage& img, double beta_t, int w);

/// Dense graph Laplacian: L_ii = sum_j k_ij, L_ij = -k_ij. Rows sum to zero.
Eigen::MatrixXd laplacian(const CouplingGraph& g);

}  // namespace oscgroup
