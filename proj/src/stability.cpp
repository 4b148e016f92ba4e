#include "oscgroup/stability.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace oscgroup {

SyncSubspaceBasis sync_subspace_basis(int n, int state_dim) {
    if (n < 2) throw DegenerateInputError("sync_subspace_basis: need n >= 2");
    if (state_dim < 1) throw DegenerateInputError("sync_subspace_basis: state_dim >= 1");

    // Helmert rows: u_k = (1,...,1,-k,0,...,0)/sqrt(k(k+1)) with k leading
    // ones. They form an orthonormal basis of the complement of the constant
    // vector in R^n; the kron with I_d lifts them to per-component blocks.
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n - 1, n);
    for (int k = 1; k < n; ++k) {
        const double norm = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
        for (int j = 0; j < k; ++j) u(k - 1, j) = norm;
        u(k - 1, k) = -static_cast<double>(k) * norm;
    }

    SyncSubspaceBasis basis;
    basis.n = n;
    basis.state_dim = state_dim;
    basis.v = Eigen::MatrixXd::Zero((n - 1) * state_dim, n * state_dim);
    for (int r = 0; r < n - 1; ++r) {
        for (int c = 0; c < n; ++c) {
            for (int d = 0; d < state_dim; ++d) {
                basis.v(r * state_dim + d, c * state_dim + d) = u(r, c);
            }
        }
    }
    return basis;
}

namespace {

/// lambda_max of the symmetric part of a 2x2 matrix [[a, b], [c, d]].
double sym_lmax_2x2(double a, double b, double c, double d) {
    const double off = 0.5 * (b + c);
    const double tr = 0.5 * (a + d);
    const double gap = 0.5 * (a - d);
    return tr + std::sqrt(gap * gap + off * off);
}

double jacobian_sym_lmax(double v, const OscParams& p) {
    const double v2 = v * v;
    const double a = 3.0 - 3.0 * v2 - 7.0 * v2 * v2 * v2;
    const double sech = 1.0 / std::cosh(p.beta_s * v);
    const double b = p.c * p.alpha * p.beta_s * sech * sech;
    return sym_lmax_2x2(a, -1.0, b, -p.c);
}

}  // namespace

StabilityReport check_sync_condition(const CouplingGraph& g, const OscParams& params,
                                     const VRange& range, const SyncConditionOptions& opts) {
    if (!params.valid()) throw DegenerateInputError("check_sync_condition: invalid params");
    if (g.n() < 2) throw DegenerateInputError("check_sync_condition: need n >= 2");
    if (!(range.hi > range.lo)) throw DegenerateInputError("check_sync_condition: empty range");

    StabilityReport report;
    report.v_lo = range.lo;
    report.v_hi = range.hi;

    // lhs: smallest eigenvalue of V (L (x) I_2) V^T.
    const Eigen::MatrixXd l = laplacian(g);
    const SyncSubspaceBasis basis = sync_subspace_basis(g.n(), 2);
    Eigen::MatrixXd lifted = Eigen::MatrixXd::Zero(2 * g.n(), 2 * g.n());
    for (int i = 0; i < g.n(); ++i) {
        for (int j = 0; j < g.n(); ++j) {
            lifted(2 * i, 2 * j) = l(i, j);
            lifted(2 * i + 1, 2 * j + 1) = l(i, j);
        }
    }
    const Eigen::MatrixXd projected =
        basis.v * lifted.selfadjointView<Eigen::Lower>() * basis.v.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(projected, Eigen::EigenvaluesOnly);
    report.lhs = es.eigenvalues().minCoeff();

    // rhs: densely sampled supremum; the Jacobian has no w dependence.
    double sup = -std::numeric_limits<double>::infinity();
    const int samples = std::max(2, opts.samples);
    for (int s = 0; s < samples; ++s) {
        const double v = range.lo + (range.hi - range.lo) * s / (samples - 1);
        sup = std::max(sup, jacobian_sym_lmax(v, params));
    }
    report.rhs = sup;
    report.margin = report.lhs - report.rhs;
    report.satisfied = report.margin > 0.0;
    report.note =
        "sufficient condition only: an unsatisfied margin does not imply "
        "failure to concurrently synchronize";
    return report;
}

void validate_v_range(const TraceBuffer& traces, const VRange& range) {
    const auto [lo, hi] = traces.v_extent();
    if (lo < range.lo || hi > range.hi) {
        throw RangeError("simulated traces leave the declared v range: trace extent [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "] vs declared [" +
                         std::to_string(range.lo) + ", " + std::to_string(range.hi) + "]");
    }
}

double metric_gain_bound(const OscParams& params) {
    if (!params.valid()) throw DegenerateInputError("metric_gain_bound: invalid params");
    return 3.0 + params.alpha * params.beta_s / 4.0;
}

double metric_shifted_lmax(double v, double k, const OscParams& params, SlopeModel slope) {
    const double v2 = v * v;
    const double fp = 3.0 - 3.0 * v2 - 7.0 * v2 * v2 * v2;
    double s;
    if (slope == SlopeModel::kActual) {
        const double sech = 1.0 / std::cosh(params.beta_s * v);
        s = sech * sech;
    } else {
        s = 0.0;
    }
    const double theta = std::sqrt(params.c * params.alpha * params.beta_s);
    // Theta J Theta^-1 = [[f', -theta], [theta*s, -c]]; subtract diag(k, 0).
    return sym_lmax_2x2(fp - k, -theta, theta * s, -params.c);
}

double metric_shifted_lmax_sup(double k, const OscParams& params, const VRange& range,
                               int samples, SlopeModel slope) {
    double sup = -std::numeric_limits<double>::infinity();
    const int count = std::max(2, samples);
    for (int i = 0; i < count; ++i) {
        const double v = range.lo + (range.hi - range.lo) * i / (count - 1);
        sup = std::max(sup, metric_shifted_lmax(v, k, params, slope));
    }
    return sup;
}

SchoenbergResult schoenberg_pd_check(const std::vector<std::vector<double>>& stimuli,
                                     double beta_t) {
    const int n = static_cast<int>(stimuli.size());
    if (n < 1) throw DegenerateInputError("schoenberg_pd_check: need at least one stimulus");
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double g = gaussian_gain(stimuli[i], stimuli[j], beta_t);
            k(i, j) = g;
            k(j, i) = g;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    SchoenbergResult result;
    result.min_eigenvalue = es.eigenvalues().minCoeff();
    result.positive_definite = result.min_eigenvalue > 0.0;
    return result;
}

}  // namespace oscgroup
