#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "oscgroup/coupling.hpp"
#include "oscgroup/network.hpp"
#include "oscgroup/oscillator.hpp"

namespace oscgroup {

/// Orthonormal basis of the complement of the all-synchronized subspace.
/// Rows act on the stacked state [x_1; x_2; ...; x_n] with `state_dim`
/// components per oscillator; V annihilates any fully synchronized vector
/// and V V^T is the identity on the complement.
struct SyncSubspaceBasis {
    Eigen::MatrixXd v;  // (n-1)*state_dim  x  n*state_dim
    int n = 0;
    int state_dim = 0;
};

SyncSubspaceBasis sync_subspace_basis(int n, int state_dim);

/// Result of the sufficient synchronization condition
///   lambda_min(V L V^T) > sup_v lambda_max(sym dJ/dx).
/// The condition is sufficient only: `satisfied == false` does NOT imply the
/// network fails to synchronize (the all-sync subspace merely needs to be a
/// subspace of the actual invariant set).
struct StabilityReport {
    double lhs = 0.0;  // lambda_min(V (L (x) I_2) V^T)
    double rhs = 0.0;  // sup over sampled v of lambda_max of sym Jacobian
    bool satisfied = false;
    double margin = 0.0;  // lhs - rhs
    double v_lo = 0.0;
    double v_hi = 0.0;
    std::string note;
};

struct VRange {
    double lo = -3.0;
    double hi = 3.0;
};

struct SyncConditionOptions {
    /// Sample count of the v sweep for the Jacobian supremum.
    int samples = 10000;
};

/// Evaluate the sufficient condition for global exponential concurrent
/// synchronization on the given coupling graph. The Jacobian supremum is
/// taken by dense sampling of v over `range` (the Jacobian does not depend
/// on w).
StabilityReport check_sync_condition(const CouplingGraph& g, const OscParams& params,
                                     const VRange& range = {},
                                     const SyncConditionOptions& opts = {});

/// Throws RangeError when any simulated v-sample leaves [range.lo, range.hi];
/// used to validate that a report's declared range covers the attractor.
void validate_v_range(const TraceBuffer& traces, const VRange& range);

/// Pairwise gain above which the metric-transformed Jacobian
/// Theta J Theta^-1 - diag(k, 0), Theta = diag(sqrt(c*alpha*beta_s), 1),
/// is negative definite for every v: returns 3 + alpha*beta_s/4.
double metric_gain_bound(const OscParams& params);

/// How the sigmoid-slope factor entering the transformed Jacobian is chosen
/// for a sweep.
enum class SlopeModel {
    kActual,     // sech^2(beta_s v), the concrete tanh gate
    kWorstCase,  // slope 0: the admissible sigmoid family's worst case, the
                 // one for which metric_gain_bound is tight
};

/// lambda_max of the symmetric part of Theta J Theta^-1 - diag(k, 0) at a
/// single v. With SlopeModel::kWorstCase the per-v critical gain is exactly
/// f'(v) + alpha*beta_s/4, whose supremum is metric_gain_bound.
double metric_shifted_lmax(double v, double k, const OscParams& params,
                           SlopeModel slope = SlopeModel::kActual);

/// Max of metric_shifted_lmax over a sampled v range.
double metric_shifted_lmax_sup(double k, const OscParams& params, const VRange& range = {},
                               int samples = 1000, SlopeModel slope = SlopeModel::kActual);

/// Schoenberg check: the full Gaussian coupling matrix over the given stimuli
/// (unit diagonal) is positive definite whenever the stimuli are distinct.
struct SchoenbergResult {
    bool positive_definite = false;
    double min_eigenvalue = 0.0;
};

SchoenbergResult schoenberg_pd_check(const std::vector<std::vector<double>>& stimuli,
                                     double beta_t);

}  // namespace oscgroup
