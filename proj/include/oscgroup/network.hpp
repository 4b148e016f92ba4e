#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "oscgroup/coupling.hpp"
#include "oscgroup/oscillator.hpp"

namespace oscgroup {

/// Everything needed to reproduce one flat-network run. `seed` records the
/// provenance of randomized inputs / initial states so experiments replay
/// bit-identically.
struct NetworkSpec {
    OscParams params;
    std::vector<double> inputs;
    std::vector<OscState> initial;
    CouplingGraph graph;
    std::uint64_t seed = 0;

    int n() const { return graph.n(); }
    void validate() const;
};

/// Two-layer network joined by generalized diffusive connections:
/// layer 1 receives k1 A^T (B x2 - A x1) and layer 2 receives
/// k2 B^T (A x1 - B x2), each applied to both state components.
struct HierarchySpec {
    NetworkSpec layer1;
    NetworkSpec layer2;
    Eigen::MatrixXd a;  // M x N1
    Eigen::MatrixXd b;  // M x N2
    double k1 = 0.0;
    double k2 = 0.0;

    void validate() const;
};

/// Time-sampled v-traces (w optionally kept) for every oscillator of a run.
/// Sample s of oscillator i lives at v[s * n + i]; sample 0 is the initial
/// state, so sample_count == floor(duration/dt) + 1.
class TraceBuffer {
public:
    TraceBuffer() = default;
    TraceBuffer(int n, double dt, int sample_count, bool record_w);

    int n() const { return n_; }
    double dt() const { return dt_; }
    int sample_count() const { return samples_; }
    double duration() const { return (samples_ - 1) * dt_; }
    bool has_w() const { return !w_.empty(); }

    double v(int sample, int osc) const { return v_[idx(sample, osc)]; }
    double w(int sample, int osc) const { return w_[idx(sample, osc)]; }
    double time(int sample) const { return sample * dt_; }

    void set(int sample, int osc, double v_val) { v_[idx(sample, osc)] = v_val; }
    void set_w(int sample, int osc, double w_val) { w_[idx(sample, osc)] = w_val; }

    /// Min / max of v over all oscillators and samples.
    std::pair<double, double> v_extent() const;

private:
    std::size_t idx(int sample, int osc) const {
        return static_cast<std::size_t>(sample) * n_ + osc;
    }
    int n_ = 0;
    double dt_ = 0.0;
    int samples_ = 0;
    std::vector<double> v_;
    std::vector<double> w_;
};

struct SimulateOptions {
    bool record_w = false;
};

/// Integrate the diffusively coupled network with fixed-step RK4. The
/// coupling term k_ij (x_j - x_i) applies to the full state (both v and w).
/// Throws DivergenceError (with oscillator index and time) when a state
/// turns non-finite.
TraceBuffer simulate(const NetworkSpec& spec, double duration, double dt,
                     const SimulateOptions& opts = {});

/// Integrate a two-layer hierarchy; returns (layer1 traces, layer2 traces).
/// Final states after the run can be captured via `final_states`.
std::pair<TraceBuffer, TraceBuffer> simulate_hierarchy(const HierarchySpec& spec,
                                                       double duration, double dt,
                                                       const SimulateOptions& opts = {},
                                                       std::vector<OscState>* final1 = nullptr,
                                                       std::vector<OscState>* final2 = nullptr);

/// Max-norm of A x1 - B x2 over both state components; zero exactly at
/// inter-layer consensus.
double coupling_residual(const HierarchySpec& spec, const std::vector<OscState>& x1,
                         const std::vector<OscState>& x2);

/// Inputs drawn uniformly from [lo, hi) with the documented generator.
std::vector<double> make_random_inputs(int n, double lo, double hi, std::uint64_t seed);

/// Initial states with v ~ U[-2, 2) and w ~ U[0, 2), spread across the
/// oscillation cycle so uncoupled units start desynchronized.
std::vector<OscState> make_random_initial_states(int n, std::uint64_t seed);

/// Final states of a simulated run are often needed to chain runs; simulate
/// variant that also returns them.
TraceBuffer simulate_with_final(const NetworkSpec& spec, double duration, double dt,
                                std::vector<OscState>& final_states,
                                const SimulateOptions& opts = {});

}  // namespace oscgroup
