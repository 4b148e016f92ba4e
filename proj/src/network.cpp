#include "oscgroup/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oscgroup/rng.hpp"

namespace oscgroup {

void NetworkSpec::validate() const {
    if (!params.valid()) throw DegenerateInputError("NetworkSpec: invalid oscillator params");
    const std::size_t n = static_cast<std::size_t>(graph.n());
    if (inputs.size() != n || initial.size() != n) {
        throw DimensionError("NetworkSpec: inputs/initial states must match graph size");
    }
    for (double in : inputs) {
        if (!std::isfinite(in)) throw DegenerateInputError("NetworkSpec: non-finite input");
    }
    for (const auto& st : initial) {
        if (!std::isfinite(st.v) || !std::isfinite(st.w)) {
            throw DegenerateInputError("NetworkSpec: non-finite initial state");
        }
    }
}

void HierarchySpec::validate() const {
    layer1.validate();
    layer2.validate();
    if (a.rows() != b.rows()) throw DimensionError("HierarchySpec: A and B row counts differ");
    if (a.cols() != layer1.n() || b.cols() != layer2.n()) {
        throw DimensionError("HierarchySpec: coupling matrix columns must match layer sizes");
    }
    if (!a.allFinite() || !b.allFinite()) {
        throw DegenerateInputError("HierarchySpec: non-finite coupling matrix entry");
    }
    if (k1 < 0.0 || k2 < 0.0) throw DegenerateInputError("HierarchySpec: negative gain");
}

TraceBuffer::TraceBuffer(int n, double dt, int sample_count, bool record_w)
    : n_(n), dt_(dt), samples_(sample_count) {
    v_.resize(static_cast<std::size_t>(n) * sample_count);
    if (record_w) w_.resize(static_cast<std::size_t>(n) * sample_count);
}

std::pair<double, double> TraceBuffer::v_extent() const {
    double lo = v_.empty() ? 0.0 : v_[0];
    double hi = lo;
    for (double x : v_) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return {lo, hi};
}

namespace {

struct Workspace {
    std::vector<double> v, w;          // current state
    std::vector<double> dv, dw;        // stage derivative
    std::vector<double> sv, sw;        // stage state
    std::vector<double> av, aw;        // weighted accumulation
    explicit Workspace(std::size_t n)
        : v(n), w(n), dv(n), dw(n), sv(n), sw(n), av(n), aw(n) {}
};

/// f(x_i) + sum_j k_ij (x_j - x_i) on both components. Each oscillator's
/// accumulation runs in a fixed order regardless of thread count, so results
/// are bit-identical serial or parallel.
void flat_derivative(const NetworkSpec& spec, const std::vector<double>& v,
                     const std::vector<double>& w, std::vector<double>& dv,
                     std::vector<double>& dw) {
    const int n = spec.n();
    const OscParams& p = spec.params;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 512)
#endif
    for (int i = 0; i < n; ++i) {
        const double vi = v[i];
        const double v2 = vi * vi;
        const double v3 = v2 * vi;
        double cv = 3.0 * vi - v3 - v3 * v3 * vi + 2.0 - w[i] + spec.inputs[i];
        double cw = p.c * (p.alpha * (1.0 + std::tanh(p.beta_s * vi)) - w[i]);
        for (const Neighbor& nb : spec.graph.neighbors(i)) {
            cv += nb.k * (v[nb.j] - v[i]);
            cw += nb.k * (w[nb.j] - w[i]);
        }
        dv[i] = cv;
        dw[i] = cw;
    }
}

int steps_for(double duration, double dt) {
    if (!(duration > 0.0)) throw DegenerateInputError("simulate: duration must be positive");
    if (!(dt > 0.0)) throw DegenerateInputError("simulate: dt must be positive");
    return static_cast<int>(std::floor(duration / dt + 1e-9));
}

void check_finite(const std::vector<double>& v, const std::vector<double>& w, double t) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || !std::isfinite(w[i])) {
            throw DivergenceError(static_cast<int>(i), t,
                                  "oscillator " + std::to_string(i) + " diverged at t=" +
                                      std::to_string(t));
        }
    }
}

}  // namespace

TraceBuffer simulate_with_final(const NetworkSpec& spec, double duration, double dt,
                                std::vector<OscState>& final_states,
                                const SimulateOptions& opts) {
    spec.validate();
    const int n = spec.n();
    const int steps = steps_for(duration, dt);
    TraceBuffer traces(n, dt, steps + 1, opts.record_w);

    Workspace ws(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ws.v[i] = spec.initial[i].v;
        ws.w[i] = spec.initial[i].w;
        traces.set(0, i, ws.v[i]);
        if (opts.record_w) traces.set_w(0, i, ws.w[i]);
    }

    static constexpr double kStageWeight[4] = {1.0, 2.0, 2.0, 1.0};
    static constexpr double kStageDt[4] = {0.0, 0.5, 0.5, 1.0};
    for (int s = 1; s <= steps; ++s) {
        for (int i = 0; i < n; ++i) {
            ws.av[i] = 0.0;
            ws.aw[i] = 0.0;
        }
        for (int stage = 0; stage < 4; ++stage) {
            if (stage == 0) {
                flat_derivative(spec, ws.v, ws.w, ws.dv, ws.dw);
            } else {
                const double h = kStageDt[stage] * dt;
                for (int i = 0; i < n; ++i) {
                    ws.sv[i] = ws.v[i] + h * ws.dv[i];
                    ws.sw[i] = ws.w[i] + h * ws.dw[i];
                }
                flat_derivative(spec, ws.sv, ws.sw, ws.dv, ws.dw);
            }
            for (int i = 0; i < n; ++i) {
                ws.av[i] += kStageWeight[stage] * ws.dv[i];
                ws.aw[i] += kStageWeight[stage] * ws.dw[i];
            }
        }
        const double h6 = dt / 6.0;
        for (int i = 0; i < n; ++i) {
            ws.v[i] += h6 * ws.av[i];
            ws.w[i] += h6 * ws.aw[i];
        }
        check_finite(ws.v, ws.w, s * dt);
        for (int i = 0; i < n; ++i) {
            traces.set(s, i, ws.v[i]);
            if (opts.record_w) traces.set_w(s, i, ws.w[i]);
        }
    }

    final_states.resize(n);
    for (int i = 0; i < n; ++i) final_states[i] = OscState{ws.v[i], ws.w[i]};
    return traces;
}

TraceBuffer simulate(const NetworkSpec& spec, double duration, double dt,
                     const SimulateOptions& opts) {
    std::vector<OscState> unused;
    return simulate_with_final(spec, duration, dt, unused, opts);
}

namespace {

struct HierarchyWorkspace {
    Workspace l1, l2;
    Eigen::VectorXd rv, rw;  // M-sized residuals
    HierarchyWorkspace(std::size_t n1, std::size_t n2, Eigen::Index m)
        : l1(n1), l2(n2), rv(m), rw(m) {}
};

void hierarchy_derivative(const HierarchySpec& spec, HierarchyWorkspace& ws,
                          const std::vector<double>& v1, const std::vector<double>& w1,
                          const std::vector<double>& v2, const std::vector<double>& w2,
                          std::vector<double>& dv1, std::vector<double>& dw1,
                          std::vector<double>& dv2, std::vector<double>& dw2) {
    flat_derivative(spec.layer1, v1, w1, dv1, dw1);
    flat_derivative(spec.layer2, v2, w2, dv2, dw2);

    using CMap = Eigen::Map<const Eigen::VectorXd>;
    using Map = Eigen::Map<Eigen::VectorXd>;
    const CMap v1m(v1.data(), v1.size()), w1m(w1.data(), w1.size());
    const CMap v2m(v2.data(), v2.size()), w2m(w2.data(), w2.size());

    ws.rv.noalias() = spec.b * v2m - spec.a * v1m;
    ws.rw.noalias() = spec.b * w2m - spec.a * w1m;
    Map(dv1.data(), dv1.size()).noalias() += spec.k1 * (spec.a.transpose() * ws.rv);
    Map(dw1.data(), dw1.size()).noalias() += spec.k1 * (spec.a.transpose() * ws.rw);
    Map(dv2.data(), dv2.size()).noalias() -= spec.k2 * (spec.b.transpose() * ws.rv);
    Map(dw2.data(), dw2.size()).noalias() -= spec.k2 * (spec.b.transpose() * ws.rw);
}

}  // namespace

std::pair<TraceBuffer, TraceBuffer> simulate_hierarchy(const HierarchySpec& spec, double duration,
                                                       double dt, const SimulateOptions& opts,
                                                       std::vector<OscState>* final1,
                                                       std::vector<OscState>* final2) {
    spec.validate();
    const int n1 = spec.layer1.n();
    const int n2 = spec.layer2.n();
    const int steps = steps_for(duration, dt);
    TraceBuffer t1(n1, dt, steps + 1, opts.record_w);
    TraceBuffer t2(n2, dt, steps + 1, opts.record_w);

    HierarchyWorkspace ws(static_cast<std::size_t>(n1), static_cast<std::size_t>(n2),
                          spec.a.rows());
    for (int i = 0; i < n1; ++i) {
        ws.l1.v[i] = spec.layer1.initial[i].v;
        ws.l1.w[i] = spec.layer1.initial[i].w;
        t1.set(0, i, ws.l1.v[i]);
        if (opts.record_w) t1.set_w(0, i, ws.l1.w[i]);
    }
    for (int i = 0; i < n2; ++i) {
        ws.l2.v[i] = spec.layer2.initial[i].v;
        ws.l2.w[i] = spec.layer2.initial[i].w;
        t2.set(0, i, ws.l2.v[i]);
        if (opts.record_w) t2.set_w(0, i, ws.l2.w[i]);
    }

    static constexpr double kStageWeight[4] = {1.0, 2.0, 2.0, 1.0};
    static constexpr double kStageDt[4] = {0.0, 0.5, 0.5, 1.0};
    for (int s = 1; s <= steps; ++s) {
        std::fill(ws.l1.av.begin(), ws.l1.av.end(), 0.0);
        std::fill(ws.l1.aw.begin(), ws.l1.aw.end(), 0.0);
        std::fill(ws.l2.av.begin(), ws.l2.av.end(), 0.0);
        std::fill(ws.l2.aw.begin(), ws.l2.aw.end(), 0.0);
        for (int stage = 0; stage < 4; ++stage) {
            if (stage == 0) {
                hierarchy_derivative(spec, ws, ws.l1.v, ws.l1.w, ws.l2.v, ws.l2.w, ws.l1.dv,
                                     ws.l1.dw, ws.l2.dv, ws.l2.dw);
            } else {
                const double h = kStageDt[stage] * dt;
                for (int i = 0; i < n1; ++i) {
                    ws.l1.sv[i] = ws.l1.v[i] + h * ws.l1.dv[i];
                    ws.l1.sw[i] = ws.l1.w[i] + h * ws.l1.dw[i];
                }
                for (int i = 0; i < n2; ++i) {
                    ws.l2.sv[i] = ws.l2.v[i] + h * ws.l2.dv[i];
                    ws.l2.sw[i] = ws.l2.w[i] + h * ws.l2.dw[i];
                }
                hierarchy_derivative(spec, ws, ws.l1.sv, ws.l1.sw, ws.l2.sv, ws.l2.sw, ws.l1.dv,
                                     ws.l1.dw, ws.l2.dv, ws.l2.dw);
            }
            for (int i = 0; i < n1; ++i) {
                ws.l1.av[i] += kStageWeight[stage] * ws.l1.dv[i];
                ws.l1.aw[i] += kStageWeight[stage] * ws.l1.dw[i];
            }
            for (int i = 0; i < n2; ++i) {
                ws.l2.av[i] += kStageWeight[stage] * ws.l2.dv[i];
                ws.l2.aw[i] += kStageWeight[stage] * ws.l2.dw[i];
            }
        }
        const double h6 = dt / 6.0;
        for (int i = 0; i < n1; ++i) {
            ws.l1.v[i] += h6 * ws.l1.av[i];
            ws.l1.w[i] += h6 * ws.l1.aw[i];
        }
        for (int i = 0; i < n2; ++i) {
            ws.l2.v[i] += h6 * ws.l2.av[i];
            ws.l2.w[i] += h6 * ws.l2.aw[i];
        }
        check_finite(ws.l1.v, ws.l1.w, s * dt);
        check_finite(ws.l2.v, ws.l2.w, s * dt);
        for (int i = 0; i < n1; ++i) {
            t1.set(s, i, ws.l1.v[i]);
            if (opts.record_w) t1.set_w(s, i, ws.l1.w[i]);
        }
        for (int i = 0; i < n2; ++i) {
            t2.set(s, i, ws.l2.v[i]);
            if (opts.record_w) t2.set_w(s, i, ws.l2.w[i]);
        }
    }

    if (final1) {
        final1->resize(n1);
        for (int i = 0; i < n1; ++i) (*final1)[i] = OscState{ws.l1.v[i], ws.l1.w[i]};
    }
    if (final2) {
        final2->resize(n2);
        for (int i = 0; i < n2; ++i) (*final2)[i] = OscState{ws.l2.v[i], ws.l2.w[i]};
    }
    return {std::move(t1), std::move(t2)};
}

double coupling_residual(const HierarchySpec& spec, const std::vector<OscState>& x1,
                         const std::vector<OscState>& x2) {
    if (static_cast<Eigen::Index>(x1.size()) != spec.a.cols() ||
        static_cast<Eigen::Index>(x2.size()) != spec.b.cols()) {
        throw DimensionError("coupling_residual: state sizes do not match A/B");
    }
    Eigen::VectorXd v1(x1.size()), w1(x1.size()), v2(x2.size()), w2(x2.size());
    for (std::size_t i = 0; i < x1.size(); ++i) {
        v1[static_cast<Eigen::Index>(i)] = x1[i].v;
        w1[static_cast<Eigen::Index>(i)] = x1[i].w;
    }
    for (std::size_t i = 0; i < x2.size(); ++i) {
        v2[static_cast<Eigen::Index>(i)] = x2[i].v;
        w2[static_cast<Eigen::Index>(i)] = x2[i].w;
    }
    const double rv = (spec.a * v1 - spec.b * v2).lpNorm<Eigen::Infinity>();
    const double rw = (spec.a * w1 - spec.b * w2).lpNorm<Eigen::Infinity>();
    return std::max(rv, rw);
}

std::vector<double> make_random_inputs(int n, double lo, double hi, std::uint64_t seed) {
    SeededRng rng(seed);
    std::vector<double> inputs(n);
    for (auto& in : inputs) in = rng.uniform(lo, hi);
    return inputs;
}

std::vector<OscState> make_random_initial_states(int n, std::uint64_t seed) {
    // v is kept inside [-1.2, 1.2]: beyond |v| ~ 1.4 the v^7 term makes the
    // dynamics stiff enough that fixed-step RK4 at the default dt diverges
    // before reaching the limit cycle.
    SeededRng rng(seed);
    std::vector<OscState> states(n);
    for (auto& st : states) {
        st.v = rng.uniform(-1.2, 1.2);
        st.w = rng.uniform(0.0, 2.0);
    }
    return states;
}

}  // namespace oscgroup
