#include "oscgroup/oscillator.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace oscgroup {

OscState derivative(const OscState& state, DriveInput input, const OscParams& params) {
    const double v = state.v;
    const double v2 = v * v;
    const double v3 = v2 * v;
    const double v7 = v3 * v3 * v;
    OscState rate;
    rate.v = 3.0 * v - v3 - v7 + 2.0 - state.w + input.value;
    rate.w = params.c * (params.alpha * (1.0 + std::tanh(params.beta_s * v)) - state.w);
    return rate;
}

std::array<double, 4> jacobian(const OscState& state, const OscParams& params) {
    const double v = state.v;
    const double v2 = v * v;
    const double v6 = v2 * v2 * v2;
    const double sech = 1.0 / std::cosh(params.beta_s * v);
    return {
        3.0 - 3.0 * v2 - 7.0 * v6, -1.0,
        params.c * params.alpha * params.beta_s * sech * sech, -params.c,
    };
}

OscState step(const OscState& state, DriveInput input, const OscParams& params, double dt) {
    const OscState k1 = derivative(state, input, params);
    const OscState s2{state.v + 0.5 * dt * k1.v, state.w + 0.5 * dt * k1.w};
    const OscState k2 = derivative(s2, input, params);
    const OscState s3{state.v + 0.5 * dt * k2.v, state.w + 0.5 * dt * k2.w};
    const OscState k3 = derivative(s3, input, params);
    const OscState s4{state.v + dt * k3.v, state.w + dt * k3.w};
    const OscState k4 = derivative(s4, input, params);

    OscState out;
    out.v = state.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    out.w = state.w + dt / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
    if (!std::isfinite(out.v) || !std::isfinite(out.w)) {
        throw DivergenceError(0, 0.0, "oscillator state diverged (dt too large?)");
    }
    return out;
}

namespace {

/// Solo run; returns interpolated spike times (upward crossings of `level`)
/// inside [t_start, duration].
std::vector<double> solo_spike_times(const OscParams& params, double input, double dt,
                                     double duration, double t_start, double level) {
    std::vector<double> spikes;
    OscState x;  // rest-like start; the transient window absorbs it
    x.v = -1.0;
    x.w = 0.0;
    const int steps = static_cast<int>(std::floor(duration / dt + 1e-9));
    double prev_v = x.v;
    for (int s = 1; s <= steps; ++s) {
        x = step(x, DriveInput{input}, params, dt);
        const double t = s * dt;
        if (t >= t_start && prev_v < level && x.v >= level) {
            const double frac = (level - prev_v) / (x.v - prev_v);
            spikes.push_back(t - dt + frac * dt);
        }
        prev_v = x.v;
    }
    return spikes;
}

}  // namespace

bool oscillates(const OscParams& params, double input, const ThresholdSearch& search) {
    const double t_start = search.transient_fraction * search.duration;
    const auto spikes = solo_spike_times(params, input, search.dt, search.duration, t_start,
                                         search.spike_level);
    return static_cast<int>(spikes.size()) >= search.min_spikes;
}

double oscillation_threshold(const OscParams& params, const ThresholdSearch& search) {
    double lo = search.lo;
    double hi = search.hi;
    const bool lo_osc = oscillates(params, lo, search);
    const bool hi_osc = oscillates(params, hi, search);
    if (lo_osc == hi_osc) {
        throw NotBracketedError("oscillation threshold not bracketed by [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    while (hi - lo > search.tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (oscillates(params, mid, search) == lo_osc) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double oscillation_period(const OscParams& params, double input, double dt) {
    // Long enough for ~20 cycles at the paper's parameters.
    const double duration = 400.0;
    const auto spikes = solo_spike_times(params, input, dt, duration, 0.25 * duration, 1.0);
    if (spikes.size() < 3) {
        throw Error("oscillation_period: input " + std::to_string(input) +
                    " does not sustain spiking");
    }
    return (spikes.back() - spikes.front()) / static_cast<double>(spikes.size() - 1);
}

}  // namespace oscgroup
