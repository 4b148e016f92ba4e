#pragma once

#include <array>

#include "oscgroup/errors.hpp"

namespace oscgroup {

/// Constants of the modified FitzHugh-Nagumo oscillator. `beta_s` is the
/// sigmoid slope of the gate equation (distinct from the Gaussian tuning
/// width used by the coupling builders, which is also called beta in the
/// literature).
struct OscParams {
    double alpha = 12.0;
    double c = 0.04;
    double beta_s = 4.0;

    bool valid() const { return alpha > 0.0 && c > 0.0 && beta_s > 0.0; }
};

/// State of a single oscillator: membrane potential v and gate voltage w.
struct OscState {
    double v = 0.0;
    double w = 0.0;
};

/// External current input I.
struct DriveInput {
    double value = 0.0;
};

/// Time derivative (dv/dt, dw/dt) at the given state:
///   dv = 3v - v^3 - v^7 + 2 - w + I
///   dw = c [ alpha (1 + tanh(beta_s v)) - w ]
OscState derivative(const OscState& state, DriveInput input, const OscParams& params);

/// Analytic Jacobian d(dv,dw)/d(v,w), row-major 2x2. Does not depend on w.
std::array<double, 4> jacobian(const OscState& state, const OscParams& params);

/// One classical RK4 step. Throws DivergenceError if the result is non-finite.
OscState step(const OscState& state, DriveInput input, const OscParams& params, double dt);

struct ThresholdSearch {
    double lo = -5.0;
    double hi = 5.0;
    double tolerance = 1e-3;
    /// Simulation used to classify a candidate input as oscillating.
    double dt = 0.05;
    double duration = 300.0;
    /// Fraction of the run discarded as transient before counting spikes.
    double transient_fraction = 0.25;
    /// Upward v-crossings of this level count as spikes.
    double spike_level = 1.0;
    /// At least this many spikes in the post-transient window = oscillating.
    int min_spikes = 3;
};

/// Smallest input I at which the oscillator sustains spiking, found by
/// bisection over [lo, hi]. Throws NotBracketedError when both endpoints
/// classify the same way.
double oscillation_threshold(const OscParams& params, const ThresholdSearch& search = {});

/// True when a solo run at input I spikes at least `min_spikes` times after
/// the transient. This is the classifier behind oscillation_threshold.
bool oscillates(const OscParams& params, double input, const ThresholdSearch& search = {});

/// Mean inter-spike interval of a solo oscillator at input I, measured from a
/// calibration run. Used to convert "periods" into time units.
double oscillation_period(const OscParams& params, double input, double dt = 0.05);

}  // namespace oscgroup
