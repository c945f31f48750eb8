#pragma once

// Normalized phase dynamics of a current-biased Josephson junction:
//
//   phi'' + beta phi' + sin(phi) = v tau + i_s(tau) + i_n(tau),
//   <i_n(tau) i_n(tau')> = D delta(tau - tau'),  D = 2 beta theta,
//
// with time in units of 1/omega_J, currents in units of I_c and energies in
// units of E_J0.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "nejtd/error.hpp"
#include "nejtd/rng.hpp"
#include "nejtd/signal.hpp"

namespace nejtd {

class JunctionParams {
public:
    JunctionParams(double beta, double theta) : beta_(beta), theta_(theta) {
        if (!(beta_ > 0.0) || !std::isfinite(beta_)) throw ValidationError("beta", "beta > 0");
        if (!(theta_ >= 0.0) || !std::isfinite(theta_)) throw ValidationError("theta", "theta >= 0");
    }

    /// Construct from the noise intensity D = 2 beta theta.
    static JunctionParams from_noise(double beta, double noise_intensity) {
        if (!(beta > 0.0)) throw ValidationError("beta", "beta > 0");
        if (!(noise_intensity >= 0.0)) throw ValidationError("noise_intensity", "noise_intensity >= 0");
        return JunctionParams(beta, noise_intensity / (2.0 * beta));
    }

    double beta() const { return beta_; }
    double theta() const { return theta_; }
    double noise_intensity() const { return 2.0 * beta_ * theta_; }

    friend bool operator==(const JunctionParams&, const JunctionParams&) = default;

private:
    double beta_;
    double theta_;
};

/// Linear ramp i_b(tau) = v tau, integrated from i_start until i_cap.
struct BiasProtocol {
    double sweep_rate = 1e-5;
    double i_start = 0.0;
    double i_cap = 1.5;
    double dt = 0.01;

    double kappa(const JunctionParams& p) const { return sweep_rate / p.beta(); }
    double tau_start() const { return i_start / sweep_rate; }
    double bias(double tau) const { return sweep_rate * tau; }

    static BiasProtocol from_kappa(double kappa, const JunctionParams& p) {
        BiasProtocol b;
        b.sweep_rate = kappa * p.beta();
        return b;
    }

    void validate() const {
        if (!(sweep_rate > 0.0) || !std::isfinite(sweep_rate)) throw ValidationError("sweep_rate", "sweep_rate > 0");
        if (!(i_start >= 0.0 && i_start < 1.0)) throw ValidationError("i_start", "0 <= i_start < 1");
        if (!(i_cap > 1.0) || !std::isfinite(i_cap)) throw ValidationError("i_cap", "i_cap > 1");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt", "dt > 0");
    }

    friend bool operator==(const BiasProtocol&, const BiasProtocol&) = default;
};

struct InitialCondition {
    double phi0 = 0.0;
    double phi_dot0 = 0.0;

    void validate() const {
        if (!std::isfinite(phi0)) throw ValidationError("phi0", "phi0 finite");
        if (!std::isfinite(phi_dot0)) throw ValidationError("phi_dot0", "phi_dot0 finite");
    }

    friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

struct PhaseState {
    double tau = 0.0;
    double phi = 0.0;
    double phi_dot = 0.0;
};

struct SwitchEvent {
    double i_sw = 0.0;
    double tau_sw = 0.0;
    bool switched = false;
    std::uint64_t seed = 0;
};

/// Running-state test: the phase has advanced `excursion` beyond the minimum
/// of the well it started in.
struct SwitchCriterion {
    double excursion = 4.0 * std::numbers::pi;
};

inline double normalized_potential(double phi, double bias) {
    return 1.0 - std::cos(phi) - bias * phi;
}

inline double barrier_height(double bias) {
    if (!(bias >= 0.0 && bias <= 1.0)) throw ValidationError("i_b", "0 <= i_b <= 1");
    return 2.0 * (std::sqrt(1.0 - bias * bias) - bias * std::acos(bias));
}

/// Well minimum nearest to phi at the given bias, arcsin(i_b) + 2 pi m.
inline double well_minimum(double phi, double bias) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double base = std::asin(std::fmin(bias, 1.0));
    return base + two_pi * std::round((phi - base) / two_pi);
}

inline double drift(const PhaseState& s, const JunctionParams& p, const BiasProtocol& b, const SignalSpec& sig) {
    return b.sweep_rate * s.tau + signal_value(sig, s.tau) - std::sin(s.phi) - p.beta() * s.phi_dot;
}

/// Wiener increments over the two halves of one step (unit noise).
struct NoiseIncrement {
    double first_half;
    double second_half;
};

inline NoiseIncrement noise_increment(double dt, NormalPair z) {
    const double s = std::sqrt(0.5 * dt);
    return {s * z.first, s * z.second};
}

/// One step of the Strang-split integrator: half noise kick on phi_dot,
/// classical RK4 over the deterministic flow, second half kick, then a
/// phi correction so the phase picks up the conditional mean of
/// sigma * integral(W) given both half increments. `force_*` is the external
/// current (bias + signal) at tau, tau + dt/2 and tau + dt.
///
/// Deterministic order 4; strong order 1 in the noise. The total kick on
/// phi_dot per step has standard deviation sigma * sqrt(dt).
inline void advance(double& phi, double& phi_dot, double beta, double dt, double force_now, double force_mid,
                    double force_next, double sigma, double dW1, double dW2) {
    const double h = dt;
    const double hh = 0.5 * dt;
    const double u = phi_dot + sigma * dW1;

    const double a1 = force_now - vmath::sin(phi) - beta * u;
    const double p2 = u + hh * a1;
    const double a2 = force_mid - vmath::sin(phi + hh * u) - beta * p2;
    const double p3 = u + hh * a2;
    const double a3 = force_mid - vmath::sin(phi + hh * p2) - beta * p3;
    const double p4 = u + h * a3;
    const double a4 = force_next - vmath::sin(phi + h * p3) - beta * p4;

    constexpr double sixth = 1.0 / 6.0;
    phi = phi + (h * sixth) * (u + 2.0 * p2 + 2.0 * p3 + p4) + sigma * (0.25 * h) * (dW2 - dW1);
    phi_dot = u + (h * sixth) * (a1 + 2.0 * a2 + 2.0 * a3 + a4) + sigma * dW2;
}

/// Advance one step under the linear ramp plus signal.
inline PhaseState step(const PhaseState& s, const JunctionParams& p, const BiasProtocol& b, const SignalSpec& sig,
                       NormalPair draws) {
    const double dt = b.dt;
    const double t1 = s.tau + 0.5 * dt;
    const double t2 = s.tau + dt;
    const double f0 = b.sweep_rate * s.tau + signal_value(sig, s.tau);
    const double fm = b.sweep_rate * t1 + signal_value(sig, t1);
    const double f1 = b.sweep_rate * t2 + signal_value(sig, t2);
    const auto inc = noise_increment(dt, draws);
    PhaseState out{t2, s.phi, s.phi_dot};
    advance(out.phi, out.phi_dot, p.beta(), dt, f0, fm, f1, std::sqrt(p.noise_intensity()), inc.first_half,
            inc.second_half);
    if (!std::isfinite(out.phi) || !std::isfinite(out.phi_dot))
        throw std::runtime_error("non-finite phase state at tau=" + std::to_string(out.tau) + "; reduce dt");
    return out;
}

/// Phase reference for the switch test: the well minimum nearest phi0 at the
/// starting bias.
inline double switch_reference(const InitialCondition& init, const BiasProtocol& b) {
    return well_minimum(init.phi0, b.i_start);
}

inline bool detect_switch(const PhaseState& s, double reference, const SwitchCriterion& c = {}) {
    return s.phi - reference >= c.excursion;
}

inline bool detect_switch(const PhaseState& s, const InitialCondition& init, const BiasProtocol& b,
                          const SwitchCriterion& c = {}) {
    return detect_switch(s, switch_reference(init, b), c);
}

}  // namespace nejtd
