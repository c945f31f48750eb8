#pragma once

// Microwave drive currents injected alongside the bias ramp, plus the
// conversions between dimensionless amplitudes and laboratory units.

#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "nejtd/error.hpp"
#include "nejtd/vmath.hpp"

namespace nejtd {

struct NoSignal {
    friend bool operator==(const NoSignal&, const NoSignal&) = default;
};

/// i_s(tau) = amplitude * sin(omega * tau). Amplitude in units of I_c,
/// omega in units of the plasma frequency.
struct ContinuousWave {
    double amplitude = 0.0;
    double omega = 1.0;
    friend bool operator==(const ContinuousWave&, const ContinuousWave&) = default;
};

/// Gaussian-envelope photon pulse,
/// sqrt(n_photons) * single_photon_amplitude * exp(-(tau-arrival)^2 / (2 width^2))
///   * cos(omega * (tau - arrival)).
/// n_photons is real-valued so amplitude searches can bisect on it.
struct GaussianPulse {
    double n_photons = 1.0;
    double single_photon_amplitude = 0.0;
    double omega = 1.0;
    double width = 1.0;
    double arrival = 0.0;
    friend bool operator==(const GaussianPulse&, const GaussianPulse&) = default;
};

using SignalSpec = std::variant<NoSignal, ContinuousWave, GaussianPulse>;

inline void validate(const SignalSpec& spec) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ContinuousWave>) {
                if (!(s.amplitude >= 0.0)) throw ValidationError("signal.amplitude", "amplitude >= 0");
                if (!(s.omega > 0.0)) throw ValidationError("signal.omega", "omega > 0");
            } else if constexpr (std::is_same_v<T, GaussianPulse>) {
                if (!(s.n_photons >= 0.0)) throw ValidationError("signal.n_photons", "n_photons >= 0");
                if (!(s.single_photon_amplitude >= 0.0))
                    throw ValidationError("signal.single_photon_amplitude", "single_photon_amplitude >= 0");
                if (!(s.omega > 0.0)) throw ValidationError("signal.omega", "omega > 0");
                if (!(s.width > 0.0)) throw ValidationError("signal.width", "width > 0");
                if (!std::isfinite(s.arrival)) throw ValidationError("signal.arrival", "arrival finite");
            }
        },
        spec);
}

inline std::string signal_kind(const SignalSpec& spec) {
    switch (spec.index()) {
        case 0: return "none";
        case 1: return "cw";
        default: return "pulse";
    }
}

// Kernel-side evaluators. These use the lane-safe math so the batched
// integrator vectorizes; signal_value() below is the reference form.
namespace signal_kernel {

struct None {
    static constexpr bool active = false;
    double operator()(double) const { return 0.0; }
};

struct Cw {
    static constexpr bool active = true;
    double amplitude;
    double omega;
    double operator()(double tau) const { return amplitude * vmath::sin(omega * tau); }
};

struct Pulse {
    static constexpr bool active = true;
    double peak;  // sqrt(n) * i_ph
    double omega;
    double arrival;
    double inv_two_width_sq;
    double operator()(double tau) const {
        const double x = tau - arrival;
        return peak * vmath::exp(-x * x * inv_two_width_sq) * vmath::cos(omega * x);
    }
};

inline None make(const NoSignal&) { return {}; }
inline Cw make(const ContinuousWave& s) { return {s.amplitude, s.omega}; }
inline Pulse make(const GaussianPulse& s) {
    return {std::sqrt(s.n_photons) * s.single_photon_amplitude, s.omega, s.arrival,
            1.0 / (2.0 * s.width * s.width)};
}

}  // namespace signal_kernel

inline double signal_value(const SignalSpec& spec, double tau) {
    return std::visit(
        [tau](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, NoSignal>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, ContinuousWave>) {
                return s.amplitude * std::sin(s.omega * tau);
            } else {
                const double x = (tau - s.arrival) / s.width;
                return std::sqrt(s.n_photons) * s.single_photon_amplitude * std::exp(-0.5 * x * x) *
                       std::cos(s.omega * (tau - s.arrival));
            }
        },
        spec);
}

namespace phys {
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
}  // namespace phys

/// Junction and readout-line constants in SI units. Plasma frequency and
/// Josephson energy are always derived, never stored.
class PhysicalDevice {
public:
    PhysicalDevice(double critical_current, double capacitance, double line_impedance, double coupling)
        : ic_(critical_current), c_(capacitance), r_(line_impedance), chi_(coupling) {
        if (!(ic_ > 0.0)) throw ValidationError("device.critical_current", "critical_current > 0");
        if (!(c_ > 0.0)) throw ValidationError("device.capacitance", "capacitance > 0");
        if (!(r_ > 0.0)) throw ValidationError("device.line_impedance", "line_impedance > 0");
        if (!(chi_ > 0.0 && chi_ <= 1.0)) throw ValidationError("device.coupling", "0 < coupling <= 1");
    }

    double critical_current() const { return ic_; }
    double capacitance() const { return c_; }
    double line_impedance() const { return r_; }
    double coupling() const { return chi_; }

    double plasma_frequency() const {
        return std::sqrt(2.0 * phys::elementary_charge * ic_ / (phys::hbar * c_));
    }
    double josephson_energy() const { return phys::hbar * ic_ / (2.0 * phys::elementary_charge); }

private:
    double ic_;
    double c_;
    double r_;
    double chi_;
};

/// Single-photon pulse amplitude in units of I_c,
/// sqrt(hbar * omega_ph * omega_J^2 / (R * I_c^2 * tau_ph)).
/// omega_ph and tau_ph enter as the dimensionless numbers used in the
/// pulse definition (units of omega_J and 1/omega_J).
inline double pulse_amplitude(const PhysicalDevice& device, double omega_ph, double tau_ph) {
    if (!(omega_ph > 0.0)) throw ValidationError("omega_ph", "omega_ph > 0");
    if (!(tau_ph > 0.0)) throw ValidationError("tau_ph", "tau_ph > 0");
    const double wj = device.plasma_frequency();
    const double ic = device.critical_current();
    return std::sqrt(phys::hbar * omega_ph * wj * wj / (device.line_impedance() * ic * ic * tau_ph));
}

/// P_min = i^2 I_c^2 R / (2 chi), watts.
inline double min_detectable_power(double amplitude, const PhysicalDevice& device) {
    if (!(amplitude >= 0.0)) throw ValidationError("amplitude", "amplitude >= 0");
    const double ic = device.critical_current();
    return amplitude * amplitude * ic * ic * device.line_impedance() / (2.0 * device.coupling());
}

}  // namespace nejtd
