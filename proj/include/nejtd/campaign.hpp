#pragma once

// Detector operating-point campaigns: one-dimensional sweeps over the sweep
// rate and the initial phase, amplitude threshold search, photon-number
// response and noise-robustness comparisons.
//
// Every comparison runs the signal-off and signal-on ensembles with the same
// master seed, so trial i sees the same noise path in both (common random
// numbers).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nejtd/ensemble.hpp"
#include "nejtd/error.hpp"
#include "nejtd/metrics.hpp"
#include "nejtd/trial.hpp"

namespace nejtd {

/// Shared inputs of a campaign: the base trial setup (its `signal` is the
/// signal-on template), ensemble options and the detection threshold.
struct Campaign {
    TrialSetup base;
    EnsembleOptions ensemble;
    bool auto_arrival = true;  ///< pulse arrival at tau = 1/(2v)
    double threshold = kDetectionThreshold;
};

inline double auto_arrival_tau(double sweep_rate) { return 1.0 / (2.0 * sweep_rate); }

/// The signal as it will be injected under `protocol`.
inline SignalSpec resolve_signal(const SignalSpec& spec, const BiasProtocol& protocol, bool auto_arrival) {
    SignalSpec out = spec;
    if (auto* p = std::get_if<GaussianPulse>(&out); p && auto_arrival)
        p->arrival = auto_arrival_tau(protocol.sweep_rate);
    return out;
}

/// Copy of `spec` with its drive strength replaced: the CW amplitude or the
/// pulse's single-photon amplitude.
inline SignalSpec with_amplitude(const SignalSpec& spec, double amplitude) {
    SignalSpec out = spec;
    if (auto* c = std::get_if<ContinuousWave>(&out)) c->amplitude = amplitude;
    else if (auto* p = std::get_if<GaussianPulse>(&out)) p->single_photon_amplitude = amplitude;
    else throw ValidationError("signal.kind", "kind cw or pulse for an amplitude search");
    return out;
}

inline std::string point_label(const std::string& axis, double value) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, value);
    return axis + "=" + std::string(buf, r.ptr);
}

/// One signal-off/signal-on comparison.
struct Comparison {
    ScdSample no_signal;
    ScdSample signal;
    AucValue auc{0.5, 0.5};
};

namespace detail {

inline ScdSample run_point(const TrialSetup& setup, const EnsembleOptions& opt, const std::string& label) {
    try {
        auto s = run_ensemble(setup, opt);
        s.label = label;
        return s;
    } catch (const TrialFailure& f) {
        throw CampaignFailure(label, f);
    }
}

}  // namespace detail

/// Signal-off vs signal-on at the campaign's base setup.
inline Comparison compare(const Campaign& c, const std::string& label = "point") {
    TrialSetup off = c.base;
    off.signal = NoSignal{};
    TrialSetup on = c.base;
    on.signal = resolve_signal(c.base.signal, c.base.protocol, c.auto_arrival);
    Comparison r;
    r.no_signal = detail::run_point(off, c.ensemble, label + ",signal=none");
    r.signal = detail::run_point(on, c.ensemble, label + ",signal=" + signal_kind(on.signal));
    r.auc = auc(r.no_signal, r.signal);
    return r;
}

struct SweepResult {
    std::string axis_name;
    std::vector<double> axis_values;
    std::vector<double> r_auc_values;
    std::vector<double> auc_raw_values;
    std::vector<std::size_t> censored;  ///< censored trials, both ensembles
    std::size_t best_index = 0;
    double best_value = 0.5;
    std::uint64_t steps = 0;
};

namespace detail {

inline SweepResult sweep(const Campaign& c, const std::string& axis, std::span<const double> grid,
                         const std::function<void(TrialSetup&, double)>& apply) {
    if (grid.empty()) throw ValidationError(axis + "_grid", "non-empty grid");
    SweepResult r;
    r.axis_name = axis;
    for (double x : grid) {
        Campaign point = c;
        apply(point.base, x);
        point.base.validate();
        const auto cmp = compare(point, point_label(axis, x));
        r.axis_values.push_back(x);
        r.r_auc_values.push_back(cmp.auc.r_auc);
        r.auc_raw_values.push_back(cmp.auc.auc_raw);
        r.censored.push_back(cmp.no_signal.censored_count + cmp.signal.censored_count);
        r.steps += cmp.no_signal.steps + cmp.signal.steps;
    }
    // First maximum wins on ties.
    r.best_index = static_cast<std::size_t>(
        std::max_element(r.r_auc_values.begin(), r.r_auc_values.end()) - r.r_auc_values.begin());
    r.best_value = r.r_auc_values[r.best_index];
    return r;
}

}  // namespace detail

/// r_auc as a function of kappa at fixed beta (v = kappa * beta).
inline SweepResult sweep_kappa(const Campaign& c, std::span<const double> kappa_grid) {
    return detail::sweep(c, "kappa", kappa_grid, [](TrialSetup& s, double kappa) {
        if (!(kappa > 0.0)) throw ValidationError("kappa", "kappa > 0");
        s.protocol.sweep_rate = kappa * s.params.beta();
    });
}

/// r_auc as a function of the initial phase at fixed kappa.
inline SweepResult sweep_phi0(const Campaign& c, std::span<const double> phi0_grid) {
    return detail::sweep(c, "phi0", phi0_grid, [](TrialSetup& s, double phi0) { s.init.phi0 = phi0; });
}

struct AmplitudeSearch {
    double amplitude = 0.0;  ///< midpoint of the final bracket
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> trace_amplitudes;  ///< every evaluated amplitude, in order
    std::vector<double> trace_r_auc;
    std::size_t censored = 0;
    std::uint64_t steps = 0;
};

/// Bisect the drive amplitude for r_auc = target. The signal-off ensemble is
/// run once; every evaluation reuses the master seed. Stops when
/// (hi - lo) < rel_tol * midpoint.
inline AmplitudeSearch min_detectable_amplitude(const Campaign& c, double lo, double hi, double target = 0.7,
                                                double rel_tol = 0.05) {
    if (!(lo > 0.0 && hi > lo)) throw ValidationError("bracket", "0 < bracket_lo < bracket_hi");
    if (!(target > 0.5 && target <= 1.0)) throw ValidationError("target", "0.5 < target <= 1");
    if (!(rel_tol > 0.0)) throw ValidationError("rel_tol", "rel_tol > 0");

    TrialSetup off = c.base;
    off.signal = NoSignal{};
    const auto base_label = point_label("kappa", c.base.protocol.kappa(c.base.params)) + "," +
                            point_label("phi0", c.base.init.phi0);
    const auto reference = detail::run_point(off, c.ensemble, base_label + ",signal=none");

    AmplitudeSearch r;
    r.censored = reference.censored_count;
    r.steps = reference.steps;
    auto eval = [&](double a) {
        TrialSetup on = c.base;
        on.signal = resolve_signal(with_amplitude(c.base.signal, a), on.protocol, c.auto_arrival);
        const auto s = detail::run_point(on, c.ensemble, base_label + "," + point_label("amplitude", a));
        const double v = auc(reference, s).r_auc;
        r.censored += s.censored_count;
        r.steps += s.steps;
        r.trace_amplitudes.push_back(a);
        r.trace_r_auc.push_back(v);
        return v;
    };

    const double auc_lo = eval(lo);
    const double auc_hi = eval(hi);
    if (!(auc_lo < target && auc_hi >= target)) throw BracketError(lo, hi, auc_lo, auc_hi, target);
    while (hi - lo >= rel_tol * 0.5 * (lo + hi)) {
        const double mid = 0.5 * (lo + hi);
        (eval(mid) >= target ? hi : lo) = mid;
    }
    r.lo = lo;
    r.hi = hi;
    r.amplitude = 0.5 * (lo + hi);
    return r;
}

struct PhotonResponse {
    std::vector<double> n_ph_values;
    std::vector<double> r_auc_values;
    double linear_range_end = 0.0;
    double n_ph_max = 0.0;
    std::size_t censored = 0;
    std::uint64_t steps = 0;
};

/// Largest least-squares residual of a straight-line fit to (x, y).
inline double max_linear_residual(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n <= 2) return 0.0;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxx > 0 ? sxy / sxx : 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(y[i] - (my + slope * (x[i] - mx))));
    return worst;
}

/// Largest grid value n >= 1 such that a linear fit over the points in
/// [1, n] has max residual < tol. `n_ph` must be increasing.
inline double linear_range_end(std::span<const double> n_ph, std::span<const double> r_auc, double tol) {
    std::vector<double> xs, ys;
    double end = 0.0;
    for (std::size_t i = 0; i < n_ph.size(); ++i) {
        if (n_ph[i] < 1.0) continue;
        xs.push_back(n_ph[i]);
        ys.push_back(r_auc[i]);
        if (max_linear_residual(xs, ys) < tol) end = n_ph[i];
    }
    return end;
}

/// r_auc against photon number for the campaign's pulse template.
inline PhotonResponse photon_response(const Campaign& c, std::span<const double> n_ph_grid,
                                      double residual_tol = 0.02) {
    if (n_ph_grid.empty()) throw ValidationError("n_ph_grid", "non-empty grid");
    if (!std::is_sorted(n_ph_grid.begin(), n_ph_grid.end()) ||
        std::adjacent_find(n_ph_grid.begin(), n_ph_grid.end()) != n_ph_grid.end())
        throw ValidationError("n_ph_grid", "strictly increasing grid");
    if (!(n_ph_grid.front() >= 0.0)) throw ValidationError("n_ph_grid", "n_ph >= 0");
    const auto* pulse = std::get_if<GaussianPulse>(&c.base.signal);
    if (!pulse) throw ValidationError("signal.kind", "kind pulse for a photon response");

    TrialSetup off = c.base;
    off.signal = NoSignal{};
    const auto base_label = point_label("kappa", c.base.protocol.kappa(c.base.params)) + "," +
                            point_label("phi0", c.base.init.phi0);
    const auto reference = detail::run_point(off, c.ensemble, base_label + ",signal=none");

    PhotonResponse r;
    r.censored = reference.censored_count;
    r.steps = reference.steps;
    for (double n : n_ph_grid) {
        GaussianPulse p = *pulse;
        p.n_photons = n;
        TrialSetup on = c.base;
        on.signal = resolve_signal(p, on.protocol, c.auto_arrival);
        const auto s = detail::run_point(on, c.ensemble, base_label + "," + point_label("n_ph", n));
        r.censored += s.censored_count;
        r.steps += s.steps;
        r.n_ph_values.push_back(n);
        r.r_auc_values.push_back(auc(reference, s).r_auc);
    }
    r.linear_range_end = linear_range_end(r.n_ph_values, r.r_auc_values, residual_tol);
    r.n_ph_max = r.linear_range_end;
    return r;
}

/// r_auc between two ensembles that differ only in noise intensity. The
/// base signal is applied to both.
inline Comparison thermal_robustness(const Campaign& c, double noise_a, double noise_b) {
    if (!(noise_a >= 0.0)) throw ValidationError("noise_intensity", "noise_intensity >= 0");
    if (!(noise_b >= 0.0)) throw ValidationError("noise_intensity_b", "noise_intensity_b >= 0");
    TrialSetup a = c.base;
    a.params = JunctionParams::from_noise(c.base.params.beta(), noise_a);
    a.signal = resolve_signal(c.base.signal, a.protocol, c.auto_arrival);
    TrialSetup b = a;
    b.params = JunctionParams::from_noise(c.base.params.beta(), noise_b);
    Comparison r;
    r.no_signal = detail::run_point(a, c.ensemble, point_label("D", noise_a));
    r.signal = detail::run_point(b, c.ensemble, point_label("D", noise_b));
    r.auc = auc(r.no_signal, r.signal);
    return r;
}

}  // namespace nejtd
