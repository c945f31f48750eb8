#pragma once

// Single-trial integration and the lane-batched engine that runs many
// independent trials side by side. Each trial's arithmetic is identical in
// both paths, so a trial's SwitchEvent depends only on its seed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <variant>

#include "nejtd/junction.hpp"
#include "nejtd/rng.hpp"
#include "nejtd/signal.hpp"

namespace nejtd {

/// How the state is set at i_start.
enum class StartState {
    given,    ///< (phi0, phi_dot0) verbatim
    thermal,  ///< linearized Boltzmann draw in the well nearest phi0
};

/// Everything a trial needs besides its seed, flattened for the kernel.
struct TrialSetup {
    JunctionParams params{1e-4, 5e-4};
    BiasProtocol protocol{};
    InitialCondition init{};
    SignalSpec signal{NoSignal{}};
    SwitchCriterion criterion{};
    StartState start = StartState::given;

    void validate() const {
        protocol.validate();
        init.validate();
        nejtd::validate(signal);
        if (!(criterion.excursion > std::numbers::pi))
            throw ValidationError("switch_excursion", "switch_excursion > pi");
    }
};

/// Substream used for the thermal start draw.
inline constexpr std::uint64_t kStartStream = 1;

inline PhaseState initial_state(const TrialSetup& s, std::uint64_t seed) {
    const double tau0 = s.protocol.tau_start();
    if (s.start == StartState::given) return {tau0, s.init.phi0, s.init.phi_dot0};
    const double bias = s.protocol.i_start;
    const double theta = s.params.theta();
    const double curvature = std::sqrt(1.0 - bias * bias);
    const auto z = normal_pair(substream_key(seed, kStartStream), 0);
    return {tau0, well_minimum(s.init.phi0, bias) + std::sqrt(theta / curvature) * z.first,
            std::sqrt(theta) * z.second};
}

/// Observer for trajectory dumps: called with every accepted state.
using TrajectoryObserver = std::function<void(const PhaseState&)>;

namespace detail {

// Per-lane scalars shared by every lane of one engine.
struct KernelConsts {
    double beta;
    double sigma;
    double v;
    double dt;
    double tau0;
    double i_cap;
    double excursion;
    double sq_half_dt;
};

inline KernelConsts make_consts(const TrialSetup& s) {
    const double dt = s.protocol.dt;
    return {s.params.beta(),
            std::sqrt(s.params.noise_intensity()),
            s.protocol.sweep_rate,
            dt,
            s.protocol.tau_start(),
            s.protocol.i_cap,
            s.criterion.excursion,
            std::sqrt(0.5 * dt)};
}

enum LaneFlag : std::int64_t { kRunning = 0, kSwitched = 1, kCensored = 2, kDiverged = 4 };

// One integration step for one lane. All arguments are lane-local; the
// function is inlined into the lane loop so the loop vectorizes.
template <class Sig>
inline std::int64_t lane_step(const KernelConsts& c, const Sig& sig, std::uint64_t key, std::uint64_t k,
                              double ref, double& phi, double& phi_dot, double& sig_now, double& escaped,
                              double& escape_tau) {
    constexpr double pi = std::numbers::pi;
    const double tau = c.tau0 + static_cast<double>(static_cast<std::int64_t>(k)) * c.dt;
    const double tau_next = c.tau0 + static_cast<double>(static_cast<std::int64_t>(k + 1)) * c.dt;
    const double tau_mid = tau + 0.5 * c.dt;
    double sig_mid = 0.0;
    double sig_next = 0.0;
    if constexpr (Sig::active) {
        sig_mid = sig(tau_mid);
        sig_next = sig(tau_next);
    }
    const double f0 = c.v * tau + sig_now;
    const double fm = c.v * tau_mid + sig_mid;
    const double f1 = c.v * tau_next + sig_next;

    const auto z = normal_pair(key, k);
    const double rel_old = phi - ref;
    advance(phi, phi_dot, c.beta, c.dt, f0, fm, f1, c.sigma, c.sq_half_dt * z.first, c.sq_half_dt * z.second);
    sig_now = sig_next;
    const double rel = phi - ref;

    // First passage over ref + pi marks the escape from the starting well;
    // the crossing time is interpolated within the step.
    const bool crossing = escaped == 0.0 && rel >= pi;
    const double frac = (pi - rel_old) / (rel - rel_old);
    escape_tau = crossing ? tau + frac * c.dt : escape_tau;
    escaped = crossing ? 1.0 : escaped;

    const bool finite = (phi - phi) == 0.0 && (phi_dot - phi_dot) == 0.0;
    std::int64_t flag = rel >= c.excursion ? kSwitched : kRunning;
    flag = c.v * tau_next > c.i_cap ? flag | kCensored : flag;
    flag = finite ? flag : kDiverged;
    return flag;
}

template <class Sig>
inline double initial_signal(const Sig& sig, double tau) {
    if constexpr (Sig::active) return sig(tau);
    return 0.0;
}

inline SwitchEvent finish(const KernelConsts& c, std::int64_t flag, double escape_tau, std::uint64_t k,
                          std::uint64_t seed) {
    SwitchEvent ev;
    ev.seed = seed;
    if (flag & kSwitched) {
        ev.switched = true;
        ev.tau_sw = escape_tau;
        ev.i_sw = c.v * escape_tau;
    } else {
        ev.switched = false;
        ev.tau_sw = c.tau0 + static_cast<double>(k) * c.dt;
        ev.i_sw = c.v * ev.tau_sw;
    }
    return ev;
}

}  // namespace detail

/// Result of a single trial plus its step count.
struct TrialOutcome {
    SwitchEvent event;
    std::uint64_t steps = 0;
};

/// Batched engine: W lanes advance in lockstep; a lane that finishes its
/// trial is refilled from `next` immediately. Results are reported through
/// `emit(trial_index, outcome)` in completion order.
template <int W, class Sig>
class LaneEngine {
public:
    LaneEngine(const TrialSetup& setup, Sig sig, std::uint64_t master_seed)
        : setup_(setup), c_(detail::make_consts(setup)), sig_(sig), master_(master_seed) {
        ref_ = switch_reference(setup.init, setup.protocol);
    }

    /// `next()` returns the next trial index or nullopt; `emit` receives
    /// (index, TrialOutcome). Throws TrialFailure on divergence.
    template <class Next, class Emit>
    void run(Next&& next, Emit&& emit) {
        int live = 0;
        for (int l = 0; l < W; ++l) live += load(l, next()) ? 1 : 0;
        while (live > 0) {
            std::int64_t any = 0;
            for (int l = 0; l < W; ++l) {
                flag_[l] = detail::lane_step(c_, sig_, key_[l], k_[l], ref_, phi_[l], phid_[l], sig_now_[l],
                                             escaped_[l], escape_tau_[l]);
                k_[l] += 1;
                any |= flag_[l] & active_[l];
            }
            if (any == 0) continue;
            for (int l = 0; l < W; ++l) {
                if (!(flag_[l] & active_[l])) continue;
                if (flag_[l] & detail::kDiverged)
                    throw TrialFailure(index_[l], key_[l], c_.tau0 + static_cast<double>(k_[l]) * c_.dt);
                emit(index_[l], TrialOutcome{detail::finish(c_, flag_[l], escape_tau_[l], k_[l], key_[l]), k_[l]});
                if (!load(l, next())) --live;
            }
        }
    }

private:
    bool load(int l, std::optional<std::uint64_t> index) {
        if (!index) {
            park(l);
            return false;
        }
        const std::uint64_t seed = trial_seed(master_, *index);
        const PhaseState s0 = initial_state(setup_, seed);
        index_[l] = *index;
        key_[l] = seed;
        k_[l] = 0;
        phi_[l] = s0.phi;
        phid_[l] = s0.phi_dot;
        sig_now_[l] = detail::initial_signal(sig_, c_.tau0);
        escaped_[l] = 0.0;
        escape_tau_[l] = 0.0;
        active_[l] = -1;
        return true;
    }

    void park(int l) {
        index_[l] = 0;
        key_[l] = 0;
        k_[l] = 0;
        phi_[l] = ref_;
        phid_[l] = 0.0;
        sig_now_[l] = 0.0;
        escaped_[l] = 0.0;
        escape_tau_[l] = 0.0;
        active_[l] = 0;
    }

    TrialSetup setup_;
    detail::KernelConsts c_;
    Sig sig_;
    std::uint64_t master_;
    double ref_ = 0.0;

    alignas(64) std::array<double, W> phi_{};
    alignas(64) std::array<double, W> phid_{};
    alignas(64) std::array<double, W> sig_now_{};
    alignas(64) std::array<double, W> escaped_{};
    alignas(64) std::array<double, W> escape_tau_{};
    alignas(64) std::array<std::uint64_t, W> key_{};
    alignas(64) std::array<std::uint64_t, W> k_{};
    alignas(64) std::array<std::int64_t, W> flag_{};
    alignas(64) std::array<std::int64_t, W> active_{};
    std::array<std::uint64_t, W> index_{};
};

/// Dispatch `fn(kernel_signal)` on the runtime signal variant.
template <class Fn>
decltype(auto) with_kernel_signal(const SignalSpec& spec, Fn&& fn) {
    return std::visit([&](const auto& s) -> decltype(auto) { return fn(signal_kernel::make(s)); }, spec);
}

/// Integrate one trial from i_start until it switches or reaches i_cap.
/// `seed` is the trial's own key (see trial_seed()). If `observer` is set it
/// receives every `stride`-th state, including the first and last.
inline TrialOutcome run_trial_outcome(const TrialSetup& setup, std::uint64_t seed,
                                      const TrajectoryObserver& observer = {}, std::uint64_t stride = 1) {
    setup.validate();
    return with_kernel_signal(setup.signal, [&](auto sig) {
        const auto c = detail::make_consts(setup);
        const double ref = switch_reference(setup.init, setup.protocol);
        const PhaseState s0 = initial_state(setup, seed);
        double phi = s0.phi, phid = s0.phi_dot, sig_now = detail::initial_signal(sig, c.tau0);
        double escaped = 0.0, escape_tau = 0.0;
        if (observer) observer(s0);
        if (stride == 0) stride = 1;
        for (std::uint64_t k = 0;; ++k) {
            const auto flag = detail::lane_step(c, sig, seed, k, ref, phi, phid, sig_now, escaped, escape_tau);
            const bool done = flag != detail::kRunning;
            if (observer && (((k + 1) % stride) == 0 || done))
                observer(PhaseState{c.tau0 + static_cast<double>(k + 1) * c.dt, phi, phid});
            if (flag & detail::kDiverged) throw TrialFailure(0, seed, c.tau0 + static_cast<double>(k + 1) * c.dt);
            if (done) return TrialOutcome{detail::finish(c, flag, escape_tau, k + 1, seed), k + 1};
        }
    });
}

inline SwitchEvent run_trial(const TrialSetup& setup, std::uint64_t seed) {
    return run_trial_outcome(setup, seed).event;
}

}  // namespace nejtd
