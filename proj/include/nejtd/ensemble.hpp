#pragma once

// Seeded trial ensembles, switching-current histograms, and the escape-rate
// inversion / forward model for slowly swept junctions.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nejtd/error.hpp"
#include "nejtd/trial.hpp"

namespace nejtd {

/// Switching currents of one ensemble, ordered by trial index. Censored
/// trials are counted but carry no value.
struct ScdSample {
    std::vector<double> values;
    std::size_t censored_count = 0;
    std::string label;
    std::string config_digest;
    std::uint64_t master_seed = 0;
    std::size_t n_trials = 0;
    std::uint64_t steps = 0;  ///< telemetry, not part of the sample identity
};

struct EnsembleOptions {
    std::size_t n_trials = 1;
    std::uint64_t master_seed = 0;
    unsigned workers = 0;  ///< 0 = hardware concurrency
};

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

inline constexpr int kLanes = 16;

/// Run `n_trials` independent trials with seeds trial_seed(master_seed, i).
/// The sample is identical for any worker count. A diverging trial aborts
/// the ensemble with TrialFailure naming the lowest failing trial seen.
inline ScdSample run_ensemble(const TrialSetup& setup, const EnsembleOptions& opt) {
    setup.validate();
    if (opt.n_trials < 1) throw ValidationError("n_trials", "n_trials >= 1");

    std::vector<TrialOutcome> outcomes(opt.n_trials);
    std::atomic<std::uint64_t> cursor{0};
    std::atomic<bool> abort{false};
    std::mutex failure_mutex;
    std::optional<TrialFailure> failure;

    auto worker = [&] {
        auto next = [&]() -> std::optional<std::uint64_t> {
            if (abort.load(std::memory_order_relaxed)) return std::nullopt;
            const auto i = cursor.fetch_add(1, std::memory_order_relaxed);
            if (i >= opt.n_trials) return std::nullopt;
            return i;
        };
        auto emit = [&](std::uint64_t i, const TrialOutcome& o) { outcomes[i] = o; };
        try {
            with_kernel_signal(setup.signal, [&](auto sig) {
                LaneEngine<kLanes, decltype(sig)> engine(setup, sig, opt.master_seed);
                engine.run(next, emit);
            });
        } catch (const TrialFailure& f) {
            abort = true;
            std::lock_guard lock(failure_mutex);
            if (!failure || f.trial_index() < failure->trial_index()) failure.emplace(f);
        }
    };

    const unsigned n_workers =
        static_cast<unsigned>(std::min<std::size_t>(resolve_workers(opt.workers), (opt.n_trials + kLanes - 1) / kLanes));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    if (failure) throw *failure;

    ScdSample out;
    out.master_seed = opt.master_seed;
    out.n_trials = opt.n_trials;
    out.values.reserve(opt.n_trials);
    for (const auto& o : outcomes) {
        out.steps += o.steps;
        if (o.event.switched)
            out.values.push_back(o.event.i_sw);
        else
            ++out.censored_count;
    }
    return out;
}

struct Histogram {
    std::vector<double> bin_edges;
    std::vector<double> densities;
    std::size_t n = 0;

    double width(std::size_t k) const { return bin_edges[k + 1] - bin_edges[k]; }
    double center(std::size_t k) const { return 0.5 * (bin_edges[k] + bin_edges[k + 1]); }
    std::size_t bins() const { return densities.size(); }
};

namespace detail {

inline double quantile_sorted(std::span<const double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline std::vector<double> sorted_copy(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    return s;
}

// [lo, hi] with a nonzero span even for constant samples.
inline std::pair<double, double> sample_range(std::span<const double> sorted) {
    double lo = sorted.front();
    double hi = sorted.back();
    if (!(hi > lo)) {
        const double pad = 0.5e-6 * std::max(1.0, std::abs(lo));
        lo -= pad;
        hi += pad;
    }
    return {lo, hi};
}

}  // namespace detail

/// Freedman-Diaconis bin count, 2 IQR n^(-1/3), clamped to [1, 10000].
inline std::size_t freedman_diaconis_bins(std::span<const double> values) {
    if (values.empty()) throw ValidationError("sample", "non-empty sample");
    const auto sorted = detail::sorted_copy(values);
    const double iqr = detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
    const double span = sorted.back() - sorted.front();
    if (!(iqr > 0.0) || !(span > 0.0)) return 1;
    const double h = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
    const double bins = std::ceil(span / h);
    return static_cast<std::size_t>(std::clamp(bins, 1.0, 10000.0));
}

namespace detail {

struct BinnedCounts {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
};

inline BinnedCounts bin_counts(std::span<const double> values, std::size_t bins) {
    if (values.empty()) throw ValidationError("sample", "non-empty sample");
    if (bins < 1) throw ValidationError("bin_count", "bin_count >= 1");
    const auto sorted = sorted_copy(values);
    const auto [lo, hi] = sample_range(sorted);
    BinnedCounts b;
    b.edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k)
        b.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    b.edges.back() = hi;
    b.counts.assign(bins, 0);
    for (double x : sorted) {
        auto k = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins));
        b.counts[std::min(k, bins - 1)]++;
    }
    return b;
}

}  // namespace detail

/// Density histogram over [min, max] of the switched values. Mass is
/// normalized by n_trials, so censored trials reduce the total below 1.
/// Without a bin count the Freedman-Diaconis rule is used.
inline Histogram histogram(const ScdSample& sample, std::optional<std::size_t> bin_count = std::nullopt) {
    if (sample.values.empty()) throw ValidationError("sample", "non-empty sample");
    const std::size_t bins = bin_count.value_or(freedman_diaconis_bins(sample.values));
    auto binned = detail::bin_counts(sample.values, bins);
    Histogram h;
    h.n = sample.values.size();
    h.bin_edges = std::move(binned.edges);
    const double total = static_cast<double>(std::max(sample.n_trials, sample.values.size()));
    h.densities.resize(bins);
    for (std::size_t k = 0; k < bins; ++k)
        h.densities[k] = static_cast<double>(binned.counts[k]) / (total * h.width(k));
    return h;
}

/// Escape rate sampled on a current grid.
struct RateCurve {
    std::vector<double> currents;
    std::vector<double> rates;
};

/// Invert a slow-sweep SCD into escape rates,
/// Gamma(i_k) = v ln(S(i_k) / S(i_k+1)) / delta_i, with S the empirical
/// survival probability at the bin edges (censored trials survive). Rates are
/// reported at bin centers; bins from the first one with no survivors at its
/// upper edge onward are truncated.
inline RateCurve fd_escape_rate(const ScdSample& sample, double sweep_rate,
                                std::optional<std::size_t> bin_count = std::nullopt) {
    if (!(sweep_rate > 0.0)) throw ValidationError("sweep_rate", "sweep_rate > 0");
    if (sample.values.empty()) throw ValidationError("sample", "non-empty sample");
    const std::size_t bins = bin_count.value_or(freedman_diaconis_bins(sample.values));
    const auto binned = detail::bin_counts(sample.values, bins);
    const double total = static_cast<double>(std::max(sample.n_trials, sample.values.size()));

    RateCurve out;
    double survivors = total;  // trials with i_sw >= lower edge of bin k
    for (std::size_t k = 0; k < bins; ++k) {
        const double after = survivors - static_cast<double>(binned.counts[k]);
        if (!(after > 0.0)) break;
        const double width = binned.edges[k + 1] - binned.edges[k];
        out.currents.push_back(0.5 * (binned.edges[k] + binned.edges[k + 1]));
        out.rates.push_back(sweep_rate * std::log(survivors / after) / width);
        survivors = after;
    }
    return out;
}

/// Forward model P(i) = (Gamma(i)/v) exp(-int Gamma/v di') on the curve's
/// grid; the integral starts at the first grid point and uses the trapezoidal
/// rule.
inline std::vector<double> scd_from_rate(const RateCurve& rate, double sweep_rate) {
    if (!(sweep_rate > 0.0)) throw ValidationError("sweep_rate", "sweep_rate > 0");
    if (rate.currents.size() != rate.rates.size()) throw ValidationError("rate", "matching grid lengths");
    std::vector<double> density(rate.rates.size());
    double integral = 0.0;
    for (std::size_t j = 0; j < rate.rates.size(); ++j) {
        if (rate.rates[j] < 0.0) throw ValidationError("rate", "rate >= 0");
        if (j > 0)
            integral += 0.5 * (rate.rates[j] + rate.rates[j - 1]) * (rate.currents[j] - rate.currents[j - 1]) /
                        sweep_rate;
        density[j] = rate.rates[j] / sweep_rate * std::exp(-integral);
    }
    return density;
}

}  // namespace nejtd
