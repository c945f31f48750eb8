#pragma once

// Two-sample distinguishability of switching-current distributions.
//
// Orientation: a signal makes the junction switch earlier, so lower i_sw is
// the "positive" direction. At threshold t, a trial is flagged when
// i_sw <= t; the ROC point is (flagged fraction of the no-signal sample,
// flagged fraction of the signal sample).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "nejtd/ensemble.hpp"
#include "nejtd/error.hpp"

namespace nejtd {

inline constexpr double kDetectionThreshold = 0.7;

/// Right-continuous empirical CDF.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::span<const double> values) : sorted_(values.begin(), values.end()) {
        if (sorted_.empty()) throw ValidationError("sample", "non-empty sample");
        std::sort(sorted_.begin(), sorted_.end());
    }
    explicit EmpiricalCdf(const ScdSample& s) : EmpiricalCdf(std::span<const double>(s.values)) {}

    double operator()(double x) const {
        const auto n = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
        return static_cast<double>(n) / static_cast<double>(sorted_.size());
    }

    std::span<const double> sorted() const { return sorted_; }
    std::size_t size() const { return sorted_.size(); }

private:
    std::vector<double> sorted_;
};

inline EmpiricalCdf empirical_cdf(const ScdSample& s) { return EmpiricalCdf(s); }

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_distance(std::span<const double> a, std::span<const double> b) {
    const EmpiricalCdf fa(a), fb(b);
    const auto sa = fa.sorted(), sb = fb.sorted();
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() || j < sb.size()) {
        // Next breakpoint: advance both past every copy of the smallest value.
        const double x = (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) ? sa[i] : sb[j];
        while (i < sa.size() && sa[i] <= x) ++i;
        while (j < sb.size() && sb[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

inline double ks_distance(const ScdSample& a, const ScdSample& b) { return ks_distance(a.values, b.values); }

struct AucValue {
    double auc_raw;  ///< P(signal i_sw < no-signal i_sw) + P(tie)/2
    double r_auc;    ///< max(auc_raw, 1 - auc_raw)
};

namespace detail {

// Twice the Mann-Whitney count: 2 * #{(x, y): y < x} + #{ties}, x from the
// no-signal sample, y from the signal sample. Integer, hence exact.
inline std::uint64_t twice_mann_whitney(std::span<const double> no_signal, std::span<const double> signal) {
    std::vector<double> xs(no_signal.begin(), no_signal.end()), ys(signal.begin(), signal.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    std::uint64_t twice = 0;
    std::size_t below = 0, upto = 0;
    for (double x : xs) {
        while (below < ys.size() && ys[below] < x) ++below;
        while (upto < ys.size() && ys[upto] <= x) ++upto;
        twice += 2 * below + (upto - below);
    }
    return twice;
}

// count / total with the exact complement property f(c) + f(total - c) == 1.
inline double exact_fraction(std::uint64_t twice_count, std::uint64_t twice_total) {
    if (2 * twice_count <= twice_total)
        return static_cast<double>(twice_count) / static_cast<double>(twice_total);
    return 1.0 - static_cast<double>(twice_total - twice_count) / static_cast<double>(twice_total);
}

}  // namespace detail

inline AucValue auc(std::span<const double> no_signal, std::span<const double> signal) {
    if (no_signal.empty() || signal.empty()) throw ValidationError("sample", "non-empty samples");
    const std::uint64_t twice_total = 2 * static_cast<std::uint64_t>(no_signal.size()) * signal.size();
    const double a = detail::exact_fraction(detail::twice_mann_whitney(no_signal, signal), twice_total);
    return {a, std::max(a, 1.0 - a)};
}

inline AucValue auc(const ScdSample& no_signal, const ScdSample& signal) { return auc(no_signal.values, signal.values); }

inline bool detect(double r_auc, double threshold = kDetectionThreshold) { return r_auc >= threshold; }

struct RocPoint {
    double fpr;
    double tpr;
};

struct RocResult {
    std::vector<RocPoint> points;
    double auc_raw = 0.5;
    double r_auc = 0.5;
    double d_kc = 0.0;
    bool decision = false;
};

/// Exact ROC staircase: one point per unique pooled value plus (0,0).
inline std::vector<RocPoint> roc_points(std::span<const double> no_signal, std::span<const double> signal) {
    if (no_signal.empty() || signal.empty()) throw ValidationError("sample", "non-empty samples");
    std::vector<double> xs(no_signal.begin(), no_signal.end()), ys(signal.begin(), signal.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const double nx = static_cast<double>(xs.size()), ny = static_cast<double>(ys.size());

    std::vector<RocPoint> pts;
    pts.reserve(xs.size() + ys.size() + 1);
    pts.push_back({0.0, 0.0});
    std::size_t i = 0, j = 0;
    while (i < xs.size() || j < ys.size()) {
        const double t = (j == ys.size() || (i < xs.size() && xs[i] <= ys[j])) ? xs[i] : ys[j];
        while (i < xs.size() && xs[i] <= t) ++i;
        while (j < ys.size() && ys[j] <= t) ++j;
        pts.push_back({static_cast<double>(i) / nx, static_cast<double>(j) / ny});
    }
    return pts;
}

/// Trapezoidal area under a ROC polyline.
inline double roc_area(std::span<const RocPoint> pts) {
    double area = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k)
        area += 0.5 * (pts[k].fpr - pts[k - 1].fpr) * (pts[k].tpr + pts[k - 1].tpr);
    return area;
}

inline RocResult roc_curve(std::span<const double> no_signal, std::span<const double> signal,
                           double threshold = kDetectionThreshold) {
    RocResult r;
    r.points = roc_points(no_signal, signal);
    const auto a = auc(no_signal, signal);
    r.auc_raw = a.auc_raw;
    r.r_auc = a.r_auc;
    r.d_kc = ks_distance(no_signal, signal);
    r.decision = detect(r.r_auc, threshold);
    return r;
}

inline RocResult roc_curve(const ScdSample& no_signal, const ScdSample& signal,
                           double threshold = kDetectionThreshold) {
    return roc_curve(no_signal.values, signal.values, threshold);
}

}  // namespace nejtd
