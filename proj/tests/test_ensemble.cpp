#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nejtd/ensemble.hpp"
#include "oracles.hpp"

using namespace nejtd;

namespace {

ScdSample make_sample(std::vector<double> v, std::size_t censored = 0) {
    ScdSample s;
    s.n_trials = v.size() + censored;
    s.censored_count = censored;
    s.values = std::move(v);
    return s;
}

double mass(const Histogram& h) {
    double m = 0.0;
    for (std::size_t k = 0; k < h.bins(); ++k) m += h.densities[k] * h.width(k);
    return m;
}

}  // namespace

TEST(Histogram, ConstantSample) {
    const auto h = histogram(make_sample(std::vector<double>(100, 0.9)), 10);
    int occupied = 0;
    for (std::size_t k = 0; k < h.bins(); ++k)
        if (h.densities[k] > 0) {
            ++occupied;
            EXPECT_NEAR(h.densities[k] * h.width(k), 1.0, 1e-12);
        }
    EXPECT_EQ(occupied, 1);
    EXPECT_EQ(h.n, 100u);
}

TEST(Histogram, UniformSample) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(100000);
    for (auto& x : v) x = u(gen);
    const auto h = histogram(make_sample(v), 20);
    for (double d : h.densities) EXPECT_NEAR(d, 1.0, 0.05);
}

TEST(Histogram, Normalization) {
    std::mt19937_64 gen(5);
    std::lognormal_distribution<double> ln(0.0, 0.7);
    for (std::size_t n : {1u, 2u, 17u, 1000u}) {
        std::vector<double> v(n);
        for (auto& x : v) x = ln(gen);
        const auto h = histogram(make_sample(v));
        EXPECT_NEAR(mass(h), 1.0, 1e-9);
        for (double d : h.densities) EXPECT_GE(d, 0.0);
        for (std::size_t k = 0; k < h.bins(); ++k) EXPECT_LT(h.bin_edges[k], h.bin_edges[k + 1]);
        for (std::size_t bins : {1u, 3u, 50u}) EXPECT_NEAR(mass(histogram(make_sample(v), bins)), 1.0, 1e-9);
    }
    EXPECT_NEAR(mass(histogram(make_sample({0.1, 0.2, 0.3}, 1))), 0.75, 1e-12);
}

TEST(Histogram, Errors) {
    EXPECT_THROW(histogram(make_sample({})), ValidationError);
    EXPECT_THROW(histogram(make_sample({1.0}), 0), ValidationError);
}

TEST(FreedmanDiaconis, Clamped) {
    EXPECT_EQ(freedman_diaconis_bins(std::vector<double>{1.0, 1.0, 1.0}), 1u);
    std::vector<double> v;
    for (int k = 0; k < 1000; ++k) v.push_back(k);
    // IQR 499.5, n^(1/3) = 10 -> h = 99.9, span 999 -> 10 bins
    EXPECT_EQ(freedman_diaconis_bins(v), 10u);
}

TEST(EscapeRate, ConstantRateRecovered) {
    // Constant Gamma0 under sweep v: i_sw exponential with scale v / Gamma0.
    const double v = 1e-3, g0 = 2e-2;
    std::mt19937_64 gen(6);
    std::exponential_distribution<double> e(g0 / v);
    std::vector<double> vals(100000);
    for (auto& x : vals) x = e(gen);
    const auto rate = fd_escape_rate(make_sample(vals), v, 40);
    int checked = 0;
    for (std::size_t k = 0; k < rate.rates.size(); ++k) {
        // well-populated: first bins carry most of the mass
        if (rate.currents[k] > 3.0 * v / g0) break;
        EXPECT_NEAR(rate.rates[k] / g0, 1.0, 0.1) << rate.currents[k];
        ++checked;
    }
    EXPECT_GT(checked, 5);
}

TEST(EscapeRate, MonotoneRateRecovered) {
    const double v = 1e-5;
    const auto s = oracle::exponential_rate_sample(1e-17, 30.0, v, 100000, 7);
    const auto rate = fd_escape_rate(s, v, 40);
    // Populated interior: bins holding at least 1% of the trials.
    const auto h = histogram(s, 40);
    double prev = 0.0;
    int checked = 0;
    for (std::size_t k = 1; k + 1 < rate.rates.size(); ++k) {
        if (h.densities[k] * h.width(k) < 0.01) continue;
        EXPECT_GT(rate.rates[k], prev);
        const double truth = 1e-17 * std::exp(30.0 * rate.currents[k]);
        EXPECT_NEAR(rate.rates[k] / truth, 1.0, 0.15);
        prev = rate.rates[k];
        ++checked;
    }
    EXPECT_GT(checked, 5);
}

TEST(EscapeRate, ZeroSurvivorBinsTruncated) {
    const auto rate = fd_escape_rate(make_sample({0.1, 0.2, 0.3, 0.4}), 1.0, 4);
    EXPECT_EQ(rate.rates.size(), 3u);
    for (double r : rate.rates) EXPECT_GE(r, 0.0);
    EXPECT_THROW(fd_escape_rate(make_sample({0.1}), 0.0), ValidationError);
}

TEST(EscapeRate, CensoredTrialsSurvive) {
    const auto full = fd_escape_rate(make_sample({0.1, 0.2, 0.3, 0.4}, 4), 1.0, 4);
    EXPECT_EQ(full.rates.size(), 4u);
    EXPECT_NEAR(full.rates[0], std::log(8.0 / 7.0) / 0.075, 1e-12);
}

TEST(ScdFromRate, Cases) {
    RateCurve zero{{0.0, 0.5, 1.0}, {0.0, 0.0, 0.0}};
    for (double p : scd_from_rate(zero, 1.0)) EXPECT_EQ(p, 0.0);

    // Constant rate: exponential density with scale v / Gamma0.
    const double v = 0.5, g0 = 2.0;
    RateCurve c;
    for (int k = 0; k <= 1000; ++k) {
        c.currents.push_back(k * 0.005);
        c.rates.push_back(g0);
    }
    const auto p = scd_from_rate(c, v);
    for (std::size_t k = 0; k < p.size(); ++k)
        EXPECT_NEAR(p[k], (g0 / v) * std::exp(-g0 * c.currents[k] / v), 1e-12);

    // Integral <= 1; close to 1 once the rate has blown up before the end.
    RateCurve grow;
    for (int k = 0; k <= 4000; ++k) {
        grow.currents.push_back(k * 2.5e-4);
        grow.rates.push_back(1e-6 * std::exp(25.0 * k * 2.5e-4));
    }
    const auto q = scd_from_rate(grow, 1e-4);
    double total = 0.0;
    for (std::size_t k = 1; k < q.size(); ++k) total += 0.5 * (q[k] + q[k - 1]) * 2.5e-4;
    EXPECT_LE(total, 1.0 + 1e-3);
    EXPECT_NEAR(total, 1.0, 1e-3);

    EXPECT_THROW(scd_from_rate(RateCurve{{0.0}, {-1.0}}, 1.0), ValidationError);
}

TEST(ScdFromRate, RoundtripTotalVariation) {
    const double v = 1e-5;
    const auto s = oracle::exponential_rate_sample(1e-17, 30.0, v, 10000, 8);
    EXPECT_LT(oracle::roundtrip_tv(s, freedman_diaconis_bins(s.values), v), 0.05);
}
