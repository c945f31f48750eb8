// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// NEJTD_ACCEPTANCE_TRIALS overrides the ensemble size for smoke runs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nejtd/bundle.hpp"
#include "oracles.hpp"

using namespace nejtd;

namespace {

constexpr double kBeta = 1e-4;
constexpr double kNoise = 1e-7;
constexpr std::uint64_t kSeed = 20240601;

std::size_t n_trials() {
    if (const char* e = std::getenv("NEJTD_ACCEPTANCE_TRIALS")) return std::strtoull(e, nullptr, 10);
    return 5000;
}

Campaign base(double kappa, double phi0, SignalSpec sig = NoSignal{}) {
    Campaign c;
    c.base.params = JunctionParams::from_noise(kBeta, kNoise);
    c.base.protocol = BiasProtocol::from_kappa(kappa, c.base.params);
    c.base.init = {phi0, 0.0};
    c.base.signal = sig;
    c.ensemble = {n_trials(), kSeed, 0};
    return c;
}

struct Check {
    bool ok = true;
    std::ostringstream detail;
    void expect(bool cond, const std::string& what) {
        ok &= cond;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (cond ? "" : " [x]");
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool report(int id, const std::string& name, Check& c, std::chrono::steady_clock::time_point t0) {
    std::printf("%s criterion %d (%s): %s (%.0f s)\n", c.ok ? "PASS" : "FAIL", id, name.c_str(),
                c.detail.str().c_str(), seconds_since(t0));
    std::fflush(stdout);
    return c.ok;
}

// AUC between two ensembles that differ only in phi0, no signal.
AucValue phi0_contrast(double kappa, std::size_t& censored) {
    const auto a = base(kappa, 0.0), b = base(kappa, 0.2);
    const auto sa = detail::run_point(a.base, a.ensemble, "phi0=0");
    const auto sb = detail::run_point(b.base, b.ensemble, "phi0=0.2");
    censored += sa.censored_count + sb.censored_count;
    return auc(sa, sb);
}

bool regime_dichotomy() {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    std::size_t censored = 0;
    const auto fast = phi0_contrast(5.0, censored);
    c.expect(fast.auc_raw >= 0.70, "kappa=5 AUC " + fmt("%.4f", fast.auc_raw) + " >= 0.70");
    const auto slow = phi0_contrast(0.1, censored);
    c.expect(slow.auc_raw <= 0.55, "kappa=0.1 AUC " + fmt("%.4f", slow.auc_raw) + " <= 0.55");
    c.expect(censored == 0, "censored " + std::to_string(censored));
    return report(1, "regime dichotomy", c, t0);
}

bool thermal_insensitivity() {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    const auto ej = thermal_robustness(base(0.2, 0.1), kNoise, 2 * kNoise);
    c.expect(ej.auc.r_auc >= 0.60, "kappa=0.2 r_auc " + fmt("%.4f", ej.auc.r_auc) + " >= 0.60");
    const auto nej = thermal_robustness(base(5.0, 0.1), kNoise, 2 * kNoise);
    c.expect(nej.auc.r_auc <= 0.56, "kappa=5 r_auc " + fmt("%.4f", nej.auc.r_auc) + " <= 0.56");
    const auto censored = ej.no_signal.censored_count + ej.signal.censored_count + nej.no_signal.censored_count +
                          nej.signal.censored_count;
    c.expect(censored == 0, "censored " + std::to_string(censored));
    return report(2, "thermal insensitivity", c, t0);
}

bool cw_detection() {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    const ContinuousWave cw{0.003, 1.0};
    std::size_t censored = 0;
    auto run = [&](double kappa, double phi0) {
        const auto r = compare(base(kappa, phi0, cw));
        censored += r.no_signal.censored_count + r.signal.censored_count;
        return r.auc.r_auc;
    };
    const double strong = run(5.0, 0.2);
    c.expect(strong >= 0.95, "kappa=5 phi0=0.2 r_auc " + fmt("%.4f", strong) + " >= 0.95");
    const double mid = run(5.0, 0.1);
    c.expect(mid >= 0.72 && mid <= 0.92, "kappa=5 phi0=0.1 r_auc " + fmt("%.4f", mid) + " in [0.72, 0.92]");
    const double slow = run(0.2, 0.1);
    c.expect(slow <= 0.68, "kappa=0.2 r_auc " + fmt("%.4f", slow) + " <= 0.68");
    c.expect(censored == 0, "censored " + std::to_string(censored));
    return report(3, "CW detection", c, t0);
}

bool sensitivity_threshold() {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    constexpr double kReference = 2.91e-4;
    const std::vector<double> phi0_grid{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    const auto sweep = sweep_phi0(base(1.43, 0.0, ContinuousWave{kReference, 1.0}), phi0_grid);
    std::size_t censored = 0;
    for (auto n : sweep.censored) censored += n;
    const double phi0 = sweep.axis_values[sweep.best_index];
    c.expect(true, "phi0* " + fmt("%g", phi0) + " (r_auc " + fmt("%.4f", sweep.best_value) + ")");
    try {
        const auto r = min_detectable_amplitude(base(1.43, phi0, ContinuousWave{kReference, 1.0}), 2e-5, 2e-3);
        censored += r.censored;
        const double ratio = r.amplitude / kReference;
        c.expect(ratio >= 0.5 && ratio <= 2.0, "i_min " + fmt("%.4g", r.amplitude) + " within x2 of 2.91e-4");
    } catch (const BracketError& e) {
        c.expect(false, std::string("bracket: ") + e.what());
    }
    const double ic = 1e-6;
    const PhysicalDevice device(ic, 1e-12, 100.0, 0.5);
    const double rel = std::abs(min_detectable_power(kReference, device) / (8.4681e-6 * ic * ic) - 1.0);
    c.expect(rel <= 1e-9, "P_min rel err " + fmt("%.2e", rel) + " <= 1e-9");
    c.expect(censored == 0, "censored " + std::to_string(censored));
    return report(4, "sensitivity threshold", c, t0);
}

bool pulse_detection() {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    std::size_t censored = 0;
    const auto big = compare(base(5.0, 0.2, GaussianPulse{1000.0, 0.005, 1.0, 1.0, 0.0}));
    censored += big.no_signal.censored_count + big.signal.censored_count;
    c.expect(big.auc.r_auc >= 0.90, "N=1000 r_auc " + fmt("%.4f", big.auc.r_auc) + " >= 0.90");

    const std::vector<double> grid{0, 1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 40};
    const auto r = photon_response(base(8.6, 0.05, GaussianPulse{1.0, 0.005, 1.0, 356.0, 0.0}), grid);
    censored += r.censored;
    std::ostringstream curve;
    for (std::size_t k = 0; k < grid.size(); ++k) curve << (k ? " " : "") << grid[k] << ":" << fmt("%.3f", r.r_auc_values[k]);
    std::printf("  photon response %s\n", curve.str().c_str());
    c.expect(detect(r.r_auc_values[1]), "detect(N=1) r_auc " + fmt("%.4f", r.r_auc_values[1]));
    c.expect(std::abs(r.n_ph_max - 15.0) <= 5.0, "n_ph_max " + fmt("%g", r.n_ph_max) + " in 15 +/- 5");
    c.expect(censored == 0, "censored " + std::to_string(censored));
    return report(5, "pulse detection", c, t0);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool property_suite() {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    const double order = oracle::strong_order_ratio(100, 11);
    c.expect(order >= 1.8, "strong-order ratio " + fmt("%.3f", order) + " >= 1.8");
    const double drift = std::max(oracle::energy_drift(0.01, 100.0, 0.01), oracle::energy_drift(1.0, 100.0, 0.01));
    c.expect(drift < 1e-6, "energy drift " + fmt("%.2e", drift) + " < 1e-6");
    const double var = oracle::equilibrium_variance_ratio(5e-4, 0.5, 0.05, 8, 200.0, 8000.0, 5);
    c.expect(std::abs(var - 1.0) <= 0.1, "variance ratio " + fmt("%.4f", var) + " within 10%");

    std::mt19937_64 gen(99);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    bool self_half = true;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x(20), y(20);
        for (auto& v : x) v = nd(gen);
        for (auto& v : y) v = nd(gen) - 0.5;
        worst = std::max(worst, std::abs(auc(x, y).auc_raw - oracle::brute_auc(x, y)));
        self_half &= auc(x, x).auc_raw == 0.5;
    }
    c.expect(worst <= 1e-12, "AUC vs brute force " + fmt("%.1e", worst) + " <= 1e-12");
    c.expect(self_half, "AUC(a,a) == 0.5");

    const auto s = oracle::exponential_rate_sample(1e-17, 30.0, 1e-5, 10000, 8);
    const double tv = oracle::roundtrip_tv(s, freedman_diaconis_bins(s.values), 1e-5);
    c.expect(tv < 0.05, "FD roundtrip TV " + fmt("%.4f", tv) + " < 0.05");

    auto cfg = parse_config_string("[bias]\nkappa=5\n[initial]\nphi0=0.2\n[signal]\nkind=cw\namplitude=0.003\n"
                                   "[ensemble]\nn_trials=256\nmaster_seed=5\n[campaign]\ntype=roc\n");
    const auto root = std::filesystem::temp_directory_path() / ("nejtd_acceptance_" + std::to_string(::getpid()));
    cfg.workers = 1;
    write_bundle(run_campaign(cfg), root / "w1");
    cfg.workers = 4;
    write_bundle(run_campaign(cfg), root / "w4");
    bool same = true;
    for (const auto& e : std::filesystem::directory_iterator(root / "w1"))
        if (e.path().filename() != "telemetry.json") same &= slurp(e.path()) == slurp(root / "w4" / e.path().filename());
    std::filesystem::remove_all(root);
    c.expect(same, "bundles byte-identical at workers 1 and 4");
    return report(6, "property suite", c, t0);
}

}  // namespace

int main() {
    std::printf("acceptance: %zu trials per ensemble, master seed %llu\n", n_trials(),
                static_cast<unsigned long long>(kSeed));
    std::fflush(stdout);
    bool ok = true;
    ok &= property_suite();
    ok &= regime_dichotomy();
    ok &= thermal_insensitivity();
    ok &= cw_detection();
    ok &= sensitivity_threshold();
    ok &= pulse_detection();
    return ok ? 0 : 1;
}
