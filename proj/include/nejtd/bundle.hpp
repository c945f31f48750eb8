#pragma once

// Result bundles: run a configured campaign, write its products atomically
// to one directory, and re-read them for plot-data emission.
//
// Bundle layout:
//   summary.json           config echo, digest, seed, campaign products
//   telemetry.json         wall clock, step counts, worker count
//   samples_<label>.txt    one i_sw per row (when samples are kept)
//
// Everything except telemetry.json is a pure function of (config, seed).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <unistd.h>
#include <vector>

#include "json.hpp"
#include "nejtd/campaign.hpp"
#include "nejtd/config.hpp"
#include "nejtd/ensemble.hpp"
#include "nejtd/metrics.hpp"

namespace nejtd {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfigError = 2,
    kExitRuntimeFailure = 3,
    kExitDetectionNegative = 4,
};

using json = nlohmann::ordered_json;

struct Bundle {
    json summary;
    json telemetry;
    std::vector<ScdSample> samples;  ///< written as samples_<label>.txt
    bool detection_negative = false;
};

namespace detail {

inline std::string file_safe(const std::string& label) {
    std::string out;
    for (char ch : label) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                        ch == '.' || ch == '-' || ch == '_' || ch == '=';
        out += ok ? ch : '_';
    }
    return out;
}

inline json sample_stats(const ScdSample& s) {
    json j;
    j["label"] = s.label;
    j["n_trials"] = s.n_trials;
    j["censored_count"] = s.censored_count;
    if (!s.values.empty()) {
        const auto sorted = sorted_copy(s.values);
        double sum = 0.0;
        for (double x : s.values) sum += x;
        const double mean = sum / static_cast<double>(s.values.size());
        double ss = 0.0;
        for (double x : s.values) ss += (x - mean) * (x - mean);
        j["mean"] = mean;
        j["std"] = s.values.size() > 1 ? std::sqrt(ss / static_cast<double>(s.values.size() - 1)) : 0.0;
        j["min"] = sorted.front();
        j["median"] = quantile_sorted(sorted, 0.5);
        j["max"] = sorted.back();
    }
    return j;
}

inline json histogram_json(const ScdSample& s, std::optional<std::size_t> bins) {
    if (s.values.empty()) return nullptr;
    const auto h = histogram(s, bins);
    json j;
    j["label"] = s.label;
    j["bin_edges"] = h.bin_edges;
    j["densities"] = h.densities;
    return j;
}

inline json roc_json(const RocResult& r, double threshold) {
    json j;
    j["auc_raw"] = r.auc_raw;
    j["r_auc"] = r.r_auc;
    j["d_kc"] = r.d_kc;
    j["threshold"] = threshold;
    j["decision"] = r.decision;
    json fpr = json::array(), tpr = json::array();
    for (const auto& p : r.points) {
        fpr.push_back(p.fpr);
        tpr.push_back(p.tpr);
    }
    j["fpr"] = std::move(fpr);
    j["tpr"] = std::move(tpr);
    return j;
}

inline json sweep_json(const SweepResult& r) {
    json j;
    j["axis_name"] = r.axis_name;
    j["axis_values"] = r.axis_values;
    j["r_auc_values"] = r.r_auc_values;
    j["auc_raw_values"] = r.auc_raw_values;
    j["censored"] = r.censored;
    j["best_index"] = r.best_index;
    j["best_axis_value"] = r.axis_values[r.best_index];
    j["best_value"] = r.best_value;
    return j;
}

inline Campaign make_campaign(const ExperimentConfig& cfg) {
    Campaign c;
    c.base = cfg.setup;
    c.ensemble = {cfg.n_trials, cfg.master_seed, cfg.workers};
    c.auto_arrival = cfg.auto_arrival;
    c.threshold = cfg.campaign.threshold;
    return c;
}

}  // namespace detail

/// Execute the configured campaign in memory.
inline Bundle run_campaign(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto digest = config_digest(cfg);
    const auto c = detail::make_campaign(cfg);
    const auto& cc = cfg.campaign;

    Bundle b;
    json results;
    std::uint64_t steps = 0;
    std::size_t censored = 0;

    auto add_sample = [&](ScdSample s) {
        s.config_digest = digest;
        steps += s.steps;
        censored += s.censored_count;
        results["ensembles"].push_back(detail::sample_stats(s));
        results["histograms"].push_back(detail::histogram_json(s, cc.bins));
        if (cfg.samples_kept()) b.samples.push_back(std::move(s));
    };
    auto add_pair = [&](Comparison cmp) {
        const auto roc = roc_curve(cmp.no_signal, cmp.signal, cc.threshold);
        results["roc"] = detail::roc_json(roc, cc.threshold);
        add_sample(std::move(cmp.no_signal));
        add_sample(std::move(cmp.signal));
        return roc.decision;
    };

    switch (cc.type) {
        case CampaignType::scd: {
            TrialSetup s = c.base;
            s.signal = resolve_signal(s.signal, s.protocol, c.auto_arrival);
            auto sample = detail::run_point(s, c.ensemble,
                                            point_label("kappa", s.protocol.kappa(s.params)) + "," +
                                                point_label("phi0", s.init.phi0) + ",signal=" + signal_kind(s.signal));
            if (!sample.values.empty()) {
                const auto rate = fd_escape_rate(sample, s.protocol.sweep_rate, cc.bins);
                results["escape_rate"] = {{"currents", rate.currents}, {"rates", rate.rates}};
            }
            add_sample(std::move(sample));
            break;
        }
        case CampaignType::roc: {
            if (cc.compare_phi0) {
                Campaign a = c;
                a.base.signal = NoSignal{};
                TrialSetup other = a.base;
                other.init.phi0 = *cc.compare_phi0;
                Comparison cmp;
                cmp.no_signal = detail::run_point(a.base, c.ensemble, point_label("phi0", a.base.init.phi0));
                cmp.signal = detail::run_point(other, c.ensemble, point_label("phi0", other.init.phi0));
                b.detection_negative = !add_pair(std::move(cmp));
            } else {
                b.detection_negative = !add_pair(compare(c, point_label("phi0", c.base.init.phi0)));
            }
            break;
        }
        case CampaignType::thermal_robustness: {
            add_pair(thermal_robustness(c, c.base.params.noise_intensity(), *cc.noise_intensity_b));
            break;
        }
        case CampaignType::sweep_kappa:
        case CampaignType::sweep_phi0: {
            const auto r = cc.type == CampaignType::sweep_kappa ? sweep_kappa(c, cc.grid) : sweep_phi0(c, cc.grid);
            steps += r.steps;
            for (auto n : r.censored) censored += n;
            results["sweep"] = detail::sweep_json(r);
            break;
        }
        case CampaignType::min_amplitude: {
            const auto r = min_detectable_amplitude(c, cc.bracket_lo, cc.bracket_hi, cc.target, cc.rel_tol);
            steps += r.steps;
            censored += r.censored;
            results["min_amplitude"] = {{"amplitude", r.amplitude},       {"bracket_lo", r.lo},
                                        {"bracket_hi", r.hi},             {"target", cc.target},
                                        {"trace_amplitudes", r.trace_amplitudes},
                                        {"trace_r_auc", r.trace_r_auc}};
            break;
        }
        case CampaignType::photon_response: {
            const auto r = photon_response(c, cc.grid, cc.residual_tol);
            steps += r.steps;
            censored += r.censored;
            results["response"] = {{"n_ph_values", r.n_ph_values},
                                   {"r_auc_values", r.r_auc_values},
                                   {"linear_range_end", r.linear_range_end},
                                   {"n_ph_max", r.n_ph_max},
                                   {"residual_tol", cc.residual_tol}};
            break;
        }
    }

    b.summary["config_digest"] = digest;
    b.summary["master_seed"] = cfg.master_seed;
    b.summary["campaign"] = to_string(cc.type);
    b.summary["config"] = canonical_text(cfg, true);
    b.summary["censored_total"] = censored;
    b.summary["detection_negative"] = b.detection_negative;
    b.summary["results"] = std::move(results);
    json files = json::array();
    for (const auto& s : b.samples) files.push_back("samples_" + detail::file_safe(s.label) + ".txt");
    b.summary["sample_files"] = std::move(files);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    b.telemetry["config_digest"] = digest;
    b.telemetry["master_seed"] = cfg.master_seed;
    b.telemetry["wall_seconds"] = wall;
    b.telemetry["steps"] = steps;
    b.telemetry["ns_per_step"] = steps ? wall * 1e9 / static_cast<double>(steps) : 0.0;
    b.telemetry["workers"] = resolve_workers(cfg.workers);
    return b;
}

// ---------------------------------------------------------------- files

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    out.close();
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

inline std::string sample_file_text(const ScdSample& s) {
    std::ostringstream os;
    os << "# label = " << s.label << '\n';
    os << "# config_digest = " << s.config_digest << '\n';
    os << "# master_seed = " << s.master_seed << '\n';
    os << "# n_trials = " << s.n_trials << '\n';
    os << "# censored_count = " << s.censored_count << '\n';
    os << "# i_sw [I_c]\n";
    for (double x : s.values) os << format_number(x) << '\n';
    return os.str();
}

}  // namespace detail

/// Write the bundle into `dir` via a sibling temporary directory and a
/// rename. An existing bundle at `dir` is replaced; on failure nothing is
/// left behind.
inline void write_bundle(const Bundle& b, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const fs::path target = fs::absolute(dir);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const auto pid = std::to_string(::getpid());
    const fs::path tmp = target.string() + ".tmp-" + pid;
    const fs::path old = target.string() + ".old-" + pid;
    fs::remove_all(tmp);
    try {
        fs::create_directory(tmp);
        detail::write_text(tmp / "summary.json", b.summary.dump(1) + "\n");
        detail::write_text(tmp / "telemetry.json", b.telemetry.dump(1) + "\n");
        for (const auto& s : b.samples)
            detail::write_text(tmp / ("samples_" + detail::file_safe(s.label) + ".txt"), detail::sample_file_text(s));
        const bool replacing = fs::exists(target);
        if (replacing) fs::rename(target, old);
        fs::rename(tmp, target);
        if (replacing) fs::remove_all(old);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(tmp, ec);
        throw;
    }
}

inline json read_summary(const std::filesystem::path& bundle_dir) {
    std::ifstream in(bundle_dir / "summary.json");
    if (!in) throw std::runtime_error("no summary.json in " + bundle_dir.string());
    return json::parse(in);
}

enum class PlotKind { histogram, roc, sweep, response };

inline std::optional<PlotKind> parse_plot_kind(std::string_view s) {
    if (s == "histogram") return PlotKind::histogram;
    if (s == "roc") return PlotKind::roc;
    if (s == "sweep") return PlotKind::sweep;
    if (s == "response") return PlotKind::response;
    return std::nullopt;
}

/// The requested product is absent from the bundle.
class MissingProduct : public std::runtime_error {
public:
    explicit MissingProduct(const std::string& what)
        : std::runtime_error("bundle has no " + what + " product") {}
};

/// Write columnar plot files for one product of a bundle into `out_dir` and
/// return their paths.
inline std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& bundle_dir, PlotKind which,
                                                         const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    const auto summary = read_summary(bundle_dir);
    const auto& results = summary.at("results");
    fs::create_directories(out_dir);

    auto header = [&](std::ostringstream& os, const std::string& title, const std::string& columns) {
        os << "# " << title << '\n';
        os << "# config_digest = " << summary.at("config_digest").get<std::string>() << '\n';
        os << "# master_seed = " << summary.at("master_seed").get<std::uint64_t>() << '\n';
        os << "# " << columns << '\n';
    };
    auto num = [](const json& v) { return format_number(v.get<double>()); };

    std::vector<fs::path> written;
    switch (which) {
        case PlotKind::histogram: {
            if (!results.contains("histograms")) throw MissingProduct("histogram");
            for (const auto& h : results.at("histograms")) {
                if (h.is_null()) continue;
                const auto label = h.at("label").get<std::string>();
                const auto& edges = h.at("bin_edges");
                const auto& dens = h.at("densities");
                std::ostringstream os;
                header(os, "histogram " + label, "bin_center [I_c]  density [1/I_c]  bin_width [I_c]");
                for (std::size_t k = 0; k < dens.size(); ++k) {
                    const double lo = edges[k].get<double>(), hi = edges[k + 1].get<double>();
                    os << format_number(0.5 * (lo + hi)) << ' ' << num(dens[k]) << ' ' << format_number(hi - lo)
                       << '\n';
                }
                const auto p = out_dir / ("histogram_" + detail::file_safe(label) + ".txt");
                detail::write_text(p, os.str());
                written.push_back(p);
            }
            if (written.empty()) throw MissingProduct("histogram");
            break;
        }
        case PlotKind::roc: {
            if (!results.contains("roc")) throw MissingProduct("roc");
            const auto& r = results.at("roc");
            std::ostringstream os;
            header(os, "roc r_auc = " + num(r.at("r_auc")) + " auc_raw = " + num(r.at("auc_raw")),
                   "false_positive_rate  true_positive_rate");
            for (std::size_t k = 0; k < r.at("fpr").size(); ++k)
                os << num(r.at("fpr")[k]) << ' ' << num(r.at("tpr")[k]) << '\n';
            const auto p = out_dir / "roc.txt";
            detail::write_text(p, os.str());
            written.push_back(p);
            break;
        }
        case PlotKind::sweep: {
            if (!results.contains("sweep")) throw MissingProduct("sweep");
            const auto& r = results.at("sweep");
            const auto axis = r.at("axis_name").get<std::string>();
            std::ostringstream os;
            header(os, "sweep over " + axis, axis + " [dimensionless]  r_auc  auc_raw");
            for (std::size_t k = 0; k < r.at("axis_values").size(); ++k)
                os << num(r.at("axis_values")[k]) << ' ' << num(r.at("r_auc_values")[k]) << ' '
                   << num(r.at("auc_raw_values")[k]) << '\n';
            const auto p = out_dir / ("sweep_" + axis + ".txt");
            detail::write_text(p, os.str());
            written.push_back(p);
            break;
        }
        case PlotKind::response: {
            if (!results.contains("response")) throw MissingProduct("response");
            const auto& r = results.at("response");
            std::ostringstream os;
            header(os, "photon response n_ph_max = " + num(r.at("n_ph_max")), "n_ph [photons]  r_auc");
            for (std::size_t k = 0; k < r.at("n_ph_values").size(); ++k)
                os << num(r.at("n_ph_values")[k]) << ' ' << num(r.at("r_auc_values")[k]) << '\n';
            const auto p = out_dir / "response.txt";
            detail::write_text(p, os.str());
            written.push_back(p);
            break;
        }
    }
    return written;
}

/// Re-run one trial of the configured ensemble and write its trajectory
/// (every `stride`-th step) as columns tau, phi, phi_dot, i_b.
inline SwitchEvent replay_trial(const ExperimentConfig& cfg, std::uint64_t trial_index,
                                std::optional<std::uint64_t> seed_override, std::uint64_t stride,
                                const std::filesystem::path& out_file) {
    TrialSetup s = cfg.setup;
    s.signal = resolve_signal(s.signal, s.protocol, cfg.auto_arrival);
    const std::uint64_t seed = seed_override.value_or(trial_seed(cfg.master_seed, trial_index));
    std::ostringstream body;
    const auto outcome = run_trial_outcome(
        s, seed,
        [&](const PhaseState& st) {
            body << format_number(st.tau) << ' ' << format_number(st.phi) << ' ' << format_number(st.phi_dot)
                 << ' ' << format_number(s.protocol.bias(st.tau)) << '\n';
        },
        stride);
    const auto& ev = outcome.event;
    std::ostringstream os;
    os << "# replay of trial " << trial_index << '\n';
    os << "# config_digest = " << config_digest(cfg) << '\n';
    os << "# master_seed = " << cfg.master_seed << '\n';
    os << "# trial_seed = " << seed << '\n';
    os << "# switched = " << (ev.switched ? "true" : "false") << " i_sw = " << format_number(ev.i_sw)
       << " tau_sw = " << format_number(ev.tau_sw) << " steps = " << outcome.steps << '\n';
    os << "# tau [1/omega_J]  phi [rad]  phi_dot [omega_J]  i_b [I_c]\n";
    os << body.str();
    if (out_file.has_parent_path()) std::filesystem::create_directories(out_file.parent_path());
    const auto tmp = out_file.string() + ".tmp";
    detail::write_text(tmp, os.str());
    std::filesystem::rename(tmp, out_file);
    return ev;
}

}  // namespace nejtd
