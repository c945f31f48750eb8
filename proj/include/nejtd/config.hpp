#pragma once

// Experiment configuration: flat sectioned `key = value` text.
//
//   [junction]  beta, noise_intensity | theta
//   [bias]      kappa | sweep_rate, i_start, i_cap, dt
//   [initial]   phi0, phi_dot0, start_state (given | thermal)
//   [signal]    kind (none | cw | pulse); cw: amplitude, omega;
//               pulse: n_photons, single_photon_amplitude, omega, width,
//               arrival (auto | tau)
//   [switch]    excursion
//   [ensemble]  n_trials, master_seed, workers, keep_samples (auto | true | false)
//   [campaign]  type, threshold, bins, compare_phi0, noise_intensity_b, grid,
//               bracket_lo, bracket_hi, target, rel_tol, residual_tol
//   [output]    dir
//
// `#` and `;` start comments. Grids are comma lists or linspace(a, b, n) /
// logspace(a, b, n) with endpoints given as values.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nejtd/error.hpp"
#include "nejtd/trial.hpp"

namespace nejtd {

enum class CampaignType { scd, roc, sweep_kappa, sweep_phi0, min_amplitude, photon_response, thermal_robustness };

inline std::string to_string(CampaignType t) {
    switch (t) {
        case CampaignType::scd: return "scd";
        case CampaignType::roc: return "roc";
        case CampaignType::sweep_kappa: return "sweep-kappa";
        case CampaignType::sweep_phi0: return "sweep-phi0";
        case CampaignType::min_amplitude: return "min-amplitude";
        case CampaignType::photon_response: return "photon-response";
        case CampaignType::thermal_robustness: return "thermal-robustness";
    }
    return "scd";
}

inline std::optional<CampaignType> parse_campaign_type(std::string_view s) {
    for (auto t : {CampaignType::scd, CampaignType::roc, CampaignType::sweep_kappa, CampaignType::sweep_phi0,
                   CampaignType::min_amplitude, CampaignType::photon_response, CampaignType::thermal_robustness})
        if (to_string(t) == s) return t;
    return std::nullopt;
}

struct CampaignConfig {
    CampaignType type = CampaignType::scd;
    double threshold = 0.7;
    std::optional<std::size_t> bins;       ///< histogram bins; Freedman-Diaconis when unset
    std::optional<double> compare_phi0;    ///< roc: second ensemble at this phase, no signal
    std::optional<double> noise_intensity_b;
    std::vector<double> grid;
    std::string grid_text;
    double bracket_lo = 1e-5;
    double bracket_hi = 1e-2;
    double target = 0.7;
    double rel_tol = 0.05;
    double residual_tol = 0.02;
};

struct ExperimentConfig {
    TrialSetup setup;
    bool auto_arrival = false;
    std::size_t n_trials = 0;
    std::uint64_t master_seed = 0;
    unsigned workers = 0;
    std::optional<bool> keep_samples;  ///< unset: keep when n_trials <= 1e5
    CampaignConfig campaign;
    std::string output_dir = "out";

    bool samples_kept() const { return keep_samples.value_or(n_trials <= 100000); }
};

// ---------------------------------------------------------------- numbers

/// Shortest round-trip decimal form.
inline std::string format_number(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::uint64_t> to_uint(std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<std::vector<double>> parse_grid(std::string_view text) {
    text = trim(text);
    auto args = [](std::string_view inner) -> std::optional<std::vector<double>> {
        std::vector<double> out;
        std::size_t pos = 0;
        while (pos <= inner.size()) {
            const auto comma = inner.find(',', pos);
            const auto piece = inner.substr(pos, comma == std::string_view::npos ? inner.npos : comma - pos);
            const auto v = to_double(piece);
            if (!v) return std::nullopt;
            out.push_back(*v);
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        return out;
    };
    for (std::string_view fn : {"linspace", "logspace"}) {
        if (text.substr(0, fn.size()) != fn) continue;
        auto rest = trim(text.substr(fn.size()));
        if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')') return std::nullopt;
        const auto a = args(rest.substr(1, rest.size() - 2));
        if (!a || a->size() != 3) return std::nullopt;
        const double lo = (*a)[0], hi = (*a)[1], n_real = (*a)[2];
        const auto n = static_cast<std::size_t>(n_real);
        if (n < 1 || static_cast<double>(n) != n_real) return std::nullopt;
        const bool log = fn == "logspace";
        if (log && !(lo > 0.0 && hi > 0.0)) return std::nullopt;
        std::vector<double> g(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
            g[k] = log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
        }
        g.front() = lo;
        if (n > 1) g.back() = hi;
        return g;
    }
    return args(text);
}

}  // namespace detail

// ---------------------------------------------------------------- parsing

/// Raw sectioned key/value pairs with their line numbers.
struct RawConfig {
    struct Entry {
        std::string value;
        int line;
    };
    std::map<std::string, Entry> entries;  ///< "section.key"
    std::string path;
};

inline RawConfig parse_raw(std::istream& in, const std::string& path) {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"junction", {"beta", "noise_intensity", "theta"}},
        {"bias", {"kappa", "sweep_rate", "i_start", "i_cap", "dt"}},
        {"initial", {"phi0", "phi_dot0", "start_state"}},
        {"signal", {"kind", "amplitude", "omega", "n_photons", "single_photon_amplitude", "width", "arrival"}},
        {"switch", {"excursion"}},
        {"ensemble", {"n_trials", "master_seed", "workers", "keep_samples"}},
        {"campaign",
         {"type", "threshold", "bins", "compare_phi0", "noise_intensity_b", "grid", "bracket_lo", "bracket_hi",
          "target", "rel_tol", "residual_tol"}},
        {"output", {"dir"}},
    };
    RawConfig raw;
    raw.path = path;
    std::string line_text;
    std::string section;
    int line = 0;
    while (std::getline(in, line_text)) {
        ++line;
        std::string_view s = line_text;
        if (const auto c = s.find_first_of("#;"); c != std::string_view::npos) s = s.substr(0, c);
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError(path, line, "unterminated section header");
            section = std::string(detail::trim(s.substr(1, s.size() - 2)));
            if (!schema.contains(section)) throw ParseError(path, line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ParseError(path, line, "expected key = value");
        const std::string key(detail::trim(s.substr(0, eq)));
        const std::string value(detail::trim(s.substr(eq + 1)));
        if (section.empty()) throw ParseError(path, line, "key '" + key + "' outside any section");
        if (key.empty()) throw ParseError(path, line, "empty key");
        if (!schema.at(section).contains(key))
            throw ParseError(path, line, "unknown key '" + key + "' in [" + section + "]");
        if (value.empty()) throw ParseError(path, line, "empty value for '" + key + "'");
        const auto full = section + "." + key;
        if (raw.entries.contains(full)) throw ParseError(path, line, "duplicate key '" + full + "'");
        raw.entries.emplace(full, RawConfig::Entry{value, line});
    }
    return raw;
}

namespace detail {

class Reader {
public:
    explicit Reader(const RawConfig& raw) : raw_(raw) {}

    bool has(const std::string& key) const { return raw_.entries.contains(key); }

    std::optional<std::string> text(const std::string& key) const {
        const auto it = raw_.entries.find(key);
        if (it == raw_.entries.end()) return std::nullopt;
        return it->second.value;
    }

    std::optional<double> number(const std::string& key) const {
        const auto it = raw_.entries.find(key);
        if (it == raw_.entries.end()) return std::nullopt;
        const auto v = to_double(it->second.value);
        if (!v) throw ParseError(raw_.path, it->second.line, "'" + key + "' is not a finite number");
        return v;
    }

    std::optional<std::uint64_t> integer(const std::string& key) const {
        const auto it = raw_.entries.find(key);
        if (it == raw_.entries.end()) return std::nullopt;
        const auto v = to_uint(it->second.value);
        if (!v) throw ParseError(raw_.path, it->second.line, "'" + key + "' is not a non-negative integer");
        return v;
    }

    std::optional<std::vector<double>> grid(const std::string& key) const {
        const auto it = raw_.entries.find(key);
        if (it == raw_.entries.end()) return std::nullopt;
        const auto g = parse_grid(it->second.value);
        if (!g) throw ParseError(raw_.path, it->second.line, "'" + key + "' is not a valid grid");
        return g;
    }

    int line(const std::string& key) const { return raw_.entries.at(key).line; }
    const std::string& path() const { return raw_.path; }

private:
    const RawConfig& raw_;
};

}  // namespace detail

/// Resolve defaults and validate. Throws ParseError for malformed values and
/// ValidationError for constraint violations.
inline ExperimentConfig resolve(const RawConfig& raw) {
    const detail::Reader r(raw);
    ExperimentConfig cfg;

    const double beta = r.number("junction.beta").value_or(1e-4);
    if (!(beta > 0.0)) throw ValidationError("beta", "beta > 0");
    if (r.has("junction.noise_intensity") && r.has("junction.theta"))
        throw ValidationError("noise_intensity", "only one of noise_intensity, theta");
    if (const auto t = r.number("junction.theta")) {
        if (!(*t >= 0.0)) throw ValidationError("theta", "theta >= 0");
        cfg.setup.params = JunctionParams(beta, *t);
    } else {
        const double d = r.number("junction.noise_intensity").value_or(1e-7);
        if (!(d >= 0.0)) throw ValidationError("noise_intensity", "noise_intensity >= 0");
        cfg.setup.params = JunctionParams::from_noise(beta, d);
    }

    auto& b = cfg.setup.protocol;
    if (r.has("bias.kappa") && r.has("bias.sweep_rate"))
        throw ValidationError("sweep_rate", "only one of kappa, sweep_rate");
    if (const auto k = r.number("bias.kappa")) {
        if (!(*k > 0.0)) throw ValidationError("kappa", "kappa > 0");
        b.sweep_rate = *k * beta;
    } else {
        b.sweep_rate = r.number("bias.sweep_rate").value_or(1e-5);
    }
    b.i_start = r.number("bias.i_start").value_or(0.0);
    b.i_cap = r.number("bias.i_cap").value_or(1.5);
    b.dt = r.number("bias.dt").value_or(0.01);

    cfg.setup.init.phi0 = r.number("initial.phi0").value_or(0.0);
    cfg.setup.init.phi_dot0 = r.number("initial.phi_dot0").value_or(0.0);
    const auto start = r.text("initial.start_state").value_or("given");
    if (start == "given") cfg.setup.start = StartState::given;
    else if (start == "thermal") cfg.setup.start = StartState::thermal;
    else throw ValidationError("start_state", "start_state in {given, thermal}");

    const auto kind = r.text("signal.kind").value_or("none");
    const double omega = r.number("signal.omega").value_or(1.0);
    if (kind == "none") {
        cfg.setup.signal = NoSignal{};
    } else if (kind == "cw") {
        cfg.setup.signal = ContinuousWave{r.number("signal.amplitude").value_or(0.0), omega};
    } else if (kind == "pulse") {
        GaussianPulse p;
        p.n_photons = r.number("signal.n_photons").value_or(1.0);
        p.single_photon_amplitude = r.number("signal.single_photon_amplitude").value_or(0.0);
        p.omega = omega;
        p.width = r.number("signal.width").value_or(1.0);
        const auto arrival = r.text("signal.arrival").value_or("auto");
        if (arrival == "auto") {
            cfg.auto_arrival = true;
            p.arrival = 1.0 / (2.0 * b.sweep_rate);
        } else {
            p.arrival = *r.number("signal.arrival");
        }
        cfg.setup.signal = p;
    } else {
        throw ValidationError("signal.kind", "kind in {none, cw, pulse}");
    }

    cfg.setup.criterion.excursion = r.number("switch.excursion").value_or(4.0 * std::numbers::pi);

    if (!r.has("ensemble.master_seed")) throw ValidationError("master_seed", "master_seed present");
    cfg.master_seed = *r.integer("ensemble.master_seed");
    if (!r.has("ensemble.n_trials")) throw ValidationError("n_trials", "n_trials present");
    cfg.n_trials = static_cast<std::size_t>(*r.integer("ensemble.n_trials"));
    if (cfg.n_trials < 1) throw ValidationError("n_trials", "n_trials >= 1");
    cfg.workers = static_cast<unsigned>(r.integer("ensemble.workers").value_or(0));
    if (const auto k = r.text("ensemble.keep_samples"); k && *k != "auto") {
        if (*k == "true") cfg.keep_samples = true;
        else if (*k == "false") cfg.keep_samples = false;
        else throw ValidationError("keep_samples", "keep_samples in {auto, true, false}");
    }

    auto& c = cfg.campaign;
    const auto type_text = r.text("campaign.type").value_or("scd");
    const auto type = parse_campaign_type(type_text);
    if (!type)
        throw ValidationError("campaign.type",
                              "type in {scd, roc, sweep-kappa, sweep-phi0, min-amplitude, photon-response, "
                              "thermal-robustness}");
    c.type = *type;
    c.threshold = r.number("campaign.threshold").value_or(0.7);
    if (!(c.threshold >= 0.5 && c.threshold <= 1.0)) throw ValidationError("threshold", "0.5 <= threshold <= 1");
    if (const auto n = r.integer("campaign.bins")) {
        if (*n < 1) throw ValidationError("bins", "bins >= 1");
        c.bins = static_cast<std::size_t>(*n);
    }
    c.compare_phi0 = r.number("campaign.compare_phi0");
    c.noise_intensity_b = r.number("campaign.noise_intensity_b");
    if (const auto g = r.grid("campaign.grid")) {
        c.grid = *g;
        c.grid_text = *r.text("campaign.grid");
    }
    c.bracket_lo = r.number("campaign.bracket_lo").value_or(c.bracket_lo);
    c.bracket_hi = r.number("campaign.bracket_hi").value_or(c.bracket_hi);
    c.target = r.number("campaign.target").value_or(c.target);
    c.rel_tol = r.number("campaign.rel_tol").value_or(c.rel_tol);
    c.residual_tol = r.number("campaign.residual_tol").value_or(c.residual_tol);

    cfg.output_dir = r.text("output.dir").value_or("out");

    cfg.setup.validate();
    switch (c.type) {
        case CampaignType::roc:
            if (!c.compare_phi0 && cfg.setup.signal.index() == 0)
                throw ValidationError("signal.kind", "a signal or campaign.compare_phi0 for roc");
            break;
        case CampaignType::sweep_kappa:
        case CampaignType::sweep_phi0:
        case CampaignType::photon_response:
            if (c.grid.empty()) throw ValidationError("campaign.grid", "non-empty grid");
            break;
        case CampaignType::min_amplitude:
            if (!(c.bracket_lo > 0.0 && c.bracket_hi > c.bracket_lo))
                throw ValidationError("bracket", "0 < bracket_lo < bracket_hi");
            if (cfg.setup.signal.index() == 0) throw ValidationError("signal.kind", "kind cw or pulse");
            break;
        case CampaignType::thermal_robustness:
            if (!c.noise_intensity_b) throw ValidationError("noise_intensity_b", "noise_intensity_b present");
            if (!(*c.noise_intensity_b >= 0.0))
                throw ValidationError("noise_intensity_b", "noise_intensity_b >= 0");
            break;
        case CampaignType::scd: break;
    }
    if (c.type == CampaignType::photon_response && !std::holds_alternative<GaussianPulse>(cfg.setup.signal))
        throw ValidationError("signal.kind", "kind pulse for photon-response");
    return cfg;
}

inline ExperimentConfig parse_config(std::istream& in, const std::string& path = "<input>") {
    return resolve(parse_raw(in, path));
}

inline ExperimentConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "<string>");
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    return parse_config(in, path);
}

// ---------------------------------------------------------------- canonical form

/// Fully resolved configuration, every default spelled out. With
/// `for_digest` the execution-only keys (workers, output dir) are omitted.
inline std::string canonical_text(const ExperimentConfig& cfg, bool for_digest = false) {
    std::ostringstream os;
    auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
    auto num = [&](const char* k, double v) { kv(k, format_number(v)); };
    const auto& s = cfg.setup;

    os << "[junction]\n";
    num("beta", s.params.beta());
    num("noise_intensity", s.params.noise_intensity());
    os << "[bias]\n";
    num("sweep_rate", s.protocol.sweep_rate);
    num("i_start", s.protocol.i_start);
    num("i_cap", s.protocol.i_cap);
    num("dt", s.protocol.dt);
    os << "[initial]\n";
    num("phi0", s.init.phi0);
    num("phi_dot0", s.init.phi_dot0);
    kv("start_state", s.start == StartState::given ? "given" : "thermal");
    os << "[signal]\n";
    kv("kind", signal_kind(s.signal));
    if (const auto* cw = std::get_if<ContinuousWave>(&s.signal)) {
        num("amplitude", cw->amplitude);
        num("omega", cw->omega);
    } else if (const auto* p = std::get_if<GaussianPulse>(&s.signal)) {
        num("n_photons", p->n_photons);
        num("single_photon_amplitude", p->single_photon_amplitude);
        num("omega", p->omega);
        num("width", p->width);
        kv("arrival", cfg.auto_arrival ? std::string("auto") : format_number(p->arrival));
    }
    os << "[switch]\n";
    num("excursion", s.criterion.excursion);
    os << "[ensemble]\n";
    kv("n_trials", std::to_string(cfg.n_trials));
    kv("master_seed", std::to_string(cfg.master_seed));
    if (!for_digest) kv("workers", std::to_string(cfg.workers));
    kv("keep_samples", cfg.keep_samples ? (*cfg.keep_samples ? "true" : "false") : "auto");
    const auto& c = cfg.campaign;
    os << "[campaign]\n";
    kv("type", to_string(c.type));
    num("threshold", c.threshold);
    if (c.bins) kv("bins", std::to_string(*c.bins));
    if (c.compare_phi0) num("compare_phi0", *c.compare_phi0);
    if (c.noise_intensity_b) num("noise_intensity_b", *c.noise_intensity_b);
    if (!c.grid.empty()) {
        std::string g;
        for (std::size_t i = 0; i < c.grid.size(); ++i) g += (i ? ", " : "") + format_number(c.grid[i]);
        kv("grid", g);
    }
    if (c.type == CampaignType::min_amplitude) {
        num("bracket_lo", c.bracket_lo);
        num("bracket_hi", c.bracket_hi);
        num("target", c.target);
        num("rel_tol", c.rel_tol);
    }
    if (c.type == CampaignType::photon_response) num("residual_tol", c.residual_tol);
    if (!for_digest) {
        os << "[output]\n";
        kv("dir", cfg.output_dir);
    }
    return os.str();
}

/// 64-bit FNV-1a, as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    return out;
}

inline std::string config_digest(const ExperimentConfig& cfg) { return fnv1a_hex(canonical_text(cfg, true)); }

}  // namespace nejtd
