// Command-line front end: run | validate | emit-plot | replay-trial.
//
// Exit codes: 0 ok, 1 usage, 2 config error, 3 runtime failure,
// 4 detection negative (roc campaign decided "no signal").

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nejtd/bundle.hpp"
#include "nejtd/config.hpp"

namespace {

using namespace nejtd;

int config_error(const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
}

int runtime_error(const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return kExitRuntimeFailure;
}

std::optional<ExperimentConfig> load(const std::string& path, int& status) {
    try {
        return load_config(path);
    } catch (const ParseError& e) {
        status = config_error(e);
    } catch (const ValidationError& e) {
        status = config_error(e);
    }
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo switching-current experiments for Josephson threshold detectors", "nejtd"};
    app.require_subcommand(1);

    std::string config_path;
    unsigned workers = 0;
    bool workers_set = false;
    bool full = false;
    std::optional<std::size_t> n_trials;
    std::optional<std::string> out_dir;

    auto* run = app.add_subcommand("run", "run the configured campaign and write a result bundle");
    run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--workers,-j", workers, "worker threads (default: all cores)")
        ->each([&](const std::string&) { workers_set = true; });
    run->add_flag("--full", full, "use 10000 trials per ensemble");
    run->add_option("--n-trials,-n", n_trials, "override trials per ensemble");
    run->add_option("--out,-o", out_dir, "bundle directory (default: [output] dir)");

    auto* validate = app.add_subcommand("validate", "parse and validate a config, print its resolved form");
    validate->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);

    std::string bundle_dir;
    std::string which;
    std::optional<std::string> plot_out;
    auto* emit = app.add_subcommand("emit-plot", "write columnar plot data from a bundle");
    emit->add_option("bundle", bundle_dir, "bundle directory")->required()->check(CLI::ExistingDirectory);
    emit->add_option("which", which, "histogram | roc | sweep | response")
        ->required()
        ->check(CLI::IsMember({"histogram", "roc", "sweep", "response"}));
    emit->add_option("--out,-o", plot_out, "output directory (default: <bundle>/plot)");

    std::uint64_t trial = 0;
    std::optional<std::uint64_t> seed;
    std::uint64_t stride = 100;
    std::string replay_out = "trajectory.txt";
    auto* replay = app.add_subcommand("replay-trial", "re-run one trial and dump its trajectory");
    replay->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
    replay->add_option("--trial,-t", trial, "trial index within the ensemble");
    replay->add_option("--seed", seed, "explicit trial seed (as printed by a failure)");
    replay->add_option("--stride", stride, "write every n-th step")->check(CLI::PositiveNumber);
    replay->add_option("--out,-o", replay_out, "trajectory file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    int status = kExitOk;
    if (*validate) {
        auto cfg = load(config_path, status);
        if (!cfg) return status;
        std::cout << canonical_text(*cfg) << "# config_digest = " << config_digest(*cfg) << '\n';
        return kExitOk;
    }

    if (*run) {
        auto cfg = load(config_path, status);
        if (!cfg) return status;
        if (full) cfg->n_trials = 10000;
        if (n_trials) {
            if (*n_trials < 1) return config_error(ValidationError("n_trials", "n_trials >= 1"));
            cfg->n_trials = *n_trials;
        }
        if (workers_set) cfg->workers = workers;
        if (out_dir) cfg->output_dir = *out_dir;
        try {
            const auto bundle = run_campaign(*cfg);
            write_bundle(bundle, cfg->output_dir);
            std::cout << "wrote " << cfg->output_dir << " (config_digest " << bundle.summary["config_digest"].get<std::string>()
                      << ")\n";
            const auto& results = bundle.summary["results"];
            if (results.contains("roc"))
                std::cout << "r_auc = " << format_number(results["roc"]["r_auc"].get<double>()) << '\n';
            if (bundle.summary["censored_total"].get<std::size_t>() > 0)
                std::cerr << "warning: " << bundle.summary["censored_total"].get<std::size_t>()
                          << " censored trials\n";
            return bundle.detection_negative ? kExitDetectionNegative : kExitOk;
        } catch (const ValidationError& e) {
            return config_error(e);
        } catch (const std::exception& e) {
            return runtime_error(e);
        }
    }

    if (*emit) {
        try {
            const std::filesystem::path out = plot_out ? std::filesystem::path(*plot_out)
                                                       : std::filesystem::path(bundle_dir) / "plot";
            for (const auto& p : emit_plot_data(bundle_dir, *parse_plot_kind(which), out))
                std::cout << p.string() << '\n';
            return kExitOk;
        } catch (const std::exception& e) {
            return runtime_error(e);
        }
    }

    if (*replay) {
        auto cfg = load(config_path, status);
        if (!cfg) return status;
        try {
            const auto ev = replay_trial(*cfg, trial, seed, stride, replay_out);
            std::cout << "switched = " << (ev.switched ? "true" : "false") << "  i_sw = " << format_number(ev.i_sw)
                      << "  -> " << replay_out << '\n';
            return kExitOk;
        } catch (const ValidationError& e) {
            return config_error(e);
        } catch (const std::exception& e) {
            return runtime_error(e);
        }
    }
    return kExitUsage;
}
