#include "radocc/em_scatter.hpp"
#include "radocc/errors.hpp"
#include "radocc/experiment.hpp"
#include "radocc/report.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>

namespace {

using namespace radocc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string seeds;
    std::string snrs;
    std::optional<double> fraction;
    std::string variant;
    std::string mode;
    std::optional<int> epochs;
    std::optional<int> shots;
    bool deterministic = false;
    bool quiet = false;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        T v;
        if (!(is >> v) || !is.eof()) throw ConfigError(std::string("bad ") + what + " entry '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(std::string(what) + " list is empty");
    return out;
}

ExperimentConfig resolve(const Flags& f) {
    ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_experiment_config(f.config);
    if (!f.out.empty()) cfg.out = f.out;
    if (!f.seeds.empty()) cfg.seeds = parse_list<std::uint64_t>(f.seeds, "seeds");
    if (f.seed) cfg.seeds = {*f.seed};
    if (!f.snrs.empty()) cfg.snrs = parse_list<double>(f.snrs, "snrs");
    if (!f.variant.empty()) cfg.variants = {variant_from_string(f.variant)};
    if (f.fraction) cfg.fractions = {*f.fraction};
    if (!f.mode.empty()) {
        if (f.mode == "analytic") cfg.mode = qsim::Mode::Analytic;
        else if (f.mode == "shots") cfg.mode = qsim::Mode::Shots;
        else throw ConfigError("--mode must be analytic or shots");
    }
    if (f.epochs) cfg.epochs = *f.epochs;
    if (f.shots) cfg.shots = *f.shots;
    if (f.deterministic) cfg.deterministic = true;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "YAML experiment config");
    cmd->add_option("--out", f.out, "Output directory (overrides config)");
    cmd->add_option("--seed", f.seed, "Single seed");
    cmd->add_option("--seeds", f.seeds, "Comma-separated seeds");
    cmd->add_option("--snrs", f.snrs, "Comma-separated SNRs in dB");
    cmd->add_option("--fraction", f.fraction, "Training-label fraction");
    cmd->add_option("--variant", f.variant, "hqnn | estimator | dequant | cnn");
    cmd->add_option("--mode", f.mode, "analytic | shots");
    cmd->add_option("--epochs", f.epochs, "Training epochs");
    cmd->add_option("--shots", f.shots, "Shots per circuit in shot mode");
    cmd->add_flag("--deterministic", f.deterministic, "Fixed-order reductions");
    cmd->add_flag("--quiet", f.quiet, "Only warnings and errors");
}

double run_fraction(const Flags& f) { return f.fraction.value_or(1.0); }

int po_plate() {
    const double wavelength = kSpeedOfLight / 60e9;
    const double k0 = 2.0 * std::numbers::pi / wavelength;
    const double side = 10.0 * wavelength;
    const Aperture ap = Aperture::uniform(side, side, wavelength / 8.0, {1.0, 0.0}, {0.0, 0.0});
    const double rcs = radar_cross_section(po_backscatter(ap, 0.0, 0.0, k0));
    const double expected = 4.0 * std::numbers::pi * std::pow(side, 4) / (wavelength * wavelength);
    const double rel = std::abs(rcs - expected) / expected;
    std::printf("po-plate: a = %.6f m, lambda = %.6f m, RCS %.6f m^2, closed form %.6f m^2, "
                "relative error %.2e -> %s\n",
                side, wavelength, rcs, expected, rel, rel < 0.01 ? "PASS" : "FAIL");
    return rel < 0.01 ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radar occupancy simulator and hybrid quantum-classical classifier"};
    app.require_subcommand(1);
    Flags flags;

    auto* simulate = app.add_subcommand("simulate", "Generate the synthetic RDM dataset");
    auto* train = app.add_subcommand("train", "Train model variants");
    auto* eval = app.add_subcommand("eval", "Evaluate checkpoints on clean and noisy test frames");
    auto* ablate = app.add_subcommand("ablate", "Label-fraction ablation");
    auto* report = app.add_subcommand("report", "Aggregate eval results across seeds");
    auto* selftest = app.add_subcommand("selftest", "Built-in physics self-tests");
    for (auto* cmd : {simulate, train, eval, ablate, report}) add_common(cmd, flags);
    std::string test_name;
    selftest->add_option("name", test_name, "po-plate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }
    if (flags.quiet) spdlog::set_level(spdlog::level::warn);

    try {
        if (*selftest) {
            if (test_name == "po-plate") return po_plate();
            throw ConfigError("unknown self-test '" + test_name + "'");
        }
        const ExperimentConfig cfg = resolve(flags);
        if (*simulate) {
            cmd_simulate(cfg);
        } else if (*train || *eval) {
            for (Variant v : cfg.variants) {
                for (auto seed : cfg.seeds) {
                    if (*train) cmd_train(cfg, v, seed, run_fraction(flags));
                    else cmd_eval(cfg, v, seed, run_fraction(flags));
                }
            }
        } else if (*ablate) {
            cmd_ablate(cfg);
        } else if (*report) {
            const auto summary = cmd_report(cfg);
            std::printf("%zu summary rows, %zu gaps\n", summary.rows.size(), summary.gaps.size());
        }
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    } catch (const NumericError& e) {
        spdlog::error("{}", e.what());
        return kExitNumeric;
    } catch (const DataError& e) {
        spdlog::error("{}", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitData;
    }
    return kExitOk;
}
