// specsep: command-line front end.
//
// Exit codes: 0 pass / success, 1 verification failed, 2 bad configuration,
// bad arguments or numeric failure. Progress goes to stderr, data to files
// (solve and support also print their short answers on stdout).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specsep/esd.hpp"
#include "specsep/experiments/config.hpp"
#include "specsep/experiments/report.hpp"
#include "specsep/experiments/runner.hpp"
#include "specsep/measure.hpp"
#include "specsep/stieltjes.hpp"
#include "specsep/support.hpp"

namespace fs = std::filesystem;
using namespace specsep;
using namespace specsep::experiments;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

void log(const std::string& msg) { std::cerr << "specsep: " << msg << '\n'; }

struct Common {
    std::string config;
    std::string out = ".";
    std::size_t workers = default_workers();
    std::optional<std::uint64_t> seed;
};

struct Population {
    std::optional<double> c;
    std::string atoms;  // "t:w,t:w,..."
};

/// "1:0.5,10:0.5" -> 0.5 delta_1 + 0.5 delta_10. A bare location gets equal weight.
SpectralMeasure parse_atoms(const std::string& text) {
    std::vector<Atom> atoms;
    std::stringstream ss(text);
    std::string item;
    bool weighted = false;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        try {
            if (colon == std::string::npos) {
                atoms.push_back({std::stod(item), 1.0});
            } else {
                weighted = true;
                atoms.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
            }
        } catch (const std::exception&) {
            throw ValidationError("--atoms: cannot parse '" + item + "'");
        }
    }
    if (atoms.empty()) throw ValidationError("--atoms: no atoms given");
    if (!weighted)
        for (auto& a : atoms) a.weight = 1.0 / static_cast<double>(atoms.size());
    return SpectralMeasure(std::move(atoms));
}

/// (c, H) from --c/--atoms, falling back to the first size of --config.
std::pair<AspectRatio, SpectralMeasure> resolve_population(const Common& common, const Population& pop) {
    if (!pop.atoms.empty()) {
        if (!pop.c) throw ValidationError("--atoms needs --c");
        return {AspectRatio(*pop.c), parse_atoms(pop.atoms)};
    }
    if (!common.config.empty()) {
        const ExperimentConfig cfg = load_config(common.config);
        const SizePair size = cfg.sizes.front();
        const double c = pop.c.value_or(static_cast<double>(size.p) / static_cast<double>(size.n));
        return {AspectRatio(c), filter_spectrum(cfg.filter.at(size.p))};
    }
    if (pop.c) return {AspectRatio(*pop.c), SpectralMeasure::dirac(1.0)};
    throw ValidationError("give --c (and optionally --atoms) or --config");
}

ExperimentConfig load_for(const Common& common, ExperimentKind kind) {
    if (common.config.empty()) throw ValidationError("--config is required");
    ExperimentConfig cfg = load_config(common.config);
    if (cfg.kind && *cfg.kind != kind)
        throw ValidationError("config describes a '" + to_string(*cfg.kind) + "' experiment, not '" + to_string(kind) +
                              "'");
    cfg.kind = kind;
    if (common.seed) cfg.seed = *common.seed;
    cfg.validate();
    return cfg;
}

int run_verify(const Common& common, ExperimentKind kind) {
    const ExperimentConfig cfg = load_for(common, kind);
    RunOptions opts;
    opts.workers = common.workers;
    opts.log = log;
    const ExperimentReport report = run_experiment(cfg, opts);
    const ReportPaths paths = report_paths(cfg, report.experiment, fs::path(common.out));
    write_report(report, paths);
    log("records -> " + paths.records.string());
    log("summary -> " + paths.summary.string());
    log(report.experiment + ": " + (report.passed ? "PASS" : "FAIL") + " (" + report.criterion + ")");
    return report.passed ? kExitPass : kExitFail;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Limiting spectral distributions, supports and Monte Carlo checks for sample covariance matrices"};
    app.require_subcommand(1);

    Common common;
    Population pop;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", common.config, "experiment config (JSON)");
        if (config_required) opt->required();
        sub->add_option("--out", common.out, "output directory")->capture_default_str();
        sub->add_option("--workers", common.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
        sub->add_option("--seed", common.seed, "base seed (overrides the config)");
    };
    auto add_population = [&](CLI::App* sub) {
        sub->add_option("--c", pop.c, "aspect ratio p/n");
        sub->add_option("--atoms", pop.atoms, "population spectrum as t:w,t:w,... (default: 1:1)");
    };

    double re = 0.0;
    double im = 1.0;
    auto* solve = app.add_subcommand("solve", "print m(z) and the companion transform at z = re + i im");
    add_common(solve, false);
    add_population(solve);
    solve->add_option("--re", re, "real part of z")->required();
    solve->add_option("--im", im, "imaginary part of z (> 0)")->capture_default_str();

    DensityGrid grid;
    std::string density_name = "density.txt";
    auto* density = app.add_subcommand("density", "write a plot-ready density profile and its support");
    add_common(density, false);
    add_population(density);
    density->add_option("--points", grid.points, "grid points")->capture_default_str();
    density->add_option("--padding", grid.padding, "padding as a fraction of the support width")->capture_default_str();
    density->add_option("--file", density_name, "profile file name inside --out")->capture_default_str();

    auto* support = app.add_subcommand("support", "print the support intervals of the limit law");
    add_common(support, false);
    add_population(support);

    std::size_t bins = 50;
    auto* simulate = app.add_subcommand("simulate", "draw one ensemble from --config and dump its spectrum");
    add_common(simulate, true);
    simulate->add_option("--bins", bins, "histogram bins")->capture_default_str()->check(CLI::PositiveNumber);

    struct Verify {
        const char* name;
        ExperimentKind kind;
        const char* help;
    };
    const Verify verifies[] = {
        {"verify-lsd", ExperimentKind::lsd, "KS distance of simulated spectra to the limit law"},
        {"verify-gap", ExperimentKind::gap, "no eigenvalues inside a spectral gap"},
        {"verify-edge", ExperimentKind::edge, "largest eigenvalue against the (1 + sqrt c)^2 edge"},
        {"verify-qf", ExperimentKind::qf, "linear growth of quadratic-form fluctuations"},
    };
    std::vector<std::pair<CLI::App*, ExperimentKind>> verify_cmds;
    for (const auto& v : verifies) {
        auto* sub = app.add_subcommand(v.name, v.help);
        add_common(sub, true);
        verify_cmds.emplace_back(sub, v.kind);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitError;
    }

    try {
        if (solve->parsed()) {
            const auto [c, H] = resolve_population(common, pop);
            const auto pair = solve_companion(UpperHalfPoint(re, im), c, H);
            std::cout << "m " << fmt(pair.m.real()) << ' ' << fmt(pair.m.imag()) << '\n'
                      << "m_companion " << fmt(pair.m_companion.real()) << ' ' << fmt(pair.m_companion.imag()) << '\n'
                      << "residual " << fmt(pair.residual) << '\n';
            return kExitPass;
        }
        if (density->parsed()) {
            const auto [c, H] = resolve_population(common, pop);
            const fs::path path = fs::path(common.out) / density_name;
            const DensityProfile profile = emit_density_profile(c, H, grid, path);
            log("density -> " + path.string() + ", support -> " + support_path_for(path).string());
            log("trapezoid mass + zero atom = " + fmt(profile.integral() + profile.zero_atom));
            return kExitPass;
        }
        if (support->parsed()) {
            const auto [c, H] = resolve_population(common, pop);
            const SupportSet s = find_support(c, H);
            for (const auto& iv : s.intervals) std::cout << fmt(iv.left) << ' ' << fmt(iv.right) << '\n';
            std::cout << "zero_atom " << fmt(lsd_zero_atom(c, H)) << '\n';
            return kExitPass;
        }
        if (simulate->parsed()) {
            ExperimentConfig cfg = load_config(common.config);
            if (common.seed) cfg.seed = *common.seed;
            const SizePair size = cfg.sizes.front();
            const Ensemble ensemble(cfg.filter.at(size.p), size.n, cfg.entry);
            const EigenSpectrum spec = ensemble.draw(cfg.seed);
            std::string eig = "# eigenvalue\n";
            for (double v : spec.values) eig += fmt(v) + '\n';
            const fs::path dir(common.out);
            write_text(dir / "spectrum.txt", eig);

            const double lo = spec.min();
            const double hi = spec.max();
            const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
            std::vector<std::size_t> counts(bins, 0);
            for (double v : spec.values) {
                auto k = static_cast<std::size_t>((v - lo) / width);
                counts[std::min(k, bins - 1)]++;
            }
            std::string hist = "# bin_center density\n";
            for (std::size_t k = 0; k < bins; ++k) {
                const double mass = static_cast<double>(counts[k]) / static_cast<double>(spec.size());
                hist += fmt(lo + (static_cast<double>(k) + 0.5) * width) + ' ' + fmt(mass / width) + '\n';
            }
            write_text(dir / "histogram.txt", hist);
            log("p=" + std::to_string(size.p) + " n=" + std::to_string(size.n) + " seed=" + std::to_string(cfg.seed) +
                ": lambda in [" + fmt(lo) + ", " + fmt(hi) + "] -> " + (dir / "spectrum.txt").string());
            return kExitPass;
        }
        for (const auto& [sub, kind] : verify_cmds)
            if (sub->parsed()) return run_verify(common, kind);
    } catch (const Error& e) {
        log(std::string("error: ") + e.what());
        return kExitError;
    } catch (const nlohmann::json::exception& e) {
        log(std::string("config error: ") + e.what());
        return kExitError;
    } catch (const std::filesystem::filesystem_error& e) {
        log(std::string("I/O error: ") + e.what());
        return kExitError;
    }
    return kExitError;
}
