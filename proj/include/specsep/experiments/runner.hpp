#pragma once

// Monte Carlo campaigns for the four limit statements: the LSD (KS distance
// to F^{c_n,H_n}), empty spectral gaps, the largest-eigenvalue edge, and the
// linear growth of quadratic-form fluctuations.
//
// Trial t at every size uses seed base + t, so sizes are paired trial by
// trial and a report does not depend on the number of workers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specsep/eigen_solver.hpp"
#include "specsep/esd.hpp"
#include "specsep/experiments/config.hpp"
#include "specsep/experiments/report.hpp"
#include "specsep/experiments/worker_pool.hpp"
#include "specsep/model.hpp"
#include "specsep/stieltjes.hpp"
#include "specsep/support.hpp"

namespace specsep::experiments {

struct RunOptions {
    std::size_t workers = default_workers();
    std::function<void(const std::string&)> log;  // progress messages; may be empty
};

/// Sample covariance spectra for one fixed (B, n, entry law).
class Ensemble {
public:
    Ensemble(const FilterSpec& filter, std::size_t n, EntryDistribution entry)
        : p_(filter.p), m_(filter.columns()), n_(n), entry_(entry) {
        filter.validate();
        entry_.validate();
        if (n < 1) throw DimensionError("Ensemble: n must be >= 1");
        if (filter.is_scalar_covariance()) {
            scalar_ = filter.scalar_variance();
            return;
        }
        const ComplexMatrix B = build_filter(filter);
        real_ = is_real(B) && !entry_.is_complex();
        if (real_) real_filter_ = B.real();
        else complex_filter_ = B;
    }

    std::size_t p() const noexcept { return p_; }
    std::size_t m() const noexcept { return m_; }
    std::size_t n() const noexcept { return n_; }

    /// Eigenvalues of S = (1/n) B X X* B* with X drawn from `seed`.
    EigenSpectrum draw(std::uint64_t seed) const {
        if (entry_.is_complex() || !real_) return draw_as<std::complex<double>>(seed);
        return draw_as<double>(seed);
    }

private:
    template <class Scalar>
    EigenSpectrum draw_as(std::uint64_t seed) const {
        const auto X = sample_entries<Scalar>(m_, n_, entry_, seed);
        Matrix<Scalar> S = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(p_));
        if (scalar_ > 0.0) {
            S.template selfadjointView<Eigen::Lower>().rankUpdate(X, scalar_ / static_cast<double>(n_));
        } else {
            Matrix<Scalar> Y;
            if constexpr (is_complex<Scalar>::value) Y = complex_filter_ * X;
            else Y = real_filter_ * X;
            S.template selfadjointView<Eigen::Lower>().rankUpdate(Y, 1.0 / static_cast<double>(n_));
        }
        S.template triangularView<Eigen::StrictlyUpper>() = S.adjoint();
        return hermitian_eigenvalues<Scalar>(S);
    }

    std::size_t p_;
    std::size_t m_;
    std::size_t n_;
    EntryDistribution entry_;
    double scalar_ = 0.0;  // Sigma = scalar_ * I when positive
    bool real_ = true;
    RealMatrix real_filter_;
    ComplexMatrix complex_filter_;
};

namespace detail {

inline void log(const RunOptions& opts, const std::string& msg) {
    if (opts.log) opts.log(msg);
}

inline std::string size_label(const SizePair& s) {
    return "(p=" + std::to_string(s.p) + ", n=" + std::to_string(s.n) + ")";
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw ValidationError("median of an empty list");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline nlohmann::json support_json(const SupportSet& s) {
    nlohmann::json iv = nlohmann::json::array();
    for (const auto& i : s.intervals) iv.push_back({i.left, i.right});
    return {{"intervals", iv}, {"companion_zero_atom", s.zero_atom_weight}};
}

inline nlohmann::json sizes_json(const std::vector<SizePair>& sizes) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : sizes) out.push_back({s.p, s.n});
    return out;
}

inline void require_kind(const ExperimentConfig& cfg, ExperimentKind k) {
    if (cfg.kind && *cfg.kind != k)
        throw ValidationError("config describes a '" + to_string(*cfg.kind) + "' experiment, not '" + to_string(k) + "'");
    cfg.validate();
}

/// Index of the size with the largest p (ties: the later one).
inline std::size_t largest_size(const std::vector<SizePair>& sizes) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i].p >= sizes[best].p) best = i;
    return best;
}

inline std::size_t smallest_size(const std::vector<SizePair>& sizes) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i].p < sizes[best].p) best = i;
    return best;
}

inline nlohmann::json base_calibration(const ExperimentConfig& cfg) {
    return {{"trials", cfg.trials},
            {"sizes", sizes_json(cfg.sizes)},
            {"seed", cfg.seed},
            {"entry", to_string(cfg.entry.kind)},
            {"filter", to_string(cfg.filter.kind)}};
}

/// Distance from [a, b] to the nearest eigenvalue; minus the deepest
/// intrusion when some eigenvalue lies inside.
inline double clearance(const EigenSpectrum& spec, const Interval& iv) {
    double outside = std::numeric_limits<double>::infinity();
    double inside = 0.0;
    for (double v : spec.values) {
        if (v < iv.left) outside = std::min(outside, iv.left - v);
        else if (v > iv.right) outside = std::min(outside, v - iv.right);
        else inside = std::max(inside, std::min(v - iv.left, iv.right - v));
    }
    return inside > 0.0 ? -inside : outside;
}

template <class Stat>
void append_trials(ExperimentReport& report, const ExperimentConfig& cfg, const SizePair& size,
                   const std::string& statistic, const std::vector<Stat>& values) {
    for (std::size_t t = 0; t < values.size(); ++t)
        report.records.push_back({report.experiment, t, cfg.seed + t, size.p, size.n, statistic,
                                  static_cast<double>(values[t])});
}

}  // namespace detail

/// LSD check: KS distance between each trial's ESD and the
/// limit F^{c_n,H_n} built from the filter's own spectrum at that size.
inline ExperimentReport run_lsd_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    detail::require_kind(cfg, ExperimentKind::lsd);
    ExperimentReport report;
    report.experiment = "lsd";
    std::vector<std::vector<double>> ks(cfg.sizes.size());
    nlohmann::json predicted = nlohmann::json::array();

    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
        const SizePair size = cfg.sizes[si];
        const FilterSpec filter = cfg.filter.at(size.p);
        const SpectralMeasure H = filter_spectrum(filter);
        const AspectRatio c = AspectRatio::of(size.p, size.n);
        const LimitCDF limit(c, H);
        const Ensemble ensemble(filter, size.n, cfg.entry);
        detail::log(opts, "lsd " + detail::size_label(size) + ": limit built, running " + std::to_string(cfg.trials) +
                              " trials");
        ks[si] = ordered_parallel_map(cfg.trials, opts.workers, [&](std::size_t t) {
            return ks_distance(EmpiricalCDF(ensemble.draw(cfg.seed + t)), limit);
        });
        detail::append_trials(report, cfg, size, "ks_distance", ks[si]);
        predicted.push_back({{"p", size.p},
                             {"n", size.n},
                             {"c", c.value()},
                             {"population_atoms", H.size()},
                             {"support", detail::support_json(limit.support())},
                             {"zero_atom", limit.zero_atom()},
                             {"limit_total_mass", limit.total_mass()}});
    }

    const std::size_t big = detail::largest_size(cfg.sizes);
    const std::size_t small = detail::smallest_size(cfg.sizes);
    nlohmann::json medians = nlohmann::json::array();
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si)
        medians.push_back({{"p", cfg.sizes[si].p}, {"n", cfg.sizes[si].n}, {"median_ks", detail::median(ks[si])}});
    const double med_big = detail::median(ks[big]);
    bool passed = med_big < cfg.threshold;
    report.checks = {{"median_ks", medians}, {"median_ks_largest", med_big}};
    if (big != small) {
        const double med_small = detail::median(ks[small]);
        std::size_t improved = 0;
        for (std::size_t t = 0; t < cfg.trials; ++t)
            if (ks[big][t] < ks[small][t]) ++improved;
        const double fraction = static_cast<double>(improved) / static_cast<double>(cfg.trials);
        passed = passed && med_big < med_small && fraction >= cfg.min_paired_fraction;
        report.checks["median_ks_smallest"] = med_small;
        report.checks["paired_improvements"] = improved;
        report.checks["paired_fraction"] = fraction;
    }
    report.passed = passed;
    report.criterion = "median KS at the largest size < threshold; with several sizes, the median also decreases "
                       "from the smallest size and KS improves in at least min_paired_fraction of paired trials";
    report.predicted = predicted;
    report.calibration = detail::base_calibration(cfg);
    report.calibration["threshold"] = cfg.threshold;
    report.calibration["min_paired_fraction"] = cfg.min_paired_fraction;
    report.groups = summarize(report.records);
    return report;
}

/// Counts of sample eigenvalues in a spectral gap of F^{c_n,H_n} (or in a
/// user-supplied interval). Passes when no trial at the largest size puts an
/// eigenvalue there.
inline ExperimentReport run_gap_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    detail::require_kind(cfg, ExperimentKind::gap);
    ExperimentReport report;
    report.experiment = "gap";
    nlohmann::json predicted = nlohmann::json::array();
    std::vector<std::vector<std::size_t>> counts(cfg.sizes.size());
    std::vector<double> clearances;

    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
        const SizePair size = cfg.sizes[si];
        const FilterSpec filter = cfg.filter.at(size.p);
        const SpectralMeasure H = filter_spectrum(filter);
        const AspectRatio c = AspectRatio::of(size.p, size.n);
        const SupportSet support = find_support(c, H);

        Interval tested{};
        double margin = 0.0;
        std::optional<Interval> gap;
        if (cfg.interval) {
            tested = *cfg.interval;
            margin = cfg.margin.value_or(0.0);
        } else {
            gap = widest_gap(support);
            if (!gap) {
                std::ostringstream msg;
                msg << "gap experiment: the support at " << detail::size_label(size)
                    << " is a single interval; supply an 'interval' override";
                throw ValidationError(msg.str());
            }
            const GapInterval g = make_gap_interval(*gap, cfg.margin);
            tested = {g.a, g.b};
            margin = g.margin;
        }
        const Ensemble ensemble(filter, size.n, cfg.entry);
        detail::log(opts, "gap " + detail::size_label(size) + ": testing [" + format_double(tested.left) + ", " +
                              format_double(tested.right) + "]");
        const auto outcomes = ordered_parallel_map(cfg.trials, opts.workers, [&](std::size_t t) {
            const EigenSpectrum spec = ensemble.draw(cfg.seed + t);
            return std::make_pair(count_in_interval(spec, tested.left, tested.right),
                                  detail::clearance(spec, tested));
        });
        double worst_clearance = std::numeric_limits<double>::infinity();
        for (const auto& [count, clear] : outcomes) {
            counts[si].push_back(count);
            worst_clearance = std::min(worst_clearance, clear);
        }
        detail::append_trials(report, cfg, size, "gap_count", counts[si]);
        clearances.push_back(worst_clearance);

        nlohmann::json entry = {{"p", size.p},
                                {"n", size.n},
                                {"c", c.value()},
                                {"support", detail::support_json(support)},
                                {"tested_interval", {tested.left, tested.right}},
                                {"margin", margin},
                                {"interval_outside_support", is_outside_support(tested, support, margin)},
                                {"interval_source", cfg.interval ? "override" : "widest_gap"}};
        if (gap) entry["gap"] = {gap->left, gap->right};
        predicted.push_back(entry);
    }

    const std::size_t big = detail::largest_size(cfg.sizes);
    nlohmann::json per_size = nlohmann::json::array();
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
        const auto& v = counts[si];
        per_size.push_back({{"p", cfg.sizes[si].p},
                            {"n", cfg.sizes[si].n},
                            {"total_count", std::accumulate(v.begin(), v.end(), std::size_t{0})},
                            {"trials_with_zero", std::count(v.begin(), v.end(), std::size_t{0})},
                            {"min_clearance", clearances[si]}});
    }
    const std::size_t total_big = std::accumulate(counts[big].begin(), counts[big].end(), std::size_t{0});
    report.passed = total_big == 0;
    report.checks = {{"per_size", per_size}, {"total_count_largest", total_big}};
    report.criterion = "no eigenvalue in the tested interval in any trial at the largest size";
    report.predicted = predicted;
    report.calibration = detail::base_calibration(cfg);
    if (cfg.margin) report.calibration["margin"] = *cfg.margin;
    else report.calibration["margin_rule"] = "1e-3 x gap width";
    report.groups = summarize(report.records);
    return report;
}

/// Largest eigenvalue against the edge (1 + sqrt(c_n))^2 s^2 for Sigma = s^2 I.
inline ExperimentReport run_edge_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    detail::require_kind(cfg, ExperimentKind::edge);
    if (cfg.filter.kind != FilterKind::identity && cfg.filter.kind != FilterKind::scaled_identity)
        throw ValidationError("edge experiment: the filter must imply Sigma = I (identity or scaled_identity), got " +
                              to_string(cfg.filter.kind));
    ExperimentReport report;
    report.experiment = "edge";
    nlohmann::json predicted = nlohmann::json::array();
    nlohmann::json per_size = nlohmann::json::array();
    const std::size_t big = detail::largest_size(cfg.sizes);
    bool passed = false;

    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
        const SizePair size = cfg.sizes[si];
        const FilterSpec filter = cfg.filter.at(size.p);
        const double c = static_cast<double>(size.p) / static_cast<double>(size.n);
        const double target = std::pow(1.0 + std::sqrt(c), 2) * filter.scalar_variance();
        const Ensemble ensemble(filter, size.n, cfg.entry);
        detail::log(opts, "edge " + detail::size_label(size) + ": target " + format_double(target));
        const auto top = ordered_parallel_map(cfg.trials, opts.workers,
                                              [&](std::size_t t) { return ensemble.draw(cfg.seed + t).max(); });
        detail::append_trials(report, cfg, size, "lambda_max", top);

        const StatSummary s = summarize_values(top);
        double worst = 0.0;
        for (double v : top) worst = std::max(worst, std::abs(v - target));
        const double bias = s.mean - target;
        const bool ok = std::abs(bias) < cfg.tolerance && worst < 3.0 * cfg.tolerance;
        if (si == big) passed = ok;
        predicted.push_back({{"p", size.p}, {"n", size.n}, {"c", c}, {"edge", target}});
        per_size.push_back({{"p", size.p},
                            {"n", size.n},
                            {"mean_minus_edge", bias},
                            {"max_abs_deviation", worst},
                            {"within_tolerance", ok}});
    }
    report.passed = passed;
    report.checks = {{"per_size", per_size}};
    report.criterion = "at the largest size |mean lambda_max - edge| < tolerance and max |lambda_max - edge| < "
                       "3 x tolerance";
    report.predicted = predicted;
    report.calibration = detail::base_calibration(cfg);
    report.calibration["tolerance"] = cfg.tolerance;
    report.groups = summarize(report.records);
    return report;
}

/// Least-squares slope and intercept of y on x.
inline std::pair<double, double> least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("least_squares_line: need two or more points");
    const double k = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw ValidationError("least_squares_line: x values are all equal");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

/// Growth of E|x* B* A B x - tr(A Sigma)|^2 with the dimension. Each record
/// is one squared deviation, so the per-size mean is the second moment.
inline ExperimentReport run_qf_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    detail::require_kind(cfg, ExperimentKind::qf);
    {
        std::vector<std::size_t> dims;
        for (const auto& s : cfg.sizes) dims.push_back(s.p);
        std::sort(dims.begin(), dims.end());
        if (std::unique(dims.begin(), dims.end()) - dims.begin() < 3)
            throw ValidationError("qf experiment: insufficient sizes for regression (need at least 3 distinct dimensions)");
    }
    constexpr std::size_t kChunk = 256;
    ExperimentReport report;
    report.experiment = "qf";
    const bool control = cfg.filter.kind == FilterKind::identity && cfg.form_matrix == FormMatrix::identity &&
                         (cfg.entry.kind == EntryKind::gaussian_real || cfg.entry.kind == EntryKind::gaussian_complex);
    const auto bounds = cfg.slope_bounds.value_or(control ? std::make_pair(0.85, 1.15)
                                                          : std::make_pair(-std::numeric_limits<double>::infinity(), 1.15));

    std::vector<double> log_dim;
    std::vector<double> log_moment;
    nlohmann::json per_size = nlohmann::json::array();
    bool references_ok = true;
    for (const SizePair& size : cfg.sizes) {
        const FilterSpec filter = cfg.filter.at(size.p);
        const ComplexMatrix B = build_filter(filter);
        const ComplexMatrix A = cfg.form_matrix == FormMatrix::identity
                                    ? ComplexMatrix::Identity(B.rows(), B.rows())
                                    : implied_sigma(filter);
        const QuadraticFormProbe probe(B, A, cfg.entry);
        detail::log(opts, "qf " + detail::size_label(size) + ": " + std::to_string(cfg.trials) + " trials");
        const std::size_t chunks = (cfg.trials + kChunk - 1) / kChunk;
        const auto parts = ordered_parallel_map(chunks, opts.workers, [&](std::size_t k) {
            const std::size_t first = k * kChunk;
            return probe.deviations(first, std::min(kChunk, cfg.trials - first), cfg.seed);
        });
        std::vector<double> squared;
        squared.reserve(cfg.trials);
        for (const auto& part : parts)
            for (double d : part) squared.push_back(d * d);
        detail::append_trials(report, cfg, size, "squared_deviation", squared);

        const double moment = summarize_values(squared).mean;
        const double reference = probe.exact_second_moment();
        const double rel = std::isfinite(reference) && reference > 0.0 ? std::abs(moment / reference - 1.0)
                                                                        : std::numeric_limits<double>::quiet_NaN();
        if (control && !(rel < cfg.reference_tolerance)) references_ok = false;
        log_dim.push_back(std::log(static_cast<double>(size.p)));
        log_moment.push_back(std::log(moment));
        nlohmann::json row = {{"p", size.p},
                              {"n", size.n},
                              {"vector_length", probe.vector_length()},
                              {"second_moment", moment},
                              {"exact_second_moment", std::isfinite(reference) ? nlohmann::json(reference) : nlohmann::json()}};
        if (std::isfinite(rel)) row["relative_error"] = rel;
        per_size.push_back(row);
    }
    const auto [slope, intercept] = least_squares_line(log_dim, log_moment);
    report.passed = slope >= bounds.first && slope <= bounds.second && references_ok;
    report.checks = {{"per_size", per_size},
                     {"slope", slope},
                     {"intercept", intercept},
                     {"gaussian_control", control},
                     {"references_within_tolerance", references_ok}};
    report.criterion = control ? "log-log slope of the second moment within slope_bounds and every second moment "
                                 "within reference_tolerance of its exact value"
                               : "log-log slope of the second moment within slope_bounds";
    report.predicted = {{"slope_upper_bound", 1.0}};
    report.calibration = detail::base_calibration(cfg);
    report.calibration["slope_bounds"] = {bounds.first, bounds.second};
    report.calibration["reference_tolerance"] = cfg.reference_tolerance;
    report.calibration["quadratic_form"] = cfg.form_matrix == FormMatrix::identity ? "identity" : "sigma";
    report.groups = summarize(report.records);
    return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    if (!cfg.kind) throw ValidationError("config: 'experiment' is not set");
    switch (*cfg.kind) {
        case ExperimentKind::lsd: return run_lsd_experiment(cfg, opts);
        case ExperimentKind::gap: return run_gap_experiment(cfg, opts);
        case ExperimentKind::edge: return run_edge_experiment(cfg, opts);
        case ExperimentKind::qf: return run_qf_experiment(cfg, opts);
    }
    throw ValidationError("config: unknown experiment kind");
}

/// Where a report goes: `<directory>/<experiment>_records.csv` and
/// `<directory>/<experiment>_summary.json` unless the config names the files.
struct ReportPaths {
    std::filesystem::path records;
    std::filesystem::path summary;
};

inline ReportPaths report_paths(const ExperimentConfig& cfg, const std::string& experiment,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
    const std::filesystem::path dir = out_dir.value_or(cfg.output.directory);
    return {dir / cfg.output.records.value_or(experiment + "_records.csv"),
            dir / cfg.output.summary.value_or(experiment + "_summary.json")};
}

inline void write_report(const ExperimentReport& report, const ReportPaths& paths) {
    write_records_csv(report, paths.records);
    write_summary_json(report, paths.summary);
}

// ---------------------------------------------------------------------------
// Density profiles

struct DensityGrid {
    std::size_t points = 512;
    double padding = 0.1;  // fraction of the support width added on each side
};

struct DensityProfile {
    std::vector<double> x;
    std::vector<double> density;
    SupportSet support;
    double zero_atom = 0.0;  // mass of F at zero

    /// Trapezoid integral of the sampled density.
    double integral() const {
        double acc = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (density[i] + density[i - 1]);
        return acc;
    }
};

/// Density of F on a uniform grid over the support padded by `padding` of its
/// width on each side. The left end never goes below half the left edge: an
/// atom of F at zero would otherwise show up as a Cauchy spike of height
/// ~ 1 / (pi v) next to the origin.
inline DensityProfile density_profile(AspectRatio c, const SpectralMeasure& H, const DensityGrid& grid = {},
                                      const SolverOptions& opts = {}) {
    if (grid.points < 2) throw ValidationError("density_profile: need at least 2 grid points");
    if (!(grid.padding >= 0.0)) throw ValidationError("density_profile: padding must be nonnegative");
    DensityProfile out;
    out.support = find_support(c, H);
    out.zero_atom = lsd_zero_atom(c, H);
    const double width = out.support.right_edge() - out.support.left_edge();
    const double left = out.support.left_edge();
    const double lo = left > 0.0 ? std::max(left - grid.padding * width, 0.5 * left) : 1e-9 * width;
    const double hi = out.support.right_edge() + grid.padding * width;
    out.x.resize(grid.points);
    for (std::size_t i = 0; i < grid.points; ++i)
        out.x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid.points - 1);
    out.density = density_scan(out.x, c, H, opts);
    return out;
}

/// Companion file for the support endpoints: `<stem>_support<ext>`.
inline std::filesystem::path support_path_for(const std::filesystem::path& profile_path) {
    std::filesystem::path p = profile_path;
    p.replace_filename(profile_path.stem().string() + "_support" + profile_path.extension().string());
    return p;
}

inline void write_density_profile(const DensityProfile& profile, const std::filesystem::path& path) {
    std::string body = "# x density\n";
    for (std::size_t i = 0; i < profile.x.size(); ++i)
        body += format_double(profile.x[i]) + ' ' + format_double(profile.density[i]) + '\n';
    write_text(path, body);

    std::string edges = "# left right\n";
    for (const auto& iv : profile.support.intervals)
        edges += format_double(iv.left) + ' ' + format_double(iv.right) + '\n';
    edges += "# zero_atom " + format_double(profile.zero_atom) + '\n';
    write_text(support_path_for(path), edges);
}

/// Compute and write a plot-ready density profile plus its support file.
inline DensityProfile emit_density_profile(AspectRatio c, const SpectralMeasure& H, const DensityGrid& grid,
                                           const std::filesystem::path& path, const SolverOptions& opts = {}) {
    DensityProfile profile = density_profile(c, H, grid, opts);
    write_density_profile(profile, path);
    return profile;
}

}  // namespace specsep::experiments
