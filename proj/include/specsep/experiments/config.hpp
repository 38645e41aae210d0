#pragma once

// Experiment configuration: one JSON object per campaign. Every key is
// checked; an unknown key is an error so that a typo cannot silently fall
// back to a default.
//
//   {
//     "experiment": "lsd",
//     "filter": {"kind": "toeplitz_filter", "coefficients": [1.0, 0.5]},
//     "entry": {"kind": "gaussian_real"},
//     "sizes": [[100, 200], [400, 800]],
//     "trials": 20,
//     "seed": 1
//   }

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specsep/errors.hpp"
#include "specsep/model.hpp"
#include "specsep/support.hpp"

namespace specsep::experiments {

enum class ExperimentKind { lsd, gap, edge, qf };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::lsd: return "lsd";
        case ExperimentKind::gap: return "gap";
        case ExperimentKind::edge: return "edge";
        case ExperimentKind::qf: return "qf";
    }
    return "unknown";
}

inline ExperimentKind parse_experiment_kind(const std::string& s) {
    if (s == "lsd") return ExperimentKind::lsd;
    if (s == "gap") return ExperimentKind::gap;
    if (s == "edge") return ExperimentKind::edge;
    if (s == "qf") return ExperimentKind::qf;
    throw ValidationError("config: unknown experiment '" + s + "' (expected lsd, gap, edge or qf)");
}

struct SizePair {
    std::size_t p;
    std::size_t n;
};

/// Filter recipe that can be instantiated at any dimension p.
///
/// For explicit roots given by a diagonal pattern of length L, p must be a
/// multiple of L and each entry fills a block of p / L consecutive positions.
struct FilterConfig {
    FilterKind kind = FilterKind::identity;
    double scale = 1.0;
    std::vector<std::vector<double>> matrix;       // explicit root, rows
    std::vector<std::vector<double>> matrix_imag;  // optional imaginary part
    std::vector<double> root_diagonal;             // explicit root, diagonal pattern
    std::vector<double> coefficients;              // toeplitz

    FilterSpec at(std::size_t p) const {
        switch (kind) {
            case FilterKind::identity: return FilterSpec::identity(p);
            case FilterKind::scaled_identity: return FilterSpec::scaled_identity(p, scale);
            case FilterKind::toeplitz_filter: return FilterSpec::toeplitz(p, coefficients);
            case FilterKind::explicit_sigma_sqrt: break;
        }
        if (!matrix.empty()) {
            if (matrix.size() != p) {
                std::ostringstream msg;
                msg << "config: explicit filter matrix has " << matrix.size() << " rows but p = " << p;
                throw ValidationError(msg.str());
            }
            const auto dim = static_cast<Eigen::Index>(p);
            ComplexMatrix root(dim, dim);
            for (std::size_t i = 0; i < p; ++i) {
                if (matrix[i].size() != p) throw ValidationError("config: explicit filter matrix must be square");
                for (std::size_t j = 0; j < p; ++j) {
                    const double im = matrix_imag.empty() ? 0.0 : matrix_imag.at(i).at(j);
                    root(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = {matrix[i][j], im};
                }
            }
            return FilterSpec::explicit_sigma_sqrt(std::move(root));
        }
        const std::size_t len = root_diagonal.size();
        if (len == 0 || p % len != 0) {
            std::ostringstream msg;
            msg << "config: p = " << p << " is not a multiple of the diagonal pattern length " << len;
            throw ValidationError(msg.str());
        }
        const std::size_t block = p / len;
        RealMatrix root = RealMatrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        for (std::size_t i = 0; i < p; ++i) root(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = root_diagonal[i / block];
        return FilterSpec::explicit_sigma_sqrt(root);
    }
};

enum class FormMatrix { identity, sigma };

struct OutputPaths {
    std::string directory = ".";
    std::optional<std::string> records;  // default <experiment>_records.csv
    std::optional<std::string> summary;  // default <experiment>_summary.json
};

struct ExperimentConfig {
    std::optional<ExperimentKind> kind;
    FilterConfig filter;
    EntryDistribution entry;
    std::vector<SizePair> sizes;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::optional<double> declared_c;

    // gap
    std::optional<Interval> interval;
    std::optional<double> margin;
    // lsd
    double threshold = 0.05;
    double min_paired_fraction = 0.8;
    // edge
    double tolerance = 0.10;
    // qf
    FormMatrix form_matrix = FormMatrix::identity;
    std::optional<std::pair<double, double>> slope_bounds;
    double reference_tolerance = 0.10;

    OutputPaths output;

    /// Model of one ensemble at a configured size.
    ModelSpec model(const SizePair& size) const { return ModelSpec{filter.at(size.p), size.n, entry, seed}; }

    void validate() const {
        if (trials == 0) throw ValidationError("config: trials must be positive");
        if (sizes.empty()) throw ValidationError("config: at least one size is required");
        for (const auto& s : sizes)
            if (s.p < 2 || s.n < 2) throw ValidationError("config: every size needs p, n >= 2");
        entry.validate();
        if (filter.kind == FilterKind::toeplitz_filter && filter.coefficients.empty())
            throw ValidationError("config: toeplitz_filter needs coefficients");
        if (filter.kind == FilterKind::explicit_sigma_sqrt && filter.matrix.empty() && filter.root_diagonal.empty())
            throw ValidationError("config: explicit_sigma_sqrt needs 'matrix', 'diagonal' or 'sigma_diagonal'");
        if (declared_c && !(*declared_c > 0.0 && std::isfinite(*declared_c)))
            throw ValidationError("config: c must be positive");
        if (interval && !(interval->left > 0.0 && interval->left < interval->right))
            throw ValidationError("config: interval must satisfy 0 < a < b");
        if (margin && !(*margin > 0.0)) throw ValidationError("config: margin must be positive");
        if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("config: threshold must be in (0, 1)");
        if (!(min_paired_fraction >= 0.0 && min_paired_fraction <= 1.0))
            throw ValidationError("config: min_paired_fraction must be in [0, 1]");
        if (!(tolerance > 0.0)) throw ValidationError("config: tolerance must be positive");
        if (!(reference_tolerance > 0.0)) throw ValidationError("config: reference_tolerance must be positive");
        if (slope_bounds && !(slope_bounds->first <= slope_bounds->second))
            throw ValidationError("config: slope_bounds must be ordered");

        // Sizes must stay near one aspect ratio (the declared c, else the first
        // size's). The QF experiment scales the vector length only, so it is
        // exempt.
        if (kind != ExperimentKind::qf && (declared_c || sizes.size() > 1)) {
            const double c = declared_c.value_or(static_cast<double>(sizes.front().p) / static_cast<double>(sizes.front().n));
            for (const auto& s : sizes) {
                const double ratio = static_cast<double>(s.p) / static_cast<double>(s.n);
                if (std::abs(ratio - c) > 0.1 * c) {
                    std::ostringstream msg;
                    msg << "config: size (" << s.p << ", " << s.n << ") has p/n = " << ratio
                        << ", more than 10% away from c = " << c;
                    throw ValidationError(msg.str());
                }
            }
        }
    }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ValidationError("config: '" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) throw ValidationError("config: unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError("config: bad value for '" + key + "': " + e.what());
    }
}

inline std::vector<std::vector<double>> get_rows(const json& j, const std::string& key) {
    auto rows = get_as<std::vector<std::vector<double>>>(j, key);
    if (rows.empty()) throw ValidationError("config: '" + key + "' is empty");
    return rows;
}

inline FilterConfig parse_filter(const json& j) {
    reject_unknown_keys(j, {"kind", "scale", "matrix", "matrix_imag", "diagonal", "sigma_diagonal", "coefficients"},
                        "filter");
    FilterConfig f;
    const auto kind = get_as<std::string>(j, "kind");
    if (kind == "identity") {
        f.kind = FilterKind::identity;
    } else if (kind == "scaled_identity") {
        f.kind = FilterKind::scaled_identity;
        f.scale = get_as<double>(j, "scale");
    } else if (kind == "toeplitz_filter") {
        f.kind = FilterKind::toeplitz_filter;
        f.coefficients = get_as<std::vector<double>>(j, "coefficients");
    } else if (kind == "explicit_sigma_sqrt") {
        f.kind = FilterKind::explicit_sigma_sqrt;
        const int given = static_cast<int>(j.contains("matrix")) + static_cast<int>(j.contains("diagonal")) +
                          static_cast<int>(j.contains("sigma_diagonal"));
        if (given != 1)
            throw ValidationError("config: explicit_sigma_sqrt needs exactly one of 'matrix', 'diagonal', 'sigma_diagonal'");
        if (j.contains("matrix")) {
            f.matrix = get_rows(j, "matrix");
            if (j.contains("matrix_imag")) f.matrix_imag = get_rows(j, "matrix_imag");
        } else if (j.contains("diagonal")) {
            f.root_diagonal = get_as<std::vector<double>>(j, "diagonal");
        } else {
            // Diagonal Sigma: the root is the elementwise square root.
            for (double s : get_as<std::vector<double>>(j, "sigma_diagonal")) {
                if (!(s >= 0.0)) throw ValidationError("config: sigma_diagonal entries must be nonnegative");
                f.root_diagonal.push_back(std::sqrt(s));
            }
        }
        if (f.matrix.empty() && f.root_diagonal.empty()) throw ValidationError("config: empty explicit root");
    } else {
        throw ValidationError("config: unknown filter kind '" + kind + "'");
    }
    if (f.kind != FilterKind::scaled_identity && j.contains("scale"))
        throw ValidationError("config: 'scale' only applies to scaled_identity");
    if (f.kind != FilterKind::toeplitz_filter && j.contains("coefficients"))
        throw ValidationError("config: 'coefficients' only applies to toeplitz_filter");
    if (f.kind != FilterKind::explicit_sigma_sqrt &&
        (j.contains("matrix") || j.contains("diagonal") || j.contains("sigma_diagonal") || j.contains("matrix_imag")))
        throw ValidationError("config: matrix/diagonal keys only apply to explicit_sigma_sqrt");
    return f;
}

inline EntryDistribution parse_entry(const json& j) {
    reject_unknown_keys(j, {"kind", "dof", "moment_margin"}, "entry");
    EntryDistribution d;
    const auto kind = get_as<std::string>(j, "kind");
    if (kind == "gaussian_real") d.kind = EntryKind::gaussian_real;
    else if (kind == "gaussian_complex") d.kind = EntryKind::gaussian_complex;
    else if (kind == "rademacher") d.kind = EntryKind::rademacher;
    else if (kind == "student_t") d.kind = EntryKind::student_t;
    else throw ValidationError("config: unknown entry kind '" + kind + "'");
    if (j.contains("dof")) d.dof = get_as<double>(j, "dof");
    if (j.contains("moment_margin")) d.moment_margin = get_as<double>(j, "moment_margin");
    return d;
}

inline std::vector<SizePair> parse_sizes(const json& j) {
    if (!j.is_array()) throw ValidationError("config: 'sizes' must be a list");
    std::vector<SizePair> out;
    for (const auto& item : j) {
        if (item.is_number_unsigned()) {
            const auto d = item.get<std::size_t>();
            out.push_back({d, d});
        } else if (item.is_array() && item.size() == 2 && item[0].is_number_unsigned() && item[1].is_number_unsigned()) {
            out.push_back({item[0].get<std::size_t>(), item[1].get<std::size_t>()});
        } else {
            throw ValidationError("config: each size must be [p, n] or a single dimension");
        }
    }
    return out;
}

}  // namespace detail

/// Parse and validate a config object.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::get_as;
    detail::reject_unknown_keys(j,
                                {"experiment", "filter", "entry", "sizes", "trials", "seed", "c", "interval", "margin",
                                 "threshold", "min_paired_fraction", "tolerance", "quadratic_form", "slope_bounds",
                                 "reference_tolerance", "output"},
                                "config");
    ExperimentConfig cfg;
    if (j.contains("experiment")) cfg.kind = parse_experiment_kind(get_as<std::string>(j, "experiment"));
    if (j.contains("filter")) cfg.filter = detail::parse_filter(j.at("filter"));
    if (j.contains("entry")) cfg.entry = detail::parse_entry(j.at("entry"));
    if (!j.contains("sizes")) throw ValidationError("config: missing 'sizes'");
    cfg.sizes = detail::parse_sizes(j.at("sizes"));
    if (!j.contains("trials")) throw ValidationError("config: missing 'trials'");
    const auto trials = get_as<long long>(j, "trials");
    if (trials <= 0) throw ValidationError("config: trials must be positive");
    cfg.trials = static_cast<std::size_t>(trials);
    if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j, "seed");
    if (j.contains("c")) cfg.declared_c = get_as<double>(j, "c");
    if (j.contains("interval")) {
        const auto iv = get_as<std::vector<double>>(j, "interval");
        if (iv.size() != 2) throw ValidationError("config: interval must be [a, b]");
        cfg.interval = Interval{iv[0], iv[1]};
    }
    if (j.contains("margin")) cfg.margin = get_as<double>(j, "margin");
    if (j.contains("threshold")) cfg.threshold = get_as<double>(j, "threshold");
    if (j.contains("min_paired_fraction")) cfg.min_paired_fraction = get_as<double>(j, "min_paired_fraction");
    if (j.contains("tolerance")) cfg.tolerance = get_as<double>(j, "tolerance");
    if (j.contains("reference_tolerance")) cfg.reference_tolerance = get_as<double>(j, "reference_tolerance");
    if (j.contains("quadratic_form")) {
        const auto& q = j.at("quadratic_form");
        detail::reject_unknown_keys(q, {"matrix"}, "quadratic_form");
        const auto which = get_as<std::string>(q, "matrix");
        if (which == "identity") cfg.form_matrix = FormMatrix::identity;
        else if (which == "sigma") cfg.form_matrix = FormMatrix::sigma;
        else throw ValidationError("config: quadratic_form.matrix must be 'identity' or 'sigma'");
    }
    if (j.contains("slope_bounds")) {
        const auto b = get_as<std::vector<double>>(j, "slope_bounds");
        if (b.size() != 2) throw ValidationError("config: slope_bounds must be [low, high]");
        cfg.slope_bounds = std::make_pair(b[0], b[1]);
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::reject_unknown_keys(o, {"directory", "records", "summary"}, "output");
        if (o.contains("directory")) cfg.output.directory = get_as<std::string>(o, "directory");
        if (o.contains("records")) cfg.output.records = get_as<std::string>(o, "records");
        if (o.contains("summary")) cfg.output.summary = get_as<std::string>(o, "summary");
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("config: not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace specsep::experiments
