#pragma once

// Experiment reports: one CSV row per (trial, size) and a JSON sidecar with
// per-size summaries, the pass/fail verdict and the predicted quantities the
// verdict was judged against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specsep/errors.hpp"

namespace specsep::experiments {

struct TrialRecord {
    std::string experiment;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t p = 0;
    std::size_t n = 0;
    std::string statistic;
    double value = 0.0;
};

struct StatSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double stdev = 0.0;  // sample standard deviation, 0 for a single value
    double min = 0.0;
    double max = 0.0;

    bool operator==(const StatSummary&) const = default;
};

/// Summary of one statistic at one size.
struct GroupSummary {
    std::size_t p = 0;
    std::size_t n = 0;
    std::string statistic;
    StatSummary stats;

    bool operator==(const GroupSummary&) const = default;
};

inline StatSummary summarize_values(const std::vector<double>& values) {
    StatSummary s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stdev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

/// Group records by (p, n, statistic) in order of first appearance.
inline std::vector<GroupSummary> summarize(const std::vector<TrialRecord>& records) {
    std::vector<GroupSummary> groups;
    std::vector<std::vector<double>> values;
    for (const auto& r : records) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const GroupSummary& g) {
            return g.p == r.p && g.n == r.n && g.statistic == r.statistic;
        });
        if (it == groups.end()) {
            groups.push_back({r.p, r.n, r.statistic, {}});
            values.emplace_back();
            it = groups.end() - 1;
        }
        values[static_cast<std::size_t>(it - groups.begin())].push_back(r.value);
    }
    for (std::size_t g = 0; g < groups.size(); ++g) groups[g].stats = summarize_values(values[g]);
    return groups;
}

struct ExperimentReport {
    std::string experiment;
    std::vector<TrialRecord> records;
    std::vector<GroupSummary> groups;
    bool passed = false;
    std::string criterion;        // the pass rule in words
    nlohmann::json checks;        // values the rule was evaluated on
    nlohmann::json predicted;     // support, edges, targets from the limit theory
    nlohmann::json calibration;   // tolerances and defaults in force

    /// Values of one statistic at one size, in trial order.
    std::vector<double> values(std::size_t p, std::size_t n, const std::string& statistic) const {
        std::vector<double> out;
        for (const auto& r : records)
            if (r.p == p && r.n == n && r.statistic == statistic) out.push_back(r.value);
        return out;
    }
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string records_csv(const std::vector<TrialRecord>& records) {
    std::string out = "experiment,trial,seed,p,n,statistic_name,value\n";
    for (const auto& r : records) {
        out += r.experiment + ',' + std::to_string(r.trial) + ',' + std::to_string(r.seed) + ',' +
               std::to_string(r.p) + ',' + std::to_string(r.n) + ',' + r.statistic + ',' + format_double(r.value) +
               '\n';
    }
    return out;
}

inline nlohmann::json summary_json(const ExperimentReport& report) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : report.groups) {
        groups.push_back({{"p", g.p},
                          {"n", g.n},
                          {"statistic", g.statistic},
                          {"count", g.stats.count},
                          {"mean", g.stats.mean},
                          {"stdev", g.stats.stdev},
                          {"min", g.stats.min},
                          {"max", g.stats.max}});
    }
    return {{"experiment", report.experiment},
            {"passed", report.passed},
            {"criterion", report.criterion},
            {"record_count", report.records.size()},
            {"summary", groups},
            {"checks", report.checks},
            {"predicted", report.predicted},
            {"calibration", report.calibration}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

inline void write_records_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    write_text(path, records_csv(report.records));
}

inline void write_summary_json(const ExperimentReport& report, const std::filesystem::path& path) {
    write_text(path, summary_json(report).dump(2) + "\n");
}

}  // namespace specsep::experiments
