// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "corpuskit/corpus.hpp"
#include "corpuskit/util.hpp"

namespace corpuskit {

// Checkpoint metric trajectory: (tokens trained, metric value) points.
struct MetricSeries {
    std::vector<std::pair<double, double>> points;

    void validate() const {
        if (points.size() < 2) throw DataError("metric series needs at least 2 points");
        double prev = 0.0;
        for (const auto& [x, y] : points) {
            if (x <= 0.0) throw DataError("metric series x values must be > 0");
            if (x <= prev) throw DataError("metric series x values must be strictly increasing");
            prev = x;
        }
    }
};

// Reads CSV rows "tokens,metric"; a non-numeric first row is treated as a header.
inline MetricSeries read_metric_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    MetricSeries series;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view trimmed = trim(line);
        if (trimmed.empty()) continue;
        const size_t comma = trimmed.find(',');
        if (comma == std::string_view::npos)
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 'x,y'");
        try {
            const double x = std::stod(std::string(trimmed.substr(0, comma)));
            const double y = std::stod(std::string(trimmed.substr(comma + 1)));
            series.points.emplace_back(x, y);
        } catch (const std::exception&) {
            if (line_no == 1) continue;  // header row
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric row");
        }
    }
    series.validate();
    return series;
}

struct LogFit {
    double intercept = 0.0;  // a in y = a + b ln x
    double slope = 0.0;      // b
    double rss = 0.0;
};

// Ordinary least squares of y = a + b ln(x), closed form via the centered
// normal equations.
inline LogFit fit_log_curve(const MetricSeries& series) {
    series.validate();
    const size_t n = series.points.size();
    double t_mean = 0.0, y_mean = 0.0;
    for (const auto& [x, y] : series.points) {
        t_mean += std::log(x);
        y_mean += y;
    }
    t_mean /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);

    double stt = 0.0, sty = 0.0;
    for (const auto& [x, y] : series.points) {
        const double dt = std::log(x) - t_mean;
        stt += dt * dt;
        sty += dt * (y - y_mean);
    }
    if (stt == 0.0) throw DataError("degenerate fit: all x values equal");

    LogFit fit;
    fit.slope = sty / stt;
    fit.intercept = y_mean - fit.slope * t_mean;
    for (const auto& [x, y] : series.points) {
        const double r = y - fit.intercept - fit.slope * std::log(x);
        fit.rss += r * r;
    }
    return fit;
}

inline double extrapolate(const LogFit& fit, double x) {
    if (x <= 0.0) throw DataError("extrapolation point must be > 0");
    return fit.intercept + fit.slope * std::log(x);
}

struct PipelineReport {
    std::vector<StageStats> stages;
    double cumulative_survival = 1.0;  // product of per-stage token survival

    double cumulative_removal() const { return 1.0 - cumulative_survival; }

    json to_json() const {
        json stages_json = json::array();
        for (const auto& s : stages) stages_json.push_back(s.to_json());
        return json{{"stages", stages_json},
                    {"cumulative_survival", cumulative_survival},
                    {"cumulative_removal", cumulative_removal()}};
    }

    std::string to_table() const {
        std::string out;
        char line[256];
        std::snprintf(line, sizeof(line), "%-20s %12s %12s %14s %14s %9s\n", "stage", "docs_in",
                      "docs_out", "tokens_in", "tokens_out", "removed");
        out += line;
        out += std::string(85, '-') + "\n";
        for (const auto& s : stages) {
            std::snprintf(line, sizeof(line), "%-20s %12llu %12llu %14llu %14llu %8.2f%%\n",
                          s.stage.c_str(), static_cast<unsigned long long>(s.docs_in),
                          static_cast<unsigned long long>(s.docs_out),
                          static_cast<unsigned long long>(s.tokens_in),
                          static_cast<unsigned long long>(s.tokens_out),
                          100.0 * s.removal_fraction());
            out += line;
        }
        out += std::string(85, '-') + "\n";
        std::snprintf(line, sizeof(line), "cumulative survival %.4f (removal %.2f%%)\n",
                      cumulative_survival, 100.0 * cumulative_removal());
        out += line;
        return out;
    }
};

// Chains per-stage statistics into one pipeline report. Stages must link up
// exactly: tokens flowing out of one stage flow into the next.
inline PipelineReport aggregate_stats(const std::vector<StageStats>& stages) {
    PipelineReport report;
    report.stages = stages;
    for (size_t i = 0; i + 1 < stages.size(); ++i) {
        if (stages[i].tokens_out != stages[i + 1].tokens_in)
            throw DataError("inconsistent stage chain: '" + stages[i].stage + "' emits " +
                            std::to_string(stages[i].tokens_out) + " tokens but '" +
                            stages[i + 1].stage + "' ingests " +
                            std::to_string(stages[i + 1].tokens_in));
    }
    for (const auto& s : stages) {
        if (s.tokens_in > 0)
            report.cumulative_survival *=
                static_cast<double>(s.tokens_out) / static_cast<double>(s.tokens_in);
    }
    return report;
}

}  // namespace corpuskit
