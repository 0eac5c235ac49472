// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "corpuskit/scaling.hpp"
#include "oracles.hpp"

using namespace corpuskit;

namespace {

MetricSeries log_law(double a, double b, const std::vector<double>& xs,
                     const std::vector<double>& noise = {}) {
    MetricSeries s;
    for (size_t i = 0; i < xs.size(); ++i)
        s.points.emplace_back(xs[i], a + b * std::log(xs[i]) + (i < noise.size() ? noise[i] : 0.0));
    return s;
}

// Independent least-squares oracle: solve the 2x2 normal equations directly.
std::pair<double, double> normal_equation_fit(const MetricSeries& s) {
    double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
    for (const auto& [x, y] : s.points) {
        const double t = std::log(x);
        n += 1;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    const double det = n * stt - st * st;
    const double a = (stt * sy - st * sty) / det;
    const double b = (n * sty - st * sy) / det;
    return {a, b};
}

}  // namespace

TEST_CASE("noiseless log-law data is recovered to 1e-9 relative") {
    std::vector<double> xs;
    for (double x = 1e9; x <= 1.1e12; x *= 2.3) xs.push_back(x);
    const auto fit = fit_log_curve(log_law(2.0, 3.0, xs));
    CHECK(fit.intercept == Catch::Approx(2.0).epsilon(1e-9));
    CHECK(fit.slope == Catch::Approx(3.0).epsilon(1e-9));
    CHECK(fit.rss < 1e-12);
}

TEST_CASE("two points interpolate exactly with zero rss") {
    MetricSeries s;
    s.points = {{100.0, 5.0}, {1000.0, 9.0}};
    const auto fit = fit_log_curve(s);
    CHECK(extrapolate(fit, 100.0) == Catch::Approx(5.0));
    CHECK(extrapolate(fit, 1000.0) == Catch::Approx(9.0));
    CHECK(fit.rss < 1e-20);
}

TEST_CASE("noisy fits match the independent normal-equation oracle") {
    Rng rng(404);
    std::vector<double> xs, noise;
    for (double x = 1e8; x <= 1e12; x *= 1.7) {
        xs.push_back(x);
        noise.push_back((rng.uniform_real() - 0.5) * 0.1);
    }
    const auto series = log_law(1.3, -0.7, xs, noise);
    const auto fit = fit_log_curve(series);
    const auto [a, b] = normal_equation_fit(series);
    CHECK(fit.intercept == Catch::Approx(a).epsilon(1e-9));
    CHECK(fit.slope == Catch::Approx(b).epsilon(1e-9));
}

TEST_CASE("degenerate series are rejected") {
    MetricSeries one;
    one.points = {{10.0, 1.0}};
    CHECK_THROWS_AS(fit_log_curve(one), DataError);

    MetricSeries repeated;
    repeated.points = {{10.0, 1.0}, {10.0, 2.0}};
    CHECK_THROWS_AS(fit_log_curve(repeated), DataError);

    MetricSeries negative;
    negative.points = {{-1.0, 1.0}, {10.0, 2.0}};
    CHECK_THROWS_AS(fit_log_curve(negative), DataError);
}

TEST_CASE("extrapolation evaluates the fitted curve") {
    LogFit fit;
    fit.intercept = 2.0;
    fit.slope = 3.0;
    CHECK(extrapolate(fit, std::exp(1.0)) == Catch::Approx(5.0));
    CHECK_THROWS_AS(extrapolate(fit, 0.0), DataError);
    CHECK_THROWS_AS(extrapolate(fit, -5.0), DataError);

    // At a fitted x the curve value is returned, not the noisy data value.
    MetricSeries s;
    s.points = {{10.0, 1.0}, {100.0, 2.0}, {1000.0, 2.8}};
    const auto f = fit_log_curve(s);
    CHECK(extrapolate(f, 100.0) != 2.0);
}

TEST_CASE("first-half fits predict the second half within noise bounds") {
    Rng rng(405);
    const double sigma = 0.02;
    std::vector<double> xs, noise;
    for (double x = 2e9; x <= 3e12; x *= 1.45) {
        xs.push_back(x);
        // Sum of 12 uniforms approximates a gaussian well enough here.
        double g = 0;
        for (int i = 0; i < 12; ++i) g += rng.uniform_real();
        noise.push_back((g - 6.0) * sigma);
    }
    const auto series = log_law(0.31, 0.012, xs, noise);
    MetricSeries first_half;
    first_half.points.assign(series.points.begin(),
                             series.points.begin() + series.points.size() / 2);
    const auto fit = fit_log_curve(first_half);
    for (size_t i = series.points.size() / 2; i < series.points.size(); ++i) {
        const auto& [x, y] = series.points[i];
        CHECK(std::abs(extrapolate(fit, x) - y) <= 3.0 * sigma + 3.0 * sigma);
    }
}

TEST_CASE("fitted coefficients locally minimize rss") {
    Rng rng(406);
    std::vector<double> xs, noise;
    for (double x = 1e7; x < 1e11; x *= 2.1) {
        xs.push_back(x);
        noise.push_back((rng.uniform_real() - 0.5) * 0.3);
    }
    const auto series = log_law(4.0, 0.25, xs, noise);
    const auto fit = fit_log_curve(series);
    auto rss_at = [&](double a, double b) {
        double rss = 0;
        for (const auto& [x, y] : series.points) {
            const double r = y - a - b * std::log(x);
            rss += r * r;
        }
        return rss;
    };
    for (double da : {-1e-3, 0.0, 1e-3})
        for (double db : {-1e-3, 0.0, 1e-3})
            CHECK(rss_at(fit.intercept + da, fit.slope + db) >= fit.rss - 1e-12);
}

TEST_CASE("scaling all y values scales the fit linearly") {
    Rng rng(407);
    std::vector<double> xs, noise;
    for (double x = 1e6; x < 1e10; x *= 3.0) {
        xs.push_back(x);
        noise.push_back((rng.uniform_real() - 0.5) * 0.2);
    }
    const auto base = log_law(1.1, 0.4, xs, noise);
    MetricSeries scaled = base;
    const double c = 7.5;
    for (auto& [x, y] : scaled.points) y *= c;
    const auto f1 = fit_log_curve(base);
    const auto f2 = fit_log_curve(scaled);
    CHECK(f2.intercept == Catch::Approx(c * f1.intercept).epsilon(1e-9));
    CHECK(f2.slope == Catch::Approx(c * f1.slope).epsilon(1e-9));
    CHECK(std::sqrt(f2.rss) == Catch::Approx(c * std::sqrt(f1.rss)).epsilon(1e-9));
}

TEST_CASE("aggregate_stats chains stage survival multiplicatively") {
    StageStats s1{"one", 100, 50, 1000, 500};
    StageStats s2{"two", 50, 25, 500, 250};
    const auto report = aggregate_stats({s1, s2});
    CHECK(report.cumulative_survival == Catch::Approx(0.25));
    CHECK(report.cumulative_removal() == Catch::Approx(0.75));

    const auto single = aggregate_stats({s1});
    CHECK(single.stages.size() == 1);
    CHECK(single.cumulative_survival == Catch::Approx(0.5));
}

TEST_CASE("aggregate_stats rejects inconsistent chains naming both stages") {
    StageStats s1{"alpha", 10, 10, 100, 90};
    StageStats s2{"beta", 10, 10, 80, 70};
    CHECK_THROWS_WITH(aggregate_stats({s1, s2}),
                      Catch::Matchers::ContainsSubstring("alpha") &&
                          Catch::Matchers::ContainsSubstring("beta"));
}

TEST_CASE("aggregate_stats cumulative fraction equals the product within 1e-12") {
    Rng rng(408);
    std::vector<StageStats> stages;
    uint64_t tokens = 1000000;
    uint64_t docs = 10000;
    double product = 1.0;
    for (int i = 0; i < 6; ++i) {
        StageStats s;
        s.stage = "stage" + std::to_string(i);
        s.tokens_in = tokens;
        s.docs_in = docs;
        tokens = tokens - rng.uniform_below(tokens / 3 + 1);
        docs = docs - rng.uniform_below(docs / 3 + 1);
        s.tokens_out = tokens;
        s.docs_out = docs;
        product *= static_cast<double>(s.tokens_out) / static_cast<double>(s.tokens_in);
        stages.push_back(s);
    }
    const auto report = aggregate_stats(stages);
    CHECK(std::abs(report.cumulative_survival - product) <= 1e-12);
    const std::string table = report.to_table();
    CHECK(table.find("stage0") != std::string::npos);
    CHECK(table.find("cumulative survival") != std::string::npos);
}

TEST_CASE("metric series csv parses with optional header") {
    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "corpuskit_fit_test.csv";
    {
        std::ofstream out(path);
        out << "tokens,mmlu\n";
        out << "1000000,0.31\n";
        out << "2000000,0.33\n";
        out << "4000000,0.35\n";
    }
    const auto series = read_metric_series_csv(path);
    REQUIRE(series.points.size() == 3);
    CHECK(series.points[0].first == 1000000.0);
    CHECK(series.points[2].second == 0.35);
    fs::remove(path);
}
