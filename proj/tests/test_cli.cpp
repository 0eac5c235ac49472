// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <iomanip>
#include <filesystem>
#include <fstream>

#include "corpuskit/corpus.hpp"
#include "corpuskit/mixture.hpp"
#include "oracles.hpp"

using namespace corpuskit;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return CORPUSKIT_CLI_PATH; }

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("corpuskit_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cli rejects unknown flags and missing inputs with usage errors") {
    CHECK(run_cli("dedup-doc --no-such-flag") == 2);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("no-such-subcommand") == 2);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("fit --csv /nonexistent/points.csv") == 3);
}

TEST_CASE("cli dedup-doc writes corpus, clusters, and stats") {
    const auto dir = fresh_dir("dedup");
    {
        std::ofstream out(dir / "in.jsonl");
        out << R"({"id":"a","text":"repeated body of text","domain":"web_en"})" << "\n";
        out << R"({"id":"b","text":"repeated body of text","domain":"web_en"})" << "\n";
        out << R"({"id":"c","text":"completely different content","domain":"web_en"})" << "\n";
    }
    const int rc = run_cli("dedup-doc --in " + (dir / "in.jsonl").string() + " --out " +
                           (dir / "out.jsonl").string() + " --threshold 0.8 --clusters " +
                           (dir / "clusters.jsonl").string() + " --stats " +
                           (dir / "stats.json").string());
    REQUIRE(rc == 0);
    const Corpus out = read_corpus(dir / "out.jsonl");
    CHECK(out.doc_count() == 2);
    CHECK(slurp(dir / "clusters.jsonl").find("\"survivor\":\"a\"") != std::string::npos);
    CHECK(slurp(dir / "stats.json").find("dedup_exact") != std::string::npos);
}

TEST_CASE("cli mix emits a manifest from spec and inventory") {
    const auto dir = fresh_dir("mix");
    {
        std::ofstream out(dir / "spec.json");
        out << default_mixture_spec(3000).to_json().dump();
    }
    {
        DomainInventory inv;
        inv.domains["web_zh"] = {ShardInfo{"wz", 405}};
        inv.domains["web_en"] = {ShardInfo{"we", 945}};
        inv.domains["kid_zh"] = {ShardInfo{"kz", 300}};
        inv.domains["kid_en"] = {ShardInfo{"ke", 450}};
        inv.domains["code"] = {ShardInfo{"co", 750}};
        inv.domains["other"] = {ShardInfo{"ot", 150}};
        std::ofstream out(dir / "inv.json");
        out << inv.to_json().dump();
    }
    const int rc = run_cli("mix --spec " + (dir / "spec.json").string() + " --inventory " +
                           (dir / "inv.json").string() + " --seed 7 --out " +
                           (dir / "manifest.json").string());
    REQUIRE(rc == 0);
    const std::string manifest = slurp(dir / "manifest.json");
    CHECK(manifest.find("\"seed\":7") != std::string::npos);
    CHECK(manifest.find("\"entries\"") != std::string::npos);

    // Unsatisfiable: empty inventory for a positive-weight domain.
    {
        DomainInventory inv;
        inv.domains["web_en"] = {ShardInfo{"we", 945}};
        std::ofstream out(dir / "inv2.json");
        out << inv.to_json().dump();
    }
    CHECK(run_cli("mix --spec " + (dir / "spec.json").string() + " --inventory " +
                  (dir / "inv2.json").string() + " --seed 7 --out " +
                  (dir / "m2.json").string()) == 4);
}

TEST_CASE("cli fit prints coefficients and prediction") {
    const auto dir = fresh_dir("fit");
    {
        std::ofstream out(dir / "points.csv");
        out << std::setprecision(17);
        out << "tokens,metric\n";
        for (double x = 1e9; x < 2e11; x *= 2) out << x << "," << 2.0 + 3.0 * std::log(x) << "\n";
    }
    const std::string cmd = std::string(cli_path()) + " fit --csv " + (dir / "points.csv").string() +
                            " --predict 3e12 > " + (dir / "fit.json").string() + " 2>/dev/null";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const json out = json::parse(slurp(dir / "fit.json"));
    CHECK(out["intercept"].get<double>() == Catch::Approx(2.0).epsilon(1e-6));
    CHECK(out["slope"].get<double>() == Catch::Approx(3.0).epsilon(1e-6));
    CHECK(out["prediction"]["y"].get<double>() ==
          Catch::Approx(2.0 + 3.0 * std::log(3e12)).epsilon(1e-6));
}

TEST_CASE("cli run executes the pipeline from a config file") {
    const auto dir = fresh_dir("run");
    {
        std::ofstream out(dir / "in.jsonl");
        Rng rng(41);
        for (int i = 0; i < 8; ++i) {
            const std::string text = oracle::synth_text(rng, i, 20);
            out << json{{"id", "r" + std::to_string(i)},
                        {"text", text},
                        {"domain", i % 2 ? "web_en" : "web_zh"}}.dump()
                << "\n";
        }
    }
    {
        std::ofstream out(dir / "seeds.jsonl");
        for (int i = 0; i < 10; ++i) {
            out << json{{"text", "vile" + std::to_string(i) + " vile" + std::to_string(i + 1)},
                        {"label", 1}}.dump()
                << "\n";
            out << json{{"text", "mild" + std::to_string(i) + " mild" + std::to_string(i + 1)},
                        {"label", 0}}.dump()
                << "\n";
        }
    }
    {
        json cfg;
        cfg["input"] = (dir / "in.jsonl").string();
        cfg["output_dir"] = (dir / "out").string();
        cfg["seed"] = 3;
        cfg["quality"] = json{{"seed_labels", (dir / "seeds.jsonl").string()},
                              {"lang_min", 0.0},
                              {"rules", json{{"min_word_count", 2}}},
                              {"train", json{{"dim", 1024}, {"epochs", 2}}}};
        cfg["mixture"] = json{{"weights", json{{"web_en", 0.5}, {"web_zh", 0.5}}},
                              {"tolerance", 0.5},
                              {"shard_tokens", 100}};
        std::ofstream out(dir / "config.json");
        out << cfg.dump();
    }
    REQUIRE(run_cli("run --config " + (dir / "config.json").string()) == 0);
    CHECK(fs::exists(dir / "out" / "run_record.json"));
    CHECK(fs::exists(dir / "out" / "06_mixture" / "manifest.json"));

    // Usage error on a missing config file.
    CHECK(run_cli("run --config " + (dir / "missing.json").string()) == 2);
}

TEST_CASE("cli dry runs write no artifacts") {
    const auto dir = fresh_dir("dry");
    {
        std::ofstream out(dir / "in.jsonl");
        out << R"({"id":"a","text":"some words for the corpus","domain":"web_en"})" << "\n";
    }
    REQUIRE(run_cli("ingest --in " + (dir / "in.jsonl").string() + " --out " +
                    (dir / "out.jsonl").string() + " --dry-run") == 0);
    CHECK_FALSE(fs::exists(dir / "out.jsonl"));
}
