// SPDX-License-Identifier: Apache-2.0
//
// corpuskit — deterministic corpus curation pipeline.
//
// Subcommands mirror the library stages: ingest, dedup-doc, dedup-sent,
// train-quality, filter, code-build, mix, report, fit, and run (the full
// pipeline from a config file). Exit codes: 0 success, 2 usage/config,
// 3 data error, 4 unsatisfiable mixture.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "corpuskit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace corpuskit;

namespace {

struct CommonIo {
    std::string in;
    std::string out;
    bool dry_run = false;
};

std::string flags_hash(const json& flags) { return hash_config_json(flags); }

void emit_stats(const StageStats& stats) { std::cout << stats.to_json().dump() << "\n"; }

void write_stats_file(const fs::path& path, const json& body, const std::string& hash) {
    detail::write_json_artifact(path, body, hash);
}

// --- subcommand bodies -------------------------------------------------------

int cmd_ingest(const CommonIo& io) {
    const std::string hash = flags_hash(json{{"cmd", "ingest"}, {"in", io.in}});
    Corpus corpus = read_corpus(io.in);
    const StageStats stats = StageStats::between("ingest", corpus, corpus);
    emit_stats(stats);
    if (!io.dry_run) write_corpus(consolidated(corpus), io.out, WriteOptions{hash, "0.1.0"});
    return 0;
}

struct DedupDocArgs {
    CommonIo io;
    double threshold = 0.8;
    uint32_t k = 128, bands = 16, rows = 8, shingle_n = 5;
    std::string shingle_unit = "word";
    uint64_t seed = 0x5EED;
    std::string clusters_path, stats_path;
};

int cmd_dedup_doc(const DedupDocArgs& args) {
    const std::string hash = flags_hash(json{{"cmd", "dedup-doc"},
                                             {"threshold", args.threshold},
                                             {"k", args.k},
                                             {"bands", args.bands},
                                             {"rows", args.rows},
                                             {"shingle_n", args.shingle_n},
                                             {"shingle_unit", args.shingle_unit},
                                             {"seed", args.seed}});
    DedupConfig cfg;
    cfg.threshold = args.threshold;
    cfg.fp.k = args.k;
    cfg.fp.lsh = LshParams{args.bands, args.rows};
    cfg.fp.scheme.n = args.shingle_n;
    cfg.fp.scheme.unit = args.shingle_unit == "char" ? ShingleUnit::Char : ShingleUnit::Word;
    cfg.fp.seed = args.seed;
    cfg.fp.validate();

    const Corpus corpus = read_corpus(args.io.in);
    const auto result = dedup_documents(corpus, cfg);
    for (const auto& s : result.stats) emit_stats(s);
    if (args.io.dry_run) return 0;

    write_corpus(consolidated(result.corpus), args.io.out, WriteOptions{hash, "0.1.0"});
    if (!args.clusters_path.empty()) {
        std::vector<json> rows;
        for (const auto& c : result.clusters) rows.push_back(c.to_json());
        detail::write_jsonl_artifact(args.clusters_path, rows, hash);
    }
    if (!args.stats_path.empty()) {
        json stages = json::array();
        for (const auto& s : result.stats) stages.push_back(s.to_json());
        write_stats_file(args.stats_path, json{{"stages", stages}}, hash);
    }
    return 0;
}

struct DedupSentArgs {
    CommonIo io;
    double threshold = 0.6;
    uint32_t k = 64, bands = 16, rows = 4, shingle_n = 5;
    size_t min_sentence_len = 8, min_doc_len = 64, max_doc_frequency = 8;
    bool keep_first = false;
    uint64_t seed = 0x5EED;
    std::string clusters_path, stats_path, dump_removed;
};

int cmd_dedup_sent(const DedupSentArgs& args) {
    const std::string hash = flags_hash(json{{"cmd", "dedup-sent"},
                                             {"threshold", args.threshold},
                                             {"k", args.k},
                                             {"bands", args.bands},
                                             {"rows", args.rows},
                                             {"shingle_n", args.shingle_n},
                                             {"K", args.max_doc_frequency},
                                             {"seed", args.seed}});
    SentenceDedupConfig cfg;
    cfg.threshold = args.threshold;
    cfg.fp.k = args.k;
    cfg.fp.lsh = LshParams{args.bands, args.rows};
    cfg.fp.scheme = ShingleScheme{ShingleUnit::Char, args.shingle_n};
    cfg.fp.seed = args.seed;
    cfg.min_sentence_len = args.min_sentence_len;
    cfg.min_doc_len = args.min_doc_len;
    cfg.max_doc_frequency = args.max_doc_frequency;
    cfg.fp.validate();

    cfg.keep_first = args.keep_first;
    const Corpus corpus = read_corpus(args.io.in);
    const auto clusters = sentence_clusters(corpus, cfg.fp, cfg.threshold, cfg.min_sentence_len);
    auto pruned = prune_sentences(corpus, clusters, cfg.max_doc_frequency, cfg.min_sentence_len,
                                  cfg.min_doc_len, cfg.keep_first);
    emit_stats(pruned.stats);
    if (args.io.dry_run) return 0;

    write_corpus(consolidated(pruned.corpus), args.io.out, WriteOptions{hash, "0.1.0"});
    if (!args.clusters_path.empty()) {
        std::vector<json> rows;
        for (const auto& c : clusters)
            rows.push_back(json{{"sentence", c.canonical},
                                {"doc_count", c.doc_count},
                                {"removed", c.doc_count > cfg.max_doc_frequency}});
        detail::write_jsonl_artifact(args.clusters_path, rows, hash);
    }
    if (!args.dump_removed.empty()) {
        // Before/after pairs for every rewritten document.
        std::map<std::string, std::string> after;
        pruned.corpus.for_each([&](const Document& d) { after[d.id] = d.text; });
        std::vector<json> rows;
        for (const auto& [id, before] : pruned.rewrites) {
            const auto it = after.find(id);
            rows.push_back(json{{"id", id},
                                {"before", before},
                                {"after", it == after.end() ? json() : json(it->second)},
                                {"dropped", it == after.end()}});
        }
        detail::write_jsonl_artifact(args.dump_removed, rows, hash);
    }
    if (!args.stats_path.empty()) write_stats_file(args.stats_path, pruned.stats.to_json(), hash);
    return 0;
}

struct TrainArgs {
    std::string seeds_path, out_path;
    uint32_t dim = 1u << 20;
    uint32_t epochs = 5;
    double learning_rate = 0.1;
    uint64_t seed = 42;
    std::string refine_pool, refine_labels;
    uint32_t rounds = 3;
    double band_lo = 0.35, band_hi = 0.65;
    size_t mine = 1000;
};

int cmd_train_quality(const TrainArgs& args) {
    TrainConfig cfg;
    cfg.dim = args.dim;
    cfg.epochs = args.epochs;
    cfg.learning_rate = args.learning_rate;
    cfg.seed = args.seed;

    auto seeds = read_seed_labels(args.seeds_path);
    QualityModel model = train_classifier(seeds, cfg);
    std::cout << json{{"seeds", seeds.size()}, {"train_loss", mean_loss(model, seeds)}}.dump()
              << "\n";

    if (!args.refine_pool.empty()) {
        if (args.refine_labels.empty())
            throw ConfigError("--refine-pool requires --refine-labels");
        const Corpus pool_corpus = read_corpus(args.refine_pool);
        std::vector<Document> pool;
        pool_corpus.for_each([&](const Document& d) { pool.push_back(d); });

        // Oracle labels: JSONL {"id", "label"}.
        std::map<std::string, int> labels;
        std::ifstream in(args.refine_labels);
        if (!in) throw DataError("cannot open refine labels " + args.refine_labels);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || (j.is_object() && j.contains("corpuskit"))) continue;
            labels[j.at("id").get<std::string>()] = j.at("label").get<int>();
        }
        RefineConfig rcfg;
        rcfg.rounds = args.rounds;
        rcfg.band_lo = args.band_lo;
        rcfg.band_hi = args.band_hi;
        rcfg.per_round = args.mine;
        auto result = iterative_refine(model, std::move(seeds), std::move(pool),
                                       [&](const Document& d) {
                                           auto it = labels.find(d.id);
                                           if (it == labels.end())
                                               throw DataError("no label for doc " + d.id);
                                           return it->second;
                                       },
                                       rcfg);
        model = std::move(result.model);
        std::cout << json{{"mined", result.mined_total}, {"seeds_final", result.seeds.size()}}.dump()
                  << "\n";
    }
    save_model(model, args.out_path);
    return 0;
}

struct FilterArgs {
    CommonIo io;
    std::string model_path, rules_path, verdicts_path, stats_path;
    double p_drop = 0.9, lang_min = 0.5;
};

int cmd_filter(const FilterArgs& args) {
    const std::string hash = flags_hash(json{{"cmd", "filter"},
                                             {"model", args.model_path},
                                             {"p_drop", args.p_drop},
                                             {"lang_min", args.lang_min}});
    RuleConfig rules;
    if (!args.rules_path.empty()) {
        std::ifstream in(args.rules_path);
        if (!in) throw ConfigError("cannot open rules file " + args.rules_path);
        rules = RuleConfig::from_json(json::parse(in));
    } else {
        rules.compile();
    }
    const QualityModel model = load_model(args.model_path);
    const Corpus corpus = read_corpus(args.io.in);
    const auto result = filter_corpus(corpus, model, rules, FilterThresholds{args.p_drop, args.lang_min});
    emit_stats(result.stats);
    if (args.io.dry_run) return 0;

    write_corpus(consolidated(result.corpus), args.io.out, WriteOptions{hash, "0.1.0"});
    if (!args.verdicts_path.empty()) {
        std::vector<json> rows;
        for (const auto& v : result.verdicts) rows.push_back(v.to_json());
        detail::write_jsonl_artifact(args.verdicts_path, rows, hash);
    }
    if (!args.stats_path.empty()) write_stats_file(args.stats_path, result.stats.to_json(), hash);
    return 0;
}

struct CodeBuildArgs {
    std::string repos_path, file_docs_path, out_path, graph_path, stats_path;
    double repo_fraction = 0.62;
    uint64_t budget = 0, star_budget = 0;
    double dedup_threshold = 0.8;
    uint64_t seed = 0x5EED;
    bool dry_run = false;
};

int cmd_code_build(const CodeBuildArgs& args) {
    const std::string hash = flags_hash(json{{"cmd", "code-build"},
                                             {"repo_fraction", args.repo_fraction},
                                             {"budget", args.budget},
                                             {"star_budget", args.star_budget},
                                             {"dedup_threshold", args.dedup_threshold},
                                             {"seed", args.seed}});
    const auto repos = read_repositories(args.repos_path);
    std::vector<Document> repo_docs;
    json graphs = json::object();
    StageStats file_filter_stats;
    file_filter_stats.stage = "code_file_filter";
    for (const auto& repo : repos) {
        auto [filtered, fstats] = filter_code_files(repo);
        file_filter_stats.docs_in += fstats.docs_in;
        file_filter_stats.docs_out += fstats.docs_out;
        file_filter_stats.tokens_in += fstats.tokens_in;
        file_filter_stats.tokens_out += fstats.tokens_out;
        if (filtered.files.empty()) continue;
        const RepoGraph graph = extract_dependencies(filtered);
        graphs[repo.name] = graph.to_json();
        repo_docs.push_back(concat_repo(filtered, topo_order(graph)));
    }
    emit_stats(file_filter_stats);

    const auto deduped = dedup_repos(repo_docs, args.dedup_threshold);
    for (const auto& s : deduped.stats) emit_stats(s);
    std::vector<Document> survivors;
    deduped.corpus.for_each([&](const Document& d) { survivors.push_back(d); });

    uint64_t star_budget = args.star_budget;
    if (star_budget == 0)
        for (const auto& d : survivors) star_budget += d.token_count;
    const auto sampled = star_weighted_sample(survivors, star_budget, args.seed);

    std::vector<Document> file_docs;
    if (!args.file_docs_path.empty()) {
        const Corpus c = read_corpus(args.file_docs_path);
        c.for_each([&](const Document& d) { file_docs.push_back(d); });
    }
    const auto mix = mix_code_levels(sampled, file_docs, args.repo_fraction, args.budget);
    emit_stats(mix.stats);
    for (const auto& w : mix.warnings) std::cerr << "warning: " << w << "\n";

    if (args.dry_run) return 0;
    write_corpus(mix.corpus, args.out_path, WriteOptions{hash, "0.1.0"});
    if (!args.graph_path.empty())
        detail::write_json_artifact(args.graph_path, json{{"repos", graphs}}, hash);
    if (!args.stats_path.empty())
        write_stats_file(args.stats_path,
                         json{{"mix", mix.stats.to_json()},
                              {"realized_repo_fraction", mix.realized_repo_fraction},
                              {"warnings", mix.warnings}},
                         hash);
    return 0;
}

struct MixArgs {
    std::string spec_path, inventory_path, corpus_path, out_path, validation_path;
    uint64_t seed = 0;
    double tolerance = 0.02;
    uint64_t shard_tokens = 100000;
    bool dry_run = false;
};

int cmd_mix(const MixArgs& args) {
    const std::string hash = flags_hash(json{{"cmd", "mix"},
                                             {"seed", args.seed},
                                             {"tolerance", args.tolerance}});
    std::ifstream spec_in(args.spec_path);
    if (!spec_in) throw ConfigError("cannot open spec file " + args.spec_path);
    const MixtureSpec spec = MixtureSpec::from_json(json::parse(spec_in));

    DomainInventory inventory;
    if (!args.inventory_path.empty()) {
        std::ifstream in(args.inventory_path);
        if (!in) throw ConfigError("cannot open inventory " + args.inventory_path);
        json j = json::parse(in);
        if (j.contains("corpuskit")) j.erase("corpuskit");
        inventory = DomainInventory::from_json(j);
    } else if (!args.corpus_path.empty()) {
        const Corpus corpus = read_corpus(args.corpus_path);
        inventory = inventory_from_corpus(reshard_by_domain(corpus, args.shard_tokens));
    } else {
        throw ConfigError("mix needs --inventory or --corpus");
    }

    const auto rates = compute_sampling_rates(inventory, spec);
    const auto manifest = build_manifest(inventory, rates, args.seed, spec);
    const auto report = validate_mixture(manifest, spec, args.tolerance);
    std::cout << report.to_json().dump() << "\n";
    if (args.dry_run) return 0;
    detail::write_json_artifact(args.out_path, manifest.to_json(), hash);
    if (!args.validation_path.empty())
        detail::write_json_artifact(args.validation_path, report.to_json(), hash);
    return report.pass ? 0 : 4;
}

int cmd_report(const std::vector<std::string>& stats_paths, const std::string& out_path) {
    std::vector<StageStats> stages;
    for (const auto& path : stats_paths) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open stats file " + path);
        json j = json::parse(in);
        if (j.contains("corpuskit")) j.erase("corpuskit");
        if (j.contains("stages"))
            for (const auto& s : j["stages"]) stages.push_back(StageStats::from_json(s));
        else if (j.contains("stage") && j["stage"].is_object())
            stages.push_back(StageStats::from_json(j["stage"]));
        else
            stages.push_back(StageStats::from_json(j));
    }
    const auto report = aggregate_stats(stages);
    std::cout << report.to_table();
    if (!out_path.empty())
        detail::write_json_artifact(out_path, report.to_json(),
                                    flags_hash(json{{"cmd", "report"}}));
    return 0;
}

int cmd_fit(const std::string& csv_path, double predict_at) {
    const auto series = read_metric_series_csv(csv_path);
    const auto fit = fit_log_curve(series);
    json out{{"intercept", fit.intercept}, {"slope", fit.slope}, {"rss", fit.rss}};
    if (predict_at > 0) out["prediction"] = json{{"x", predict_at}, {"y", extrapolate(fit, predict_at)}};
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, bool dry_run) {
    const PipelineConfig cfg = load_pipeline_config(config_path);
    const RunRecord record = run_pipeline(cfg, dry_run);
    std::cout << record.to_json().dump() << "\n";
    if (!record.failed) return 0;
    if (record.error_kind == "mixture") return 4;
    if (record.error_kind == "config") return 2;
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic corpus curation pipeline"};
    app.require_subcommand(1);

    // ingest
    CommonIo ingest_io;
    auto* ingest = app.add_subcommand("ingest", "validate a JSONL corpus and fill token counts");
    ingest->add_option("--in", ingest_io.in, "input corpus (.jsonl file or shard dir)")->required();
    ingest->add_option("--out", ingest_io.out, "output corpus path")->required();
    ingest->add_flag("--dry-run", ingest_io.dry_run, "print stats without writing");

    // dedup-doc
    DedupDocArgs dd;
    auto* dedup_doc = app.add_subcommand("dedup-doc", "global document-level deduplication");
    dedup_doc->add_option("--in", dd.io.in)->required();
    dedup_doc->add_option("--out", dd.io.out)->required();
    dedup_doc->add_option("--threshold", dd.threshold, "near-duplicate Jaccard cutoff");
    dedup_doc->add_option("--k", dd.k, "signature length");
    dedup_doc->add_option("--bands", dd.bands);
    dedup_doc->add_option("--rows", dd.rows);
    dedup_doc->add_option("--shingle-n", dd.shingle_n);
    dedup_doc->add_option("--shingle-unit", dd.shingle_unit)->check(CLI::IsMember({"word", "char"}));
    dedup_doc->add_option("--seed", dd.seed);
    dedup_doc->add_option("--clusters", dd.clusters_path, "cluster report JSONL");
    dedup_doc->add_option("--stats", dd.stats_path, "stats JSON");
    dedup_doc->add_flag("--dry-run", dd.io.dry_run);

    // dedup-sent
    DedupSentArgs ds;
    auto* dedup_sent = app.add_subcommand("dedup-sent", "cross-document sentence deduplication");
    dedup_sent->add_option("--in", ds.io.in)->required();
    dedup_sent->add_option("--out", ds.io.out)->required();
    dedup_sent->add_option("--threshold", ds.threshold);
    dedup_sent->add_option("--k", ds.k);
    dedup_sent->add_option("--bands", ds.bands);
    dedup_sent->add_option("--rows", ds.rows);
    dedup_sent->add_option("--shingle-n", ds.shingle_n);
    dedup_sent->add_option("--max-doc-frequency", ds.max_doc_frequency,
                           "K: delete sentences seen in more docs than this");
    dedup_sent->add_option("--min-sentence-len", ds.min_sentence_len);
    dedup_sent->add_option("--min-doc-len", ds.min_doc_len);
    dedup_sent->add_flag("--keep-first", ds.keep_first,
                         "retain each junk cluster's first occurrence");
    dedup_sent->add_option("--seed", ds.seed);
    dedup_sent->add_option("--clusters", ds.clusters_path);
    dedup_sent->add_option("--stats", ds.stats_path);
    dedup_sent->add_option("--dump-removed", ds.dump_removed, "before/after pairs JSONL");
    dedup_sent->add_flag("--dry-run", ds.io.dry_run);

    // train-quality
    TrainArgs ta;
    auto* train = app.add_subcommand("train-quality", "train the harmful-content classifier");
    train->add_option("--seeds", ta.seeds_path, "seed labels JSONL")->required();
    train->add_option("--out", ta.out_path, "model file")->required();
    train->add_option("--dim", ta.dim);
    train->add_option("--epochs", ta.epochs);
    train->add_option("--learning-rate", ta.learning_rate);
    train->add_option("--seed", ta.seed);
    train->add_option("--refine-pool", ta.refine_pool, "corpus to mine hard samples from");
    train->add_option("--refine-labels", ta.refine_labels, "oracle labels JSONL {id,label}");
    train->add_option("--rounds", ta.rounds);
    train->add_option("--band-lo", ta.band_lo);
    train->add_option("--band-hi", ta.band_hi);
    train->add_option("--mine", ta.mine, "hard samples per round");

    // filter
    FilterArgs fa;
    auto* filter = app.add_subcommand("filter", "quality filter with rules + classifier");
    filter->add_option("--in", fa.io.in)->required();
    filter->add_option("--out", fa.io.out)->required();
    filter->add_option("--model", fa.model_path)->required();
    filter->add_option("--rules", fa.rules_path, "rule config JSON");
    filter->add_option("--p-drop", fa.p_drop);
    filter->add_option("--lang-min", fa.lang_min);
    filter->add_option("--verdicts", fa.verdicts_path);
    filter->add_option("--stats", fa.stats_path);
    filter->add_flag("--dry-run", fa.io.dry_run);

    // code-build
    CodeBuildArgs ca;
    auto* code = app.add_subcommand("code-build", "repository assembly and code-level mixing");
    code->add_option("--repos", ca.repos_path, "repositories JSONL")->required();
    code->add_option("--file-docs", ca.file_docs_path, "document-level code corpus");
    code->add_option("--out", ca.out_path)->required();
    code->add_option("--repo-fraction", ca.repo_fraction);
    code->add_option("--budget", ca.budget, "code token budget (0 = derive)");
    code->add_option("--star-budget", ca.star_budget, "repo sampling budget (0 = all)");
    code->add_option("--dedup-threshold", ca.dedup_threshold);
    code->add_option("--seed", ca.seed);
    code->add_option("--graph", ca.graph_path, "dependency graph dump JSON");
    code->add_option("--stats", ca.stats_path);
    code->add_flag("--dry-run", ca.dry_run);

    // mix
    MixArgs ma;
    auto* mix = app.add_subcommand("mix", "plan a training mixture manifest");
    mix->add_option("--spec", ma.spec_path, "mixture spec JSON")->required();
    mix->add_option("--inventory", ma.inventory_path, "domain inventory JSON");
    mix->add_option("--corpus", ma.corpus_path, "corpus to inventory instead");
    mix->add_option("--seed", ma.seed);
    mix->add_option("--tolerance", ma.tolerance);
    mix->add_option("--shard-tokens", ma.shard_tokens);
    mix->add_option("--out", ma.out_path, "manifest JSON")->required();
    mix->add_option("--validation-out", ma.validation_path);
    mix->add_flag("--dry-run", ma.dry_run);

    // report
    std::vector<std::string> report_stats;
    std::string report_out;
    auto* report = app.add_subcommand("report", "aggregate chained stage stats");
    report->add_option("--stats", report_stats, "stats JSON files in stage order")->required();
    report->add_option("--out", report_out, "report JSON");

    // fit
    std::string fit_csv;
    double fit_predict = 0;
    auto* fit = app.add_subcommand("fit", "fit y = a + b ln(x) to checkpoint metrics");
    fit->add_option("--csv", fit_csv, "CSV of tokens,metric")->required();
    fit->add_option("--predict", fit_predict, "extrapolate at this x");

    // run
    std::string run_config;
    bool run_dry = false;
    auto* run = app.add_subcommand("run", "run the full pipeline from a config file");
    run->add_option("--config", run_config, "pipeline config JSON")->required();
    run->add_flag("--dry-run", run_dry);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help exits clean; usage errors exit 2
    }

    try {
        if (*ingest) return cmd_ingest(ingest_io);
        if (*dedup_doc) return cmd_dedup_doc(dd);
        if (*dedup_sent) return cmd_dedup_sent(ds);
        if (*train) return cmd_train_quality(ta);
        if (*filter) return cmd_filter(fa);
        if (*code) return cmd_code_build(ca);
        if (*mix) return cmd_mix(ma);
        if (*report) return cmd_report(report_stats, report_out);
        if (*fit) return cmd_fit(fit_csv, fit_predict);
        if (*run) return cmd_run(run_config, run_dry);
    } catch (const MixtureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
