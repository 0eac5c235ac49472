// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "corpuskit/code_assembler.hpp"
#include "corpuskit/corpus.hpp"
#include "corpuskit/doc_dedup.hpp"
#include "corpuskit/mixture.hpp"
#include "corpuskit/quality.hpp"
#include "corpuskit/scaling.hpp"
#include "corpuskit/sentence_dedup.hpp"
#include "corpuskit/util.hpp"

namespace corpuskit {

struct SubdomainOverride {
    std::string meta_key;
    std::string meta_value;
    std::string domain;
};

struct PipelineConfig {
    std::filesystem::path input;
    std::optional<std::filesystem::path> repos;
    std::filesystem::path output_dir;
    uint64_t seed = 0;

    DedupConfig doc_dedup;
    SentenceDedupConfig sentence_dedup;

    RuleConfig rules;
    FilterThresholds thresholds;
    std::optional<std::filesystem::path> model_path;
    std::optional<std::filesystem::path> seed_labels;
    TrainConfig train;

    double repo_fraction = 0.62;
    uint64_t code_budget = 0;        // 0: largest budget both pools support
    uint64_t star_budget = 0;        // 0: keep every surviving repository
    double repo_dedup_threshold = 0.8;

    std::map<std::string, double> mixture_weights;  // empty: Table-2 defaults
    uint64_t mixture_budget = 0;                    // 0: surviving token total
    double mixture_tolerance = 0.02;
    uint64_t shard_tokens = 100000;
    std::optional<SubdomainOverride> subdomain;

    std::string config_hash;  // canonical-JSON hash, filled at load
};

namespace detail {

inline void apply_fp_json(const json& j, FingerprintConfig& fp) {
    if (j.contains("k")) fp.k = j["k"].get<uint32_t>();
    if (j.contains("bands")) fp.lsh.bands = j["bands"].get<uint32_t>();
    if (j.contains("rows")) fp.lsh.rows = j["rows"].get<uint32_t>();
    if (j.contains("shingle_n")) fp.scheme.n = j["shingle_n"].get<uint32_t>();
    if (j.contains("shingle_unit"))
        fp.scheme.unit =
            j["shingle_unit"].get<std::string>() == "char" ? ShingleUnit::Char : ShingleUnit::Word;
}

}  // namespace detail

inline std::string hash_config_json(const json& j) {
    // Sorted-key dump so hashes ignore key order in the config file.
    return to_hex(hash64(nlohmann::json(j).dump()));
}

inline PipelineConfig parse_pipeline_config(const json& j) {
    PipelineConfig cfg;
    try {
        cfg.input = j.at("input").get<std::string>();
        cfg.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("repos")) cfg.repos = std::filesystem::path(j["repos"].get<std::string>());
        if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();

        if (j.contains("doc_dedup")) {
            const auto& d = j["doc_dedup"];
            if (d.contains("threshold")) cfg.doc_dedup.threshold = d["threshold"].get<double>();
            detail::apply_fp_json(d, cfg.doc_dedup.fp);
        }
        if (j.contains("sentence_dedup")) {
            const auto& s = j["sentence_dedup"];
            if (s.contains("threshold")) cfg.sentence_dedup.threshold = s["threshold"].get<double>();
            if (s.contains("min_sentence_len"))
                cfg.sentence_dedup.min_sentence_len = s["min_sentence_len"].get<size_t>();
            if (s.contains("min_doc_len"))
                cfg.sentence_dedup.min_doc_len = s["min_doc_len"].get<size_t>();
            if (s.contains("max_doc_frequency"))
                cfg.sentence_dedup.max_doc_frequency = s["max_doc_frequency"].get<size_t>();
            if (s.contains("keep_first")) cfg.sentence_dedup.keep_first = s["keep_first"].get<bool>();
            detail::apply_fp_json(s, cfg.sentence_dedup.fp);
        }
        if (j.contains("quality")) {
            const auto& q = j["quality"];
            if (q.contains("rules")) cfg.rules = RuleConfig::from_json(q["rules"]);
            else cfg.rules.compile();
            if (q.contains("p_drop")) cfg.thresholds.p_drop = q["p_drop"].get<double>();
            if (q.contains("lang_min")) cfg.thresholds.lang_min = q["lang_min"].get<double>();
            if (q.contains("model")) cfg.model_path = std::filesystem::path(q["model"].get<std::string>());
            if (q.contains("seed_labels"))
                cfg.seed_labels = std::filesystem::path(q["seed_labels"].get<std::string>());
            if (q.contains("train")) {
                const auto& t = q["train"];
                if (t.contains("dim")) cfg.train.dim = t["dim"].get<uint32_t>();
                if (t.contains("epochs")) cfg.train.epochs = t["epochs"].get<uint32_t>();
                if (t.contains("learning_rate"))
                    cfg.train.learning_rate = t["learning_rate"].get<double>();
            }
        } else {
            cfg.rules.compile();
        }
        if (j.contains("code")) {
            const auto& c = j["code"];
            if (c.contains("repo_fraction")) cfg.repo_fraction = c["repo_fraction"].get<double>();
            if (c.contains("budget")) cfg.code_budget = c["budget"].get<uint64_t>();
            if (c.contains("star_budget")) cfg.star_budget = c["star_budget"].get<uint64_t>();
            if (c.contains("dedup_threshold"))
                cfg.repo_dedup_threshold = c["dedup_threshold"].get<double>();
        }
        if (j.contains("mixture")) {
            const auto& m = j["mixture"];
            if (m.contains("weights"))
                for (const auto& [domain, w] : m["weights"].items())
                    cfg.mixture_weights[domain] = w.get<double>();
            if (m.contains("budget_tokens")) cfg.mixture_budget = m["budget_tokens"].get<uint64_t>();
            if (m.contains("tolerance")) cfg.mixture_tolerance = m["tolerance"].get<double>();
            if (m.contains("shard_tokens")) cfg.shard_tokens = m["shard_tokens"].get<uint64_t>();
            if (m.contains("subdomain")) {
                const auto& s = m["subdomain"];
                cfg.subdomain = SubdomainOverride{s.at("meta_key").get<std::string>(),
                                                  s.at("meta_value").get<std::string>(),
                                                  s.at("domain").get<std::string>()};
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid pipeline config: ") + e.what());
    }
    cfg.config_hash = hash_config_json(j);
    return cfg;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_pipeline_config(j);
}

struct StageRecord {
    std::string name;
    std::vector<StageStats> stats;
    double wall_seconds = 0.0;
    std::vector<std::string> artifacts;          // paths relative to output dir
    std::map<std::string, std::string> hashes;   // artifact -> content hash

    json to_json() const {
        json stats_json = json::array();
        for (const auto& s : stats) stats_json.push_back(s.to_json());
        json hash_json = json::object();
        for (const auto& [k, v] : hashes) hash_json[k] = v;
        return json{{"name", name},
                    {"stats", stats_json},
                    {"wall_seconds", wall_seconds},
                    {"artifacts", artifacts},
                    {"hashes", hash_json}};
    }
};

struct RunRecord {
    std::string config_hash;
    std::vector<StageRecord> stages;
    bool failed = false;
    std::string failed_stage;
    std::string error;
    std::string error_kind;  // config | data | mixture

    json to_json() const {
        json stages_json = json::array();
        for (const auto& s : stages) stages_json.push_back(s.to_json());
        json j{{"config_hash", config_hash}, {"stages", stages_json}, {"failed", failed}};
        if (failed) {
            j["failed_stage"] = failed_stage;
            j["error"] = error;
            j["error_kind"] = error_kind;
        }
        return j;
    }
};

namespace detail {

inline std::string file_content_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return to_hex(hash64(bytes));
}

inline void write_json_artifact(const std::filesystem::path& path, json body,
                                const std::string& config_hash) {
    json out;
    out["corpuskit"] = json{{"version", "0.1.0"}, {"config_hash", config_hash}};
    for (auto& [k, v] : body.items()) out[k] = v;
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write " + path.string());
        f << out.dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

inline void write_jsonl_artifact(const std::filesystem::path& path, const std::vector<json>& rows,
                                 const std::string& config_hash) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write " + path.string());
        f << json{{"corpuskit", json{{"version", "0.1.0"}, {"config_hash", config_hash}}}}.dump()
          << '\n';
        for (const auto& row : rows) f << row.dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

// Runs the canonical stage order: ingest, document dedup, sentence dedup,
// quality filter, code assembly (when repositories are supplied), mixture
// planning, report. Every stage persists its output before the next starts;
// a failing stage leaves earlier artifacts intact and marks the record.
// Identical (config, inputs) reproduce byte-identical artifacts.
inline RunRecord run_pipeline(const PipelineConfig& cfg, bool dry_run = false) {
    namespace fs = std::filesystem;
    RunRecord record;
    record.config_hash = cfg.config_hash;

    const fs::path out_root = cfg.output_dir;
    const fs::path record_path = out_root / "run_record.json";
    if (!dry_run) {
        if (fs::exists(record_path)) {
            std::ifstream in(record_path);
            try {
                const json prev = json::parse(in);
                if (prev.contains("config_hash") &&
                    prev["config_hash"].get<std::string>() != cfg.config_hash)
                    throw ConfigError("output dir holds a run with a different config hash; "
                                      "refusing mismatched resume");
            } catch (const json::exception&) {
                // Unreadable record: treat as absent.
            }
        }
        fs::create_directories(out_root);
    }

    auto persist_record = [&] {
        if (dry_run) return;
        detail::write_json_artifact(record_path, record.to_json(), cfg.config_hash);
    };

    Corpus corpus;
    std::vector<StageStats> chain;
    std::string current_stage = "ingest";

    auto run_stage = [&](const std::string& name, auto&& body) {
        current_stage = name;
        StageRecord stage;
        stage.name = name;
        const auto start = std::chrono::steady_clock::now();
        body(stage);
        stage.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const auto& rel : stage.artifacts)
            stage.hashes[rel] = detail::file_content_hash(out_root / rel);
        record.stages.push_back(std::move(stage));
        persist_record();
    };

    const WriteOptions write_opts{cfg.config_hash, "0.1.0"};

    try {
        // --- ingest ------------------------------------------------------
        run_stage("ingest", [&](StageRecord& stage) {
            corpus = read_corpus(cfg.input);
            corpus.for_each([](Document& d) {
                if (d.token_count == 0) d.token_count = count_tokens(d.text);
            });
            StageStats stats = StageStats::between("ingest", corpus, corpus);
            chain.push_back(stats);
            stage.stats.push_back(stats);
            if (!dry_run) {
                fs::create_directories(out_root / "01_ingest");
                write_corpus(consolidated(corpus), out_root / "01_ingest" / "corpus.jsonl",
                             write_opts);
                detail::write_json_artifact(out_root / "01_ingest" / "stats.json", stats.to_json(),
                                            cfg.config_hash);
                stage.artifacts = {"01_ingest/corpus.jsonl", "01_ingest/stats.json"};
            }
        });

        // --- document-level dedup ----------------------------------------
        run_stage("dedup_doc", [&](StageRecord& stage) {
            DedupConfig dd = cfg.doc_dedup;
            dd.fp.seed = derive_seed(cfg.seed, "dedup_doc");
            auto result = dedup_documents(corpus, dd);
            corpus = std::move(result.corpus);
            for (const auto& s : result.stats) {
                chain.push_back(s);
                stage.stats.push_back(s);
            }
            if (!dry_run) {
                fs::create_directories(out_root / "02_dedup_doc");
                write_corpus(consolidated(corpus), out_root / "02_dedup_doc" / "corpus.jsonl",
                             write_opts);
                std::vector<json> rows;
                for (const auto& c : result.clusters) rows.push_back(c.to_json());
                detail::write_jsonl_artifact(out_root / "02_dedup_doc" / "clusters.jsonl", rows,
                                             cfg.config_hash);
                json stats_json = json::array();
                for (const auto& s : stage.stats) stats_json.push_back(s.to_json());
                detail::write_json_artifact(out_root / "02_dedup_doc" / "stats.json",
                                            json{{"stages", stats_json}}, cfg.config_hash);
                stage.artifacts = {"02_dedup_doc/corpus.jsonl", "02_dedup_doc/clusters.jsonl",
                                   "02_dedup_doc/stats.json"};
            }
        });

        // --- sentence-level dedup ----------------------------------------
        run_stage("dedup_sent", [&](StageRecord& stage) {
            SentenceDedupConfig sd = cfg.sentence_dedup;
            sd.fp.seed = derive_seed(cfg.seed, "dedup_sent");
            auto result = dedup_sentences(corpus, sd);
            corpus = std::move(result.corpus);
            chain.push_back(result.stats);
            stage.stats.push_back(result.stats);
            if (!dry_run) {
                fs::create_directories(out_root / "03_dedup_sent");
                write_corpus(consolidated(corpus), out_root / "03_dedup_sent" / "corpus.jsonl",
                             write_opts);
                std::vector<json> rows;
                for (const auto& c : result.clusters)
                    rows.push_back(json{{"sentence", c.canonical},
                                        {"doc_count", c.doc_count},
                                        {"removed", c.doc_count > sd.max_doc_frequency}});
                detail::write_jsonl_artifact(out_root / "03_dedup_sent" / "clusters.jsonl", rows,
                                             cfg.config_hash);
                detail::write_json_artifact(out_root / "03_dedup_sent" / "stats.json",
                                            result.stats.to_json(), cfg.config_hash);
                stage.artifacts = {"03_dedup_sent/corpus.jsonl", "03_dedup_sent/clusters.jsonl",
                                   "03_dedup_sent/stats.json"};
            }
        });

        // --- quality filter ----------------------------------------------
        run_stage("quality_filter", [&](StageRecord& stage) {
            QualityModel model;
            if (cfg.model_path) {
                model = load_model(*cfg.model_path);
            } else if (cfg.seed_labels) {
                TrainConfig train = cfg.train;
                train.seed = derive_seed(cfg.seed, "train_quality");
                model = train_classifier(read_seed_labels(*cfg.seed_labels), train);
            } else {
                throw ConfigError("quality stage needs either quality.model or quality.seed_labels");
            }
            auto result = filter_corpus(corpus, model, cfg.rules, cfg.thresholds);
            corpus = std::move(result.corpus);
            chain.push_back(result.stats);
            stage.stats.push_back(result.stats);
            if (!dry_run) {
                fs::create_directories(out_root / "04_quality");
                write_corpus(consolidated(corpus), out_root / "04_quality" / "corpus.jsonl",
                             write_opts);
                std::vector<json> rows;
                for (const auto& v : result.verdicts) rows.push_back(v.to_json());
                detail::write_jsonl_artifact(out_root / "04_quality" / "verdicts.jsonl", rows,
                                             cfg.config_hash);
                detail::write_json_artifact(out_root / "04_quality" / "stats.json",
                                            result.stats.to_json(), cfg.config_hash);
                if (!cfg.model_path) save_model(model, out_root / "04_quality" / "model.bin");
                stage.artifacts = {"04_quality/corpus.jsonl", "04_quality/verdicts.jsonl",
                                   "04_quality/stats.json"};
                if (!cfg.model_path) stage.artifacts.push_back("04_quality/model.bin");
            }
        });

        // --- code assembly (optional) --------------------------------------
        if (cfg.repos) {
            run_stage("code_build", [&](StageRecord& stage) {
                const Corpus before = corpus;
                auto repos = read_repositories(*cfg.repos);
                std::vector<Document> repo_docs;
                json graphs = json::object();
                for (const auto& repo : repos) {
                    auto [filtered, fstats] = filter_code_files(repo);
                    if (filtered.files.empty()) continue;
                    const RepoGraph graph = extract_dependencies(filtered);
                    graphs[repo.name] = graph.to_json();
                    repo_docs.push_back(concat_repo(filtered, topo_order(graph)));
                }
                auto deduped = dedup_repos(repo_docs, cfg.repo_dedup_threshold);
                std::vector<Document> survivors;
                deduped.corpus.for_each([&](const Document& d) { survivors.push_back(d); });

                uint64_t star_budget = cfg.star_budget;
                if (star_budget == 0)
                    for (const auto& d : survivors) star_budget += d.token_count;
                const auto sampled = star_weighted_sample(survivors, star_budget,
                                                          derive_seed(cfg.seed, "code_build"));

                std::vector<Document> file_docs;
                Corpus rest;
                for (const auto& shard : corpus.shards) {
                    Shard keep{shard.name, {}};
                    for (const auto& d : shard.docs) {
                        if (d.domain == DomainTag::Code) file_docs.push_back(d);
                        else keep.docs.push_back(d);
                    }
                    rest.shards.push_back(std::move(keep));
                }
                auto mix = mix_code_levels(sampled, file_docs, cfg.repo_fraction, cfg.code_budget);
                rest.shards.push_back(std::move(mix.corpus.shards[0]));
                corpus = std::move(rest);

                StageStats stats = StageStats::between("code_build", before, corpus);
                chain.push_back(stats);
                stage.stats.push_back(stats);
                if (!dry_run) {
                    fs::create_directories(out_root / "05_code");
                    write_corpus(consolidated(corpus), out_root / "05_code" / "corpus.jsonl",
                                 write_opts);
                    detail::write_json_artifact(out_root / "05_code" / "graphs.json",
                                                json{{"repos", graphs}}, cfg.config_hash);
                    detail::write_json_artifact(
                        out_root / "05_code" / "stats.json",
                        json{{"stage", stats.to_json()},
                             {"mix", mix.stats.to_json()},
                             {"realized_repo_fraction", mix.realized_repo_fraction},
                             {"warnings", mix.warnings}},
                        cfg.config_hash);
                    stage.artifacts = {"05_code/corpus.jsonl", "05_code/graphs.json",
                                       "05_code/stats.json"};
                }
            });
        }

        // --- mixture planning ----------------------------------------------
        run_stage("mixture", [&](StageRecord& stage) {
            const DomainKeyFn domain_key =
                cfg.subdomain ? meta_override_domain_key(cfg.subdomain->meta_key,
                                                         cfg.subdomain->meta_value,
                                                         cfg.subdomain->domain)
                              : default_domain_key();
            const Corpus planned = reshard_by_domain(corpus, cfg.shard_tokens, domain_key);
            const DomainInventory inventory = inventory_from_corpus(planned, domain_key);

            MixtureSpec spec;
            spec.weights = cfg.mixture_weights.empty() ? default_mixture_spec(1).weights
                                                       : cfg.mixture_weights;
            spec.budget_tokens = cfg.mixture_budget ? cfg.mixture_budget : corpus.token_count();
            if (spec.budget_tokens == 0)
                throw MixtureError("unsatisfiable mixture: empty corpus with positive weights");
            spec.validate();

            const auto rates = compute_sampling_rates(inventory, spec);
            const auto manifest =
                build_manifest(inventory, rates, derive_seed(cfg.seed, "mixture"), spec);
            const auto report = validate_mixture(manifest, spec, cfg.mixture_tolerance);

            if (!dry_run) {
                fs::create_directories(out_root / "06_mixture");
                write_corpus(planned, out_root / "06_mixture" / "shards", write_opts);
                detail::write_json_artifact(out_root / "06_mixture" / "inventory.json",
                                            inventory.to_json(), cfg.config_hash);
                detail::write_json_artifact(out_root / "06_mixture" / "manifest.json",
                                            manifest.to_json(), cfg.config_hash);
                detail::write_json_artifact(out_root / "06_mixture" / "validation.json",
                                            report.to_json(), cfg.config_hash);
                stage.artifacts = {"06_mixture/inventory.json", "06_mixture/manifest.json",
                                   "06_mixture/validation.json"};
                for (const auto& shard : planned.shards)
                    stage.artifacts.push_back("06_mixture/shards/" + shard.name);
            }
        });

        // --- report ---------------------------------------------------------
        run_stage("report", [&](StageRecord& stage) {
            const PipelineReport report = aggregate_stats(chain);
            if (!dry_run) {
                fs::create_directories(out_root / "07_report");
                detail::write_json_artifact(out_root / "07_report" / "report.json",
                                            report.to_json(), cfg.config_hash);
                const auto tmp = (out_root / "07_report" / "report.txt").string() + ".tmp";
                {
                    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
                    f << report.to_table();
                }
                fs::rename(tmp, out_root / "07_report" / "report.txt");
                stage.artifacts = {"07_report/report.json", "07_report/report.txt"};
            }
        });
    } catch (const Error& e) {
        record.failed = true;
        record.failed_stage = current_stage;
        record.error = e.what();
        if (dynamic_cast<const MixtureError*>(&e)) record.error_kind = "mixture";
        else if (dynamic_cast<const ConfigError*>(&e)) record.error_kind = "config";
        else record.error_kind = "data";
        persist_record();
        return record;
    }

    persist_record();
    return record;
}

}  // namespace corpuskit
