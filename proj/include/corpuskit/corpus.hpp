// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpuskit/unicode.hpp"
#include "corpuskit/util.hpp"

namespace corpuskit {

using json = nlohmann::ordered_json;

enum class DomainTag { WebZh, WebEn, KidZh, KidEn, Code, Other };

inline constexpr DomainTag kAllDomains[] = {DomainTag::WebZh, DomainTag::WebEn,
                                            DomainTag::KidZh, DomainTag::KidEn,
                                            DomainTag::Code,  DomainTag::Other};

inline std::string_view domain_name(DomainTag d) {
    switch (d) {
        case DomainTag::WebZh: return "web_zh";
        case DomainTag::WebEn: return "web_en";
        case DomainTag::KidZh: return "kid_zh";
        case DomainTag::KidEn: return "kid_en";
        case DomainTag::Code: return "code";
        case DomainTag::Other: return "other";
    }
    return "other";
}

inline DomainTag parse_domain(std::string_view name) {
    for (DomainTag d : kAllDomains)
        if (domain_name(d) == name) return d;
    throw DataError("unknown domain tag: " + std::string(name));
}

// Token proxy: one count per maximal run of non-CJK non-space codepoints,
// plus one per CJK codepoint. Not a trained tokenizer — the mixture math
// only needs a counter that is deterministic and additive.
inline uint64_t count_tokens(std::string_view text) {
    uint64_t count = 0;
    bool in_word = false;
    size_t pos = 0;
    while (pos < text.size()) {
        const char32_t cp = decode_utf8(text, pos);
        if (is_space(cp)) {
            in_word = false;
        } else if (is_cjk(cp)) {
            ++count;
            in_word = false;
        } else {
            if (!in_word) ++count;
            in_word = true;
        }
    }
    return count;
}

struct Document {
    std::string id;
    std::string text;
    DomainTag domain = DomainTag::Other;
    std::optional<std::string> language;
    std::optional<std::string> source_url;
    uint64_t token_count = 0;
    std::map<std::string, std::string> meta;

    void set_text(std::string new_text) {
        text = std::move(new_text);
        token_count = count_tokens(text);
    }
};

// Canonical text key for exact-duplicate detection: NFC bytes, outer
// whitespace trimmed. Stable across serialization environments.
inline std::string normalized_key_text(std::string_view text) {
    return nfc(trim(text));
}

struct Shard {
    std::string name;
    std::vector<Document> docs;
};

struct Corpus {
    std::vector<Shard> shards;

    size_t doc_count() const {
        size_t n = 0;
        for (const auto& s : shards) n += s.docs.size();
        return n;
    }

    uint64_t token_count() const {
        uint64_t n = 0;
        for (const auto& s : shards)
            for (const auto& d : s.docs) n += d.token_count;
        return n;
    }

    // Visits documents in global order: shards in sequence, docs in shard order.
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& s : shards)
            for (const auto& d : s.docs) fn(d);
    }
    template <typename Fn>
    void for_each(Fn&& fn) {
        for (auto& s : shards)
            for (auto& d : s.docs) fn(d);
    }

    std::vector<const Document*> all_docs() const {
        std::vector<const Document*> out;
        out.reserve(doc_count());
        for (const auto& s : shards)
            for (const auto& d : s.docs) out.push_back(&d);
        return out;
    }
};

struct StageStats {
    std::string stage;
    uint64_t docs_in = 0;
    uint64_t docs_out = 0;
    uint64_t tokens_in = 0;
    uint64_t tokens_out = 0;

    double removal_fraction() const {
        if (tokens_in == 0) return 0.0;
        return static_cast<double>(tokens_in - tokens_out) / static_cast<double>(tokens_in);
    }

    json to_json() const {
        return json{{"stage", stage},
                    {"docs_in", docs_in},
                    {"docs_out", docs_out},
                    {"tokens_in", tokens_in},
                    {"tokens_out", tokens_out},
                    {"removal_fraction", removal_fraction()}};
    }

    static StageStats from_json(const json& j) {
        StageStats s;
        s.stage = j.at("stage").get<std::string>();
        s.docs_in = j.at("docs_in").get<uint64_t>();
        s.docs_out = j.at("docs_out").get<uint64_t>();
        s.tokens_in = j.at("tokens_in").get<uint64_t>();
        s.tokens_out = j.at("tokens_out").get<uint64_t>();
        return s;
    }

    static StageStats between(std::string name, const Corpus& before, const Corpus& after) {
        StageStats s;
        s.stage = std::move(name);
        s.docs_in = before.doc_count();
        s.docs_out = after.doc_count();
        s.tokens_in = before.token_count();
        s.tokens_out = after.token_count();
        return s;
    }
};

namespace detail {

inline json document_to_json(const Document& d) {
    json j;
    j["id"] = d.id;
    j["text"] = d.text;
    j["domain"] = std::string(domain_name(d.domain));
    if (d.language) j["language"] = *d.language;
    if (d.source_url) j["source_url"] = *d.source_url;
    j["token_count"] = d.token_count;
    if (!d.meta.empty()) j["meta"] = d.meta;
    return j;
}

inline Document document_from_json(const json& j) {
    Document d;
    d.id = j.at("id").get<std::string>();
    d.text = j.at("text").get<std::string>();
    d.domain = parse_domain(j.at("domain").get<std::string>());
    if (j.contains("language") && !j["language"].is_null())
        d.language = j["language"].get<std::string>();
    if (j.contains("source_url") && !j["source_url"].is_null())
        d.source_url = j["source_url"].get<std::string>();
    if (j.contains("token_count") && !j["token_count"].is_null())
        d.token_count = j["token_count"].get<uint64_t>();
    else
        d.token_count = count_tokens(d.text);
    if (j.contains("meta") && !j["meta"].is_null())
        d.meta = j["meta"].get<std::map<std::string, std::string>>();
    return d;
}

inline bool is_artifact_header(const json& j) {
    return j.is_object() && j.contains("corpuskit");
}

}  // namespace detail

// Reads one JSONL shard. A leading artifact-header line is skipped.
inline Shard read_shard(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    Shard shard;
    shard.name = path.filename().string();
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed JSON line: " + e.what());
        }
        if (line_no == 1 && detail::is_artifact_header(j)) continue;
        try {
            shard.docs.push_back(detail::document_from_json(j));
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": invalid document: " + e.what());
        }
        if (shard.docs.back().id.empty())
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty document id");
    }
    return shard;
}

// Reads a corpus from a JSONL file or a directory of *.jsonl shards
// (shards ordered by filename). Document ids must be globally unique.
inline Corpus read_corpus(const std::filesystem::path& path) {
    Corpus corpus;
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) corpus.shards.push_back(read_shard(f));
    } else {
        corpus.shards.push_back(read_shard(path));
    }
    std::unordered_set<std::string_view> ids;
    for (const auto& s : corpus.shards)
        for (const auto& d : s.docs)
            if (!ids.insert(d.id).second) throw DataError("duplicate document id: " + d.id);
    return corpus;
}

struct WriteOptions {
    std::optional<std::string> header_config_hash;  // emit artifact header when set
    std::string version = "0.1.0";
};

inline void write_shard(const Shard& shard, const std::filesystem::path& path,
                        const WriteOptions& opts = {}) {
    // Write to a temp file and rename: a failed stage never corrupts
    // previously persisted output.
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + path.string());
        if (opts.header_config_hash) {
            json h{{"corpuskit",
                    json{{"version", opts.version}, {"config_hash", *opts.header_config_hash}}}};
            out << h.dump() << '\n';
        }
        for (const auto& d : shard.docs) out << detail::document_to_json(d).dump() << '\n';
        if (!out) throw DataError("write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

// Writes a corpus: single-shard corpora to one file; multi-shard corpora to
// a directory of numbered shard files.
inline void write_corpus(const Corpus& corpus, const std::filesystem::path& path,
                         const WriteOptions& opts = {}) {
    if (corpus.shards.size() == 1 && path.extension() == ".jsonl") {
        write_shard(corpus.shards[0], path, opts);
        return;
    }
    std::filesystem::create_directories(path);
    size_t idx = 0;
    for (const auto& s : corpus.shards) {
        std::string name = s.name;
        if (name.empty()) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "shard-%04zu.jsonl", idx);
            name = buf;
        }
        write_shard(s, path / name, opts);
        ++idx;
    }
}

// Flattens all shards into one, preserving global document order. Pipeline
// stage outputs are persisted in this canonical form so byte-identical
// output is independent of input shard boundaries.
inline Corpus consolidated(const Corpus& corpus, std::string shard_name = "data.jsonl") {
    Corpus out;
    out.shards.push_back(Shard{std::move(shard_name), {}});
    corpus.for_each([&](const Document& d) { out.shards[0].docs.push_back(d); });
    return out;
}

}  // namespace corpuskit
