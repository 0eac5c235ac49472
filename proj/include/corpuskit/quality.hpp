// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <regex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpuskit/corpus.hpp"
#include "corpuskit/fingerprint.hpp"
#include "corpuskit/unicode.hpp"
#include "corpuskit/util.hpp"

namespace corpuskit {

// ---------------------------------------------------------------------------
// Heuristic rules
// ---------------------------------------------------------------------------

// Fraction of codepoints covered by at least one character n-gram whose
// string occurs more than once in the text. High values flag keyword-stuffed
// and template-repeated content.
inline double repeated_ngram_char_ratio(std::string_view text, uint32_t n) {
    if (n < 2) throw ConfigError("repeated n-gram window must be >= 2");
    const auto cps = decode_string(text);
    if (cps.size() < n) return 0.0;
    std::unordered_map<std::u32string, uint32_t> counts;
    for (size_t i = 0; i + n <= cps.size(); ++i)
        ++counts[std::u32string(cps.begin() + i, cps.begin() + i + n)];
    std::vector<bool> covered(cps.size(), false);
    for (size_t i = 0; i + n <= cps.size(); ++i) {
        if (counts[std::u32string(cps.begin() + i, cps.begin() + i + n)] > 1)
            for (size_t j = i; j < i + n; ++j) covered[j] = true;
    }
    size_t hit = 0;
    for (bool b : covered) hit += b;
    return static_cast<double>(hit) / static_cast<double>(cps.size());
}

struct RuleConfig {
    uint64_t min_word_count = 10;
    uint64_t max_word_count = 1000000;
    // Short character n-grams repeat in any natural text; 10-gram coverage
    // singles out looped and template-stuffed content.
    uint32_t repeat_ngram_n = 10;
    double repeat_ngram_threshold = 0.5;
    std::unordered_set<std::string> url_blacklist;  // hostnames
    std::vector<std::string> template_patterns;     // regex sources
    double special_char_threshold = 0.4;

    // Compiled at load; apply_rules never throws on a pattern.
    std::vector<std::regex> compiled_templates;

    void compile() {
        if (repeat_ngram_n < 2) throw ConfigError("repeat_ngram_n must be >= 2");
        if (repeat_ngram_threshold < 0.0 || repeat_ngram_threshold > 1.0 ||
            special_char_threshold < 0.0 || special_char_threshold > 1.0)
            throw ConfigError("rule thresholds must be in [0, 1]");
        compiled_templates.clear();
        for (const auto& pattern : template_patterns) {
            try {
                compiled_templates.emplace_back(pattern, std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                throw ConfigError("invalid template regex '" + pattern + "': " + e.what());
            }
        }
    }

    json to_json() const {
        return json{{"min_word_count", min_word_count},
                    {"max_word_count", max_word_count},
                    {"repeat_ngram_n", repeat_ngram_n},
                    {"repeat_ngram_threshold", repeat_ngram_threshold},
                    {"url_blacklist", std::vector<std::string>(url_blacklist.begin(), url_blacklist.end())},
                    {"template_patterns", template_patterns},
                    {"special_char_threshold", special_char_threshold}};
    }

    static RuleConfig from_json(const json& j) {
        RuleConfig r;
        if (j.contains("min_word_count")) r.min_word_count = j["min_word_count"].get<uint64_t>();
        if (j.contains("max_word_count")) r.max_word_count = j["max_word_count"].get<uint64_t>();
        if (j.contains("repeat_ngram_n")) r.repeat_ngram_n = j["repeat_ngram_n"].get<uint32_t>();
        if (j.contains("repeat_ngram_threshold"))
            r.repeat_ngram_threshold = j["repeat_ngram_threshold"].get<double>();
        if (j.contains("url_blacklist"))
            for (const auto& h : j["url_blacklist"]) r.url_blacklist.insert(h.get<std::string>());
        if (j.contains("template_patterns"))
            for (const auto& p : j["template_patterns"])
                r.template_patterns.push_back(p.get<std::string>());
        if (j.contains("special_char_threshold"))
            r.special_char_threshold = j["special_char_threshold"].get<double>();
        r.compile();
        return r;
    }
};

namespace detail {

inline bool is_ordinary_char(char32_t cp) {
    if (cp >= 0x20 && cp <= 0x7E) return true;                    // printable ASCII
    if (is_cjk(cp) || is_latin_letter(cp) || is_space(cp)) return true;
    if (cp >= 0x3000 && cp <= 0x303F) return true;                // CJK punctuation
    if (cp >= 0xFF01 && cp <= 0xFF65) return true;                // fullwidth forms
    if (cp >= 0x2010 && cp <= 0x201F) return true;                // dashes and curly quotes
    return false;
}

inline std::string url_host(std::string_view url) {
    const size_t scheme = url.find("://");
    size_t start = scheme == std::string_view::npos ? 0 : scheme + 3;
    size_t end = start;
    while (end < url.size() && url[end] != '/' && url[end] != ':' && url[end] != '?' &&
           url[end] != '#')
        ++end;
    std::string host(url.substr(start, end - start));
    for (char& c : host) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return host;
}

}  // namespace detail

// Evaluates every rule independently and reports hits by name; the document
// is never mutated here.
inline std::vector<std::string> apply_rules(const Document& doc, const RuleConfig& rules) {
    std::vector<std::string> hits;
    const uint64_t words = doc.token_count > 0 ? doc.token_count : count_tokens(doc.text);
    if (words < rules.min_word_count) hits.push_back("word_count_min");
    if (words > rules.max_word_count) hits.push_back("word_count_max");
    if (repeated_ngram_char_ratio(doc.text, rules.repeat_ngram_n) > rules.repeat_ngram_threshold)
        hits.push_back("repeat_ngram");
    if (doc.source_url && !rules.url_blacklist.empty()) {
        const std::string host = detail::url_host(*doc.source_url);
        bool listed = rules.url_blacklist.count(host) > 0;
        if (!listed) {
            for (const auto& entry : rules.url_blacklist) {
                if (host.size() > entry.size() && host.compare(host.size() - entry.size() - 1, 1, ".") == 0 &&
                    host.compare(host.size() - entry.size(), entry.size(), entry) == 0) {
                    listed = true;
                    break;
                }
            }
        }
        if (listed) hits.push_back("url_blacklist");
    }
    for (size_t i = 0; i < rules.compiled_templates.size(); ++i) {
        if (std::regex_search(doc.text, rules.compiled_templates[i])) {
            hits.push_back("template_regex");
            break;
        }
    }
    size_t special = 0, total = 0;
    size_t pos = 0;
    while (pos < doc.text.size()) {
        const char32_t cp = decode_utf8(doc.text, pos);
        if (is_space(cp)) continue;
        ++total;
        if (!detail::is_ordinary_char(cp)) ++special;
    }
    if (total > 0 &&
        static_cast<double>(special) / static_cast<double>(total) > rules.special_char_threshold)
        hits.push_back("special_char_ratio");
    return hits;
}

// ---------------------------------------------------------------------------
// Hashed n-gram linear classifier
// ---------------------------------------------------------------------------

using FeatureVec = std::vector<std::pair<uint32_t, double>>;  // sorted by index

inline constexpr uint64_t kFeatureHashSeed = 0xFEA7;

namespace detail {

inline std::vector<std::string> classifier_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string word;
    size_t pos = 0;
    auto flush = [&] {
        if (!word.empty()) {
            tokens.push_back(word);
            word.clear();
        }
    };
    while (pos < text.size()) {
        const char32_t cp = decode_utf8(text, pos);
        if (is_space(cp)) {
            flush();
        } else if (is_cjk(cp)) {
            flush();
            std::string one;
            encode_utf8(cp, one);
            tokens.push_back(std::move(one));
        } else {
            const char32_t lower = (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
            encode_utf8(lower, word);
        }
    }
    flush();
    return tokens;
}

}  // namespace detail

// Counts of hashed word unigrams and bigrams modulo the table size D
// (power of two). CJK codepoints tokenize individually.
inline FeatureVec featurize(std::string_view text, uint32_t dim) {
    if (dim == 0 || (dim & (dim - 1)) != 0)
        throw ConfigError("feature dimension must be a power of two");
    const auto tokens = detail::classifier_tokens(text);
    std::unordered_map<uint32_t, double> counts;
    for (size_t i = 0; i < tokens.size(); ++i) {
        counts[static_cast<uint32_t>(hash64(tokens[i], kFeatureHashSeed) & (dim - 1))] += 1.0;
        if (i + 1 < tokens.size()) {
            const std::string bigram = tokens[i] + '\x1F' + tokens[i + 1];
            counts[static_cast<uint32_t>(hash64(bigram, kFeatureHashSeed) & (dim - 1))] += 1.0;
        }
    }
    FeatureVec out(counts.begin(), counts.end());
    std::sort(out.begin(), out.end());
    return out;
}

struct TrainConfig {
    uint32_t dim = 1u << 20;
    uint32_t epochs = 5;
    double learning_rate = 0.1;
    uint64_t seed = 42;
};

struct QualityModel {
    uint32_t dim = 0;
    std::vector<double> weights;
    double bias = 0.0;
    TrainConfig config;
};

struct LabeledDoc {
    std::string text;
    int label = 0;  // 1 = harmful, 0 = clean
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double score_text(const QualityModel& model, std::string_view text) {
    double z = model.bias;
    for (const auto& [idx, count] : featurize(text, model.dim)) z += model.weights[idx] * count;
    return sigmoid(z);
}

inline double score(const QualityModel& model, const Document& doc) {
    return score_text(model, doc.text);
}

inline double mean_loss(const QualityModel& model, const std::vector<LabeledDoc>& samples) {
    if (samples.empty()) return 0.0;
    double total = 0.0;
    for (const auto& s : samples) {
        const double p = score_text(model, s.text);
        const double eps = 1e-12;
        total += s.label ? -std::log(p + eps) : -std::log(1.0 - p + eps);
    }
    return total / static_cast<double>(samples.size());
}

// Analytic gradient of the mean logistic loss; checked against central
// finite differences in the test suite.
inline std::pair<std::vector<double>, double> loss_gradient(const QualityModel& model,
                                                            const std::vector<LabeledDoc>& samples) {
    std::vector<double> grad_w(model.dim, 0.0);
    double grad_b = 0.0;
    for (const auto& s : samples) {
        const double err = score_text(model, s.text) - static_cast<double>(s.label);
        for (const auto& [idx, count] : featurize(s.text, model.dim)) grad_w[idx] += err * count;
        grad_b += err;
    }
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (double& g : grad_w) g *= inv;
    grad_b *= inv;
    return {std::move(grad_w), grad_b};
}

// Logistic-loss SGD over seeded epoch shuffles; weights start at zero, so
// the result is a pure function of (seeds, config).
inline QualityModel train_classifier(const std::vector<LabeledDoc>& seeds,
                                     const TrainConfig& config) {
    bool has_pos = false, has_neg = false;
    for (const auto& s : seeds) (s.label ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw DataError("training requires at least one harmful and one clean seed");

    QualityModel model;
    model.dim = config.dim;
    model.config = config;
    model.weights.assign(config.dim, 0.0);
    model.bias = 0.0;

    std::vector<FeatureVec> features;
    features.reserve(seeds.size());
    for (const auto& s : seeds) features.push_back(featurize(s.text, config.dim));

    Rng rng(config.seed);
    std::vector<size_t> order(seeds.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t idx : order) {
            double z = model.bias;
            for (const auto& [fi, count] : features[idx]) z += model.weights[fi] * count;
            const double err = sigmoid(z) - static_cast<double>(seeds[idx].label);
            for (const auto& [fi, count] : features[idx])
                model.weights[fi] -= config.learning_rate * err * count;
            model.bias -= config.learning_rate * err;
        }
    }
    return model;
}

// Pool documents the model is least sure about: score within [lo, hi],
// ordered by distance from 0.5, ties by id, at most m.
inline std::vector<Document> mine_hard_samples(const QualityModel& model,
                                               const std::vector<Document>& pool, double lo,
                                               double hi, size_t m) {
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) throw ConfigError("mining band must satisfy 0 <= lo < hi <= 1");
    std::vector<std::pair<double, const Document*>> scored;
    for (const auto& d : pool) {
        const double s = score(model, d);
        if (s >= lo && s <= hi) scored.emplace_back(s, &d);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        const double da = std::abs(a.first - 0.5), db = std::abs(b.first - 0.5);
        if (da != db) return da < db;
        return a.second->id < b.second->id;
    });
    std::vector<Document> out;
    for (size_t i = 0; i < scored.size() && i < m; ++i) out.push_back(*scored[i].second);
    return out;
}

struct RefineConfig {
    uint32_t rounds = 3;
    double band_lo = 0.35;
    double band_hi = 0.65;
    size_t per_round = 1000;
};

struct RefineResult {
    QualityModel model;
    std::vector<LabeledDoc> seeds;  // grown seed set
    size_t mined_total = 0;
};

// Iterative distillation: each round mines hard samples from the pool,
// labels them, folds them into the seed set, and retrains from scratch.
// Mined documents leave the pool so later rounds see fresh material.
inline RefineResult iterative_refine(const QualityModel& model, std::vector<LabeledDoc> seeds,
                                     std::vector<Document> pool,
                                     const std::function<int(const Document&)>& labeler,
                                     const RefineConfig& config) {
    if (config.rounds < 1) throw ConfigError("refine rounds must be >= 1");
    RefineResult result{model, std::move(seeds), 0};
    for (uint32_t round = 0; round < config.rounds; ++round) {
        const auto mined = mine_hard_samples(result.model, pool, config.band_lo, config.band_hi,
                                             config.per_round);
        if (mined.empty()) continue;
        std::unordered_set<std::string> mined_ids;
        for (const auto& d : mined) {
            int label;
            try {
                label = labeler(d);
            } catch (const std::exception& e) {
                throw DataError("labeler failed in refine round " + std::to_string(round + 1) +
                                " on doc '" + d.id + "': " + e.what());
            }
            result.seeds.push_back(LabeledDoc{d.text, label ? 1 : 0});
            mined_ids.insert(d.id);
        }
        std::erase_if(pool, [&](const Document& d) { return mined_ids.count(d.id) > 0; });
        result.mined_total += mined.size();
        result.model = train_classifier(result.seeds, result.model.config);
    }
    return result;
}

// Seed labels JSONL: {"text": str, "label": 0|1} per line.
inline std::vector<LabeledDoc> read_seed_labels(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open seed labels " + path.string());
    std::vector<LabeledDoc> seeds;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            if (line_no == 1 && j.is_object() && j.contains("corpuskit")) continue;
            const int label = j.at("label").get<int>();
            if (label != 0 && label != 1)
                throw DataError("label must be 0 or 1");
            seeds.push_back(LabeledDoc{j.at("text").get<std::string>(), label});
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": invalid seed label: " + e.what());
        }
    }
    return seeds;
}

// Model file: little-endian header (magic, version, dim, train config) then
// the dense weight array.
inline void save_model(const QualityModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write model file " + path.string());
    std::string blob;
    blob.append("CKQM");
    append_le64(blob, 1);  // version
    append_le64(blob, model.dim);
    append_le64(blob, model.config.seed);
    append_le64(blob, model.config.epochs);
    uint64_t lr_bits, bias_bits;
    std::memcpy(&lr_bits, &model.config.learning_rate, 8);
    std::memcpy(&bias_bits, &model.bias, 8);
    append_le64(blob, lr_bits);
    append_le64(blob, bias_bits);
    for (double w : model.weights) {
        uint64_t bits;
        std::memcpy(&bits, &w, 8);
        append_le64(blob, bits);
    }
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw DataError("write failed for " + path.string());
}

inline QualityModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file " + path.string());
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (blob.size() < 52 || blob.compare(0, 4, "CKQM") != 0)
        throw DataError("not a classifier model file: " + path.string());
    if (read_le64(blob, 4) != 1) throw DataError("unsupported model version in " + path.string());
    QualityModel model;
    model.dim = static_cast<uint32_t>(read_le64(blob, 12));
    model.config.dim = model.dim;
    model.config.seed = read_le64(blob, 20);
    model.config.epochs = static_cast<uint32_t>(read_le64(blob, 28));
    uint64_t lr_bits = read_le64(blob, 36), bias_bits = read_le64(blob, 44);
    std::memcpy(&model.config.learning_rate, &lr_bits, 8);
    std::memcpy(&model.bias, &bias_bits, 8);
    if (blob.size() != 52 + 8 * static_cast<size_t>(model.dim))
        throw DataError("model file truncated: " + path.string());
    model.weights.resize(model.dim);
    for (uint32_t i = 0; i < model.dim; ++i) {
        const uint64_t bits = read_le64(blob, 52 + 8 * static_cast<size_t>(i));
        double w;
        std::memcpy(&w, &bits, 8);
        model.weights[i] = w;
    }
    return model;
}

// ---------------------------------------------------------------------------
// Language score
// ---------------------------------------------------------------------------

struct LanguageScore {
    double en = 0.0;
    double zh = 0.0;

    double max_score() const { return en > zh ? en : zh; }
};

namespace detail {

inline const std::unordered_set<std::string>& en_stopwords() {
    static const std::unordered_set<std::string> words = {
        "the",  "be",   "to",   "of",   "and", "a",     "in",  "that", "have", "i",
        "it",   "for",  "not",  "on",   "with", "he",   "as",  "you",  "do",   "at",
        "this", "but",  "his",  "by",   "from", "they", "we",  "say",  "her",  "she",
        "or",   "an",   "will", "my",   "one",  "all",  "would", "there", "their", "what",
        "so",   "up",   "out",  "if",   "about", "who", "get", "which", "go",   "me"};
    return words;
}

inline const std::unordered_set<char32_t>& zh_stopchars() {
    static const std::unordered_set<char32_t> chars = {
        U'的', U'一', U'是', U'不', U'了', U'人', U'我', U'在', U'有', U'他',
        U'这', U'中', U'大', U'来', U'上', U'国', U'个', U'到', U'说', U'们',
        U'为', U'子', U'和', U'你', U'地', U'出', U'道', U'也', U'时', U'年',
        U'得', U'就', U'那', U'要', U'下', U'以', U'生', U'会', U'自', U'着',
        U'去', U'之', U'过', U'家', U'学', U'对', U'可', U'她', U'里', U'后'};
    return chars;
}

}  // namespace detail

// Script-fraction plus stopword evidence for {en, zh}:
//   score = 0.7 * (script codepoints / non-space codepoints) + 0.3 * stopword hit rate.
// en stopwords match lowercased letter runs; zh stopword hits count per CJK
// codepoint. Empty or all-space text scores zero everywhere.
inline LanguageScore language_score(std::string_view text) {
    size_t non_space = 0, latin = 0, cjk = 0, cjk_stop = 0;
    size_t en_words = 0, en_stop = 0;
    std::string word;
    auto flush_word = [&] {
        if (word.empty()) return;
        ++en_words;
        if (detail::en_stopwords().count(word)) ++en_stop;
        word.clear();
    };
    size_t pos = 0;
    while (pos < text.size()) {
        const char32_t cp = decode_utf8(text, pos);
        if (is_space(cp)) {
            flush_word();
            continue;
        }
        ++non_space;
        if (is_cjk(cp)) {
            flush_word();
            ++cjk;
            if (detail::zh_stopchars().count(cp)) ++cjk_stop;
        } else if (cp < 128 && std::isalpha(static_cast<int>(cp))) {
            ++latin;
            word.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
        } else {
            if (is_latin_letter(cp)) ++latin;
            flush_word();
        }
    }
    flush_word();

    LanguageScore s;
    if (non_space == 0) return s;
    const double en_script = static_cast<double>(latin) / static_cast<double>(non_space);
    const double zh_script = static_cast<double>(cjk) / static_cast<double>(non_space);
    const double en_rate = en_words ? static_cast<double>(en_stop) / static_cast<double>(en_words) : 0.0;
    const double zh_rate = cjk ? static_cast<double>(cjk_stop) / static_cast<double>(cjk) : 0.0;
    s.en = 0.7 * en_script + 0.3 * en_rate;
    s.zh = 0.7 * zh_script + 0.3 * zh_rate;
    return s;
}

// ---------------------------------------------------------------------------
// PII redaction
// ---------------------------------------------------------------------------

struct PiiPattern {
    std::string name;
    std::string pattern;
    std::string token;
    std::regex compiled;
};

inline std::vector<PiiPattern> builtin_pii_patterns() {
    // Order matters: longer, more specific shapes first so the phone rule
    // never truncates an id or address match.
    std::vector<PiiPattern> out;
    auto add = [&out](std::string name, std::string pattern, std::string token) {
        PiiPattern p;
        p.compiled = std::regex(pattern, std::regex::ECMAScript);
        p.name = std::move(name);
        p.pattern = std::move(pattern);
        p.token = std::move(token);
        out.push_back(std::move(p));
    };
    add("email", R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)+)", "⟨EMAIL⟩");
    add("national_id", R"(\b\d{17}[0-9Xx]\b)", "⟨ID⟩");
    add("ipv4", R"(\b(\d{1,3}\.){3}\d{1,3}\b)", "⟨IP⟩");
    add("phone", R"((\+|00)\d{1,3}[ -]?\d{2,4}([ -]?\d{2,4}){1,3})", "⟨PHONE⟩");
    return out;
}

// Replaces every pattern match with its class token; text outside matches
// is untouched. Token count is recomputed. Applying twice is a fixpoint.
inline std::pair<Document, size_t> redact_pii(const Document& doc,
                                              const std::vector<PiiPattern>& patterns) {
    Document out = doc;
    size_t total = 0;
    for (const auto& p : patterns) {
        std::string next;
        next.reserve(out.text.size());
        auto begin = std::sregex_iterator(out.text.begin(), out.text.end(), p.compiled);
        auto end = std::sregex_iterator();
        size_t last = 0;
        for (auto it = begin; it != end; ++it) {
            next.append(out.text, last, static_cast<size_t>(it->position()) - last);
            next.append(p.token);
            last = static_cast<size_t>(it->position() + it->length());
            ++total;
        }
        if (last == 0) continue;
        next.append(out.text, last, std::string::npos);
        out.text = std::move(next);
    }
    if (total > 0) out.token_count = count_tokens(out.text);
    return {std::move(out), total};
}

// ---------------------------------------------------------------------------
// Combined filter
// ---------------------------------------------------------------------------

enum class Decision { Keep, Drop, Redacted };

inline std::string_view decision_name(Decision d) {
    switch (d) {
        case Decision::Keep: return "keep";
        case Decision::Drop: return "drop";
        case Decision::Redacted: return "redacted";
    }
    return "keep";
}

struct QualityVerdict {
    std::string id;
    std::vector<std::string> rule_hits;
    double p_harmful = 0.0;
    LanguageScore lang;
    Decision decision = Decision::Keep;

    json to_json() const {
        return json{{"id", id},
                    {"rule_hits", rule_hits},
                    {"p_harmful", p_harmful},
                    {"lang", json{{"en", lang.en}, {"zh", lang.zh}}},
                    {"decision", std::string(decision_name(decision))}};
    }
};

struct FilterThresholds {
    double p_drop = 0.9;
    double lang_min = 0.5;
};

struct FilterResult {
    Corpus corpus;
    std::vector<QualityVerdict> verdicts;
    StageStats stats;
};

// Per-document pure decision: drop on any rule hit, classifier probability
// >= p_drop, or best language score < lang_min; survivors are PII-redacted.
inline FilterResult filter_corpus(const Corpus& corpus, const QualityModel& model,
                                  const RuleConfig& rules, const FilterThresholds& thresholds,
                                  const std::vector<PiiPattern>& pii = builtin_pii_patterns()) {
    FilterResult result;
    result.corpus.shards.reserve(corpus.shards.size());
    for (const auto& shard : corpus.shards) {
        Shard out{shard.name, {}};
        for (const auto& d : shard.docs) {
            QualityVerdict v;
            v.id = d.id;
            v.rule_hits = apply_rules(d, rules);
            v.p_harmful = score(model, d);
            v.lang = language_score(d.text);
            const bool drop = !v.rule_hits.empty() || v.p_harmful >= thresholds.p_drop ||
                              v.lang.max_score() < thresholds.lang_min;
            if (drop) {
                v.decision = Decision::Drop;
            } else {
                auto [redacted, count] = redact_pii(d, pii);
                v.decision = count > 0 ? Decision::Redacted : Decision::Keep;
                out.docs.push_back(std::move(redacted));
            }
            result.verdicts.push_back(std::move(v));
        }
        result.corpus.shards.push_back(std::move(out));
    }
    result.stats = StageStats::between("quality_filter", corpus, result.corpus);
    return result;
}

}  // namespace corpuskit
