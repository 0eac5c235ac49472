// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "corpuskit/quality.hpp"
#include "oracles.hpp"

using namespace corpuskit;

namespace {

Document doc(std::string id, std::string text) {
    Document d;
    d.id = std::move(id);
    d.domain = DomainTag::WebEn;
    d.set_text(std::move(text));
    return d;
}

// Separable corpus: harmful docs draw from one vocabulary, clean docs from
// another, with optional label noise.
struct SeparableData {
    std::vector<LabeledDoc> train;
    std::vector<LabeledDoc> held_out;
};

std::string vocab_text(Rng& rng, bool harmful, size_t len) {
    std::string text;
    for (size_t i = 0; i < len; ++i) {
        if (i) text += ' ';
        text += (harmful ? "bad" : "good") + std::to_string(rng.uniform_below(50));
    }
    return text;
}

SeparableData make_separable(uint64_t seed, size_t n, double noise) {
    Rng rng(seed);
    SeparableData data;
    for (size_t i = 0; i < n; ++i) {
        const bool harmful = (i % 2) == 0;
        int label = harmful ? 1 : 0;
        if (rng.uniform_real() < noise) label = 1 - label;
        LabeledDoc d{vocab_text(rng, harmful, 12 + rng.uniform_below(8)), label};
        if (i % 5 == 0) data.held_out.push_back(std::move(d));
        else data.train.push_back(std::move(d));
    }
    return data;
}

double accuracy(const QualityModel& model, const std::vector<LabeledDoc>& docs) {
    size_t hit = 0;
    for (const auto& d : docs) {
        const int pred = score_text(model, d.text) >= 0.5 ? 1 : 0;
        hit += pred == d.label;
    }
    return static_cast<double>(hit) / static_cast<double>(docs.size());
}

TrainConfig small_train(uint32_t dim = 1u << 12) {
    TrainConfig cfg;
    cfg.dim = dim;
    cfg.epochs = 5;
    cfg.learning_rate = 0.1;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("repeated n-gram ratio matches the stated examples") {
    CHECK(repeated_ngram_char_ratio("abcd", 2) == 0.0);
    CHECK(repeated_ngram_char_ratio("aaaa", 2) == 1.0);
    CHECK(repeated_ngram_char_ratio("abab", 2) == 1.0);
    CHECK(repeated_ngram_char_ratio("a", 2) == 0.0);
    CHECK_THROWS_AS(repeated_ngram_char_ratio("abc", 1), ConfigError);
}

TEST_CASE("repeated n-gram ratio equals the coverage oracle exhaustively") {
    // Every string of length <= 12 over {a, b, c}; n = 2 and n = 3.
    size_t checked = 0, mismatched = 0;
    std::string s;
    std::function<void(size_t)> rec = [&](size_t remaining) {
        for (uint32_t n : {2u, 3u}) {
            if (repeated_ngram_char_ratio(s, n) != oracle::repeated_ngram_coverage(s, n)) {
                ++mismatched;
                CAPTURE(s, n);
                CHECK(repeated_ngram_char_ratio(s, n) == oracle::repeated_ngram_coverage(s, n));
            }
        }
        ++checked;
        if (remaining == 0) return;
        for (char c : {'a', 'b', 'c'}) {
            s.push_back(c);
            rec(remaining - 1);
            s.pop_back();
        }
    };
    rec(12);
    CHECK(checked == 797161);  // sum of 3^k for k = 0..12
    CHECK(mismatched == 0);
}

TEST_CASE("apply_rules reports word count violations") {
    RuleConfig rules;
    rules.min_word_count = 10;
    rules.compile();
    const auto hits = apply_rules(doc("a", "only three words"), rules);
    CHECK(std::find(hits.begin(), hits.end(), "word_count_min") != hits.end());
}

TEST_CASE("apply_rules flags blacklisted hosts including subdomains") {
    RuleConfig rules;
    rules.min_word_count = 0;
    rules.url_blacklist = {"spam.example"};
    rules.compile();
    Document d = doc("a", "a perfectly ordinary document body with enough words in it");
    d.source_url = "https://spam.example/page";
    CHECK(apply_rules(d, rules) == std::vector<std::string>{"url_blacklist"});
    d.source_url = "http://cdn.spam.example:8080/x";
    CHECK(apply_rules(d, rules) == std::vector<std::string>{"url_blacklist"});
    d.source_url = "https://clean.example/page";
    CHECK(apply_rules(d, rules).empty());
}

TEST_CASE("apply_rules flags repeated n-gram ratios above threshold") {
    RuleConfig rules;
    rules.min_word_count = 0;
    rules.repeat_ngram_n = 2;
    rules.repeat_ngram_threshold = 0.5;
    rules.compile();
    const std::string spam(40, 'z');  // ratio 1.0 by the brute-force oracle
    CHECK(oracle::repeated_ngram_coverage(spam, 2) > 0.5);
    const auto hits = apply_rules(doc("a", spam), rules);
    CHECK(std::find(hits.begin(), hits.end(), "repeat_ngram") != hits.end());
}

TEST_CASE("apply_rules evaluates template regexes compiled at load") {
    RuleConfig rules;
    rules.min_word_count = 0;
    rules.template_patterns = {"free V[1I]AGRA"};
    rules.compile();
    CHECK(apply_rules(doc("a", "get free V1AGRA today with this offer"), rules) ==
          std::vector<std::string>{"template_regex"});
    CHECK(apply_rules(doc("b", "an unremarkable sentence about gardening"), rules).empty());

    RuleConfig bad;
    bad.template_patterns = {"(unclosed"};
    CHECK_THROWS_AS(bad.compile(), ConfigError);
}

TEST_CASE("apply_rules flags special-character floods") {
    RuleConfig rules;
    rules.min_word_count = 0;
    rules.special_char_threshold = 0.4;
    rules.compile();
    const auto hits = apply_rules(
        doc("a", "☃☃☃☃☃☃☃☃☃☃ snowman spam"),
        rules);
    CHECK(std::find(hits.begin(), hits.end(), "special_char_ratio") != hits.end());
    CHECK(apply_rules(doc("b", "plain ascii text with words"), rules).empty());
}

TEST_CASE("featurize produces hashed unigram and bigram counts") {
    CHECK(featurize("", 1024).empty());
    const auto fv = featurize("a b", 1024);
    size_t total = 0;
    for (const auto& [idx, count] : fv) total += static_cast<size_t>(count);
    CHECK(total == 3);  // a, b, a_b

    const auto once = featurize("some words here", 1024);
    const auto twice = featurize("some words here some words here", 1024);
    double sum_once = 0, sum_twice = 0;
    for (const auto& [i, c] : once) sum_once += c;
    for (const auto& [i, c] : twice) sum_twice += c;
    CHECK(sum_twice == 2 * sum_once + 1);  // the joining bigram appears once extra

    CHECK_THROWS_AS(featurize("x", 1000), ConfigError);  // not a power of two
}

TEST_CASE("training separates disjoint vocabularies") {
    const auto data = make_separable(42, 200, 0.0);
    const auto model = train_classifier(data.train, small_train());
    CHECK(accuracy(model, data.train) >= 0.95);
    CHECK(mean_loss(model, data.train) <= std::log(2.0));  // zero-weight initial loss
}

TEST_CASE("training rejects single-class seed sets") {
    std::vector<LabeledDoc> seeds = {{"only clean text", 0}, {"more clean text", 0}};
    CHECK_THROWS_AS(train_classifier(seeds, small_train()), DataError);
}

TEST_CASE("training is deterministic byte-for-byte under a fixed seed") {
    const auto data = make_separable(43, 120, 0.05);
    const auto m1 = train_classifier(data.train, small_train());
    const auto m2 = train_classifier(data.train, small_train());
    CHECK(m1.bias == m2.bias);
    REQUIRE(m1.weights.size() == m2.weights.size());
    CHECK(std::memcmp(m1.weights.data(), m2.weights.data(),
                      m1.weights.size() * sizeof(double)) == 0);
}

TEST_CASE("analytic gradient matches central finite differences") {
    const auto data = make_separable(44, 24, 0.1);
    QualityModel model;
    model.dim = 64;
    model.config = small_train(64);
    Rng rng(5);
    model.weights.resize(64);
    for (auto& w : model.weights) w = (rng.uniform_real() - 0.5) * 0.2;
    model.bias = 0.05;

    auto [grad_w, grad_b] = loss_gradient(model, data.train);
    const double h = 1e-6;
    size_t checked = 0;
    for (uint32_t i = 0; i < model.dim; ++i) {
        QualityModel plus = model, minus = model;
        plus.weights[i] += h;
        minus.weights[i] -= h;
        const double numeric = (mean_loss(plus, data.train) - mean_loss(minus, data.train)) / (2 * h);
        if (std::abs(numeric) < 1e-9 && std::abs(grad_w[i]) < 1e-9) continue;
        CHECK(std::abs(grad_w[i] - numeric) <=
              1e-5 * std::max({std::abs(grad_w[i]), std::abs(numeric), 1e-3}));
        ++checked;
    }
    CHECK(checked > 10);
    QualityModel plus = model, minus = model;
    plus.bias += h;
    minus.bias -= h;
    const double numeric_b = (mean_loss(plus, data.train) - mean_loss(minus, data.train)) / (2 * h);
    CHECK(std::abs(grad_b - numeric_b) <= 1e-5 * std::max(std::abs(grad_b), 1e-3));
}

TEST_CASE("zero-weight model scores one half everywhere") {
    QualityModel model;
    model.dim = 256;
    model.weights.assign(256, 0.0);
    model.bias = 0.0;
    CHECK(score(model, doc("a", "anything at all")) == 0.5);
    CHECK(score(model, doc("b", "")) == 0.5);
}

TEST_CASE("harmful-vocabulary docs score high after separable training") {
    const auto data = make_separable(45, 200, 0.0);
    const auto model = train_classifier(data.train, small_train());
    Rng rng(46);
    CHECK(score_text(model, vocab_text(rng, true, 15)) > 0.9);
    CHECK(score_text(model, vocab_text(rng, false, 15)) < 0.1);
}

TEST_CASE("scores are per-document pure") {
    const auto data = make_separable(47, 100, 0.0);
    const auto model = train_classifier(data.train, small_train());
    const Document d = doc("x", "good1 good2 good3 good4 good5 good6 good7 good8");
    const double alone = score(model, d);
    // Scoring other documents in between changes nothing.
    score_text(model, "bad1 bad2 bad3");
    CHECK(score(model, d) == alone);
}

TEST_CASE("hard-sample mining respects band, ordering, and cap") {
    QualityModel model;
    model.dim = 1u << 12;
    model.config = small_train();
    model.weights.assign(model.dim, 0.0);
    model.bias = 0.0;
    // All docs score exactly 0.5 under the zero model.
    std::vector<Document> pool = {doc("c", "zz1"), doc("a", "zz2"), doc("b", "zz3")};
    auto mined = mine_hard_samples(model, pool, 0.4, 0.6, 10);
    REQUIRE(mined.size() == 3);
    CHECK(mined[0].id == "a");  // ties on |s-0.5| break by id
    CHECK(mined[1].id == "b");
    CHECK(mined[2].id == "c");

    auto capped = mine_hard_samples(model, pool, 0.4, 0.6, 2);
    CHECK(capped.size() == 2);

    const auto data = make_separable(48, 100, 0.0);
    const auto trained = train_classifier(data.train, small_train());
    std::vector<Document> confident;
    Rng rng(49);
    for (int i = 0; i < 10; ++i)
        confident.push_back(doc("p" + std::to_string(i), vocab_text(rng, true, 20)));
    CHECK(mine_hard_samples(trained, confident, 0.4, 0.6, 10).empty());

    // Ordering matches a brute-force sort oracle on a mixed pool.
    std::vector<Document> mixed;
    for (int i = 0; i < 30; ++i) {
        std::string text = vocab_text(rng, i % 2 == 0, 3);
        text += ' ';
        text += vocab_text(rng, i % 3 == 0, 2);
        mixed.push_back(doc("m" + std::to_string(i), text));
    }
    const auto got = mine_hard_samples(trained, mixed, 0.0, 1.0, 1000);
    std::vector<std::pair<double, std::string>> expect;
    for (const auto& d : mixed) expect.emplace_back(std::abs(score(trained, d) - 0.5), d.id);
    std::sort(expect.begin(), expect.end());
    REQUIRE(got.size() == expect.size());
    for (size_t i = 0; i < got.size(); ++i) CHECK(got[i].id == expect[i].second);
}

TEST_CASE("refine with an empty mined set leaves the model unchanged") {
    const auto data = make_separable(50, 100, 0.0);
    auto model = train_classifier(data.train, small_train());
    RefineConfig cfg;
    cfg.rounds = 1;
    cfg.band_lo = 0.49;
    cfg.band_hi = 0.51;
    Rng rng(51);
    std::vector<Document> pool;
    for (int i = 0; i < 20; ++i)
        pool.push_back(doc("p" + std::to_string(i), vocab_text(rng, true, 20)));
    const auto result = iterative_refine(model, data.train, pool,
                                         [](const Document&) { return 1; }, cfg);
    CHECK(result.mined_total == 0);
    CHECK(result.model.weights == model.weights);
    CHECK(result.seeds.size() == data.train.size());
}

TEST_CASE("refine grows seeds by at most rounds times cap and helps accuracy") {
    // Mixed-vocabulary docs with a clear 7:3 majority; oracle label = majority.
    Rng rng(52);
    auto mixed_doc = [&](size_t idx) {
        const bool mostly_bad = rng.uniform_below(2) == 0;
        const size_t bad_words = mostly_bad ? 7 : 3;
        const size_t good_words = 10 - bad_words;
        std::string text;
        for (size_t i = 0; i < bad_words; ++i) text += "bad" + std::to_string(rng.uniform_below(50)) + " ";
        for (size_t i = 0; i < good_words; ++i) text += "good" + std::to_string(rng.uniform_below(50)) + " ";
        Document d = doc("mx" + std::to_string(idx), text);
        return std::make_pair(d, mostly_bad ? 1 : 0);
    };

    std::vector<LabeledDoc> seeds;
    Rng srng(53);
    for (int i = 0; i < 30; ++i) {
        const bool harmful = i % 2 == 0;
        seeds.push_back(LabeledDoc{vocab_text(srng, harmful, 10), harmful ? 1 : 0});
    }
    std::vector<Document> pool;
    std::map<std::string, int> labels;
    std::vector<LabeledDoc> bench;
    for (size_t i = 0; i < 300; ++i) {
        auto [d, label] = mixed_doc(i);
        if (i < 200) {
            labels[d.id] = label;
            pool.push_back(d);
        } else {
            bench.push_back(LabeledDoc{d.text, label});
        }
    }

    const auto model0 = train_classifier(seeds, small_train());
    RefineConfig cfg;
    cfg.rounds = 3;
    cfg.per_round = 40;
    const auto refined = iterative_refine(model0, seeds, pool,
                                          [&](const Document& d) { return labels.at(d.id); }, cfg);
    CHECK(refined.seeds.size() <= seeds.size() + cfg.rounds * cfg.per_round);
    CHECK(accuracy(refined.model, bench) >= accuracy(model0, bench));
}

TEST_CASE("refine surfaces labeler failures with round context") {
    const auto data = make_separable(54, 60, 0.0);
    auto model = train_classifier(data.train, small_train());
    std::vector<Document> pool = {doc("p0", "bad1 good1 bad2 good2")};
    RefineConfig cfg;
    cfg.rounds = 2;
    CHECK_THROWS_WITH(
        iterative_refine(model, data.train, pool,
                         [](const Document&) -> int { throw std::runtime_error("offline"); }, cfg),
        Catch::Matchers::ContainsSubstring("round 1"));
}

TEST_CASE("language scores follow the script plus stopword formula") {
    const std::string zh_text =
        "我们的国家在这一年发展很好"
        "他们说这是一个新的时代";
    const auto zh = language_score(zh_text);
    CHECK(zh.zh > 0.8);
    CHECK(zh.en < 0.05);

    // Oracle recomputation of the formula on the same fixture.
    {
        size_t cjk = 0, total = 0, stop = 0;
        size_t pos = 0;
        while (pos < zh_text.size()) {
            const char32_t cp = decode_utf8(zh_text, pos);
            if (is_space(cp)) continue;
            ++total;
            if (is_cjk(cp)) ++cjk;
        }
        // Count stopchar hits against the same built-in list by re-scoring a
        // single-character probe: probe scores 0.7 + 0.3 iff it is a stopchar.
        pos = 0;
        while (pos < zh_text.size()) {
            std::string one;
            const char32_t cp = decode_utf8(zh_text, pos);
            if (!is_cjk(cp)) continue;
            encode_utf8(cp, one);
            if (language_score(one).zh == Catch::Approx(1.0)) ++stop;
        }
        const double expected = 0.7 * (static_cast<double>(cjk) / total) +
                                0.3 * (static_cast<double>(stop) / cjk);
        CHECK(zh.zh == Catch::Approx(expected));
    }

    const auto junk = language_score("1234 5678 !!!");
    CHECK(junk.en < 0.3);
    CHECK(junk.zh < 0.3);

    const auto empty = language_score("");
    CHECK(empty.en == 0.0);
    CHECK(empty.zh == 0.0);

    const auto en = language_score("the quick brown fox jumps over the lazy dog and it will go");
    CHECK(en.en > 0.7);
    CHECK(en.zh == 0.0);
}

TEST_CASE("pii redaction replaces matches with class tokens") {
    const auto patterns = builtin_pii_patterns();
    auto [redacted, count] = redact_pii(doc("a", "mail me at a@b.com"), patterns);
    CHECK(count == 1);
    CHECK(redacted.text == "mail me at ⟨EMAIL⟩");
    CHECK(redacted.token_count == count_tokens(redacted.text));

    auto [untouched, zero] = redact_pii(doc("b", "no sensitive content here"), patterns);
    CHECK(zero == 0);
    CHECK(untouched.text == "no sensitive content here");
}

TEST_CASE("pii redaction covers phones, ips, and national ids") {
    const auto patterns = builtin_pii_patterns();
    auto [d1, c1] = redact_pii(doc("a", "call +86 138-0013-8000 soon"), patterns);
    CHECK(c1 == 1);
    CHECK(d1.text.find("⟨PHONE⟩") != std::string::npos);

    auto [d2, c2] = redact_pii(doc("b", "server at 192.168.10.1 port 80"), patterns);
    CHECK(c2 == 1);
    CHECK(d2.text.find("⟨IP⟩") != std::string::npos);

    auto [d3, c3] = redact_pii(doc("c", "id 11010519491231002X on file"), patterns);
    CHECK(c3 == 1);
    CHECK(d3.text.find("⟨ID⟩") != std::string::npos);
}

TEST_CASE("pii redaction is a fixpoint") {
    const auto patterns = builtin_pii_patterns();
    Document d = doc("a",
                     "contact: user.name+tag@mail.example.org or +44 20 7946 0958, "
                     "host 10.0.0.255, id 110105194912310021.");
    auto [once, count1] = redact_pii(d, patterns);
    CHECK(count1 >= 4);
    auto [twice, count2] = redact_pii(once, patterns);
    CHECK(count2 == 0);
    CHECK(twice.text == once.text);
}

TEST_CASE("filter_corpus applies the drop predicate and redacts survivors") {
    const auto data = make_separable(60, 200, 0.0);
    const auto model = train_classifier(data.train, small_train());
    RuleConfig rules;
    rules.min_word_count = 3;
    rules.compile();
    FilterThresholds thresholds;  // p_drop 0.9, lang_min 0.5

    Rng rng(61);
    std::vector<Document> docs;
    docs.push_back(doc("clean", "the good story they tell is about a good day for all of them"));
    docs.push_back(doc("harmful", vocab_text(rng, true, 30)));
    docs.push_back(doc("short", "too few"));
    docs.push_back(doc("pii", "write to the editor at editor@daily.example for a reply to you"));

    Corpus corpus;
    corpus.shards.push_back(Shard{"s", docs});
    const auto result = filter_corpus(corpus, model, rules, thresholds);

    std::map<std::string, Decision> decisions;
    for (const auto& v : result.verdicts) decisions[v.id] = v.decision;
    CHECK(decisions.at("clean") == Decision::Keep);
    CHECK(decisions.at("harmful") == Decision::Drop);
    CHECK(decisions.at("short") == Decision::Drop);
    CHECK(decisions.at("pii") == Decision::Redacted);
    CHECK(result.stats.docs_out == 2);
    result.corpus.for_each([&](const Document& d) {
        CHECK(d.text.find('@') == std::string::npos);
    });
}

TEST_CASE("filter_corpus survivor set equals the per-doc predicate oracle") {
    const auto data = make_separable(62, 200, 0.0);
    const auto model = train_classifier(data.train, small_train());
    RuleConfig rules;
    rules.min_word_count = 5;
    rules.repeat_ngram_n = 2;
    rules.repeat_ngram_threshold = 0.8;
    rules.compile();
    FilterThresholds thresholds;

    Rng rng(63);
    std::vector<Document> docs;
    for (int i = 0; i < 100; ++i) {
        std::string text;
        switch (rng.uniform_below(4)) {
            case 0: text = vocab_text(rng, false, 20); break;
            case 1: text = vocab_text(rng, true, 20); break;
            case 2: text = "the and for with that from they this have will good story telling"; break;
            default: text = std::string(30, 'q'); break;
        }
        docs.push_back(doc("d" + std::to_string(i), text));
    }
    Corpus corpus;
    corpus.shards.push_back(Shard{"s", docs});
    const auto result = filter_corpus(corpus, model, rules, thresholds);

    std::set<std::string> got;
    result.corpus.for_each([&](const Document& d) { got.insert(d.id); });
    std::set<std::string> expected;
    for (const auto& d : docs) {
        const bool rule_hit = !apply_rules(d, rules).empty();
        const bool harmful = score(model, d) >= thresholds.p_drop;
        const bool low_lang = language_score(d.text).max_score() < thresholds.lang_min;
        if (!rule_hit && !harmful && !low_lang) expected.insert(d.id);
    }
    CHECK(got == expected);
}

TEST_CASE("model files round-trip bit-exactly") {
    const auto data = make_separable(64, 80, 0.0);
    const auto model = train_classifier(data.train, small_train());
    const auto path = std::filesystem::temp_directory_path() / "corpuskit_model_test.bin";
    save_model(model, path);
    const auto back = load_model(path);
    CHECK(back.dim == model.dim);
    CHECK(back.bias == model.bias);
    CHECK(back.weights == model.weights);
    CHECK(back.config.epochs == model.config.epochs);
    CHECK(back.config.seed == model.config.seed);
    std::filesystem::remove(path);
}

TEST_CASE("seed label files parse and validate") {
    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "corpuskit_seeds_test.jsonl";
    {
        std::ofstream out(path);
        out << R"({"text":"clean sample","label":0})" << "\n";
        out << R"({"text":"harmful sample","label":1})" << "\n";
    }
    const auto seeds = read_seed_labels(path);
    REQUIRE(seeds.size() == 2);
    CHECK(seeds[0].label == 0);
    CHECK(seeds[1].label == 1);
    fs::remove(path);
}
