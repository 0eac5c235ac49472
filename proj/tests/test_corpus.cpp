// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "corpuskit/corpus.hpp"
#include "oracles.hpp"

using namespace corpuskit;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("corpuskit_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& l : lines) out << l << '\n';
}

Document make_doc(std::string id, std::string text, DomainTag domain = DomainTag::WebEn) {
    Document d;
    d.id = std::move(id);
    d.domain = domain;
    d.set_text(std::move(text));
    return d;
}

}  // namespace

TEST_CASE("read_corpus reads documents in file order") {
    const auto dir = temp_dir("read_order");
    write_lines(dir / "c.jsonl",
                {R"({"id":"a","text":"first doc here","domain":"web_en"})",
                 R"({"id":"b","text":"second doc here","domain":"web_zh"})",
                 R"({"id":"c","text":"third doc here","domain":"code"})"});
    const Corpus corpus = read_corpus(dir / "c.jsonl");
    REQUIRE(corpus.doc_count() == 3);
    CHECK(corpus.shards[0].docs[0].id == "a");
    CHECK(corpus.shards[0].docs[1].id == "b");
    CHECK(corpus.shards[0].docs[2].id == "c");
    CHECK(corpus.shards[0].docs[2].domain == DomainTag::Code);
}

TEST_CASE("read_corpus rejects duplicate ids naming the id") {
    const auto dir = temp_dir("dup_id");
    write_lines(dir / "c.jsonl", {R"({"id":"a","text":"one","domain":"web_en"})",
                                  R"({"id":"a","text":"two","domain":"web_en"})"});
    CHECK_THROWS_WITH(read_corpus(dir / "c.jsonl"), Catch::Matchers::ContainsSubstring("a"));
}

TEST_CASE("read_corpus reports malformed lines by number") {
    const auto dir = temp_dir("bad_line");
    write_lines(dir / "c.jsonl", {R"({"id":"a","text":"one","domain":"web_en"})", "{not json"});
    CHECK_THROWS_WITH(read_corpus(dir / "c.jsonl"), Catch::Matchers::ContainsSubstring(":2"));
}

TEST_CASE("read_corpus fills token_count via count_tokens when absent") {
    const auto dir = temp_dir("tokens");
    write_lines(dir / "c.jsonl",
                {R"({"id":"a","text":"three short words","domain":"web_en"})",
                 R"({"id":"b","text":"你好 world","domain":"web_zh","token_count":3})"});
    const Corpus corpus = read_corpus(dir / "c.jsonl");
    CHECK(corpus.shards[0].docs[0].token_count == count_tokens("three short words"));
    CHECK(corpus.shards[0].docs[1].token_count == 3);
}

TEST_CASE("corpus round-trip reproduces every field") {
    const auto dir = temp_dir("roundtrip");
    Corpus corpus;
    Shard shard{"s", {}};
    Document d = make_doc("doc-1", "body text with \xe4\xbd\xa0\xe5\xa5\xbd and \xf0\x9f\x98\x80");
    d.language = "zh";
    d.source_url = "https://example.com/x";
    d.meta = {{"k1", "v1"}, {"k2", "v2"}};
    shard.docs.push_back(d);
    corpus.shards.push_back(shard);

    write_corpus(corpus, dir / "out.jsonl");
    const Corpus back = read_corpus(dir / "out.jsonl");
    REQUIRE(back.doc_count() == 1);
    const Document& r = back.shards[0].docs[0];
    CHECK(r.id == d.id);
    CHECK(r.text == d.text);  // byte-identical through CJK + emoji
    CHECK(r.domain == d.domain);
    CHECK(r.language == d.language);
    CHECK(r.source_url == d.source_url);
    CHECK(r.token_count == d.token_count);
    CHECK(r.meta == d.meta);
}

TEST_CASE("corpus round-trip identity on generated corpora") {
    const auto dir = temp_dir("roundtrip_prop");
    Rng rng(99);
    for (int round = 0; round < 20; ++round) {
        Corpus corpus;
        const size_t n_shards = 1 + rng.uniform_below(3);
        size_t id = 0;
        for (size_t s = 0; s < n_shards; ++s) {
            Shard shard{"shard" + std::to_string(s) + ".jsonl", {}};
            const size_t n_docs = rng.uniform_below(6);
            for (size_t k = 0; k < n_docs; ++k) {
                std::string text;
                const size_t len = rng.uniform_below(30);
                for (size_t i = 0; i < len; ++i) {
                    switch (rng.uniform_below(4)) {
                        case 0: text += ' '; break;
                        case 1: encode_utf8(static_cast<char32_t>('a' + rng.uniform_below(26)), text); break;
                        case 2: encode_utf8(static_cast<char32_t>(0x4E00 + rng.uniform_below(500)), text); break;
                        default: encode_utf8(static_cast<char32_t>(0x1F600 + rng.uniform_below(40)), text); break;
                    }
                }
                Document d = make_doc("d" + std::to_string(id++), text,
                                      kAllDomains[rng.uniform_below(6)]);
                if (rng.uniform_below(2)) d.language = "en";
                if (rng.uniform_below(2)) d.meta["m" + std::to_string(rng.uniform_below(3))] = "v";
                shard.docs.push_back(std::move(d));
            }
            corpus.shards.push_back(std::move(shard));
        }
        const fs::path out = dir / ("case" + std::to_string(round));
        write_corpus(corpus, out);
        const Corpus back = read_corpus(out);
        REQUIRE(back.doc_count() == corpus.doc_count());
        auto lhs = corpus.all_docs();
        auto rhs = back.all_docs();
        for (size_t i = 0; i < lhs.size(); ++i) {
            CHECK(lhs[i]->id == rhs[i]->id);
            CHECK(lhs[i]->text == rhs[i]->text);
            CHECK(lhs[i]->domain == rhs[i]->domain);
            CHECK(lhs[i]->meta == rhs[i]->meta);
            CHECK(lhs[i]->token_count == rhs[i]->token_count);
        }
    }
}

TEST_CASE("write_shard emits an artifact header when configured") {
    const auto dir = temp_dir("header");
    Corpus corpus;
    corpus.shards.push_back(Shard{"s", {make_doc("a", "some text here")}});
    WriteOptions opts;
    opts.header_config_hash = "deadbeef00000000";
    write_corpus(corpus, dir / "out.jsonl", opts);

    std::ifstream in(dir / "out.jsonl");
    std::string first;
    std::getline(in, first);
    CHECK(first.find("corpuskit") != std::string::npos);
    CHECK(first.find("deadbeef00000000") != std::string::npos);
    // Reader skips the header transparently.
    const Corpus back = read_corpus(dir / "out.jsonl");
    CHECK(back.doc_count() == 1);
}

TEST_CASE("stage stats expose removal fraction and compose multiplicatively") {
    StageStats a{"one", 100, 80, 1000, 500};
    CHECK(a.removal_fraction() == Catch::Approx(0.5));
    StageStats zero{"empty", 0, 0, 0, 0};
    CHECK(zero.removal_fraction() == 0.0);

    StageStats b{"two", 80, 40, 500, 250};
    const double survival = (1.0 - a.removal_fraction()) * (1.0 - b.removal_fraction());
    CHECK(survival == Catch::Approx(0.25));
    CHECK(a.tokens_out == b.tokens_in);
}

TEST_CASE("domain tags parse and print the six mixture rows") {
    for (DomainTag d : kAllDomains) CHECK(parse_domain(domain_name(d)) == d);
    CHECK_THROWS_AS(parse_domain("bogus"), DataError);
}
