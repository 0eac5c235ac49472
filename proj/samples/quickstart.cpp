// SPDX-License-Identifier: Apache-2.0
//
// Minimal end-to-end tour of the library: build a corpus in memory, run the
// dedup stages, train and apply the quality filter, and plan a mixture.
// Build target: corpuskit_quickstart.

#include <iostream>

#include "corpuskit/doc_dedup.hpp"
#include "corpuskit/mixture.hpp"
#include "corpuskit/quality.hpp"
#include "corpuskit/scaling.hpp"
#include "corpuskit/sentence_dedup.hpp"

using namespace corpuskit;

namespace {

Document doc(std::string id, std::string text, DomainTag domain) {
    Document d;
    d.id = std::move(id);
    d.domain = domain;
    d.set_text(std::move(text));
    return d;
}

}  // namespace

int main() {
    const std::string promo = "Subscribe to our newsletter for weekly deals!";
    Corpus corpus;
    corpus.shards.push_back(Shard{
        "demo",
        {
            doc("a1", "The council voted to expand the riverside park after months of debate.",
                DomainTag::WebEn),
            doc("a2", "The council voted to expand the riverside park after months of debate.",
                DomainTag::WebEn),  // exact duplicate
            doc("b1",
                "Wind farms off the northern coast now power a third of the region. " + promo,
                DomainTag::WebEn),
            doc("b2", "Harvest totals set a record this autumn across the valley. " + promo,
                DomainTag::WebEn),
            doc("b3", "Transit ridership keeps climbing on the new light-rail line. " + promo,
                DomainTag::WebEn),
            doc("c1", "Reach the desk at tips@daily.example for corrections or story leads today.",
                DomainTag::WebEn),
        }});

    auto deduped = dedup_documents(corpus);
    std::vector<StageStats> chain = deduped.stats;

    SentenceDedupConfig sentence_cfg;
    sentence_cfg.max_doc_frequency = 2;  // tiny corpus: treat 3+ docs as junk
    sentence_cfg.min_doc_len = 16;
    auto sentence = dedup_sentences(deduped.corpus, sentence_cfg);
    chain.push_back(sentence.stats);

    std::vector<LabeledDoc> seeds;
    for (int i = 0; i < 8; ++i) {
        seeds.push_back({"junk" + std::to_string(i) + " junk" + std::to_string(i + 1), 1});
        seeds.push_back({"news" + std::to_string(i) + " news" + std::to_string(i + 1), 0});
    }
    TrainConfig train_cfg;
    train_cfg.dim = 1u << 12;
    const QualityModel model = train_classifier(seeds, train_cfg);

    RuleConfig rules;
    rules.min_word_count = 4;
    rules.compile();
    FilterThresholds thresholds;
    thresholds.lang_min = 0.3;
    auto filtered = filter_corpus(sentence.corpus, model, rules, thresholds);
    chain.push_back(filtered.stats);

    MixtureSpec spec;
    spec.weights = {{"web_en", 1.0}};
    spec.budget_tokens = filtered.corpus.token_count() * 2;  // two epochs
    const auto planned = reshard_by_domain(filtered.corpus, 24);
    const auto inventory = inventory_from_corpus(planned);
    const auto manifest =
        build_manifest(inventory, compute_sampling_rates(inventory, spec), 7, spec);

    std::cout << aggregate_stats(chain).to_table() << "\n";
    std::cout << "manifest entries: " << manifest.entries.size() << ", realized web_en tokens: "
              << manifest.realized.at("web_en") << "\n";
    for (const auto& v : filtered.verdicts)
        std::cout << "  " << v.id << " -> " << decision_name(v.decision) << "\n";
    return 0;
}
