// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "corpuskit/corpus.hpp"
#include "corpuskit/util.hpp"

namespace corpuskit {

struct MixtureSpec {
    std::map<std::string, double> weights;  // domain -> target fraction
    uint64_t budget_tokens = 0;             // T

    void validate() const {
        if (budget_tokens == 0) throw MixtureError("mixture budget must be > 0");
        double sum = 0.0;
        for (const auto& [domain, w] : weights) {
            if (w < 0.0) throw MixtureError("negative weight for domain " + domain);
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw MixtureError("mixture weights must sum to 1 (got " + std::to_string(sum) + ")");
    }

    json to_json() const {
        json w = json::object();
        for (const auto& [domain, weight] : weights) w[domain] = weight;
        return json{{"weights", w}, {"budget_tokens", budget_tokens}};
    }

    static MixtureSpec from_json(const json& j) {
        MixtureSpec spec;
        for (const auto& [domain, w] : j.at("weights").items())
            spec.weights[domain] = w.get<double>();
        spec.budget_tokens = j.at("budget_tokens").get<uint64_t>();
        spec.validate();
        return spec;
    }
};

// Default proportions: 25% knowledge-intensive (10% zh + 15% en), 25% code.
inline MixtureSpec default_mixture_spec(uint64_t budget_tokens) {
    MixtureSpec spec;
    spec.weights = {{"web_zh", 0.135}, {"web_en", 0.315}, {"kid_zh", 0.10},
                    {"kid_en", 0.15},  {"code", 0.25},    {"other", 0.05}};
    spec.budget_tokens = budget_tokens;
    return spec;
}

// Continued-pretraining preset: math-tagged data raised to 10% of the total,
// the remaining domains scaled down proportionally. Pair with a domain key
// that routes math-tagged documents (meta) to the "math" planning domain.
inline MixtureSpec math_boost_mixture_spec(uint64_t budget_tokens) {
    MixtureSpec spec = default_mixture_spec(budget_tokens);
    for (auto& [domain, w] : spec.weights) w *= 0.9;
    spec.weights["math"] = 0.10;
    return spec;
}

struct ShardInfo {
    std::string id;
    uint64_t tokens = 0;
};

struct DomainInventory {
    std::map<std::string, std::vector<ShardInfo>> domains;

    uint64_t domain_tokens(const std::string& domain) const {
        auto it = domains.find(domain);
        if (it == domains.end()) return 0;
        uint64_t total = 0;
        for (const auto& s : it->second) total += s.tokens;
        return total;
    }

    uint64_t total_tokens() const {
        uint64_t total = 0;
        for (const auto& [domain, shards] : domains)
            for (const auto& s : shards) total += s.tokens;
        return total;
    }

    json to_json() const {
        json d = json::object();
        for (const auto& [domain, shards] : domains) {
            json arr = json::array();
            for (const auto& s : shards) arr.push_back(json{{"id", s.id}, {"tokens", s.tokens}});
            d[domain] = json{{"tokens", domain_tokens(domain)}, {"shards", arr}};
        }
        return json{{"domains", d}};
    }

    static DomainInventory from_json(const json& j) {
        DomainInventory inv;
        for (const auto& [domain, body] : j.at("domains").items()) {
            std::vector<ShardInfo> shards;
            for (const auto& sj : body.at("shards"))
                shards.push_back(ShardInfo{sj.at("id").get<std::string>(),
                                           sj.at("tokens").get<uint64_t>()});
            inv.domains[domain] = std::move(shards);
        }
        return inv;
    }
};

using DomainKeyFn = std::function<std::string(const Document&)>;

inline DomainKeyFn default_domain_key() {
    return [](const Document& d) { return std::string(domain_name(d.domain)); };
}

// Routes documents carrying meta[key] == value to a named planning domain
// (e.g. math-tagged KID to "math"), everything else to its DomainTag.
inline DomainKeyFn meta_override_domain_key(std::string key, std::string value,
                                            std::string override_domain) {
    return [key = std::move(key), value = std::move(value),
            override_domain = std::move(override_domain)](const Document& d) {
        auto it = d.meta.find(key);
        if (it != d.meta.end() && it->second == value) return override_domain;
        return std::string(domain_name(d.domain));
    };
}

// Canonical domain-pure resharding: documents keep global order within their
// planning domain and split into shards of at most max_tokens_per_shard.
// The result depends only on document order, never on input shard bounds.
inline Corpus reshard_by_domain(const Corpus& corpus, uint64_t max_tokens_per_shard,
                                const DomainKeyFn& domain_key = default_domain_key()) {
    if (max_tokens_per_shard == 0) throw ConfigError("shard token size must be > 0");
    std::map<std::string, std::vector<const Document*>> by_domain;
    corpus.for_each([&](const Document& d) { by_domain[domain_key(d)].push_back(&d); });

    Corpus out;
    for (const auto& [domain, docs] : by_domain) {
        Shard shard;
        uint64_t tokens = 0;
        size_t index = 0;
        auto flush = [&] {
            if (shard.docs.empty()) return;
            char name[128];
            std::snprintf(name, sizeof(name), "%s-%04zu.jsonl", domain.c_str(), index++);
            shard.name = name;
            out.shards.push_back(std::move(shard));
            shard = Shard{};
            tokens = 0;
        };
        for (const Document* d : docs) {
            if (!shard.docs.empty() && tokens + d->token_count > max_tokens_per_shard) flush();
            shard.docs.push_back(*d);
            tokens += d->token_count;
        }
        flush();
    }
    return out;
}

// Inventory over (shard, planning domain) slices. Slices of domain-pure
// shards use the shard name directly; mixed shards get "name#domain" ids.
inline DomainInventory inventory_from_corpus(const Corpus& corpus,
                                             const DomainKeyFn& domain_key = default_domain_key()) {
    DomainInventory inv;
    for (const auto& shard : corpus.shards) {
        std::map<std::string, uint64_t> slice_tokens;
        for (const auto& d : shard.docs) slice_tokens[domain_key(d)] += d.token_count;
        const bool pure = slice_tokens.size() == 1;
        for (const auto& [domain, tokens] : slice_tokens) {
            ShardInfo info;
            info.id = pure ? shard.name : shard.name + "#" + domain;
            info.tokens = tokens;
            inv.domains[domain].push_back(std::move(info));
        }
    }
    return inv;
}

// rate(d) = weight(d) * T / available(d). Rates above 1 repeat data,
// below 1 subsample it.
inline std::map<std::string, double> compute_sampling_rates(const DomainInventory& inventory,
                                                            const MixtureSpec& spec) {
    spec.validate();
    std::map<std::string, double> rates;
    for (const auto& [domain, weight] : spec.weights) {
        if (weight == 0.0) {
            rates[domain] = 0.0;
            continue;
        }
        const uint64_t available = inventory.domain_tokens(domain);
        if (available == 0)
            throw MixtureError("unsatisfiable mixture: domain '" + domain +
                               "' has weight > 0 but no inventory");
        rates[domain] = weight * static_cast<double>(spec.budget_tokens) /
                        static_cast<double>(available);
    }
    return rates;
}

struct ManifestEntry {
    std::string shard;
    std::string domain;
    uint32_t pass = 0;
};

struct TrainingManifest {
    uint64_t seed = 0;
    std::vector<ManifestEntry> entries;
    std::map<std::string, uint64_t> realized;  // domain -> tokens
    MixtureSpec spec;

    json to_json() const {
        json entries_json = json::array();
        for (const auto& e : entries)
            entries_json.push_back(json{{"shard", e.shard}, {"domain", e.domain}, {"pass", e.pass}});
        json realized_json = json::object();
        for (const auto& [domain, tokens] : realized) realized_json[domain] = tokens;
        return json{{"seed", seed},
                    {"entries", entries_json},
                    {"realized", realized_json},
                    {"spec", spec.to_json()}};
    }

    static TrainingManifest from_json(const json& j) {
        TrainingManifest m;
        m.seed = j.at("seed").get<uint64_t>();
        for (const auto& ej : j.at("entries"))
            m.entries.push_back(ManifestEntry{ej.at("shard").get<std::string>(),
                                              ej.at("domain").get<std::string>(),
                                              ej.at("pass").get<uint32_t>()});
        for (const auto& [domain, tokens] : j.at("realized").items())
            m.realized[domain] = tokens.get<uint64_t>();
        m.spec = MixtureSpec::from_json(j.at("spec"));
        return m;
    }
};

// Per domain: floor(rate) whole passes over every shard plus one seeded
// fractional pass, a shuffled-prefix whose token sum best approximates the
// remainder. Shards sort by id first, so the plan is independent of shard
// enumeration order; entries interleave round-robin by domain.
inline TrainingManifest build_manifest(const DomainInventory& inventory,
                                       const std::map<std::string, double>& rates, uint64_t seed,
                                       const MixtureSpec& spec) {
    TrainingManifest manifest;
    manifest.seed = seed;
    manifest.spec = spec;

    std::map<std::string, std::vector<ManifestEntry>> per_domain;
    for (const auto& [domain, rate] : rates) {
        if (rate <= 0.0) continue;
        auto it = inventory.domains.find(domain);
        if (it == inventory.domains.end()) continue;
        std::vector<ShardInfo> shards = it->second;
        std::sort(shards.begin(), shards.end(),
                  [](const ShardInfo& a, const ShardInfo& b) { return a.id < b.id; });

        const uint32_t full = static_cast<uint32_t>(rate);
        const double frac = rate - static_cast<double>(full);
        uint64_t domain_total = 0;
        for (const auto& s : shards) domain_total += s.tokens;

        auto& entries = per_domain[domain];
        uint64_t realized = 0;
        for (uint32_t pass = 0; pass < full; ++pass) {
            for (const auto& s : shards) entries.push_back(ManifestEntry{s.id, domain, pass});
            realized += domain_total;
        }
        if (frac > 0.0) {
            const double target = frac * static_cast<double>(domain_total);
            std::vector<ShardInfo> shuffled = shards;
            Rng rng(derive_seed(seed, "mix:" + domain));
            rng.shuffle(shuffled);
            // Prefix whose token sum lands closest to the fractional target.
            size_t best_len = 0;
            double best_err = target;  // empty prefix
            uint64_t sum = 0;
            for (size_t i = 0; i < shuffled.size(); ++i) {
                sum += shuffled[i].tokens;
                const double err = std::abs(static_cast<double>(sum) - target);
                if (err < best_err) {
                    best_err = err;
                    best_len = i + 1;
                }
            }
            uint64_t prefix_tokens = 0;
            for (size_t i = 0; i < best_len; ++i) {
                entries.push_back(ManifestEntry{shuffled[i].id, domain, full});
                prefix_tokens += shuffled[i].tokens;
            }
            realized += prefix_tokens;
        }
        manifest.realized[domain] = realized;
    }

    // Round-robin interleave for locality.
    std::vector<size_t> cursors(per_domain.size(), 0);
    bool progressed = true;
    while (progressed) {
        progressed = false;
        size_t di = 0;
        for (auto& [domain, entries] : per_domain) {
            if (cursors[di] < entries.size()) {
                manifest.entries.push_back(entries[cursors[di]++]);
                progressed = true;
            }
            ++di;
        }
    }
    return manifest;
}

struct MixtureDeviation {
    std::string domain;
    double target = 0.0;
    double realized = 0.0;
    double deviation = 0.0;
};

struct MixtureReport {
    bool pass = false;
    double tolerance = 0.0;
    std::vector<MixtureDeviation> rows;

    json to_json() const {
        json rows_json = json::array();
        for (const auto& r : rows)
            rows_json.push_back(json{{"domain", r.domain},
                                     {"target", r.target},
                                     {"realized", r.realized},
                                     {"deviation", r.deviation}});
        return json{{"pass", pass}, {"tolerance", tolerance}, {"domains", rows_json}};
    }
};

inline MixtureReport validate_mixture(const TrainingManifest& manifest, const MixtureSpec& spec,
                                      double tolerance) {
    MixtureReport report;
    report.tolerance = tolerance;
    uint64_t total = 0;
    for (const auto& [domain, tokens] : manifest.realized) total += tokens;

    std::map<std::string, double> targets = spec.weights;
    for (const auto& [domain, tokens] : manifest.realized) targets.try_emplace(domain, 0.0);

    report.pass = true;
    for (const auto& [domain, weight] : targets) {
        MixtureDeviation row;
        row.domain = domain;
        row.target = weight;
        auto it = manifest.realized.find(domain);
        const uint64_t tokens = it == manifest.realized.end() ? 0 : it->second;
        row.realized = total == 0 ? 0.0 : static_cast<double>(tokens) / static_cast<double>(total);
        row.deviation = std::abs(row.realized - row.target);
        if (row.deviation > tolerance) report.pass = false;
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace corpuskit
