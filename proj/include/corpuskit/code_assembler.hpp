// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpuskit/corpus.hpp"
#include "corpuskit/doc_dedup.hpp"

namespace corpuskit {

enum class LangFamily { PythonLike, CLike, JsLike, Other };

inline LangFamily detect_family(std::string_view path) {
    const size_t dot = path.rfind('.');
    if (dot == std::string_view::npos) return LangFamily::Other;
    std::string ext(path.substr(dot + 1));
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == "py" || ext == "pyi") return LangFamily::PythonLike;
    if (ext == "c" || ext == "h" || ext == "cc" || ext == "hh" || ext == "cpp" ||
        ext == "hpp" || ext == "cxx" || ext == "hxx")
        return LangFamily::CLike;
    if (ext == "js" || ext == "jsx" || ext == "ts" || ext == "tsx" || ext == "mjs" ||
        ext == "cjs")
        return LangFamily::JsLike;
    return LangFamily::Other;
}

struct RepoFile {
    std::string path;  // repo-relative, '/'-separated, no leading '/' or ".."
    std::string text;
    LangFamily family = LangFamily::Other;
};

struct Repository {
    std::string name;
    uint64_t stars = 0;
    std::vector<RepoFile> files;
};

inline void validate_repo_path(std::string_view path) {
    if (path.empty()) throw DataError("empty repo file path");
    if (path.front() == '/') throw DataError("repo file path must be relative: " + std::string(path));
    size_t start = 0;
    while (start <= path.size()) {
        const size_t slash = path.find('/', start);
        const std::string_view part =
            path.substr(start, slash == std::string_view::npos ? path.size() - start : slash - start);
        if (part == "..") throw DataError("repo file path escapes the repo: " + std::string(path));
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
}

// Edges run dependency -> dependent: if A imports B the edge is B -> A.
struct RepoGraph {
    std::vector<std::string> nodes;                            // sorted paths
    std::vector<std::pair<std::string, std::string>> edges;   // (dep, importer)

    json to_json() const {
        json arr = json::array();
        for (const auto& [dep, importer] : edges) arr.push_back(json::array({dep, importer}));
        return json{{"edges", arr}};
    }
};

struct CodeFilterConfig {
    std::unordered_set<std::string> drop_extensions = {"html", "htm", "xml",
                                                       "json", "yaml", "yml"};
    std::unordered_set<std::string> basename_allowlist = {"package.json"};
    double max_non_text_fraction = 0.30;  // non-ASCII non-CJK codepoints
    size_t max_line_length = 1000;
    double min_alpha_fraction = 0.25;
};

namespace detail {

inline std::string_view path_basename(std::string_view path) {
    const size_t slash = path.rfind('/');
    return slash == std::string_view::npos ? path : path.substr(slash + 1);
}

inline std::string_view path_extension(std::string_view path) {
    const std::string_view base = path_basename(path);
    const size_t dot = base.rfind('.');
    return dot == std::string_view::npos ? std::string_view{} : base.substr(dot + 1);
}

inline bool keep_code_file(const RepoFile& f, const CodeFilterConfig& cfg) {
    std::string ext(path_extension(f.path));
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (cfg.drop_extensions.count(ext) &&
        !cfg.basename_allowlist.count(std::string(path_basename(f.path))))
        return false;

    size_t line_len = 0, max_line = 0;
    for (char c : f.text) {
        if (c == '\n') {
            max_line = std::max(max_line, line_len);
            line_len = 0;
        } else {
            ++line_len;
        }
    }
    max_line = std::max(max_line, line_len);
    if (max_line > cfg.max_line_length) return false;

    size_t total = 0, alpha = 0, foreign = 0;
    size_t pos = 0;
    while (pos < f.text.size()) {
        const char32_t cp = decode_utf8(f.text, pos);
        ++total;
        const bool ascii = cp < 128;
        const bool cjk = is_cjk(cp);
        if ((ascii && std::isalpha(static_cast<int>(cp))) || cjk) ++alpha;
        if (!ascii && !cjk) ++foreign;
    }
    if (total == 0) return false;
    if (static_cast<double>(foreign) / static_cast<double>(total) > cfg.max_non_text_fraction)
        return false;
    if (static_cast<double>(alpha) / static_cast<double>(total) < cfg.min_alpha_fraction)
        return false;
    return true;
}

}  // namespace detail

// Drops markup/config file types (except allowlisted manifests) and files
// failing the plain-text heuristics.
inline std::pair<Repository, StageStats> filter_code_files(const Repository& repo,
                                                           const CodeFilterConfig& cfg = {}) {
    Repository out;
    out.name = repo.name;
    out.stars = repo.stars;
    StageStats stats;
    stats.stage = "code_file_filter";
    for (const auto& f : repo.files) {
        ++stats.docs_in;
        stats.tokens_in += count_tokens(f.text);
        if (detail::keep_code_file(f, cfg)) {
            ++stats.docs_out;
            stats.tokens_out += count_tokens(f.text);
            out.files.push_back(f);
        }
    }
    return {std::move(out), std::move(stats)};
}

namespace detail {

// "a/b/../c" without touching leading segments that would escape the root.
inline std::string normalize_rel_path(std::string_view path) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (start <= path.size()) {
        const size_t slash = path.find('/', start);
        const std::string_view part =
            path.substr(start, slash == std::string_view::npos ? path.size() - start : slash - start);
        if (part == "..") {
            if (parts.empty()) return {};  // escapes the repo
            parts.pop_back();
        } else if (!part.empty() && part != ".") {
            parts.emplace_back(part);
        }
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out.push_back('/');
        out += parts[i];
    }
    return out;
}

inline std::string_view path_dir(std::string_view path) {
    const size_t slash = path.rfind('/');
    return slash == std::string_view::npos ? std::string_view{} : path.substr(0, slash);
}

// Resolution: exact path, then unique-ish suffix match (lexicographically
// smallest on ambiguity). Unresolvable imports are external and ignored.
inline std::string resolve_candidate(const std::set<std::string>& paths,
                                     const std::string& candidate) {
    if (candidate.empty()) return {};
    if (paths.count(candidate)) return candidate;
    std::string best;
    const std::string suffix = "/" + candidate;
    for (const auto& p : paths) {
        if (p.size() > suffix.size() &&
            p.compare(p.size() - suffix.size(), suffix.size(), suffix) == 0) {
            if (best.empty() || p < best) best = p;
        }
    }
    return best;
}

inline std::string resolve_import(const std::set<std::string>& paths, std::string_view importer,
                                  const std::vector<std::string>& candidates) {
    for (const auto& cand : candidates) {
        // Relative to the importing file first, then repo root / suffix.
        const std::string_view dir = path_dir(importer);
        if (!dir.empty()) {
            const std::string rel = normalize_rel_path(std::string(dir) + "/" + cand);
            if (!rel.empty() && paths.count(rel)) return rel;
        }
        const std::string norm = normalize_rel_path(cand);
        const std::string hit = resolve_candidate(paths, norm);
        if (!hit.empty()) return hit;
    }
    return {};
}

inline void python_import_candidates(const std::string& module, std::string_view importer,
                                     std::vector<std::string>& out) {
    size_t dots = 0;
    while (dots < module.size() && module[dots] == '.') ++dots;
    std::string rel = module.substr(dots);
    std::replace(rel.begin(), rel.end(), '.', '/');
    if (dots > 0) {
        std::string base(path_dir(importer));
        for (size_t i = 1; i < dots; ++i) base = std::string(path_dir(base));
        if (rel.empty()) {
            if (!base.empty()) out.push_back(base + "/__init__.py");
            return;
        }
        const std::string joined = base.empty() ? rel : base + "/" + rel;
        out.push_back(joined + ".py");
        out.push_back(joined + "/__init__.py");
    } else {
        out.push_back(rel + ".py");
        out.push_back(rel + "/__init__.py");
    }
}

}  // namespace detail

// Pattern-scans import statements per language family and resolves them to
// in-repo files. Not a real parser: commented-out imports may produce edges
// and computed imports are invisible, which is acceptable for ordering.
inline RepoGraph extract_dependencies(const Repository& repo) {
    static const std::regex py_import(R"(^\s*import\s+([A-Za-z_][\w.]*(?:\s*,\s*[A-Za-z_][\w.]*)*))");
    static const std::regex py_from(R"(^\s*from\s+(\.*[\w.]*)\s+import\s)");
    static const std::regex c_include(R"(^\s*#\s*include\s+\"([^\"]+)\")");
    static const std::regex js_from(R"(\bfrom\s+['\"]([^'\"]+)['\"])");
    static const std::regex js_require(R"(\brequire\s*\(\s*['\"]([^'\"]+)['\"]\s*\))");
    static const std::regex js_bare_import(R"(^\s*import\s+['\"]([^'\"]+)['\"])");

    std::set<std::string> paths;
    for (const auto& f : repo.files) paths.insert(f.path);

    RepoGraph graph;
    graph.nodes.assign(paths.begin(), paths.end());
    std::set<std::pair<std::string, std::string>> edges;

    for (const auto& f : repo.files) {
        std::vector<std::string> resolved;
        auto add_candidates = [&](const std::vector<std::string>& cands) {
            const std::string hit = detail::resolve_import(paths, f.path, cands);
            if (!hit.empty() && hit != f.path) resolved.push_back(hit);
        };

        std::istringstream lines(f.text);
        std::string line;
        while (std::getline(lines, line)) {
            std::smatch m;
            if (f.family == LangFamily::PythonLike) {
                if (std::regex_search(line, m, py_from)) {
                    std::vector<std::string> cands;
                    detail::python_import_candidates(m[1].str(), f.path, cands);
                    add_candidates(cands);
                } else if (std::regex_search(line, m, py_import)) {
                    std::string list = m[1].str();
                    size_t start = 0;
                    while (start <= list.size()) {
                        size_t comma = list.find(',', start);
                        std::string module = list.substr(
                            start, comma == std::string::npos ? list.size() - start : comma - start);
                        module = std::string(trim(module));
                        const size_t as_pos = module.find(" as ");
                        if (as_pos != std::string::npos) module = module.substr(0, as_pos);
                        if (!module.empty()) {
                            std::vector<std::string> cands;
                            detail::python_import_candidates(module, f.path, cands);
                            add_candidates(cands);
                        }
                        if (comma == std::string::npos) break;
                        start = comma + 1;
                    }
                }
            } else if (f.family == LangFamily::CLike) {
                if (std::regex_search(line, m, c_include)) add_candidates({m[1].str()});
            } else if (f.family == LangFamily::JsLike) {
                std::smatch jm;
                std::string spec;
                if (std::regex_search(line, jm, js_from) ||
                    std::regex_search(line, jm, js_require) ||
                    std::regex_search(line, jm, js_bare_import))
                    spec = jm[1].str();
                if (!spec.empty() && (spec[0] == '.' || paths.count(spec))) {
                    std::vector<std::string> cands = {spec,         spec + ".js",  spec + ".ts",
                                                      spec + ".jsx", spec + ".tsx", spec + ".mjs",
                                                      spec + "/index.js"};
                    add_candidates(cands);
                }
            }
        }
        for (const auto& dep : resolved) edges.emplace(dep, f.path);
    }
    graph.edges.assign(edges.begin(), edges.end());
    return graph;
}

// Kahn's algorithm with a lexicographic frontier. When only cyclic nodes
// remain, the smallest remaining node has its unmet incoming edges
// discarded and processing continues, so every node appears exactly once.
inline std::vector<std::string> topo_order(const RepoGraph& graph) {
    std::map<std::string, size_t> indegree;
    std::map<std::string, std::vector<std::string>> out_edges;
    for (const auto& n : graph.nodes) indegree[n] = 0;
    for (const auto& [dep, importer] : graph.edges) {
        if (dep == importer) continue;
        if (!indegree.count(dep) || !indegree.count(importer))
            throw DataError("graph edge references unknown node");
        out_edges[dep].push_back(importer);
        ++indegree[importer];
    }

    std::set<std::string> frontier;
    std::set<std::string> remaining;
    for (const auto& [node, deg] : indegree) {
        remaining.insert(node);
        if (deg == 0) frontier.insert(node);
    }

    std::vector<std::string> order;
    order.reserve(graph.nodes.size());
    while (!remaining.empty()) {
        if (frontier.empty()) {
            // Cycle: break it at the smallest remaining node.
            const std::string victim = *remaining.begin();
            indegree[victim] = 0;
            frontier.insert(victim);
        }
        const std::string node = *frontier.begin();
        frontier.erase(frontier.begin());
        remaining.erase(node);
        order.push_back(node);
        for (const auto& importer : out_edges[node]) {
            if (!remaining.count(importer)) continue;
            if (indegree[importer] > 0 && --indegree[importer] == 0) frontier.insert(importer);
        }
    }
    return order;
}

inline constexpr std::string_view kFileMarkerPrefix = "⟨FILE ";  // ⟨FILE path⟩
inline constexpr std::string_view kFileMarkerSuffix = "⟩";

// One repository becomes one training document: files in dependency order,
// each prefixed by a sentinel marker line.
inline Document concat_repo(const Repository& repo, const std::vector<std::string>& order) {
    if (repo.files.empty()) throw DataError("empty repository: " + repo.name);
    std::unordered_map<std::string_view, const RepoFile*> by_path;
    for (const auto& f : repo.files) by_path.emplace(f.path, &f);
    if (order.size() != repo.files.size())
        throw DataError("order/file mismatch for repository " + repo.name);

    Document doc;
    doc.id = "repo:" + repo.name;
    doc.domain = DomainTag::Code;
    std::string text;
    std::unordered_set<std::string_view> seen;
    for (const auto& path : order) {
        auto it = by_path.find(path);
        if (it == by_path.end() || !seen.insert(path).second)
            throw DataError("order is not a permutation of files in repository " + repo.name);
        text.append(kFileMarkerPrefix);
        text.append(path);
        text.append(kFileMarkerSuffix);
        text.push_back('\n');
        text.append(it->second->text);
        text.push_back('\n');
    }
    doc.set_text(std::move(text));
    doc.meta["stars"] = std::to_string(repo.stars);
    doc.meta["repo_name"] = repo.name;
    return doc;
}

// Splits a concatenated repo document back into (path, text) blocks.
inline std::vector<std::pair<std::string, std::string>> split_repo_document(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    size_t pos = 0;
    while (pos < text.size()) {
        if (text.compare(pos, kFileMarkerPrefix.size(), kFileMarkerPrefix) != 0)
            throw DataError("malformed repo document: missing file marker");
        const size_t path_start = pos + kFileMarkerPrefix.size();
        const size_t marker_end = text.find(kFileMarkerSuffix, path_start);
        if (marker_end == std::string_view::npos)
            throw DataError("malformed repo document: unterminated file marker");
        const std::string path(text.substr(path_start, marker_end - path_start));
        size_t body_start = marker_end + kFileMarkerSuffix.size();
        if (body_start < text.size() && text[body_start] == '\n') ++body_start;
        const std::string next_marker = "\n" + std::string(kFileMarkerPrefix);
        const size_t sep = text.find(next_marker, body_start);
        // Each block ends with the single newline appended at concat time;
        // dropping it recovers the file text exactly.
        if (sep == std::string_view::npos) {
            std::string body(text.substr(body_start));
            if (!body.empty() && body.back() == '\n') body.pop_back();
            out.emplace_back(path, std::move(body));
            pos = text.size();
        } else {
            out.emplace_back(path, std::string(text.substr(body_start, sep - body_start)));
            pos = sep + 1;
        }
    }
    return out;
}

// Repo-as-sample dedup: whole-repository documents, coarser word shingles.
inline DocDedupResult dedup_repos(const std::vector<Document>& repo_docs, double threshold = 0.8) {
    DedupConfig cfg;
    cfg.fp.scheme = ShingleScheme{ShingleUnit::Word, 7};
    cfg.threshold = threshold;
    Corpus corpus;
    corpus.shards.push_back(Shard{"repos", repo_docs});
    return dedup_documents(corpus, cfg);
}

inline uint64_t doc_stars(const Document& doc) {
    auto it = doc.meta.find("stars");
    if (it == doc.meta.end()) return 0;
    return static_cast<uint64_t>(std::strtoull(it->second.c_str(), nullptr, 10));
}

// Weighted sampling without replacement, weight log2(2 + stars): starred
// repos are favored without letting mega-repos monopolize the budget.
// Drawing stops once the cumulative token count reaches the budget, so the
// selection overshoots by at most one repo.
inline std::vector<Document> star_weighted_sample(const std::vector<Document>& repo_docs,
                                                  uint64_t token_budget, uint64_t seed) {
    std::vector<const Document*> remaining;
    std::vector<double> weight;
    double total_weight = 0.0;
    for (const auto& d : repo_docs) {
        remaining.push_back(&d);
        weight.push_back(std::log2(2.0 + static_cast<double>(doc_stars(d))));
        total_weight += weight.back();
    }

    Rng rng(seed);
    std::vector<Document> selected;
    uint64_t cumulative = 0;
    while (!remaining.empty() && cumulative < token_budget) {
        double r = rng.uniform_real() * total_weight;
        size_t pick = remaining.size() - 1;
        for (size_t i = 0; i < remaining.size(); ++i) {
            if (r < weight[i]) {
                pick = i;
                break;
            }
            r -= weight[i];
        }
        selected.push_back(*remaining[pick]);
        cumulative += remaining[pick]->token_count;
        total_weight -= weight[pick];
        remaining.erase(remaining.begin() + static_cast<ptrdiff_t>(pick));
        weight.erase(weight.begin() + static_cast<ptrdiff_t>(pick));
    }
    return selected;
}

struct CodeMixResult {
    Corpus corpus;
    StageStats stats;
    std::vector<std::string> warnings;
    double realized_repo_fraction = 0.0;
};

// Blends repository-level and document-level code pools at the requested
// token split (default 62% repository-level). Without an explicit budget
// the largest budget both pools can realize at that split is used.
inline CodeMixResult mix_code_levels(const std::vector<Document>& repo_docs,
                                     const std::vector<Document>& file_docs, double repo_fraction,
                                     uint64_t explicit_budget = 0) {
    if (repo_fraction < 0.0 || repo_fraction > 1.0)
        throw ConfigError("repo_fraction must be in [0, 1]");
    uint64_t repo_total = 0, file_total = 0;
    for (const auto& d : repo_docs) repo_total += d.token_count;
    for (const auto& d : file_docs) file_total += d.token_count;

    double budget;
    if (explicit_budget > 0) {
        budget = static_cast<double>(explicit_budget);
    } else if (repo_fraction == 0.0) {
        budget = static_cast<double>(file_total);
    } else if (repo_fraction == 1.0) {
        budget = static_cast<double>(repo_total);
    } else {
        budget = std::min(static_cast<double>(repo_total) / repo_fraction,
                          static_cast<double>(file_total) / (1.0 - repo_fraction));
    }

    CodeMixResult result;
    const double repo_target = repo_fraction * budget;
    const double file_target = (1.0 - repo_fraction) * budget;

    Shard shard{"code", {}};
    uint64_t repo_taken = 0, file_taken = 0;
    for (const auto& d : repo_docs) {
        if (static_cast<double>(repo_taken) >= repo_target) break;
        shard.docs.push_back(d);
        repo_taken += d.token_count;
    }
    for (const auto& d : file_docs) {
        if (static_cast<double>(file_taken) >= file_target) break;
        shard.docs.push_back(d);
        file_taken += d.token_count;
    }
    if ((static_cast<double>(repo_taken) < repo_target * 0.999 && repo_target > 0) ||
        (repo_fraction > 0.0 && repo_docs.empty()))
        result.warnings.push_back("repository-level pool short of target: best-effort fill");
    if ((static_cast<double>(file_taken) < file_target * 0.999 && file_target > 0) ||
        (repo_fraction < 1.0 && file_docs.empty()))
        result.warnings.push_back("document-level pool short of target: best-effort fill");

    result.corpus.shards.push_back(std::move(shard));
    result.stats.stage = "code_mix";
    result.stats.docs_in = repo_docs.size() + file_docs.size();
    result.stats.docs_out = result.corpus.doc_count();
    result.stats.tokens_in = repo_total + file_total;
    result.stats.tokens_out = repo_taken + file_taken;
    result.realized_repo_fraction =
        (repo_taken + file_taken) == 0
            ? 0.0
            : static_cast<double>(repo_taken) / static_cast<double>(repo_taken + file_taken);
    return result;
}

// Repo ingestion JSONL: {"name", "stars", "files": [{"path", "text"}]}.
inline std::vector<Repository> read_repositories(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<Repository> repos;
    std::string line;
    size_t line_no = 0;
    std::unordered_set<std::string> names;
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
        Repository repo;
        try {
            repo.name = j.at("name").get<std::string>();
            if (j.contains("stars")) repo.stars = j["stars"].get<uint64_t>();
            for (const auto& fj : j.at("files")) {
                RepoFile f;
                f.path = fj.at("path").get<std::string>();
                f.text = fj.at("text").get<std::string>();
                f.family = detect_family(f.path);
                validate_repo_path(f.path);
                repo.files.push_back(std::move(f));
            }
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": invalid repository: " + e.what());
        }
        std::unordered_set<std::string_view> seen;
        for (const auto& f : repo.files)
            if (!seen.insert(f.path).second)
                throw DataError("duplicate file path '" + f.path + "' in repository " + repo.name);
        if (!names.insert(repo.name).second)
            throw DataError("duplicate repository name: " + repo.name);
        repos.push_back(std::move(repo));
    }
    return repos;
}

}  // namespace corpuskit
