#include "visword/eval.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

#include "visword/error.hpp"
#include "visword/formats.hpp"
#include "visword/parallel.hpp"

namespace visword {

using nlohmann::json;

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

}  // namespace

LabeledSplit LabeledSplit::parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::unordered_map<std::string, std::string> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            raise(ErrorCode::invalid_argument, "labels line " + std::to_string(lineno) +
                                                   " is not 'name,label'");
        }
        std::string name = trim(line.substr(0, comma));
        std::string label = trim(line.substr(comma + 1));
        if (lineno == 1 && name == "name" && label == "label") continue;
        if (name.empty()) {
            raise(ErrorCode::invalid_argument, "labels line " + std::to_string(lineno) + " has no name");
        }
        if (!labels.emplace(std::move(name), std::move(label)).second) {
            raise(ErrorCode::duplicate_name, "labels line " + std::to_string(lineno));
        }
    }
    return LabeledSplit(std::move(labels));
}

LabeledSplit LabeledSplit::read_csv(const std::filesystem::path& path) {
    return parse_csv(read_file(path));
}

const std::string* LabeledSplit::label(const std::string& name) const {
    auto it = labels_.find(name);
    return it == labels_.end() ? nullptr : &it->second;
}

std::string to_jsonl(const std::vector<QueryResult>& results) {
    std::string out;
    for (const auto& r : results) {
        json hits = json::array();
        for (const auto& h : r.hits) hits.push_back({{"name", h.name}, {"score", h.score}});
        json line = {{"query", r.query},
                     {"hits", std::move(hits)},
                     {"postings_touched", r.postings_touched},
                     {"dense_ops", r.dense_ops}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<QueryResult> parse_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::vector<QueryResult> results;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            const json j = json::parse(line);
            QueryResult r;
            r.query = j.at("query").get<std::string>();
            for (const auto& h : j.at("hits")) {
                ScoredHit hit;
                hit.name = h.at("name").get<std::string>();
                hit.score = h.at("score").get<double>();
                r.hits.push_back(std::move(hit));
            }
            r.postings_touched = j.value("postings_touched", std::uint64_t{0});
            r.dense_ops = j.value("dense_ops", std::uint64_t{0});
            results.push_back(std::move(r));
        } catch (const json::exception& e) {
            raise(ErrorCode::invalid_argument,
                  "results line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return results;
}

void write_results(const std::filesystem::path& path, const std::vector<QueryResult>& results) {
    write_file_atomic(path, to_jsonl(results));
}

std::vector<QueryResult> read_results(const std::filesystem::path& path) {
    return parse_jsonl(read_file(path));
}

std::map<std::uint32_t, double> recall_at_k(const std::vector<QueryResult>& results,
                                            const LabeledSplit& split,
                                            const std::vector<std::uint32_t>& ks) {
    std::map<std::uint32_t, double> recall;
    for (auto k : ks) {
        if (k == 0) raise(ErrorCode::invalid_argument, "recall cutoffs must be positive");
        recall[k] = 0.0;
    }
    if (results.empty()) return recall;

    for (const auto& r : results) {
        const std::string* qlabel = split.label(r.query);
        if (!qlabel) raise(ErrorCode::not_found, "query '" + r.query + "' has no label");

        // 1-based rank of the first relevant hit, 0 when none.
        std::size_t first = 0;
        std::size_t rank = 0;
        for (const auto& h : r.hits) {
            if (h.name == r.query) continue;
            ++rank;
            const std::string* hlabel = split.label(h.name);
            if (hlabel && *hlabel == *qlabel) {
                first = rank;
                break;
            }
        }
        if (first == 0) continue;
        for (auto& [k, value] : recall) {
            if (first <= k) value += 1.0;
        }
    }
    for (auto& [k, value] : recall) value /= static_cast<double>(results.size());
    return recall;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::sparse: return "sparse";
        case Method::wand: return "wand";
        case Method::dense: return "dense";
        case Method::two_stage: return "two_stage";
    }
    return "unknown";
}

Method parse_method(const std::string& s) {
    if (s == "sparse" || s == "exhaustive") return Method::sparse;
    if (s == "wand") return Method::wand;
    if (s == "dense") return Method::dense;
    if (s == "two_stage" || s == "two-stage") return Method::two_stage;
    raise(ErrorCode::invalid_argument, "unknown method '" + s + "'");
}

std::vector<QueryResult> run_queries(const InvertedIndex& index, const DenseMatrix* gallery,
                                     const QuerySet& queries, Method method,
                                     std::uint32_t candidates, std::uint32_t final_k) {
    const bool needs_dense = method == Method::dense || method == Method::two_stage;
    if (needs_dense && gallery == nullptr) {
        raise(ErrorCode::invalid_argument, to_string(method) + " needs a dense gallery");
    }
    const bool needs_sparse = method != Method::dense;
    if (needs_sparse && queries.sparse.size() != queries.names.size()) {
        raise(ErrorCode::shape_mismatch, "query names and sparse docs differ in count");
    }

    std::vector<QueryResult> out(queries.names.size());
    parallel_for(out.size(), [&](std::size_t i) {
        const std::string& name = queries.names[i];
        std::span<const float> qdense;
        if (needs_dense) {
            const auto row = queries.dense.find(name);
            if (!row) raise(ErrorCode::not_found, "query '" + name + "' has no dense embedding");
            qdense = queries.dense.row(*row);
        }
        SearchResult r;
        switch (method) {
            case Method::sparse: r = query_topk(index, queries.sparse[i], candidates); break;
            case Method::wand: r = wand_topk(index, queries.sparse[i], candidates); break;
            case Method::dense: r = dense_topk(*gallery, qdense, candidates); break;
            case Method::two_stage:
                r = two_stage(index, *gallery, queries.sparse[i], qdense, candidates, final_k);
                break;
        }
        out[i] = {name, std::move(r.hits), r.postings_touched, r.dense_ops};
    });
    return out;
}

BenchmarkReport run_benchmark(const InvertedIndex& index, const DenseMatrix& gallery,
                              const QuerySet& queries, const LabeledSplit& split, Method method,
                              std::uint32_t candidates, const std::vector<std::uint32_t>& ks) {
    const auto results = run_queries(index, &gallery, queries, method, candidates, candidates);
    BenchmarkReport report;
    report.method = method;
    report.candidates = candidates;
    report.queries = static_cast<std::uint32_t>(results.size());
    report.recall = recall_at_k(results, split, ks);
    for (const auto& r : results) {
        report.mean_postings_touched += static_cast<double>(r.postings_touched);
        report.mean_dense_ops += static_cast<double>(r.dense_ops);
    }
    if (!results.empty()) {
        report.mean_postings_touched /= static_cast<double>(results.size());
        report.mean_dense_ops /= static_cast<double>(results.size());
    }
    return report;
}

std::string report_to_json(const std::vector<BenchmarkReport>& reports) {
    json out = json::array();
    for (const auto& r : reports) {
        json recall = json::object();
        for (const auto& [k, v] : r.recall) recall["R@" + std::to_string(k)] = v;
        out.push_back({{"method", to_string(r.method)},
                       {"candidates", r.candidates},
                       {"queries", r.queries},
                       {"recall", std::move(recall)},
                       {"mean_postings_touched", r.mean_postings_touched},
                       {"mean_dense_ops", r.mean_dense_ops}});
    }
    return out.dump(2) + "\n";
}

}  // namespace visword
