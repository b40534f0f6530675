// visword: command-line front end over the core library.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "visword/bench.hpp"
#include "visword/encode.hpp"
#include "visword/error.hpp"
#include "visword/eval.hpp"
#include "visword/formats.hpp"
#include "visword/index.hpp"
#include "visword/search.hpp"
#include "visword/stats.hpp"
#include "visword/synth.hpp"

using nlohmann::json;
using namespace visword;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

/// Flag combinations CLI11 cannot express on its own.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> ordinal_names(std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back("q" + std::to_string(i));
    return out;
}

void write_json(const std::string& out, const json& j) {
    const std::string text = j.dump(2) + "\n";
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        write_file_atomic(out, text);
    }
}

void write_text(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        write_file_atomic(out, text);
    }
}

json fit_json(const std::optional<PowerLawFit>& fit) {
    if (!fit) return nullptr;
    return {{"alpha", fit->alpha},
            {"log_amplitude", fit->log_amplitude},
            {"r_squared", fit->r_squared},
            {"first_rank", fit->first_rank},
            {"last_rank", fit->last_rank}};
}

/// Sparse queries plus names. Names come from --query-names, else from the
/// dense query file when one is given, else q0, q1, ...
QuerySet load_queries(const std::string& docs_path, const std::string& names_path,
                      const std::string& dense_path, std::uint32_t index_vocab) {
    QuerySet qs;
    DocSet docs = read_docs(docs_path);
    if (docs.vocab != index_vocab) {
        raise(ErrorCode::vocab_mismatch, "query docs use vocab " + std::to_string(docs.vocab) +
                                             ", index has " + std::to_string(index_vocab));
    }
    qs.sparse = std::move(docs.docs);
    if (!dense_path.empty()) qs.dense = read_dense(dense_path);
    if (!names_path.empty()) {
        qs.names = read_names(names_path);
    } else if (!dense_path.empty()) {
        qs.names = qs.dense.names();
    } else {
        qs.names = ordinal_names(qs.sparse.size());
    }
    if (qs.names.size() != qs.sparse.size()) {
        raise(ErrorCode::shape_mismatch, std::to_string(qs.names.size()) + " query names for " +
                                             std::to_string(qs.sparse.size()) + " query docs");
    }
    return qs;
}

std::vector<std::uint32_t> parse_ks(const std::string& text) {
    std::vector<std::uint32_t> ks;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(item, &used);
        } catch (const std::exception&) {
            throw UsageError("--ks: '" + item + "' is not a positive integer");
        }
        if (used != item.size() || v == 0 || v > UINT32_MAX) {
            throw UsageError("--ks: '" + item + "' is not a positive integer");
        }
        ks.push_back(static_cast<std::uint32_t>(v));
    }
    if (ks.empty()) throw UsageError("--ks: no cutoffs given");
    return ks;
}

// ---- encode ---------------------------------------------------------------

struct EncodeArgs {
    std::string features, weights, out;
    std::uint32_t k_post = 16;
    std::uint32_t k = 0;
};

void run_encode(const EncodeArgs& a) {
    const FeatureFile f = read_features(a.features);
    const SaeEncoderWeights w = read_weights(a.weights);
    if (f.dim != w.dim) {
        raise(ErrorCode::shape_mismatch, "features have D=" + std::to_string(f.dim) +
                                             ", encoder expects D=" + std::to_string(w.dim));
    }
    EncodeConfig cfg;
    cfg.k = a.k != 0 ? a.k : w.k;
    cfg.k_post = a.k_post;
    DocSet out;
    out.vocab = w.vocab;
    out.quant_scale = cfg.quant_scale;
    out.docs = encode_batch(f.values, f.image_count, f.patches, w, cfg);
    write_docs(a.out, out);
}

// ---- build / update ---------------------------------------------------------

struct BuildArgs {
    std::string docs, names, out;
    float k1 = 1.5f;
    float b = 0.75f;
    bool freeze = false;
};

void run_build(const BuildArgs& a) {
    const DocSet docs = read_docs(a.docs);
    const auto names = read_names(a.names);
    auto index = InvertedIndex::build(docs, names, Bm25Params{a.k1, a.b});
    if (a.freeze) index.freeze();
    index.save(a.out);
}

struct UpdateArgs {
    std::string index, insert, names, out;
    std::vector<std::string> remove;
};

void run_update(const UpdateArgs& a) {
    if (a.insert.empty() == a.remove.empty()) {
        throw UsageError("update: give exactly one of --insert or --delete");
    }
    if (!a.insert.empty() && a.names.empty()) throw UsageError("update: --insert needs --names");
    if (a.insert.empty() && !a.names.empty()) throw UsageError("update: --names only applies to --insert");

    auto index = InvertedIndex::load(a.index);
    if (!a.insert.empty()) {
        const DocSet docs = read_docs(a.insert);
        const auto names = read_names(a.names);
        if (docs.vocab != index.vocab()) {
            raise(ErrorCode::vocab_mismatch, "inserted docs use vocab " + std::to_string(docs.vocab) +
                                                 ", index has " + std::to_string(index.vocab()));
        }
        if (names.size() != docs.docs.size()) {
            raise(ErrorCode::shape_mismatch, std::to_string(names.size()) + " names for " +
                                                 std::to_string(docs.docs.size()) + " docs");
        }
        for (std::size_t i = 0; i < names.size(); ++i) index.insert(docs.docs[i], names[i]);
    } else {
        for (const auto& name : a.remove) {
            const auto id = index.find(name);
            if (!id) raise(ErrorCode::not_found, "no document named '" + name + "'");
            index.remove(*id);
        }
    }
    index.save(a.out.empty() ? a.index : a.out);
}

// ---- query / two-stage ------------------------------------------------------

struct QueryArgs {
    std::string index, query_docs, query_names, out;
    std::uint32_t k = 200;
    bool wand = false;
};

void run_query(const QueryArgs& a) {
    const auto index = InvertedIndex::load(a.index);
    const auto qs = load_queries(a.query_docs, a.query_names, "", index.vocab());
    const Method m = a.wand ? Method::wand : Method::sparse;
    write_results(a.out, run_queries(index, nullptr, qs, m, a.k, a.k));
}

struct TwoStageArgs {
    std::string index, dense, query_docs, query_dense, query_names, out;
    std::uint32_t k = 200;
    std::uint32_t final_k = 10;
};

void run_two_stage(const TwoStageArgs& a) {
    if (a.final_k > a.k) throw UsageError("two-stage: --final-k must not exceed --k");
    const auto index = InvertedIndex::load(a.index);
    const auto gallery = read_dense(a.dense);
    const auto qs = load_queries(a.query_docs, a.query_names, a.query_dense, index.vocab());
    write_results(a.out, run_queries(index, &gallery, qs, Method::two_stage, a.k, a.final_k));
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
    std::string results, labels, ks = "1,5,10,20,50,100,200", out;
};

void run_eval(const EvalArgs& a) {
    const auto ks = parse_ks(a.ks);
    const auto results = read_results(a.results);
    const auto split = LabeledSplit::read_csv(a.labels);
    const auto recall = recall_at_k(results, split, ks);
    json r = json::object();
    for (const auto& [k, v] : recall) r["R@" + std::to_string(k)] = v;
    double touched = 0.0, dense = 0.0;
    for (const auto& q : results) {
        touched += static_cast<double>(q.postings_touched);
        dense += static_cast<double>(q.dense_ops);
    }
    const double n = results.empty() ? 1.0 : static_cast<double>(results.size());
    write_json(a.out, {{"queries", results.size()},
                       {"recall", std::move(r)},
                       {"mean_postings_touched", touched / n},
                       {"mean_dense_ops", dense / n}});
}

// ---- stats / cost-model -----------------------------------------------------

struct StatsArgs {
    std::string index, out, plot;
    std::uint32_t min_df = 1;
};

void run_stats(const StatsArgs& a) {
    const auto index = InvertedIndex::load(a.index);
    auto s = compute_stats(index);
    const auto fit = a.min_df == 1 ? s.fit : fit_power_law(s.df_ranked, a.min_df);
    write_json(a.out, {{"n_docs", s.n_docs},
                       {"vocab", s.vocab},
                       {"v_active", s.v_active},
                       {"mean_nnz", s.mean_nnz},
                       {"head_fraction", s.head_fraction},
                       {"discriminative_fraction", s.discriminative_fraction},
                       {"max_df", s.df_ranked.empty() ? 0u : s.df_ranked.front()},
                       {"min_df_fit", a.min_df},
                       {"power_law", fit_json(fit)}});
    if (!a.plot.empty()) {
        std::ostringstream csv;
        csv.precision(9);
        csv << "rank,df,normalized_df\n";
        for (std::size_t r = 0; r < s.df_ranked.size(); ++r) {
            csv << r + 1 << ',' << s.df_ranked[r] << ','
                << static_cast<double>(s.df_ranked[r]) / s.n_docs << '\n';
        }
        write_file_atomic(a.plot, csv.str());
    }
}

struct CostArgs {
    std::uint64_t n = 0;
    std::uint32_t l0 = 16;
    std::uint32_t ds = 18432;
    std::optional<double> vactive;
    double c = 1.0;
    std::uint32_t dim = 1152;
};

void run_cost_model(const CostArgs& a) {
    const double v = a.vactive ? *a.vactive : coupon_collector_vactive(a.n, a.l0, a.ds);
    const double ops = predicted_query_ops({a.n, a.l0, a.ds, v, a.c});
    const auto mem = memory_model(a.dim, a.l0);
    json memory = {{"dim", a.dim},
                   {"dense_bytes", mem.dense_bytes},
                   {"sparse_bytes", mem.sparse_bytes},
                   {"two_stage_bytes", mem.two_stage_bytes},
                   {"compression", mem.degenerate ? json(nullptr) : json(mem.compression)}};
    write_json("-", {{"n_docs", a.n},
                     {"l0", a.l0},
                     {"vocab", a.ds},
                     {"c", a.c},
                     {"v_active", v},
                     {"v_active_source", a.vactive ? "given" : "coupon_collector"},
                     {"predicted_postings_per_query", ops},
                     {"dense_ops_full_scan", static_cast<double>(a.n) * a.dim},
                     {"memory_per_item", std::move(memory)}});
}

// ---- synth / bench ----------------------------------------------------------

struct SynthArgs {
    SyntheticSpec spec;
    std::string dist = "uniform";
    std::string out;
};

void run_synth(SynthArgs a) {
    a.spec.distribution = a.dist == "zipf" ? WordDistribution::zipf : WordDistribution::uniform;
    const auto corpus = generate_synthetic(a.spec);
    write_synthetic(corpus, a.out);
}

struct BenchArgs {
    std::string index, dense, query_docs, query_dense, query_names, out;
    std::vector<std::string> modes{"exhaustive", "wand", "dense", "two-stage"};
    std::uint32_t k = 200;
    std::uint32_t final_k = 10;
    std::uint32_t warmup = 1;
};

void run_bench_cmd(const BenchArgs& a) {
    BenchConfig cfg;
    for (const auto& m : a.modes) {
        try {
            cfg.modes.push_back(parse_method(m));
        } catch (const Error&) {
            throw UsageError("bench: unknown mode '" + m + "'");
        }
    }
    if (a.final_k > a.k) throw UsageError("bench: --final-k must not exceed --k");
    cfg.candidates = a.k;
    cfg.final_k = a.final_k;
    cfg.warmup = a.warmup;
    const auto index = InvertedIndex::load(a.index);
    const auto gallery = read_dense(a.dense);
    const auto qs = load_queries(a.query_docs, a.query_names, a.query_dense, index.vocab());
    write_text(a.out, bench_to_json(run_bench(index, gallery, qs, cfg)));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"visword: sparse visual-word retrieval with BM25 over SAE codes"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "visword 0.1.0");

    EncodeArgs enc;
    auto* c_encode = app.add_subcommand("encode", "Encode patch features into sparse docs (BMVS)");
    c_encode->add_option("--features", enc.features, "Patch features (BMVF)")->required();
    c_encode->add_option("--weights", enc.weights, "SAE encoder weights (BMVW)")->required();
    c_encode->add_option("--k-post", enc.k_post, "Words kept per image after pooling")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    c_encode->add_option("--k", enc.k, "Per-patch sparsity (default: the value stored in the weights)");
    c_encode->add_option("--out", enc.out, "Output sparse docs (BMVS)")->required();

    BuildArgs bld;
    auto* c_build = app.add_subcommand("build", "Build a BM25 index (BMVI) from sparse docs");
    c_build->add_option("--docs", bld.docs, "Sparse docs (BMVS)")->required();
    c_build->add_option("--names", bld.names, "One name per doc, one per line")->required();
    c_build->add_option("--out", bld.out, "Output index (BMVI)")->required();
    c_build->add_option("--k1", bld.k1, "BM25 saturation")->capture_default_str();
    c_build->add_option("--b", bld.b, "BM25 length normalisation")->capture_default_str();
    c_build->add_flag("--freeze", bld.freeze, "Store the index frozen (precomputed weights, no updates)");

    UpdateArgs upd;
    auto* c_update = app.add_subcommand("update", "Insert into or delete from an index");
    c_update->add_option("--index", upd.index, "Index to update (BMVI)")->required();
    auto* o_insert = c_update->add_option("--insert", upd.insert, "Sparse docs to insert (BMVS)");
    c_update->add_option("--names", upd.names, "Names for --insert, one per line");
    auto* o_delete = c_update->add_option("--delete", upd.remove, "Name of a document to delete (repeatable)");
    o_insert->excludes(o_delete);
    c_update->add_option("--out", upd.out, "Write here instead of overwriting --index");

    QueryArgs qry;
    auto* c_query = app.add_subcommand("query", "Sparse BM25 top-K for every query");
    c_query->add_option("--index", qry.index, "Index (BMVI)")->required();
    c_query->add_option("--query-docs", qry.query_docs, "Query sparse docs (BMVS)")->required();
    c_query->add_option("--query-names", qry.query_names, "Query names (default q0, q1, ...)");
    c_query->add_option("--k", qry.k, "Hits per query")->capture_default_str()->check(CLI::PositiveNumber);
    c_query->add_flag("--wand", qry.wand, "Use WAND pruning (same results)");
    c_query->add_option("--out", qry.out, "Output results (JSONL)")->required();

    TwoStageArgs ts;
    auto* c_two = app.add_subcommand("two-stage", "Sparse candidates reranked by dense cosine");
    c_two->add_option("--index", ts.index, "Index (BMVI)")->required();
    c_two->add_option("--dense", ts.dense, "Gallery embeddings (BMVD)")->required();
    c_two->add_option("--query-docs", ts.query_docs, "Query sparse docs (BMVS)")->required();
    c_two->add_option("--query-dense", ts.query_dense, "Query embeddings (BMVD)")->required();
    c_two->add_option("--query-names", ts.query_names, "Query names (default: names in --query-dense)");
    c_two->add_option("--k", ts.k, "Stage-1 candidates")->capture_default_str()->check(CLI::PositiveNumber);
    c_two->add_option("--final-k", ts.final_k, "Hits returned after rerank")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    c_two->add_option("--out", ts.out, "Output results (JSONL)")->required();

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "Recall@K of a results file against labels");
    c_eval->add_option("--results", ev.results, "Results (JSONL)")->required();
    c_eval->add_option("--labels", ev.labels, "name,label CSV")->required();
    c_eval->add_option("--ks", ev.ks, "Comma-separated cutoffs")->capture_default_str();
    c_eval->add_option("--out", ev.out, "Output report (JSON, default stdout)");

    StatsArgs st;
    auto* c_stats = app.add_subcommand("stats", "Corpus statistics and power-law fit of df");
    c_stats->add_option("--index", st.index, "Index (BMVI)")->required();
    c_stats->add_option("--out", st.out, "Output stats (JSON, default stdout)");
    c_stats->add_option("--plot", st.plot, "Also write rank,df,normalized_df CSV");
    c_stats->add_option("--min-df", st.min_df, "Fit only ranks with df >= this")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    CostArgs cm;
    auto* c_cost = app.add_subcommand("cost-model", "Predicted postings per query and memory per item");
    c_cost->add_option("--n", cm.n, "Corpus size N")->required();
    c_cost->add_option("--l0", cm.l0, "Non-zeros per doc")->capture_default_str();
    c_cost->add_option("--ds", cm.ds, "Vocabulary size")->capture_default_str()->check(CLI::PositiveNumber);
    c_cost->add_option("--vactive", cm.vactive, "Active vocabulary (default: coupon-collector estimate)")
        ->check(CLI::PositiveNumber);
    c_cost->add_option("--c", cm.c, "Operations per posting")->capture_default_str()->check(CLI::PositiveNumber);
    c_cost->add_option("--dim", cm.dim, "Dense dimension for the memory model")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    SynthArgs sy;
    auto* c_synth = app.add_subcommand("synth", "Generate a labelled synthetic corpus");
    c_synth->add_option("--out", sy.out, "Output path prefix")->required();
    c_synth->add_option("--n", sy.spec.n_docs, "Gallery size")->capture_default_str()->check(CLI::PositiveNumber);
    c_synth->add_option("--queries", sy.spec.n_queries, "Query count")->capture_default_str();
    c_synth->add_option("--vocab", sy.spec.vocab, "Vocabulary size")->capture_default_str();
    c_synth->add_option("--l0", sy.spec.l0, "Words per doc")->capture_default_str();
    c_synth->add_option("--dist", sy.dist, "Global word distribution")
        ->capture_default_str()
        ->check(CLI::IsMember({"uniform", "zipf"}));
    c_synth->add_option("--alpha", sy.spec.zipf_alpha, "Zipf exponent")->capture_default_str();
    c_synth->add_option("--classes", sy.spec.classes, "Class count (0: no classes)")->capture_default_str();
    c_synth->add_option("--overlap", sy.spec.within_class_overlap, "Share of words drawn from the class pool")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    c_synth->add_option("--class-pool", sy.spec.class_pool, "Words per class pool (0: twice the draws)")
        ->capture_default_str();
    c_synth->add_option("--class-words", sy.spec.class_words, "Class words per doc (overrides --overlap)")
        ->capture_default_str();
    c_synth->add_option("--dense-dim", sy.spec.dense_dim, "Dense embedding dimension")->capture_default_str();
    c_synth->add_option("--noise", sy.spec.dense_noise, "Dense noise std")->capture_default_str();
    c_synth->add_option("--tf-min", sy.spec.tf_min, "Smallest activation")->capture_default_str();
    c_synth->add_option("--tf-max", sy.spec.tf_max, "Largest activation")->capture_default_str();
    c_synth->add_option("--seed", sy.spec.seed, "Random seed")->capture_default_str();

    BenchArgs bn;
    auto* c_bench = app.add_subcommand("bench", "Per-query latency of each retrieval mode");
    c_bench->add_option("--index", bn.index, "Index (BMVI)")->required();
    c_bench->add_option("--dense", bn.dense, "Gallery embeddings (BMVD)")->required();
    c_bench->add_option("--query-docs", bn.query_docs, "Query sparse docs (BMVS)")->required();
    c_bench->add_option("--query-dense", bn.query_dense, "Query embeddings (BMVD)")->required();
    c_bench->add_option("--query-names", bn.query_names, "Query names (default: names in --query-dense)");
    c_bench->add_option("--modes", bn.modes, "exhaustive, wand, dense, two-stage")
        ->delimiter(',')
        ->capture_default_str();
    c_bench->add_option("--k", bn.k, "Sparse K and stage-1 candidates")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    c_bench->add_option("--final-k", bn.final_k, "Hits for dense and two-stage")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    c_bench->add_option("--warmup", bn.warmup, "Untimed passes over the queries")->capture_default_str();
    c_bench->add_option("--out", bn.out, "Output report (JSON, default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsageError;
    }

    try {
        if (*c_encode) run_encode(enc);
        else if (*c_build) run_build(bld);
        else if (*c_update) run_update(upd);
        else if (*c_query) run_query(qry);
        else if (*c_two) run_two_stage(ts);
        else if (*c_eval) run_eval(ev);
        else if (*c_stats) run_stats(st);
        else if (*c_cost) run_cost_model(cm);
        else if (*c_synth) run_synth(sy);
        else if (*c_bench) run_bench_cmd(bn);
    } catch (const UsageError& e) {
        std::cerr << "visword: " << e.what() << "\n";
        return kUsageError;
    } catch (const Error& e) {
        std::cerr << "visword: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "visword: " << e.what() << "\n";
        return kDataError;
    }
    return 0;
}
