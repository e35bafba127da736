// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

// Command-line front end. Every subcommand reads and writes files under
// --data (default "."):
//
//   corpus.jsonl      documents
//   embeddings.jsonl  one vector per embedded document
//   projection.jsonl  2D coordinates
//   model.txt         relevance classifier
//   elbow.csv         k-means inertia per k

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "litmap/litmap.hpp"

namespace fs = std::filesystem;
using namespace litmap;

namespace {

struct Paths {
    std::string data = ".";

    std::string corpus() const { return (fs::path(data) / "corpus.jsonl").string(); }
    std::string embeddings() const { return (fs::path(data) / "embeddings.jsonl").string(); }
    std::string projection() const { return (fs::path(data) / "projection.jsonl").string(); }
    std::string model() const { return (fs::path(data) / "model.txt").string(); }
    std::string elbow() const { return (fs::path(data) / "elbow.csv").string(); }
};

Corpus load_or_empty(const std::string& path) { return fs::exists(path) ? load(path) : Corpus{}; }

std::vector<EmbeddingRecord> embeddings_or_empty(const std::string& path) {
    return fs::exists(path) ? load_embeddings(path) : std::vector<EmbeddingRecord>{};
}

std::optional<Date> parse_date_option(const std::string& s, const char* flag) {
    if (s.empty()) return std::nullopt;
    auto d = Date::parse(s);
    if (!d) throw Error(ErrorKind::InvalidArgument, std::string(flag) + " expects YYYY-MM-DD, got '" + s + "'");
    return d;
}

std::shared_ptr<const EmbeddingProvider> make_provider(const std::string& kind, const std::string& endpoint, int in_flight) {
    if (kind == "hash") return std::make_shared<HashEmbedder>();
    if (kind == "remote") return std::make_shared<RemoteEmbedder>(endpoint, in_flight);
    throw Error(ErrorKind::InvalidArgument, "unknown provider '" + kind + "' (hash or remote)");
}

// Merges new documents into the stored corpus and collapses cross-posts.
void merge_into_corpus(const Paths& paths, const std::vector<Document>& docs) {
    Corpus corpus = load_or_empty(paths.corpus());
    const auto before = corpus.size();
    for (const auto& d : docs) corpus.upsert(d);
    const auto merged = deduplicate(corpus);
    save(merged, paths.corpus());
    std::cerr << docs.size() << " records read, corpus " << before << " -> " << merged.size() << " documents\n";
}

std::vector<std::string> ids_of(const std::vector<EmbeddingRecord>& recs) {
    std::vector<std::string> ids;
    ids.reserve(recs.size());
    for (const auto& r : recs) ids.push_back(r.doc_id);
    return ids;
}

// Records for documents still in the corpus, in record order.
std::vector<EmbeddingRecord> current_embeddings(const Paths& paths, const Corpus& corpus) {
    std::vector<EmbeddingRecord> recs;
    for (auto& r : embeddings_or_empty(paths.embeddings()))
        if (corpus.contains(r.doc_id)) recs.push_back(std::move(r));
    if (recs.empty()) throw Error(ErrorKind::NotReady, "no embeddings; run 'embed' first");
    return recs;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error(ErrorKind::IoFailure, "write to '" + path + "' failed");
}

httplib::Server* g_server = nullptr;

extern "C" void stop_server(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"litmap: build, analyze and serve a map of a research literature"};
    app.require_subcommand(1);
    Paths paths;
    app.add_option("--data", paths.data, "Directory holding the pipeline files")->capture_default_str();

    // ingest ----------------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "Add documents to the corpus");
    ingest->require_subcommand(1);

    auto* arxiv = ingest->add_subcommand("arxiv", "Harvest a preprint-archive category listing");
    ingest::IngestConfig icfg;
    std::string from, to, label = "unlabeled";
    long delay_ms = icfg.polite_delay.count();
    std::size_t max_pages = 0;
    arxiv->add_option("--category", icfg.category)->capture_default_str();
    arxiv->add_option("--from", from, "First submission date, YYYY-MM-DD");
    arxiv->add_option("--to", to, "Last submission date, YYYY-MM-DD");
    arxiv->add_option("--label", label, "level0, level1 or unlabeled")->capture_default_str();
    arxiv->add_option("--page-size", icfg.page_size)->capture_default_str();
    arxiv->add_option("--delay-ms", delay_ms, "Pause between requests")->capture_default_str();
    arxiv->add_option("--max-pages", max_pages, "Stop after this many pages (0 = no limit)");
    arxiv->add_option("--base-url", icfg.base_url)->capture_default_str();

    auto* forum = ingest->add_subcommand("forum", "Read a forum export file");
    std::string forum_file;
    forum->add_option("--file", forum_file, "Line-delimited export")->required();

    // embed -----------------------------------------------------------------
    auto* embed = app.add_subcommand("embed", "Embed every document");
    std::string provider_kind = "hash", endpoint;
    int in_flight = 4;
    std::size_t threads = default_threads();
    embed->add_option("--provider", provider_kind, "hash or remote")->capture_default_str();
    embed->add_option("--endpoint", endpoint, "Remote embedding service URL");
    embed->add_option("--max-in-flight", in_flight, "Concurrent remote requests")->capture_default_str();
    embed->add_option("--threads", threads)->capture_default_str();

    // project ---------------------------------------------------------------
    auto* project = app.add_subcommand("project", "Compute the 2D map");
    dimred::DimRedConfig dcfg;
    project->add_option("--n-neighbors", dcfg.n_neighbors)->capture_default_str();
    project->add_option("--epochs", dcfg.n_epochs)->capture_default_str();
    project->add_option("--min-dist", dcfg.min_dist)->capture_default_str();
    project->add_option("--seed", dcfg.seed)->capture_default_str();

    // cluster ---------------------------------------------------------------
    auto* cluster = app.add_subcommand("cluster", "k-means on the embeddings; writes labels and the elbow scan");
    std::size_t k = 5, restarts = 10, elbow_max = 10;
    std::uint64_t cluster_seed = 0;
    cluster->add_option("--k", k)->capture_default_str();
    cluster->add_option("--seed", cluster_seed)->capture_default_str();
    cluster->add_option("--restarts", restarts, "Fits per k; the lowest inertia wins")->capture_default_str();
    cluster->add_option("--elbow-max", elbow_max, "Largest k in the elbow scan (0 skips it)")->capture_default_str();

    // analyze ---------------------------------------------------------------
    auto* analyze = app.add_subcommand("analyze", "Print an analytics table as CSV");
    std::string report_name, report_out;
    analytics::ReportOptions ropt;
    analyze->add_option("--report", report_name)->required()->check(CLI::IsMember(analytics::report_names()));
    analyze->add_option("--top", ropt.top_m, "Rows per cluster for top_authors_by_cluster")->capture_default_str();
    analyze->add_option("--words", ropt.max_words, "Rows per cluster for word_frequencies")->capture_default_str();
    analyze->add_option("--stop", ropt.extra_stops, "Extra stop words");
    analyze->add_option("--out", report_out, "Write to a file instead of stdout");

    // train -----------------------------------------------------------------
    auto* train = app.add_subcommand("train", "Fit the relevance classifier on level0/level1 documents");
    classify::SplitConfig scfg;
    classify::FitOptions fopt;
    train->add_option("--split", scfg.train_fraction, "Training fraction")->capture_default_str();
    train->add_option("--seed", scfg.seed)->capture_default_str();
    train->add_option("--max-iters", fopt.max_iters)->capture_default_str();
    train->add_option("--lr", fopt.learning_rate)->capture_default_str();
    train->add_option("--l2", fopt.l2)->capture_default_str();

    // filter ----------------------------------------------------------------
    auto* filter = app.add_subcommand("filter", "Score unlabeled documents and print those above the threshold");
    classify::FilterConfig filter_cfg;
    std::string since;
    bool inclusive = false;
    filter->add_option("--threshold", filter_cfg.threshold)->capture_default_str();
    filter->add_option("--since", since, "Only documents published on or after YYYY-MM-DD");
    filter->add_flag("--inclusive", inclusive, "Accept scores equal to the threshold");

    // serve -----------------------------------------------------------------
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    int port = 8080;
    std::string host = "127.0.0.1", corpus_path, model_path, emb_path, proj_path, ui_dir;
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--corpus", corpus_path, "Defaults to <data>/corpus.jsonl");
    serve->add_option("--model", model_path, "Defaults to <data>/model.txt");
    serve->add_option("--embeddings", emb_path, "Defaults to <data>/embeddings.jsonl");
    serve->add_option("--projection", proj_path, "Defaults to <data>/projection.jsonl");
    serve->add_option("--ui-dir", ui_dir, "Static explorer assets served under /ui");
    serve->add_option("--provider", provider_kind, "Query embedder: hash or remote")->capture_default_str();
    serve->add_option("--endpoint", endpoint, "Remote embedding service URL");
    serve->add_option("--threshold", filter_cfg.threshold, "Feed threshold")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (arxiv->parsed()) {
            icfg.from = parse_date_option(from, "--from");
            icfg.to = parse_date_option(to, "--to");
            icfg.polite_delay = std::chrono::milliseconds(delay_ms);
            const auto lab = parse_label(label);
            if (!lab) throw Error(ErrorKind::InvalidArgument, "--label must be level0, level1 or unlabeled");
            ingest::ArchiveClient client(icfg);
            const auto records = client.harvest(max_pages ? std::optional(max_pages) : std::nullopt,
                                                [](std::size_t offset, std::size_t n) {
                                                    std::cerr << "page at " << offset << ": " << n << " entries\n";
                                                });
            std::vector<Document> docs;
            for (const auto& r : records) docs.push_back(ingest::to_document(r, *lab));
            merge_into_corpus(paths, docs);
        } else if (forum->parsed()) {
            merge_into_corpus(paths, ingest::ingest_forum_export(forum_file));
        } else if (embed->parsed()) {
            const Corpus corpus = load(paths.corpus());
            const auto provider = make_provider(provider_kind, endpoint, in_flight);
            EmbeddingCache cache;
            fill_cache(cache, embeddings_or_empty(paths.embeddings()));
            const auto res = embed_corpus(corpus, *provider, cache, threads);
            save_embeddings(res.records, paths.embeddings());
            std::cerr << res.records.size() << " embedded (" << res.cache_hits << " cached), " << res.skipped.size()
                      << " without text\n";
            for (const auto& id : res.skipped) std::cerr << "  skipped " << id << '\n';
        } else if (project->parsed()) {
            if (dcfg.min_dist != 0.1) dcfg.refit_curve();
            const Corpus corpus = load(paths.corpus());
            const auto recs = current_embeddings(paths, corpus);
            const auto p = dimred::project(ids_of(recs), to_matrix(recs), dcfg);
            for (const auto& w : p.warnings) std::cerr << "warning: " << w << '\n';
            dimred::save_projection(p, paths.projection());
            std::cerr << p.points.size() << " points projected\n";
        } else if (cluster->parsed()) {
            Corpus corpus = load(paths.corpus());
            const auto recs = current_embeddings(paths, corpus);
            const auto x = to_matrix(recs);
            const auto model = cluster::kmeans_best_of(x, k, cluster_seed, restarts);
            corpus.clear_clusters();
            for (std::size_t i = 0; i < recs.size(); ++i) corpus.set_cluster(recs[i].doc_id, model.labels[i]);
            save(corpus, paths.corpus());
            std::cerr << "k=" << k << " inertia=" << model.inertia << " iterations=" << model.iterations << '\n';
            if (recs.size() < corpus.size())
                std::cerr << "warning: " << corpus.size() - recs.size() << " documents have no embedding and no cluster\n";
            if (elbow_max > 0) {
                std::vector<std::size_t> ks;
                for (std::size_t kk = 1; kk <= std::min(elbow_max, x.rows()); ++kk) ks.push_back(kk);
                const auto scan = cluster::elbow_scan(x, ks, restarts, cluster_seed);
                analytics::Table t{{"k", "inertia"}, {}};
                for (const auto& p : scan) t.rows.push_back({std::to_string(p.k), analytics::format_number(p.inertia)});
                write_text(paths.elbow(), analytics::to_csv(t));
                if (scan.size() >= 2) std::cerr << "elbow suggests k=" << cluster::elbow_k(scan) << '\n';
            }
        } else if (analyze->parsed()) {
            const auto csv = analytics::to_csv(analytics::report(load(paths.corpus()), report_name, ropt));
            if (report_out.empty()) std::cout << csv;
            else write_text(report_out, csv);
        } else if (train->parsed()) {
            const Corpus corpus = load(paths.corpus());
            const auto emb = classify::index_embeddings(embeddings_or_empty(paths.embeddings()));
            const auto [set, ids] = classify::labeled_set(corpus, emb);
            const auto sp = classify::split(set, scfg);
            const auto model = classify::fit_logreg(sp.train, fopt);
            classify::save_model(model, paths.model());
            const auto rep = classify::evaluate(model, sp.test);
            std::cout << "train " << sp.train.size() << " (" << sp.train.positives() << " level0), test " << sp.test.size()
                      << " (" << sp.test.positives() << " level0)\n"
                      << "iterations " << model.iterations << ", final loss " << model.final_loss << '\n'
                      << "test AUC " << rep.auc << '\n';
            if (model.step_halvings) std::cerr << "warning: step size halved " << model.step_halvings << " times\n";
            for (const auto& h : rep.histograms) {
                std::cout << h.name << " mean " << h.mean << " bins";
                for (auto b : h.bins) std::cout << ' ' << b;
                std::cout << '\n';
            }
        } else if (filter->parsed()) {
            filter_cfg.strict = !inclusive;
            const Corpus corpus = load(paths.corpus());
            const auto model = classify::load_model(paths.model());
            const auto emb = classify::index_embeddings(embeddings_or_empty(paths.embeddings()));
            const auto cands = classify::candidates(corpus, emb, parse_date_option(since, "--since"));
            for (const auto& s : classify::filter_candidates(model, cands, filter_cfg))
                std::cout << service::to_json(s).dump() << '\n';
        } else if (serve->parsed()) {
            auto data = std::make_shared<service::ServiceData>();
            data->corpus = load(corpus_path.empty() ? paths.corpus() : corpus_path);
            const auto ep = emb_path.empty() ? paths.embeddings() : emb_path;
            if (fs::exists(ep)) data->embeddings = classify::index_embeddings(load_embeddings(ep));
            const auto pp = proj_path.empty() ? paths.projection() : proj_path;
            if (fs::exists(pp)) data->projection = dimred::load_projection(pp);
            const auto mp = model_path.empty() ? paths.model() : model_path;
            try {
                data->model = classify::load_model(mp);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoModel) throw;
                std::cerr << "warning: " << e.what() << "; /feed answers 409\n";
            }
            data->provider = make_provider(provider_kind, endpoint, in_flight);
            data->filter = filter_cfg;
            data->filter.validate();

            service::Service svc(std::move(data));
            httplib::Server server;
            svc.mount(server, ui_dir);
            g_server = &server;
            std::signal(SIGINT, stop_server);
            std::signal(SIGTERM, stop_server);
            std::cerr << "listening on http://" << host << ':' << port << '\n';
            if (!server.listen(host, port)) throw Error(ErrorKind::IoFailure, "cannot listen on " + host + ":" + std::to_string(port));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what();
        if (e.location()) std::cerr << " (at " << *e.location() << ')';
        std::cerr << '\n';
        return 1;
    }
    return 0;
}
