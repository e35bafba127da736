// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

// Read-only HTTP facade. Every handler works on an immutable snapshot of
// ServiceData; reload() swaps the snapshot atomically.
//
//   GET /map                      projected documents (MapPoint list)
//   GET /search?doc=ID&k=M        nearest documents to a stored document
//   GET /search?text=Q&k=M        nearest documents to free text
//   GET /feed?since=YYYY-MM-DD    classifier-accepted candidates
//   GET /stats/<report>           analytics table as CSV
//   GET /ui/...                   static explorer assets (when configured)

#include <algorithm>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "litmap/analytics.hpp"
#include "litmap/classify.hpp"
#include "litmap/corpus.hpp"
#include "litmap/dimred.hpp"
#include "litmap/embed.hpp"
#include "litmap/error.hpp"

namespace litmap::service {

struct ServiceData {
    Corpus corpus;
    std::optional<dimred::Projection2D> projection;
    classify::EmbeddingIndex embeddings;
    std::optional<classify::LogRegModel> model;
    std::shared_ptr<const EmbeddingProvider> provider = std::make_shared<HashEmbedder>();
    classify::FilterConfig filter;
};

struct MapPoint {
    std::string doc_id;
    double x = 0.0;
    double y = 0.0;
    std::optional<int> cluster;
    SourceKind source = SourceKind::Other;
    std::optional<int> year;
    std::string title;
};

struct SearchResult {
    std::string doc_id;
    std::string title;
    std::string url;
    double score = 0.0;
};

/// One point per projected document known to the corpus, ordered by id.
inline std::vector<MapPoint> map_points(const ServiceData& data) {
    if (!data.projection) throw Error(ErrorKind::NotReady, "no projection has been computed");
    std::vector<MapPoint> out;
    out.reserve(data.projection->points.size());
    for (const auto& p : data.projection->points) {
        const Document* d = data.corpus.find(p.doc_id);
        if (!d) continue;
        out.push_back({p.doc_id, p.x, p.y, d->cluster, d->source.kind,
                       d->published ? std::optional<int>(d->published->year) : std::nullopt, d->title});
    }
    std::sort(out.begin(), out.end(), [](const MapPoint& a, const MapPoint& b) { return a.doc_id < b.doc_id; });
    return out;
}

/// Exact top-k by cosine over every embedded document except `exclude`;
/// ties broken by document id.
inline std::vector<SearchResult> rank_by_cosine(const ServiceData& data, const EmbeddingVector& query, std::size_t k,
                                                std::string_view exclude = {}) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
    std::vector<std::pair<double, const std::string*>> scored;
    scored.reserve(data.embeddings.size());
    for (const auto& [id, v] : data.embeddings)
        if (id != exclude) scored.emplace_back(cosine_similarity(query, v), &id);
    auto better = [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : *a.second < *b.second; };
    const auto take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
    std::vector<SearchResult> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const Document* d = data.corpus.find(*scored[i].second);
        out.push_back({*scored[i].second, d ? d->title : std::string{}, d ? d->url : std::string{},
                       std::clamp(scored[i].first, -1.0, 1.0)});
    }
    return out;
}

inline std::vector<SearchResult> search_by_doc(const ServiceData& data, std::string_view id, std::size_t k) {
    const auto it = data.embeddings.find(std::string(id));
    if (it == data.embeddings.end()) throw Error(ErrorKind::UnknownDocument, "no embedded document '" + std::string(id) + "'");
    return rank_by_cosine(data, it->second, k, id);
}

inline std::vector<SearchResult> search_by_text(const ServiceData& data, std::string_view query, std::size_t k) {
    if (text::is_blank(query)) throw Error(ErrorKind::EmptyQuery, "search text is empty");
    return rank_by_cosine(data, data.provider->embed(query), k);
}

inline std::vector<classify::ScoredDocument> feed(const ServiceData& data, std::optional<Date> since) {
    if (!data.model) throw Error(ErrorKind::NoModel, "no classifier model is loaded");
    const auto cands = classify::candidates(data.corpus, data.embeddings, since);
    return classify::filter_candidates(*data.model, cands, data.filter);
}

// ---------------------------------------------------------------------------
// Payloads

inline ordered_json to_json(const MapPoint& p) {
    ordered_json j;
    j["doc_id"] = p.doc_id;
    j["x"] = p.x;
    j["y"] = p.y;
    j["cluster"] = p.cluster ? ordered_json(*p.cluster) : ordered_json(nullptr);
    j["source"] = std::string(to_string(p.source));
    j["year"] = p.year ? ordered_json(*p.year) : ordered_json(nullptr);
    j["title"] = p.title;
    return j;
}

inline ordered_json to_json(const SearchResult& r) {
    ordered_json j;
    j["doc_id"] = r.doc_id;
    j["title"] = r.title;
    j["url"] = r.url;
    j["score"] = r.score;
    return j;
}

inline ordered_json to_json(const classify::ScoredDocument& s) {
    ordered_json j;
    j["doc"] = litmap::to_json(s.doc);
    j["score"] = s.score;
    return j;
}

template <class T>
ordered_json to_json_array(const std::vector<T>& items) {
    ordered_json arr = ordered_json::array();
    for (const auto& item : items) arr.push_back(to_json(item));
    return arr;
}

inline int http_status(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NotReady:
        case ErrorKind::NoModel:
        case ErrorKind::Unclustered: return 409;
        case ErrorKind::UnknownDocument:
        case ErrorKind::UnknownReport: return 404;
        case ErrorKind::EmptyQuery:
        case ErrorKind::InvalidArgument:
        case ErrorKind::EmptyInput: return 400;
        case ErrorKind::ProviderUnavailable: return 503;
        default: return 500;
    }
}

class Service {
public:
    explicit Service(std::shared_ptr<const ServiceData> data) : data_(std::move(data)) {
        if (!data_) throw Error(ErrorKind::InvalidArgument, "service data is null");
    }

    std::shared_ptr<const ServiceData> snapshot() const {
        std::lock_guard lock(mutex_);
        return data_;
    }

    void reload(std::shared_ptr<const ServiceData> next) {
        if (!next) throw Error(ErrorKind::InvalidArgument, "service data is null");
        std::lock_guard lock(mutex_);
        data_ = std::move(next);
    }

    /// Registers every endpoint on `server`. `ui_dir`, when non-empty, is
    /// served under /ui.
    void mount(httplib::Server& server, const std::string& ui_dir = {}) const {
        server.Get("/map", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] { send_json(res, to_json_array(map_points(*snapshot()))); });
        });
        server.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto data = snapshot();
                const std::size_t k = parse_k(req);
                const bool by_doc = req.has_param("doc");
                const bool by_text = req.has_param("text");
                if (by_doc && by_text) throw Error(ErrorKind::InvalidArgument, "give either doc or text, not both");
                if (by_doc) return send_json(res, to_json_array(search_by_doc(*data, req.get_param_value("doc"), k)));
                if (by_text) return send_json(res, to_json_array(search_by_text(*data, req.get_param_value("text"), k)));
                throw Error(ErrorKind::EmptyQuery, "missing doc or text parameter");
            });
        });
        server.Get("/feed", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::optional<Date> since;
                if (req.has_param("since")) {
                    since = Date::parse(req.get_param_value("since"));
                    if (!since) throw Error(ErrorKind::InvalidArgument, "since must be YYYY-MM-DD");
                }
                send_json(res, to_json_array(feed(*snapshot(), since)));
            });
        });
        server.Get(R"(/stats/([A-Za-z0-9_]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto table = analytics::report(snapshot()->corpus, req.matches[1].str());
                res.set_content(analytics::to_csv(table), "text/csv");
            });
        });
        if (!ui_dir.empty()) server.set_mount_point("/ui", ui_dir);
    }

private:
    static std::size_t parse_k(const httplib::Request& req) {
        if (!req.has_param("k")) return 10;
        const auto s = req.get_param_value("k");
        if (s.empty() || s.size() > 9 || s.find_first_not_of("0123456789") != std::string::npos)
            throw Error(ErrorKind::InvalidArgument, "k must be a positive integer");
        const auto k = std::stoul(s);
        if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
        return k;
    }

    static void send_json(httplib::Response& res, const ordered_json& body) { res.set_content(body.dump(), "application/json"); }

    template <class Fn>
    static void guarded(httplib::Response& res, Fn&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            res.status = http_status(e.kind());
            ordered_json j;
            j["error"] = std::string(to_string(e.kind()));
            j["message"] = e.what();
            send_json(res, j);
        }
    }

    mutable std::mutex mutex_;
    std::shared_ptr<const ServiceData> data_;
};

}  // namespace litmap::service
