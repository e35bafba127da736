// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "litmap/date.hpp"
#include "litmap/error.hpp"
#include "litmap/text.hpp"

namespace litmap {

enum class SourceKind { Forum, Preprint, Other };

constexpr std::string_view to_string(SourceKind s) noexcept {
    switch (s) {
        case SourceKind::Forum: return "forum";
        case SourceKind::Preprint: return "preprint";
        case SourceKind::Other: return "other";
    }
    return "other";
}

inline std::optional<SourceKind> parse_source(std::string_view s) noexcept {
    if (s == "forum") return SourceKind::Forum;
    if (s == "preprint") return SourceKind::Preprint;
    if (s == "other") return SourceKind::Other;
    return std::nullopt;
}

struct SourceTag {
    SourceKind kind = SourceKind::Other;
    std::string origin;  // free-form, e.g. "arxiv" or "alignmentforum"

    bool operator==(const SourceTag&) const = default;
};

/// level0 = relevant (positive class), level1 = cited-by-relevant (negative class).
enum class Label { Level0, Level1, Unlabeled };

constexpr std::string_view to_string(Label l) noexcept {
    switch (l) {
        case Label::Level0: return "level0";
        case Label::Level1: return "level1";
        case Label::Unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

inline std::optional<Label> parse_label(std::string_view s) noexcept {
    if (s == "level0") return Label::Level0;
    if (s == "level1") return Label::Level1;
    if (s == "unlabeled") return Label::Unlabeled;
    return std::nullopt;
}

struct Document {
    std::string id;
    SourceTag source;
    std::string title;
    std::vector<std::string> authors;
    std::optional<Date> published;
    std::string abstract;
    std::string body;
    std::string url;
    Label label = Label::Unlabeled;
    std::optional<int> cluster;

    bool operator==(const Document&) const = default;
};

/// Throws on violated Document invariants. Title emptiness is reported as
/// EmptyTitle, everything else as InvalidArgument.
inline void validate(const Document& doc) {
    if (text::is_blank(doc.title)) throw Error(ErrorKind::EmptyTitle, "document '" + doc.id + "' has a blank title");
    if (doc.id.empty()) throw Error(ErrorKind::InvalidArgument, "document id is empty");
    if (doc.label != Label::Unlabeled && doc.source.kind != SourceKind::Preprint)
        throw Error(ErrorKind::InvalidArgument, "document '" + doc.id + "': level labels apply to preprints only");
    if (doc.cluster && *doc.cluster < 0)
        throw Error(ErrorKind::InvalidArgument, "document '" + doc.id + "': negative cluster");
}

/// Ordered, id-unique document collection. Iteration order is insertion
/// order; replacing a document keeps its position.
class Corpus {
public:
    Corpus() = default;

    const std::vector<Document>& documents() const noexcept { return docs_; }
    std::size_t size() const noexcept { return docs_.size(); }
    bool empty() const noexcept { return docs_.empty(); }
    std::uint64_t version() const noexcept { return version_; }

    auto begin() const noexcept { return docs_.begin(); }
    auto end() const noexcept { return docs_.end(); }

    const Document* find(std::string_view id) const {
        const auto it = index_.find(std::string(id));
        return it == index_.end() ? nullptr : &docs_[it->second];
    }

    bool contains(std::string_view id) const { return find(id) != nullptr; }

    void upsert(Document doc) {
        validate(doc);
        if (const auto it = index_.find(doc.id); it != index_.end()) {
            docs_[it->second] = std::move(doc);
        } else {
            index_.emplace(doc.id, docs_.size());
            docs_.push_back(std::move(doc));
        }
        ++version_;
    }

    void set_cluster(std::string_view id, std::optional<int> cluster) {
        const auto it = index_.find(std::string(id));
        if (it == index_.end()) throw Error(ErrorKind::UnknownDocument, std::string(id));
        docs_[it->second].cluster = cluster;
        ++version_;
    }

    void clear_clusters() {
        for (auto& d : docs_) d.cluster.reset();
        ++version_;
    }

    /// Equality is over documents only; the version counter is in-memory state.
    friend bool operator==(const Corpus& a, const Corpus& b) { return a.docs_ == b.docs_; }

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> index_;
    std::uint64_t version_ = 0;
};

inline Corpus upsert_document(Corpus corpus, Document doc) {
    corpus.upsert(std::move(doc));
    return corpus;
}

inline std::string dedup_key(const Document& doc) {
    const std::string author = doc.authors.empty() ? std::string{} : text::lowercase(text::collapse_whitespace(doc.authors.front()));
    return text::lowercase(text::collapse_whitespace(doc.title)) + '\x1f' + author;
}

/// Merges cross-posted records sharing normalized title and first author.
/// The earliest-published record survives (undated records rank last, ties go
/// to corpus order) and collects the other records' source tags in its origin
/// notes. Singleton records are untouched.
inline Corpus deduplicate(const Corpus& corpus) {
    const auto& docs = corpus.documents();
    std::unordered_map<std::string, std::vector<std::size_t>> groups;
    std::vector<std::string> keys;
    keys.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        keys.push_back(dedup_key(docs[i]));
        groups[keys.back()].push_back(i);
    }

    auto earlier = [&](std::size_t a, std::size_t b) {
        const auto& da = docs[a].published;
        const auto& db = docs[b].published;
        if (da && db && *da != *db) return *da < *db;
        if (da.has_value() != db.has_value()) return da.has_value();
        return a < b;
    };

    Corpus out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto& members = groups[keys[i]];
        if (members.front() != i) continue;  // emitted at the group's first position
        if (members.size() == 1) {
            out.upsert(docs[i]);
            continue;
        }
        const std::size_t winner = *std::min_element(members.begin(), members.end(), earlier);
        Document merged = docs[winner];
        std::vector<std::string> notes;
        auto add_note = [&](std::string note) {
            if (!note.empty() && std::find(notes.begin(), notes.end(), note) == notes.end()) notes.push_back(std::move(note));
        };
        add_note(merged.source.origin);
        for (std::size_t m : members) {
            if (m == winner) continue;
            add_note(std::string(to_string(docs[m].source.kind)) + ":" + docs[m].source.origin);
        }
        merged.source.origin = text::join(notes, "; ");
        out.upsert(std::move(merged));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Line-delimited persistence. Field order is fixed for byte-stable output.

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const Document& d) {
    ordered_json j;
    j["id"] = d.id;
    j["source"] = std::string(to_string(d.source.kind));
    j["origin"] = d.source.origin;
    j["title"] = d.title;
    j["authors"] = d.authors;
    j["published"] = d.published ? ordered_json(d.published->iso()) : ordered_json(nullptr);
    j["abstract"] = d.abstract;
    j["body"] = d.body;
    j["url"] = d.url;
    j["label"] = std::string(to_string(d.label));
    j["cluster"] = d.cluster ? ordered_json(*d.cluster) : ordered_json(nullptr);
    return j;
}

namespace detail {

template <class Json>
const Json& require(const Json& j, const char* key, std::size_t line) {
    if (!j.contains(key)) throw Error(ErrorKind::MalformedRecord, std::string("missing field '") + key + "'", line);
    return j.at(key);
}

template <class Json>
std::string require_string(const Json& j, const char* key, std::size_t line) {
    const auto& v = require(j, key, line);
    if (!v.is_string()) throw Error(ErrorKind::MalformedRecord, std::string("field '") + key + "' is not a string", line);
    return v.template get<std::string>();
}

}  // namespace detail

/// Parses one record line. `line` is only used for error locations.
inline Document document_from_json(const ordered_json& j, std::size_t line) {
    using detail::require;
    using detail::require_string;
    if (!j.is_object()) throw Error(ErrorKind::MalformedRecord, "record is not an object", line);
    Document d;
    d.id = require_string(j, "id", line);
    const auto source = parse_source(require_string(j, "source", line));
    if (!source) throw Error(ErrorKind::MalformedRecord, "unknown source tag", line);
    d.source = {*source, require_string(j, "origin", line)};
    d.title = require_string(j, "title", line);
    const auto& authors = require(j, "authors", line);
    if (!authors.is_array()) throw Error(ErrorKind::MalformedRecord, "authors is not an array", line);
    for (const auto& a : authors) {
        if (!a.is_string()) throw Error(ErrorKind::MalformedRecord, "author is not a string", line);
        d.authors.push_back(a.get<std::string>());
    }
    const auto& published = require(j, "published", line);
    if (!published.is_null()) {
        if (!published.is_string()) throw Error(ErrorKind::MalformedRecord, "published is not a string", line);
        d.published = Date::parse(published.get<std::string>());
        if (!d.published) throw Error(ErrorKind::MalformedRecord, "bad published date", line);
    }
    d.abstract = require_string(j, "abstract", line);
    d.body = require_string(j, "body", line);
    d.url = require_string(j, "url", line);
    const auto label = parse_label(require_string(j, "label", line));
    if (!label) throw Error(ErrorKind::MalformedRecord, "unknown label", line);
    d.label = *label;
    const auto& cluster = require(j, "cluster", line);
    if (!cluster.is_null()) {
        if (!cluster.is_number_integer()) throw Error(ErrorKind::MalformedRecord, "cluster is not an integer", line);
        d.cluster = cluster.get<int>();
    }
    return d;
}

inline void save(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open '" + path + "' for writing");
    for (const auto& d : corpus) out << to_json(d).dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorKind::IoFailure, "write to '" + path + "' failed");
}

/// Calls `fn(json, line_number)` for each non-blank line of a record file.
template <class Fn>
void for_each_record(const std::string& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::is_blank(line)) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::MalformedRecord, e.what(), lineno);
        }
        fn(j, lineno);
    }
    if (in.bad()) throw Error(ErrorKind::IoFailure, "read from '" + path + "' failed");
}

inline Corpus load(const std::string& path) {
    Corpus corpus;
    for_each_record(path, [&](const ordered_json& j, std::size_t line) {
        Document d = document_from_json(j, line);
        if (corpus.contains(d.id)) throw Error(ErrorKind::MalformedRecord, "duplicate id '" + d.id + "'", line);
        try {
            corpus.upsert(std::move(d));
        } catch (const Error& e) {
            throw Error(ErrorKind::MalformedRecord, e.what(), line);
        }
    });
    return corpus;
}

/// Single-writer store handing out immutable snapshots. Writers are
/// serialized; a snapshot stays valid (and unchanged) after later writes.
class CorpusStore {
public:
    CorpusStore() : current_(std::make_shared<const Corpus>()) {}
    explicit CorpusStore(Corpus initial) : current_(std::make_shared<const Corpus>(std::move(initial))) {}

    std::shared_ptr<const Corpus> snapshot() const {
        std::lock_guard lock(read_mutex_);
        return current_;
    }

    /// Applies `mutate` to a copy of the current corpus and publishes it.
    void write(const std::function<void(Corpus&)>& mutate) {
        std::lock_guard writer(write_mutex_);
        auto next = std::make_shared<Corpus>(*snapshot());
        mutate(*next);
        std::lock_guard lock(read_mutex_);
        current_ = std::move(next);
    }

    void upsert(Document doc) {
        write([&](Corpus& c) { c.upsert(std::move(doc)); });
    }

private:
    mutable std::mutex read_mutex_;
    std::mutex write_mutex_;
    std::shared_ptr<const Corpus> current_;
};

}  // namespace litmap
