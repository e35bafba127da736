// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "litmap/corpus.hpp"
#include "litmap/date.hpp"
#include "litmap/error.hpp"
#include "litmap/ingest/xml.hpp"
#include "litmap/text.hpp"

namespace litmap::ingest {

/// One entry of an archive listing, before normalization.
struct RawRecord {
    std::string native_id;  // e.g. "2203.01234v2"
    std::string title;
    std::vector<std::string> authors;
    std::optional<Date> date;
    std::string summary;
    std::vector<std::string> categories;
    std::string url;

    bool operator==(const RawRecord&) const = default;
};

/// "http://arxiv.org/abs/2203.01234v2" -> "2203.01234v2"; old-style ids keep
/// their archive prefix ("hep-th/9901001v1").
inline std::string native_id_from_entry_id(std::string_view id) {
    id = text::trim(id);
    constexpr std::string_view marker = "/abs/";
    if (const auto at = id.find(marker); at != std::string_view::npos) return std::string(id.substr(at + marker.size()));
    return std::string(id);
}

/// Drops a trailing version suffix: "2203.01234v2" -> "2203.01234".
inline std::string strip_version(std::string_view native_id) {
    auto v = native_id.rfind('v');
    if (v == std::string_view::npos || v + 1 >= native_id.size()) return std::string(native_id);
    for (auto i = v + 1; i < native_id.size(); ++i)
        if (native_id[i] < '0' || native_id[i] > '9') return std::string(native_id);
    return std::string(native_id.substr(0, v));
}

/// Parses an Atom listing into records, one per <entry>, in feed order.
/// Throws MalformedFeed (with byte offset) on broken XML, a non-feed root,
/// an entry without id or title, or an archive error entry.
inline std::vector<RawRecord> parse_atom(std::string_view feed) {
    const xml::Element root = xml::parse(feed);
    if (root.local_name() != "feed") throw Error(ErrorKind::MalformedFeed, "root element is not <feed>", root.offset);

    std::vector<RawRecord> records;
    for (const xml::Element* entry : root.children_named("entry")) {
        RawRecord r;
        const auto* id = entry->child("id");
        if (!id || text::is_blank(id->text)) throw Error(ErrorKind::MalformedFeed, "entry without <id>", entry->offset);
        if (id->text.find("/api/errors") != std::string::npos) {
            const auto* summary = entry->child("summary");
            throw Error(ErrorKind::MalformedFeed,
                        "archive error: " + (summary ? text::collapse_whitespace(summary->deep_text()) : std::string("unknown")),
                        entry->offset);
        }
        r.native_id = native_id_from_entry_id(id->text);

        const auto* title = entry->child("title");
        if (!title) throw Error(ErrorKind::MalformedFeed, "entry without <title>", entry->offset);
        r.title = text::collapse_whitespace(title->deep_text());
        if (r.title.empty()) throw Error(ErrorKind::MalformedFeed, "entry with empty <title>", title->offset);

        for (const xml::Element* author : entry->children_named("author")) {
            if (const auto* name = author->child("name")) {
                auto n = text::collapse_whitespace(name->deep_text());
                if (!n.empty()) r.authors.push_back(std::move(n));
            }
        }
        if (const auto* published = entry->child("published")) r.date = Date::parse(text::trim(published->text));
        if (!r.date)
            if (const auto* updated = entry->child("updated")) r.date = Date::parse(text::trim(updated->text));
        if (const auto* summary = entry->child("summary")) r.summary = text::collapse_whitespace(summary->deep_text());

        for (const xml::Element* category : entry->children_named("category"))
            if (const auto* term = category->attribute("term")) r.categories.push_back(*term);

        for (const xml::Element* link : entry->children_named("link")) {
            const auto* rel = link->attribute("rel");
            const auto* href = link->attribute("href");
            if (href && (!rel || *rel == "alternate")) {
                r.url = *href;
                break;
            }
        }
        if (r.url.empty()) r.url = std::string(text::trim(id->text));
        records.push_back(std::move(r));
    }
    return records;
}

/// Normalizes an archive record. The stored id is "arxiv:" + version-less id.
inline Document to_document(const RawRecord& r, Label label = Label::Unlabeled) {
    Document d;
    d.id = "arxiv:" + strip_version(r.native_id);
    d.source = {SourceKind::Preprint, "arxiv"};
    d.title = r.title;
    d.authors = r.authors;
    d.published = r.date;
    d.abstract = r.summary;
    d.url = r.url;
    d.label = label;
    return d;
}

}  // namespace litmap::ingest
