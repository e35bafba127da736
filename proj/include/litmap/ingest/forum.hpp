// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "litmap/corpus.hpp"
#include "litmap/error.hpp"
#include "litmap/ingest/xml.hpp"
#include "litmap/text.hpp"

namespace litmap::ingest {

inline bool looks_like_markup(std::string_view s) noexcept {
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i] != '<') continue;
        const char c = s[i + 1];
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '/' || c == '!') return true;
    }
    return false;
}

/// Plain text from post markup. Block elements become paragraph breaks,
/// script/style content is dropped, entities are decoded; the result has one
/// whitespace-collapsed paragraph per blank-line-separated block.
inline std::string html_to_text(std::string_view html) {
    static constexpr std::string_view block_tags[] = {"p",  "div", "li", "ul", "ol", "h1", "h2", "h3", "h4",
                                                      "h5", "h6", "blockquote", "pre", "tr", "table", "hr", "section"};
    std::string raw;
    raw.reserve(html.size());
    for (std::size_t i = 0; i < html.size();) {
        if (html[i] != '<') {
            raw.push_back(html[i++]);
            continue;
        }
        if (html.substr(i, 4) == "<!--") {
            const auto end = html.find("-->", i + 4);
            i = end == std::string_view::npos ? html.size() : end + 3;
            continue;
        }
        const auto close = html.find('>', i);
        if (close == std::string_view::npos) {
            raw.append(html.substr(i));
            break;
        }
        auto tag = html.substr(i + 1, close - i - 1);
        const bool closing = !tag.empty() && tag.front() == '/';
        if (closing) tag.remove_prefix(1);
        std::size_t n = 0;
        while (n < tag.size() && text::is_word_char(tag[n])) ++n;
        const std::string name = text::lowercase(tag.substr(0, n));
        i = close + 1;

        if (!closing && (name == "script" || name == "style")) {
            const auto end = html.find("</" + name, i);
            i = end == std::string_view::npos ? html.size() : html.find('>', end) + 1;
            if (i == 0) i = html.size();
            continue;
        }
        if (name == "br") {
            raw.push_back('\n');
        } else {
            for (auto b : block_tags)
                if (name == b) {
                    raw.append("\n\n");
                    break;
                }
        }
    }
    const std::string decoded = xml::decode_entities(raw);
    std::vector<std::string> paras;
    for (const auto& p : text::paragraphs(decoded)) {
        auto c = text::collapse_whitespace(p);
        if (!c.empty()) paras.push_back(std::move(c));
    }
    return text::join(paras, "\n\n");
}

/// Normalizes post text whether it is markup or plain text.
inline std::string normalize_body(std::string_view body) {
    if (looks_like_markup(body)) return html_to_text(body);
    std::vector<std::string> paras;
    for (const auto& p : text::paragraphs(body)) paras.push_back(text::collapse_whitespace(p));
    return text::join(paras, "\n\n");
}

inline bool has_event_tag(const std::vector<std::string>& tags) {
    for (const auto& t : tags)
        if (text::lowercase(text::trim(t)) == "event") return true;
    return false;
}

/// Reads a line-delimited forum export with fields
/// {slug, title, authors, date, tags, body} (plus optional url, origin).
/// Posts tagged "event" are meetup announcements and are dropped.
inline std::vector<Document> ingest_forum_export(const std::string& path) {
    std::vector<Document> docs;
    for_each_record(path, [&](const ordered_json& j, std::size_t line) {
        using litmap::detail::require;
        using litmap::detail::require_string;
        if (!j.is_object()) throw Error(ErrorKind::MalformedRecord, "record is not an object", line);

        std::vector<std::string> tags;
        if (j.contains("tags")) {
            const auto& t = j.at("tags");
            if (!t.is_array()) throw Error(ErrorKind::MalformedRecord, "tags is not an array", line);
            for (const auto& tag : t) {
                if (!tag.is_string()) throw Error(ErrorKind::MalformedRecord, "tag is not a string", line);
                tags.push_back(tag.get<std::string>());
            }
        }

        Document d;
        const auto slug = require_string(j, "slug", line);
        if (text::is_blank(slug)) throw Error(ErrorKind::MalformedRecord, "empty slug", line);
        d.id = "forum:" + std::string(text::trim(slug));
        d.title = text::collapse_whitespace(require_string(j, "title", line));
        if (d.title.empty()) throw Error(ErrorKind::MalformedRecord, "empty title", line);

        const auto& authors = require(j, "authors", line);
        if (authors.is_string()) {
            d.authors.push_back(text::collapse_whitespace(authors.get<std::string>()));
        } else if (authors.is_array()) {
            for (const auto& a : authors) {
                if (!a.is_string()) throw Error(ErrorKind::MalformedRecord, "author is not a string", line);
                d.authors.push_back(text::collapse_whitespace(a.get<std::string>()));
            }
        } else {
            throw Error(ErrorKind::MalformedRecord, "authors must be a string or an array", line);
        }

        const auto& date = require(j, "date", line);
        if (!date.is_null()) {
            if (!date.is_string()) throw Error(ErrorKind::MalformedRecord, "date is not a string", line);
            d.published = Date::parse(date.get<std::string>());
            if (!d.published) throw Error(ErrorKind::MalformedRecord, "bad date", line);
        }

        const auto& body = require(j, "body", line);
        if (!body.is_null() && !body.is_string()) throw Error(ErrorKind::MalformedRecord, "body is not a string", line);
        if (body.is_string()) d.body = normalize_body(body.get<std::string>());

        d.source = {SourceKind::Forum, j.contains("origin") && j.at("origin").is_string() ? j.at("origin").get<std::string>()
                                                                                           : std::string("alignmentforum")};
        if (j.contains("url") && j.at("url").is_string()) d.url = j.at("url").get<std::string>();

        if (has_event_tag(tags)) return;
        docs.push_back(std::move(d));
    });
    return docs;
}

}  // namespace litmap::ingest
