// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "litmap/corpus.hpp"
#include "litmap/error.hpp"
#include "litmap/text.hpp"

namespace litmap::ingest {

inline constexpr std::string_view kSeparator = "[SEP]";
inline constexpr std::size_t kLeadMinChars = 1000;
inline constexpr std::size_t kLeadMaxParagraphs = 5;

namespace detail {

// Literal separators inside a part would break the one-separator invariant.
inline std::string without_separator(std::string_view s) {
    std::string out(s);
    for (auto at = out.find(kSeparator); at != std::string::npos; at = out.find(kSeparator, at))
        out.erase(at, kSeparator.size());
    return std::string(text::trim(out));
}

}  // namespace detail

/// Leading paragraphs of a body: taken in order until at least
/// kLeadMinChars characters are accumulated or kLeadMaxParagraphs are taken.
inline std::string lead_paragraphs(std::string_view body) {
    std::string out;
    std::size_t chars = 0;
    std::size_t taken = 0;
    for (const auto& p : text::paragraphs(body)) {
        if (taken == kLeadMaxParagraphs || chars >= kLeadMinChars) break;
        if (taken) out.append("\n\n");
        out.append(p);
        chars += p.size();
        ++taken;
    }
    return out;
}

/// Text handed to the embedder: title, the separator, then the abstract or,
/// for documents without one, the body's leading paragraphs.
inline std::string compose_embed_text(const Document& doc) {
    const std::string title = detail::without_separator(doc.title);
    if (title.empty()) throw Error(ErrorKind::EmptyTitle, "document '" + doc.id + "' has a blank title");
    std::string rest = detail::without_separator(doc.abstract);
    if (rest.empty()) rest = detail::without_separator(lead_paragraphs(doc.body));
    if (rest.empty()) throw Error(ErrorKind::MissingText, "document '" + doc.id + "' has neither abstract nor body");
    return title + std::string(kSeparator) + rest;
}

}  // namespace litmap::ingest
