// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

// Minimal non-validating XML reader, enough for Atom feeds: elements,
// attributes, character data, CDATA, comments, processing instructions and a
// skipped DOCTYPE. Namespaces are not resolved; lookups go by local name.
// Errors carry the byte offset where parsing stopped.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "litmap/error.hpp"

namespace litmap::xml {

struct Element {
    std::string name;  // qualified, as written
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Element> children;
    std::string text;  // direct character data, concatenated
    std::size_t offset = 0;

    std::string_view local_name() const noexcept {
        const auto colon = name.find(':');
        return colon == std::string::npos ? std::string_view(name) : std::string_view(name).substr(colon + 1);
    }

    const Element* child(std::string_view local) const noexcept {
        for (const auto& c : children)
            if (c.local_name() == local) return &c;
        return nullptr;
    }

    std::vector<const Element*> children_named(std::string_view local) const {
        std::vector<const Element*> out;
        for (const auto& c : children)
            if (c.local_name() == local) out.push_back(&c);
        return out;
    }

    const std::string* attribute(std::string_view key) const noexcept {
        for (const auto& [k, v] : attributes)
            if (k == key) return &v;
        return nullptr;
    }

    /// Character data of this element and all descendants, in document order.
    std::string deep_text() const {
        std::string out = text;
        for (const auto& c : children) out += c.deep_text();
        return out;
    }
};

inline void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

/// Resolves a named or numeric entity body (the part between '&' and ';').
/// `html` additionally enables a handful of common HTML names.
inline bool resolve_entity(std::string_view name, std::string& out, bool html = false) {
    if (name.size() > 1 && name[0] == '#') {
        std::uint32_t cp = 0;
        const bool hex = name[1] == 'x' || name[1] == 'X';
        const auto digits = name.substr(hex ? 2 : 1);
        if (digits.empty() || digits.size() > 8) return false;
        for (char c : digits) {
            std::uint32_t v;
            if (c >= '0' && c <= '9') v = static_cast<std::uint32_t>(c - '0');
            else if (hex && c >= 'a' && c <= 'f') v = static_cast<std::uint32_t>(c - 'a' + 10);
            else if (hex && c >= 'A' && c <= 'F') v = static_cast<std::uint32_t>(c - 'A' + 10);
            else return false;
            cp = cp * (hex ? 16 : 10) + v;
        }
        if (cp == 0 || cp > 0x10FFFF) return false;
        append_utf8(out, cp);
        return true;
    }
    struct Named {
        std::string_view name;
        std::uint32_t cp;
    };
    static constexpr Named xml_names[] = {{"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''}};
    static constexpr Named html_names[] = {{"nbsp", 0xA0},    {"mdash", 0x2014}, {"ndash", 0x2013},
                                           {"hellip", 0x2026}, {"lsquo", 0x2018}, {"rsquo", 0x2019},
                                           {"ldquo", 0x201C},  {"rdquo", 0x201D}, {"copy", 0xA9}};
    for (const auto& n : xml_names)
        if (n.name == name) return append_utf8(out, n.cp), true;
    if (html)
        for (const auto& n : html_names)
            if (n.name == name) return append_utf8(out, n.cp), true;
    return false;
}

/// Lenient entity decoding for HTML-ish text: unknown entities pass through.
inline std::string decode_entities(std::string_view s, bool html = true) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '&') {
            const auto semi = s.find(';', i + 1);
            if (semi != std::string_view::npos && semi - i <= 10 && resolve_entity(s.substr(i + 1, semi - i - 1), out, html)) {
                i = semi;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view input) : s_(input) {}

    Element parse_document() {
        if (s_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
        skip_misc();
        if (pos_ >= s_.size() || s_[pos_] != '<') fail("expected root element");
        if (s_.substr(pos_, 9) == "<!DOCTYPE") {
            skip_past(">", "unterminated DOCTYPE");
            skip_misc();
        }
        Element root = parse_element(0);
        skip_misc();
        if (pos_ != s_.size()) fail("content after root element");
        return root;
    }

private:
    static constexpr int kMaxDepth = 256;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::MalformedFeed, what + " at byte " + std::to_string(pos_), pos_);
    }

    bool starts_with(std::string_view p) const noexcept { return s_.substr(pos_, p.size()) == p; }

    void skip_ws() noexcept {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
    }

    void skip_past(std::string_view terminator, const char* what) {
        const auto end = s_.find(terminator, pos_);
        if (end == std::string_view::npos) {
            pos_ = s_.size();
            fail(what);
        }
        pos_ = end + terminator.size();
    }

    // Whitespace, comments and processing instructions outside the root.
    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<?")) skip_past("?>", "unterminated processing instruction");
            else if (starts_with("<!--")) skip_past("-->", "unterminated comment");
            else return;
        }
    }

    static bool name_char(char c) noexcept {
        const auto u = static_cast<unsigned char>(c);
        return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9') || c == '_' || c == ':' ||
               c == '-' || c == '.' || u >= 0x80;
    }

    std::string parse_name() {
        const auto start = pos_;
        while (pos_ < s_.size() && name_char(s_[pos_])) ++pos_;
        if (pos_ == start) fail("expected a name");
        return std::string(s_.substr(start, pos_ - start));
    }

    void append_decoded(std::string& out, std::string_view raw, std::size_t raw_offset) {
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out.push_back(raw[i]);
                continue;
            }
            const auto semi = raw.find(';', i + 1);
            if (semi == std::string_view::npos || !resolve_entity(raw.substr(i + 1, semi - i - 1), out)) {
                pos_ = raw_offset + i;
                fail("invalid entity reference");
            }
            i = semi;
        }
    }

    Element parse_element(int depth) {
        if (depth > kMaxDepth) fail("nesting too deep");
        Element el;
        el.offset = pos_;
        ++pos_;  // '<'
        el.name = parse_name();

        for (;;) {
            skip_ws();
            if (pos_ >= s_.size()) fail("unterminated start tag");
            if (s_[pos_] == '/') {
                if (!starts_with("/>")) fail("expected '/>'");
                pos_ += 2;
                return el;
            }
            if (s_[pos_] == '>') {
                ++pos_;
                break;
            }
            std::string key = parse_name();
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != '=') fail("expected '=' after attribute name");
            ++pos_;
            skip_ws();
            if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) fail("expected quoted attribute value");
            const char quote = s_[pos_++];
            const auto end = s_.find(quote, pos_);
            if (end == std::string_view::npos) {
                pos_ = s_.size();
                fail("unterminated attribute value");
            }
            std::string value;
            append_decoded(value, s_.substr(pos_, end - pos_), pos_);
            pos_ = end + 1;
            el.attributes.emplace_back(std::move(key), std::move(value));
        }

        for (;;) {
            const auto lt = s_.find('<', pos_);
            if (lt == std::string_view::npos) {
                pos_ = s_.size();
                fail("unexpected end of input inside <" + el.name + ">");
            }
            append_decoded(el.text, s_.substr(pos_, lt - pos_), pos_);
            pos_ = lt;
            if (starts_with("</")) {
                pos_ += 2;
                const auto close_at = pos_;
                const std::string closing = parse_name();
                if (closing != el.name) {
                    pos_ = close_at;
                    fail("mismatched closing tag </" + closing + "> for <" + el.name + ">");
                }
                skip_ws();
                if (pos_ >= s_.size() || s_[pos_] != '>') fail("expected '>'");
                ++pos_;
                return el;
            }
            if (starts_with("<!--")) {
                skip_past("-->", "unterminated comment");
            } else if (starts_with("<![CDATA[")) {
                pos_ += 9;
                const auto end = s_.find("]]>", pos_);
                if (end == std::string_view::npos) {
                    pos_ = s_.size();
                    fail("unterminated CDATA section");
                }
                el.text.append(s_.substr(pos_, end - pos_));
                pos_ = end + 3;
            } else if (starts_with("<?")) {
                skip_past("?>", "unterminated processing instruction");
            } else {
                el.children.push_back(parse_element(depth + 1));
            }
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

inline Element parse(std::string_view input) { return Parser(input).parse_document(); }

}  // namespace litmap::xml
