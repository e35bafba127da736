// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "litmap/corpus.hpp"
#include "litmap/error.hpp"
#include "litmap/ingest/compose.hpp"
#include "litmap/text.hpp"

namespace litmap::analytics {

struct YearSeries {
    std::map<int, std::size_t> counts;
    std::size_t skipped = 0;  // documents without a publication date
};

inline YearSeries articles_per_year(const Corpus& corpus, SourceKind source) {
    YearSeries s;
    for (const auto& d : corpus) {
        if (d.source.kind != source) continue;
        if (!d.published) {
            ++s.skipped;
            continue;
        }
        ++s.counts[d.published->year];
    }
    return s;
}

/// Article count per author name (exact string match), full credit per article.
using AuthorCounts = std::map<std::string, std::size_t>;

template <class Range>
AuthorCounts articles_per_author(const Range& docs) {
    AuthorCounts counts;
    for (const Document& d : docs)
        for (const auto& a : d.authors) ++counts[a];
    return counts;
}

struct AuthorsPerArticle {
    std::map<std::size_t, std::size_t> histogram;  // author-list length -> documents
    std::vector<std::string> no_author_ids;        // flagged, also counted in bucket 0
};

inline AuthorsPerArticle authors_per_article(const Corpus& corpus, SourceKind source) {
    AuthorsPerArticle out;
    for (const auto& d : corpus) {
        if (d.source.kind != source) continue;
        ++out.histogram[d.authors.size()];
        if (d.authors.empty()) out.no_author_ids.push_back(d.id);
    }
    return out;
}

/// Half the relative mean absolute difference, by the exact double sum
/// sum_i sum_j |x_i - x_j| / (2 n^2 mean).
inline double gini(std::span<const double> x) {
    if (x.empty()) throw Error(ErrorKind::InvalidArgument, "gini of an empty sample");
    const double n = static_cast<double>(x.size());
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / n;
    if (!(mean > 0.0)) throw Error(ErrorKind::ZeroMean, "gini needs a positive mean");
    double abs_diff = 0.0;
    for (double xi : x)
        for (double xj : x) abs_diff += std::abs(xi - xj);
    return abs_diff / (2.0 * n * n * mean);
}

inline double gini(const AuthorCounts& counts) {
    std::vector<double> x;
    x.reserve(counts.size());
    for (const auto& [name, c] : counts) x.push_back(static_cast<double>(c));
    return gini(std::span<const double>(x));
}

inline void require_clustered(const Corpus& corpus) {
    for (const auto& d : corpus)
        if (!d.cluster) throw Error(ErrorKind::Unclustered, "document '" + d.id + "' has no cluster label");
}

inline std::map<int, std::vector<Document>> by_cluster(const Corpus& corpus) {
    require_clustered(corpus);
    std::map<int, std::vector<Document>> groups;
    for (const auto& d : corpus) groups[*d.cluster].push_back(d);
    return groups;
}

/// GINI of articles-per-researcher within each cluster. Clusters without
/// any author are omitted.
inline std::map<int, double> gini_by_cluster(const Corpus& corpus) {
    std::map<int, double> out;
    for (const auto& [c, docs] : by_cluster(corpus)) {
        const auto counts = articles_per_author(docs);
        if (!counts.empty()) out[c] = gini(counts);
    }
    return out;
}

struct AuthorRow {
    int cluster = 0;
    std::string author;
    std::size_t count = 0;

    bool operator==(const AuthorRow&) const = default;
};

/// The m most prolific authors per cluster; ties broken alphabetically.
inline std::vector<AuthorRow> top_authors_by_cluster(const Corpus& corpus, std::size_t m = 5) {
    std::vector<AuthorRow> rows;
    for (const auto& [c, docs] : by_cluster(corpus)) {
        const auto counts = articles_per_author(docs);
        std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
        for (std::size_t i = 0; i < std::min(m, ranked.size()); ++i) rows.push_back({c, ranked[i].first, ranked[i].second});
    }
    return rows;
}

/// Per cluster, the fraction of its documents coming from each source.
inline std::map<int, std::map<SourceKind, double>> source_fraction_by_cluster(const Corpus& corpus) {
    std::map<int, std::map<SourceKind, double>> out;
    for (const auto& [c, docs] : by_cluster(corpus)) {
        std::map<SourceKind, std::size_t> counts;
        for (const auto& d : docs) ++counts[d.source.kind];
        for (const auto& [s, n] : counts) out[c][s] = static_cast<double>(n) / static_cast<double>(docs.size());
    }
    return out;
}

/// Per publication year, the fraction of that year's documents in each
/// cluster. Undated documents are left out.
inline std::map<int, std::map<int, double>> cluster_fraction_by_year(const Corpus& corpus) {
    require_clustered(corpus);
    std::map<int, std::map<int, std::size_t>> counts;
    std::map<int, std::size_t> totals;
    for (const auto& d : corpus) {
        if (!d.published) continue;
        ++counts[d.published->year][*d.cluster];
        ++totals[d.published->year];
    }
    std::map<int, std::map<int, double>> out;
    for (const auto& [year, per_cluster] : counts)
        for (const auto& [c, n] : per_cluster) out[year][c] = static_cast<double>(n) / static_cast<double>(totals[year]);
    return out;
}

inline std::map<int, std::map<int, std::size_t>> articles_per_year_by_cluster(const Corpus& corpus) {
    require_clustered(corpus);
    std::map<int, std::map<int, std::size_t>> out;
    for (const auto& d : corpus)
        if (d.published) ++out[d.published->year][*d.cluster];
    return out;
}

inline const std::vector<std::string>& default_stop_words() {
    static const std::vector<std::string> words = {"will", "post", "problem", "example", "one", "sep",
                                                   "ai",   "agent", "human", "model", "models"};
    return words;
}

using WordCount = std::pair<std::string, std::size_t>;

/// Token counts over `texts` after removing the default stop words and
/// `extra_stops` (case-insensitive). Ranked by count, then alphabetically.
inline std::vector<WordCount> word_frequencies(std::span<const std::string> texts,
                                               const std::vector<std::string>& extra_stops = {}) {
    std::unordered_set<std::string> stops;
    for (const auto& w : default_stop_words()) stops.insert(w);
    for (const auto& w : extra_stops) stops.insert(text::lowercase(w));
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& t : texts)
        for (auto& token : text::tokenize(t))
            if (!stops.contains(token)) ++counts[std::move(token)];
    std::vector<WordCount> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const WordCount& a, const WordCount& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return ranked;
}

/// Embedding text of a document, or its title when there is nothing else.
inline std::string analysis_text(const Document& d) {
    try {
        return ingest::compose_embed_text(d);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::MissingText) throw;
        return d.title;
    }
}

template <class Range>
std::vector<WordCount> word_frequencies_of(const Range& docs, const std::vector<std::string>& extra_stops = {}) {
    std::vector<std::string> texts;
    for (const Document& d : docs) texts.push_back(analysis_text(d));
    return word_frequencies(std::span<const std::string>(texts), extra_stops);
}

// ---------------------------------------------------------------------------
// Tabular output

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    bool operator==(const Table&) const = default;
};

inline std::string format_number(double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, p) : std::to_string(v);
}

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string to_csv(const Table& t) {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out.push_back(',');
            out += csv_field(cells[i]);
        }
        out.push_back('\n');
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

inline const std::vector<std::string>& report_names() {
    static const std::vector<std::string> names = {
        "articles_per_year",      "articles_per_author",        "authors_per_article",
        "gini_by_cluster",        "top_authors_by_cluster",     "source_fraction_by_cluster",
        "cluster_fraction_by_year", "articles_per_year_by_cluster", "word_frequencies",
    };
    return names;
}

struct ReportOptions {
    std::size_t top_m = 5;
    std::size_t max_words = 50;  // per cluster for word_frequencies
    std::vector<std::string> extra_stops;
};

/// Builds the named analytics table. Throws UnknownReport for other names
/// and Unclustered when a cluster report runs before clustering.
inline Table report(const Corpus& corpus, std::string_view name, const ReportOptions& opt = {}) {
    using std::to_string;
    constexpr SourceKind sources[] = {SourceKind::Forum, SourceKind::Preprint, SourceKind::Other};
    Table t;
    if (name == "articles_per_year") {
        t.header = {"source", "year", "count"};
        for (auto s : sources)
            for (const auto& [year, n] : articles_per_year(corpus, s).counts)
                t.rows.push_back({std::string(litmap::to_string(s)), to_string(year), to_string(n)});
    } else if (name == "articles_per_author") {
        t.header = {"author", "count"};
        for (const auto& [a, n] : articles_per_author(corpus)) t.rows.push_back({a, to_string(n)});
    } else if (name == "authors_per_article") {
        t.header = {"source", "authors", "articles"};
        for (auto s : sources)
            for (const auto& [len, n] : authors_per_article(corpus, s).histogram)
                t.rows.push_back({std::string(litmap::to_string(s)), to_string(len), to_string(n)});
    } else if (name == "gini_by_cluster") {
        t.header = {"cluster", "gini"};
        for (const auto& [c, g] : gini_by_cluster(corpus)) t.rows.push_back({to_string(c), format_number(g)});
    } else if (name == "top_authors_by_cluster") {
        t.header = {"cluster", "author", "count"};
        for (const auto& r : top_authors_by_cluster(corpus, opt.top_m)) t.rows.push_back({to_string(r.cluster), r.author, to_string(r.count)});
    } else if (name == "source_fraction_by_cluster") {
        t.header = {"cluster", "source", "fraction"};
        for (const auto& [c, fr] : source_fraction_by_cluster(corpus))
            for (const auto& [s, f] : fr) t.rows.push_back({to_string(c), std::string(litmap::to_string(s)), format_number(f)});
    } else if (name == "cluster_fraction_by_year") {
        t.header = {"year", "cluster", "fraction"};
        for (const auto& [y, fr] : cluster_fraction_by_year(corpus))
            for (const auto& [c, f] : fr) t.rows.push_back({to_string(y), to_string(c), format_number(f)});
    } else if (name == "articles_per_year_by_cluster") {
        t.header = {"year", "cluster", "count"};
        for (const auto& [y, per] : articles_per_year_by_cluster(corpus))
            for (const auto& [c, n] : per) t.rows.push_back({to_string(y), to_string(c), to_string(n)});
    } else if (name == "word_frequencies") {
        t.header = {"cluster", "word", "count"};
        for (const auto& [c, docs] : by_cluster(corpus)) {
            const auto words = word_frequencies_of(docs, opt.extra_stops);
            for (std::size_t i = 0; i < std::min(opt.max_words, words.size()); ++i)
                t.rows.push_back({to_string(c), words[i].first, to_string(words[i].second)});
        }
    } else {
        throw Error(ErrorKind::UnknownReport, "no report named '" + std::string(name) + "'");
    }
    return t;
}

}  // namespace litmap::analytics
