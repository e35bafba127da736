// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#include <catch_amalgamated.hpp>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace litmap;
using namespace litmap::analytics;
using testutil::make_doc;
using Catch::Matchers::WithinAbs;

static ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected litmap::Error");
    return ErrorKind::InvalidArgument;
}

static Document clustered(std::string id, int cluster, std::vector<std::string> authors, int year = 2020,
                          SourceKind source = SourceKind::Preprint) {
    auto d = make_doc(std::move(id), "Title", std::move(authors), Date{year, 6, 1}, source);
    d.cluster = cluster;
    return d;
}

TEST_CASE("articles per year") {
    Corpus c;
    for (int i = 0; i < 3; ++i) c.upsert(make_doc("arxiv:a" + std::to_string(i), "T", {"A"}, Date{2020, 1 + i, 1}));
    c.upsert(make_doc("arxiv:b", "T", {"A"}, Date{2021, 3, 3}));
    c.upsert(make_doc("arxiv:undated", "T", {"A"}, std::nullopt));
    c.upsert(make_doc("forum:f", "T", {"A"}, Date{2019, 1, 1}, SourceKind::Forum));
    const auto s = articles_per_year(c, SourceKind::Preprint);
    CHECK(s.counts == std::map<int, std::size_t>{{2020, 3}, {2021, 1}});
    CHECK(s.skipped == 1);
    CHECK(articles_per_year(Corpus{}, SourceKind::Preprint).counts.empty());
}

TEST_CASE("articles per author") {
    Corpus c;
    c.upsert(make_doc("arxiv:1", "T", {"A"}));
    c.upsert(make_doc("arxiv:2", "T", {"A"}));
    CHECK(articles_per_author(c) == AuthorCounts{{"A", 2}});
    Corpus d;
    d.upsert(make_doc("arxiv:1", "T", {"A", "B"}));
    CHECK(articles_per_author(d) == AuthorCounts{{"A", 1}, {"B", 1}});
    CHECK(articles_per_author(Corpus{}).empty());
    // Name variants are distinct authors.
    d.upsert(make_doc("arxiv:2", "T", {"J. Smith", "John Smith"}));
    CHECK(articles_per_author(d).size() == 4);
}

TEST_CASE("authors per article") {
    Corpus c;
    c.upsert(make_doc("arxiv:1", "T", {"A"}));
    c.upsert(make_doc("arxiv:2", "T", {"B"}));
    c.upsert(make_doc("arxiv:3", "T", {"A", "B", "C", "D"}));
    CHECK(authors_per_article(c, SourceKind::Preprint).histogram == std::map<std::size_t, std::size_t>{{1, 2}, {4, 1}});
    c.upsert(make_doc("arxiv:4", "T", {}));
    const auto h = authors_per_article(c, SourceKind::Preprint);
    CHECK(h.histogram.at(0) == 1);
    CHECK(h.no_author_ids == std::vector<std::string>{"arxiv:4"});
    CHECK(authors_per_article(Corpus{}, SourceKind::Forum).histogram.empty());
}

TEST_CASE("gini examples") {
    const std::vector<double> equal{1, 1, 1, 1};
    CHECK(gini(equal) == 0.0);
    const std::vector<double> half{0, 1};
    CHECK(gini(half) == 0.5);
    const std::vector<double> table{154, 95, 94, 57, 44};
    CHECK_THAT(gini(table), WithinAbs(oracle::gini_double_sum(table), 1e-15));
    CHECK_THAT(gini(table), WithinAbs(43.0 / 185.0, 1e-15));
    CHECK(kind_of([] { gini(std::vector<double>{}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { gini(std::vector<double>{0, 0}); }) == ErrorKind::ZeroMean);
    CHECK(gini(AuthorCounts{{"A", 3}, {"B", 3}, {"C", 3}}) == 0.0);
}

TEST_CASE("gini properties") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 60;
        std::vector<double> x(n);
        for (auto& v : x) v = static_cast<double>(1 + rng() % 200);
        const double g = gini(x);
        REQUIRE_THAT(g, WithinAbs(oracle::gini_double_sum(x), 1e-12));
        REQUIRE(g >= 0.0);
        REQUIRE(g < 1.0);
        const double alpha = 0.01 + static_cast<double>(rng() % 1000) / 7.0;
        std::vector<double> scaled(x);
        for (auto& v : scaled) v *= alpha;
        REQUIRE_THAT(gini(scaled), WithinAbs(g, 1e-12));
        const std::vector<double> constant(n, x[0]);
        REQUIRE(gini(constant) == 0.0);
    }
}

TEST_CASE("top authors per cluster") {
    Corpus c;
    c.upsert(clustered("arxiv:1", 0, {"A"}));
    c.upsert(clustered("arxiv:2", 0, {"A", "B"}));
    c.upsert(clustered("arxiv:3", 0, {"A"}));
    c.upsert(clustered("arxiv:4", 1, {"D", "C"}));
    c.upsert(clustered("arxiv:5", 1, {"C", "D"}));
    CHECK(top_authors_by_cluster(c, 1) == std::vector<AuthorRow>{{0, "A", 3}, {1, "C", 2}});
    const auto all = top_authors_by_cluster(c, 10);
    CHECK(all == std::vector<AuthorRow>{{0, "A", 3}, {0, "B", 1}, {1, "C", 2}, {1, "D", 2}});
    c.upsert(make_doc("arxiv:6", "T"));
    CHECK(kind_of([&] { top_authors_by_cluster(c); }) == ErrorKind::Unclustered);
}

TEST_CASE("fraction tables") {
    Corpus c;
    for (int i = 0; i < 3; ++i) c.upsert(clustered("forum:" + std::to_string(i), 0, {"A"}, 2020, SourceKind::Forum));
    c.upsert(clustered("arxiv:0", 0, {"A"}));
    c.upsert(clustered("arxiv:1", 1, {"A"}, 2019));
    c.upsert(clustered("arxiv:2", 1, {"A"}, 2020));
    const auto src = source_fraction_by_cluster(c);
    CHECK(src.at(0).at(SourceKind::Forum) == 0.75);
    CHECK(src.at(0).at(SourceKind::Preprint) == 0.25);
    const auto by_year = cluster_fraction_by_year(c);
    CHECK(by_year.at(2019) == std::map<int, double>{{1, 1.0}});
    CHECK_THAT(by_year.at(2020).at(0), WithinAbs(0.8, 1e-15));
    CHECK(articles_per_year_by_cluster(c).at(2020).at(0) == 4);
}

TEST_CASE("fractions sum to one per group") {
    std::mt19937_64 rng(4);
    Corpus c;
    for (int i = 0; i < 400; ++i)
        c.upsert(clustered("arxiv:" + std::to_string(i), static_cast<int>(rng() % 7), {"A"}, 2000 + static_cast<int>(rng() % 20),
                           static_cast<SourceKind>(rng() % 3)));
    for (const auto& [cl, fr] : source_fraction_by_cluster(c)) {
        double s = 0;
        for (const auto& [k, f] : fr) s += f;
        CHECK_THAT(s, WithinAbs(1.0, 1e-12));
    }
    for (const auto& [y, fr] : cluster_fraction_by_year(c)) {
        double s = 0;
        for (const auto& [k, f] : fr) s += f;
        CHECK_THAT(s, WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("word frequencies") {
    const std::vector<std::string> texts{"model will run run"};
    CHECK(word_frequencies(texts) == std::vector<WordCount>{{"run", 2}});
    const std::vector<std::string> stopped{"AI models will... Human [SEP] agent"};
    CHECK(word_frequencies(stopped).empty());
    const std::vector<std::string> extra{"reward reward hacking"};
    CHECK(word_frequencies(extra, {"Reward"}) == std::vector<WordCount>{{"hacking", 1}});
}

TEST_CASE("word frequencies match a recount") {
    std::mt19937_64 rng(6);
    const std::vector<std::string> vocab{"alpha", "Beta", "gamma", "model", "AI", "delta", "one", "eps", "zeta"};
    std::vector<std::string> texts;
    for (int i = 0; i < 50; ++i) {
        std::string t;
        for (int w = 0; w < 40; ++w) t += vocab[rng() % vocab.size()] + (rng() % 3 ? " " : ", ");
        texts.push_back(t);
    }
    const auto got = word_frequencies(texts);
    const auto want = oracle::recount(texts, default_stop_words());
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(want.at(got[i].first) == got[i].second);
        if (i) CHECK((got[i - 1].second > got[i].second || (got[i - 1].second == got[i].second && got[i - 1].first < got[i].first)));
    }
}

TEST_CASE("reports") {
    Corpus c;
    c.upsert(clustered("arxiv:1", 0, {"Ann, Jr."}, 2020));
    c.upsert(clustered("forum:2", 1, {"Bo"}, 2021, SourceKind::Forum));
    const auto t = report(c, "articles_per_year");
    CHECK(to_csv(t) == "source,year,count\nforum,2021,1\npreprint,2020,1\n");
    CHECK(to_csv(report(c, "articles_per_author")) == "author,count\n\"Ann, Jr.\",1\nBo,1\n");
    CHECK(to_csv(report(c, "gini_by_cluster")) == "cluster,gini\n0,0\n1,0\n");
    for (const auto& name : report_names()) CHECK_NOTHROW(report(c, name));
    CHECK(kind_of([&] { report(c, "nope"); }) == ErrorKind::UnknownReport);
    CHECK(to_csv(report(Corpus{}, "articles_per_year")) == "source,year,count\n");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}
