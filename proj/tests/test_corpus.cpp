// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#include <catch_amalgamated.hpp>

#include <random>
#include <thread>

#include "helpers.hpp"

using namespace litmap;
using testutil::make_doc;

static ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected litmap::Error");
    return ErrorKind::InvalidArgument;
}

TEST_CASE("upsert into empty corpus") {
    Corpus c = upsert_document(Corpus{}, make_doc("arxiv:1", "A"));
    REQUIRE(c.size() == 1);
    REQUIRE(c.find("arxiv:1")->title == "A");
}

TEST_CASE("upsert replaces by id and keeps position") {
    Corpus c;
    c.upsert(make_doc("arxiv:1", "A"));
    c.upsert(make_doc("arxiv:2", "B"));
    auto a2 = make_doc("arxiv:1", "A");
    a2.abstract = "new abstract";
    c = upsert_document(c, a2);
    REQUIRE(c.size() == 2);
    REQUIRE(c.documents()[0].abstract == "new abstract");
    REQUIRE(c.documents()[1].id == "arxiv:2");
}

TEST_CASE("upsert rejects blank titles and misplaced labels") {
    Corpus c;
    c.upsert(make_doc("arxiv:1", "A"));
    CHECK(kind_of([&] { upsert_document(c, make_doc("arxiv:2", " \t ")); }) == ErrorKind::EmptyTitle);
    auto forum = make_doc("forum:x", "X", {"A"}, Date{2020, 1, 1}, SourceKind::Forum);
    forum.label = Label::Level0;
    CHECK(kind_of([&] { c.upsert(forum); }) == ErrorKind::InvalidArgument);
    CHECK(c.size() == 1);
}

TEST_CASE("upsert changes the distinct-id count by at most one") {
    std::mt19937_64 rng(7);
    Corpus c;
    for (int i = 0; i < 500; ++i) {
        const auto before = c.size();
        const auto id = "arxiv:" + std::to_string(rng() % 60);
        const bool existed = c.contains(id);
        c.upsert(make_doc(id, "T" + std::to_string(i)));
        REQUIRE(c.size() == before + (existed ? 0 : 1));
    }
}

TEST_CASE("deduplicate keeps the earliest of a cross-posted pair") {
    Corpus c;
    auto late = make_doc("forum:paper", "Reward Hacking", {"Ann Lee"}, Date{2021, 5, 3}, SourceKind::Forum);
    auto early = make_doc("arxiv:2104.1", "Reward Hacking", {"Ann Lee"}, Date{2021, 4, 1});
    c.upsert(late);
    c.upsert(early);
    const auto d = deduplicate(c);
    REQUIRE(d.size() == 1);
    const auto& kept = d.documents()[0];
    CHECK(kept.id == "arxiv:2104.1");
    CHECK(kept.published == Date{2021, 4, 1});
    CHECK(kept.source.origin == "arxiv; forum:alignmentforum");
}

TEST_CASE("deduplicate keeps different first authors apart") {
    Corpus c;
    c.upsert(make_doc("arxiv:1", "Same Title", {"Ann Lee"}));
    c.upsert(make_doc("arxiv:2", "Same Title", {"Bo Chen"}));
    CHECK(deduplicate(c).size() == 2);
}

TEST_CASE("deduplicate normalizes case and whitespace") {
    Corpus c;
    c.upsert(make_doc("arxiv:1", "Scalable  Oversight\tvia Debate", {"Ann  Lee"}, Date{2020, 2, 2}));
    c.upsert(make_doc("arxiv:2", "scalable oversight VIA debate ", {"ann lee"}, Date{2020, 1, 1}));
    const auto d = deduplicate(c);
    REQUIRE(d.size() == 1);
    CHECK(d.documents()[0].id == "arxiv:2");
}

TEST_CASE("deduplicate prefers dated records, then corpus order") {
    Corpus c;
    c.upsert(make_doc("arxiv:1", "T", {"A"}, std::nullopt));
    c.upsert(make_doc("arxiv:2", "T", {"A"}, Date{2022, 1, 1}));
    c.upsert(make_doc("arxiv:3", "T", {"A"}, Date{2022, 1, 1}));
    const auto d = deduplicate(c);
    REQUIRE(d.size() == 1);
    CHECK(d.documents()[0].id == "arxiv:2");
}

static Corpus generated_corpus(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Corpus c;
    const char* names[] = {"Ann Lee", "Bo Chen", "Cy Diaz", "Dee Ng", "Eli Ros"};
    for (std::size_t i = 0; i < n; ++i) {
        // Roughly one in five titles repeats an earlier one to exercise merging.
        const auto title_id = rng() % 5 == 0 ? rng() % (i + 1) : i;
        auto d = make_doc((i % 2 ? "forum:" : "arxiv:") + std::to_string(i), "Title \"" + std::to_string(title_id) + "\" é",
                          {names[rng() % 5], names[rng() % 5]},
                          rng() % 10 ? std::optional(Date{2010 + static_cast<int>(rng() % 12), 1 + static_cast<int>(rng() % 12),
                                                          1 + static_cast<int>(rng() % 28)})
                                     : std::nullopt,
                          i % 2 ? SourceKind::Forum : SourceKind::Preprint);
        d.body = "line one\nline two\n\n\"quoted\" \\ backslash";
        if (d.source.kind == SourceKind::Preprint && rng() % 3 == 0) d.label = rng() % 2 ? Label::Level0 : Label::Level1;
        if (rng() % 2) d.cluster = static_cast<int>(rng() % 5);
        c.upsert(std::move(d));
    }
    return c;
}

TEST_CASE("save/load round trip") {
    testutil::TempDir dir;
    SECTION("three documents") {
        Corpus c;
        c.upsert(make_doc("arxiv:1", "One", {"A", "B"}));
        c.upsert(make_doc("forum:two", "Two", {}, std::nullopt, SourceKind::Forum));
        auto three = make_doc("arxiv:3", "Three");
        three.label = Label::Level1;
        three.cluster = 4;
        c.upsert(three);
        save(c, dir.file("c.jsonl"));
        CHECK(load(dir.file("c.jsonl")) == c);
    }
    SECTION("generated corpus") {
        const auto c = generated_corpus(300, 11);
        save(c, dir.file("g.jsonl"));
        const auto back = load(dir.file("g.jsonl"));
        REQUIRE(back == c);
        save(back, dir.file("g2.jsonl"));
        CHECK(testutil::read_file(dir.file("g.jsonl")) == testutil::read_file(dir.file("g2.jsonl")));
    }
}

TEST_CASE("dedup is idempotent") {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto once = deduplicate(generated_corpus(400, seed));
        CHECK(deduplicate(once) == once);
    }
}

TEST_CASE("load reports the bad line") {
    testutil::TempDir dir;
    Corpus c;
    c.upsert(make_doc("arxiv:1", "One"));
    save(c, dir.file("c.jsonl"));
    auto text = testutil::read_file(dir.file("c.jsonl"));
    testutil::write_file(dir.file("bad.jsonl"), text + "\n{\"id\": \"arxiv:2\", \n");
    try {
        load(dir.file("bad.jsonl"));
        FAIL("expected MalformedRecord");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedRecord);
        CHECK(e.location() == std::optional<std::size_t>(3));
    }
    testutil::write_file(dir.file("dup.jsonl"), text + text);
    CHECK(kind_of([&] { load(dir.file("dup.jsonl")); }) == ErrorKind::MalformedRecord);
    testutil::write_file(dir.file("missing.jsonl"), "{\"id\":\"arxiv:1\"}\n");
    CHECK(kind_of([&] { load(dir.file("missing.jsonl")); }) == ErrorKind::MalformedRecord);
}

TEST_CASE("load of an empty file is an empty corpus") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("e.jsonl"), "");
    CHECK(load(dir.file("e.jsonl")).empty());
    CHECK(kind_of([&] { load(dir.file("absent.jsonl")); }) == ErrorKind::IoFailure);
}

TEST_CASE("store snapshots are immutable") {
    CorpusStore store;
    store.upsert(make_doc("arxiv:1", "One"));
    const auto snap = store.snapshot();
    store.upsert(make_doc("arxiv:2", "Two"));
    CHECK(snap->size() == 1);
    CHECK(store.snapshot()->size() == 2);

    std::vector<std::thread> writers;
    for (int t = 0; t < 4; ++t)
        writers.emplace_back([&, t] {
            for (int i = 0; i < 50; ++i) store.upsert(make_doc("arxiv:t" + std::to_string(t) + "-" + std::to_string(i), "T"));
        });
    for (int r = 0; r < 200; ++r) {
        const auto s = store.snapshot();
        CHECK(s->size() >= 2);
    }
    for (auto& w : writers) w.join();
    CHECK(store.snapshot()->size() == 202);
}

TEST_CASE("dates parse and order") {
    CHECK(Date::parse("2021-02-28") == Date{2021, 2, 28});
    CHECK(Date::parse("2021-02-28T12:00:00Z") == Date{2021, 2, 28});
    CHECK_FALSE(Date::parse("2021-02-30"));
    CHECK_FALSE(Date::parse("21-02-03"));
    CHECK(Date{2020, 12, 31} < Date{2021, 1, 1});
    CHECK(Date{2020, 3, 4}.iso() == "2020-03-04");
}
