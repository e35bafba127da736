// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "litmap/litmap.hpp"

namespace testutil {

inline std::string fixture(const std::string& name) { return std::string(LITMAP_FIXTURE_DIR) + "/" + name; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("litmap_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << contents;
}

inline litmap::Document make_doc(std::string id, std::string title, std::vector<std::string> authors = {"A. Author"},
                                 std::optional<litmap::Date> date = litmap::Date{2021, 1, 1},
                                 litmap::SourceKind source = litmap::SourceKind::Preprint) {
    litmap::Document d;
    d.id = std::move(id);
    d.source = {source, source == litmap::SourceKind::Forum ? "alignmentforum" : "arxiv"};
    d.title = std::move(title);
    d.authors = std::move(authors);
    d.published = date;
    d.abstract = "Abstract of " + d.title;
    d.url = "https://example.org/" + d.id;
    return d;
}

/// Gaussian blobs around `centers` with isotropic standard deviation `spread`.
inline litmap::Matrix blobs(const std::vector<std::vector<double>>& centers, std::size_t per_blob, double spread,
                            std::uint64_t seed, bool normalize = false) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, spread);
    litmap::Matrix m;
    for (const auto& c : centers) {
        for (std::size_t i = 0; i < per_blob; ++i) {
            std::vector<double> p(c);
            for (double& v : p) v += noise(rng);
            if (normalize) {
                const double n = litmap::norm(p);
                for (double& v : p) v /= n;
            }
            m.append_row(p);
        }
    }
    return m;
}

/// `count` random unit vectors in `dim` dimensions, scaled by `scale`.
inline std::vector<std::vector<double>> random_centers(std::size_t count, std::size_t dim, double scale, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<double>> out(count, std::vector<double>(dim));
    for (auto& c : out) {
        for (double& v : c) v = g(rng);
        const double n = litmap::norm(c);
        for (double& v : c) v *= scale / n;
    }
    return out;
}

/// httplib server on an ephemeral localhost port, running on its own thread.
class LocalServer {
public:
    LocalServer() = default;
    LocalServer(const LocalServer&) = delete;
    LocalServer& operator=(const LocalServer&) = delete;
    ~LocalServer() { stop(); }

    httplib::Server& server() { return server_; }

    void start() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    int port() const { return port_; }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

struct TopicCorpus {
    litmap::Corpus corpus;
    std::vector<int> topic;             // planted topic per document, corpus order
    std::vector<std::string> key_word;  // dominant word per topic
};

/// Documents drawn from `topics` disjoint vocabularies. Every document also
/// carries generic stop-listed words more often than its topic's key word,
/// so the key word ranks first only after stop-word removal.
inline TopicCorpus topic_corpus(std::size_t topics, std::size_t docs_per_topic, std::uint64_t seed) {
    TopicCorpus out;
    std::mt19937_64 rng(seed);
    const std::vector<std::string> generic = {"model", "models", "ai", "will", "human"};
    for (std::size_t t = 0; t < topics; ++t) out.key_word.push_back("keyword" + std::to_string(t) + "x");
    for (std::size_t i = 0; i < docs_per_topic * topics; ++i) {
        const std::size_t t = i % topics;
        std::uniform_int_distribution<int> pick(0, 39);
        std::string abstract;
        for (int w = 0; w < 4; ++w) abstract += out.key_word[t] + " ";
        for (int w = 0; w < 30; ++w) abstract += "t" + std::to_string(t) + "w" + std::to_string(pick(rng)) + " ";
        for (const auto& g : generic)
            for (int r = 0; r < 6; ++r) abstract += g + " ";
        litmap::Document d;
        d.id = "arxiv:synthetic-" + std::to_string(i);
        d.source = {i % 3 == 0 ? litmap::SourceKind::Forum : litmap::SourceKind::Preprint, "synthetic"};
        d.title = "Study " + std::to_string(i) + " on " + out.key_word[t];
        d.authors = {"Author " + std::to_string(t) + "-" + std::to_string(i % 7)};
        d.published = litmap::Date{2015 + static_cast<int>(i % 7), 1 + static_cast<int>(i % 12), 1};
        d.abstract = abstract;
        out.corpus.upsert(std::move(d));
        out.topic.push_back(static_cast<int>(t));
    }
    return out;
}

}  // namespace testutil
