// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "litmap/corpus.hpp"
#include "litmap/error.hpp"
#include "litmap/ingest/compose.hpp"
#include "litmap/matrix.hpp"
#include "litmap/parallel.hpp"
#include "litmap/text.hpp"

namespace litmap {

inline constexpr std::size_t kEmbeddingDim = 768;

/// Unit-norm, finite, kEmbeddingDim-dimensional document vector.
class EmbeddingVector {
public:
    static constexpr double kNormTolerance = 1e-6;

    /// Rescales `values` to unit length. Throws BadDimension on a wrong
    /// length and DegenerateInput on non-finite or all-zero input.
    static EmbeddingVector normalized(std::vector<double> values) {
        if (values.size() != kEmbeddingDim)
            throw Error(ErrorKind::BadDimension, "expected " + std::to_string(kEmbeddingDim) + " components, got " +
                                                     std::to_string(values.size()));
        for (double v : values)
            if (!std::isfinite(v)) throw Error(ErrorKind::DegenerateInput, "non-finite embedding component");
        const double n = norm(values);
        if (!(n > 0.0)) throw Error(ErrorKind::DegenerateInput, "zero embedding vector");
        for (double& v : values) v /= n;
        return EmbeddingVector(std::move(values));
    }

    /// Accepts stored values as-is after checking the invariants.
    static EmbeddingVector checked(std::vector<double> values) {
        if (values.size() != kEmbeddingDim) throw Error(ErrorKind::BadDimension, "wrong embedding length");
        for (double v : values)
            if (!std::isfinite(v)) throw Error(ErrorKind::DegenerateInput, "non-finite embedding component");
        if (std::abs(norm(values) - 1.0) > kNormTolerance) throw Error(ErrorKind::DegenerateInput, "embedding is not unit norm");
        return EmbeddingVector(std::move(values));
    }

    static EmbeddingVector basis(std::size_t index, double sign = 1.0) {
        std::vector<double> v(kEmbeddingDim, 0.0);
        v.at(index) = sign < 0 ? -1.0 : 1.0;
        return EmbeddingVector(std::move(v));
    }

    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::size_t size() const noexcept { return values_.size(); }

    EmbeddingVector operator-() const {
        auto v = values_;
        for (double& x : v) x = -x;
        return EmbeddingVector(std::move(v));
    }

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    explicit EmbeddingVector(std::vector<double> v) : values_(std::move(v)) {}
    std::vector<double> values_;
};

/// Dot product of two unit vectors; exactly symmetric.
inline double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) noexcept {
    return dot(u.values(), v.values());
}

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    /// Deterministic per provider; throws EmptyInput on blank text.
    virtual EmbeddingVector embed(std::string_view text) const = 0;
};

namespace detail {
inline constexpr std::uint64_t kSignBasis = 0x84222325cbf29ce4ULL;
}

/// Signed feature hashing over lowercased alphanumeric tokens. When the
/// signed counts cancel to zero (or there are no tokens) the result is the
/// unit basis vector e0.
inline EmbeddingVector baseline_hash_embed(std::string_view text) {
    if (text::is_blank(text)) throw Error(ErrorKind::EmptyInput, "cannot embed empty text");
    std::vector<double> acc(kEmbeddingDim, 0.0);
    for (const auto& token : text::tokenize(text)) {
        const auto index = text::fnv1a64(token) % kEmbeddingDim;
        const double sign = (text::fnv1a64(token, detail::kSignBasis) & 1U) ? -1.0 : 1.0;
        acc[index] += sign;
    }
    bool zero = true;
    for (double v : acc) zero = zero && v == 0.0;
    if (zero) return EmbeddingVector::basis(0);
    return EmbeddingVector::normalized(std::move(acc));
}

class HashEmbedder final : public EmbeddingProvider {
public:
    std::string name() const override { return "hash-v1"; }
    EmbeddingVector embed(std::string_view text) const override { return baseline_hash_embed(text); }
};

/// Splits "http://host:port/path" into ("http://host:port", "/path").
inline std::pair<std::string, std::string> split_url(std::string_view url) {
    const auto scheme = url.find("://");
    const auto path_at = url.find('/', scheme == std::string_view::npos ? 0 : scheme + 3);
    if (path_at == std::string_view::npos) return {std::string(url), "/"};
    return {std::string(url.substr(0, path_at)), std::string(url.substr(path_at))};
}

/// Client for an HTTP embedding service: POST {"text": ...} answered by
/// {"vector": [768 reals]}. Responses are re-normalized. At most
/// `max_in_flight` requests run concurrently per client.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    static constexpr std::ptrdiff_t kMaxInFlightLimit = 256;

    explicit RemoteEmbedder(std::string endpoint, std::ptrdiff_t max_in_flight = 4,
                            std::chrono::seconds timeout = std::chrono::seconds(30))
        : endpoint_(std::move(endpoint)),
          timeout_(timeout),
          slots_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, kMaxInFlightLimit)) {
        if (endpoint_.empty()) throw Error(ErrorKind::ProviderUnavailable, "no endpoint configured");
    }

    std::string name() const override { return "remote:" + endpoint_; }

    EmbeddingVector embed(std::string_view text) const override {
        if (text::is_blank(text)) throw Error(ErrorKind::EmptyInput, "cannot embed empty text");
        const auto [host, path] = split_url(endpoint_);
        const std::string body = nlohmann::json{{"text", std::string(text)}}.dump();

        httplib::Result res = [&] {
            slots_.acquire();
            struct Release {
                std::counting_semaphore<kMaxInFlightLimit>& s;
                ~Release() { s.release(); }
            } release{slots_};
            httplib::Client client(host);
            client.set_connection_timeout(timeout_);
            client.set_read_timeout(timeout_);
            return client.Post(path, body, "application/json");
        }();

        if (!res) throw Error(ErrorKind::ProviderUnavailable, endpoint_ + ": " + httplib::to_string(res.error()));
        if (res->status != 200) throw Error(ErrorKind::ProviderUnavailable, endpoint_ + " answered HTTP " + std::to_string(res->status));
        std::vector<double> values;
        try {
            const auto j = nlohmann::json::parse(res->body);
            values = j.at("vector").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::ProviderUnavailable, std::string("bad response payload: ") + e.what());
        }
        if (values.size() != kEmbeddingDim)
            throw Error(ErrorKind::BadDimension, "provider returned " + std::to_string(values.size()) + " components");
        try {
            return EmbeddingVector::normalized(std::move(values));
        } catch (const Error& e) {
            throw Error(ErrorKind::ProviderUnavailable, e.what());
        }
    }

private:
    std::string endpoint_;
    std::chrono::seconds timeout_;
    mutable std::counting_semaphore<kMaxInFlightLimit> slots_;
};

inline std::string content_hash(std::string_view text) { return text::hex64(text::fnv1a64(text)); }

struct EmbeddingRecord {
    std::string doc_id;
    EmbeddingVector vector;
    std::string provider;
    std::string content_hash;

    bool operator==(const EmbeddingRecord&) const = default;
};

/// Thread-safe (provider, content hash) -> vector cache; last write wins.
class EmbeddingCache {
public:
    std::optional<EmbeddingVector> find(const std::string& provider, const std::string& hash) const {
        std::lock_guard lock(mutex_);
        const auto it = map_.find(key(provider, hash));
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    void put(const std::string& provider, const std::string& hash, const EmbeddingVector& v) {
        std::lock_guard lock(mutex_);
        map_.insert_or_assign(key(provider, hash), v);
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return map_.size();
    }

private:
    static std::string key(const std::string& provider, const std::string& hash) { return provider + '\x1f' + hash; }

    mutable std::mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> map_;
};

struct EmbedCorpusResult {
    std::vector<EmbeddingRecord> records;  // corpus order
    std::vector<std::string> skipped;      // documents with no embeddable text
    std::size_t cache_hits = 0;
};

/// Embeds every document's composed text, reusing cached vectors whose
/// content hash still matches.
inline EmbedCorpusResult embed_corpus(const Corpus& corpus, const EmbeddingProvider& provider, EmbeddingCache& cache,
                                      std::size_t threads = default_threads()) {
    const auto& docs = corpus.documents();
    const std::string pname = provider.name();
    std::vector<std::optional<EmbeddingRecord>> slots(docs.size());
    std::vector<std::size_t> hits(std::max<std::size_t>(1, threads), 0);
    parallel_for(
        docs.size(),
        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                std::string text;
                try {
                    text = ingest::compose_embed_text(docs[i]);
                } catch (const Error& e) {
                    if (e.kind() == ErrorKind::MissingText) continue;
                    throw;
                }
                auto hash = content_hash(text);
                auto cached = cache.find(pname, hash);
                if (cached) ++hits[chunk];
                EmbeddingVector v = cached ? std::move(*cached) : provider.embed(text);
                if (!cached) cache.put(pname, hash, v);
                slots[i] = EmbeddingRecord{docs[i].id, std::move(v), pname, std::move(hash)};
            }
        },
        threads);
    EmbedCorpusResult out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (slots[i]) out.records.push_back(std::move(*slots[i]));
        else out.skipped.push_back(docs[i].id);
    }
    for (auto h : hits) out.cache_hits += h;
    return out;
}

inline void save_embeddings(const std::vector<EmbeddingRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open '" + path + "' for writing");
    for (const auto& r : records) {
        ordered_json j;
        j["doc_id"] = r.doc_id;
        j["provider"] = r.provider;
        j["content_hash"] = r.content_hash;
        j["vector"] = std::vector<double>(r.vector.values().begin(), r.vector.values().end());
        out << j.dump() << '\n';
    }
    if (!out) throw Error(ErrorKind::IoFailure, "write to '" + path + "' failed");
}

inline std::vector<EmbeddingRecord> load_embeddings(const std::string& path) {
    std::vector<EmbeddingRecord> records;
    for_each_record(path, [&](const ordered_json& j, std::size_t line) {
        try {
            auto values = j.at("vector").get<std::vector<double>>();
            records.push_back({j.at("doc_id").get<std::string>(), EmbeddingVector::checked(std::move(values)),
                               j.at("provider").get<std::string>(), j.at("content_hash").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::MalformedRecord, e.what(), line);
        } catch (const Error& e) {
            throw Error(ErrorKind::MalformedRecord, e.what(), line);
        }
    });
    return records;
}

inline void fill_cache(EmbeddingCache& cache, const std::vector<EmbeddingRecord>& records) {
    for (const auto& r : records) cache.put(r.provider, r.content_hash, r.vector);
}

/// Stacks record vectors into an n x kEmbeddingDim matrix (record order).
inline Matrix to_matrix(const std::vector<EmbeddingRecord>& records) {
    Matrix m(records.size(), kEmbeddingDim);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto v = records[i].vector.values();
        std::copy(v.begin(), v.end(), m.row(i).begin());
    }
    return m;
}

}  // namespace litmap
