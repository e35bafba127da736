// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>

#include "litmap/date.hpp"
#include "litmap/error.hpp"
#include "litmap/ingest/atom.hpp"

namespace litmap::ingest {

struct IngestConfig {
    std::string category = "cs.AI";
    std::size_t page_size = 100;
    std::optional<Date> from;
    std::optional<Date> to;
    std::chrono::milliseconds polite_delay{3000};
    std::string base_url = "http://export.arxiv.org";
    std::string path = "/api/query";
    int max_retries = 3;
    std::chrono::seconds timeout{30};

    void validate() const {
        if (page_size < 1) throw Error(ErrorKind::InvalidArgument, "page size must be >= 1");
        if (polite_delay.count() < 0) throw Error(ErrorKind::InvalidArgument, "polite delay must be >= 0");
        if (category.empty()) throw Error(ErrorKind::InvalidArgument, "category is empty");
        if (from && to && *to < *from) throw Error(ErrorKind::InvalidArgument, "date range is reversed");
    }
};

/// search_query value for the archive API, e.g.
/// "cat:cs.AI AND submittedDate:[202001010000 TO 202012312359]".
inline std::string search_query(const IngestConfig& cfg) {
    std::string q = "cat:" + cfg.category;
    if (cfg.from || cfg.to) {
        auto stamp = [](const Date& d, const char* time) {
            auto iso = d.iso();
            std::string out;
            for (char c : iso)
                if (c != '-') out.push_back(c);
            return out + time;
        };
        const Date lo = cfg.from.value_or(Date{1991, 1, 1});
        const Date hi = cfg.to.value_or(Date{9999, 12, 31});
        q += " AND submittedDate:[" + stamp(lo, "0000") + " TO " + stamp(hi, "2359") + "]";
    }
    return q;
}

/// Paged listing client for the preprint archive. Successive requests from
/// one client are spaced by at least `polite_delay`.
class ArchiveClient {
public:
    explicit ArchiveClient(IngestConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    const IngestConfig& config() const noexcept { return cfg_; }

    /// One page starting at `offset`: at most page_size records in archive
    /// order. NetworkFailure is retryable; RateLimited means back off.
    std::vector<RawRecord> fetch_listing_page(std::size_t offset) {
        wait_politely();
        httplib::Client client(cfg_.base_url);
        client.set_connection_timeout(cfg_.timeout);
        client.set_read_timeout(cfg_.timeout);
        const httplib::Params params{
            {"search_query", search_query(cfg_)},
            {"start", std::to_string(offset)},
            {"max_results", std::to_string(cfg_.page_size)},
        };
        auto res = client.Get(cfg_.path, params, httplib::Headers{});
        last_call_ = std::chrono::steady_clock::now();
        if (!res) throw Error(ErrorKind::NetworkFailure, "GET " + cfg_.base_url + cfg_.path + ": " + httplib::to_string(res.error()));
        if (res->status == 429 || res->status == 503)
            throw Error(ErrorKind::RateLimited, "archive answered HTTP " + std::to_string(res->status));
        if (res->status != 200) throw Error(ErrorKind::NetworkFailure, "archive answered HTTP " + std::to_string(res->status));

        auto records = parse_atom(res->body);
        if (records.size() > cfg_.page_size) records.resize(cfg_.page_size);
        return records;
    }

    /// Pages through the listing until it is exhausted (or `max_pages` is
    /// reached), retrying transient failures, and keeps records inside the
    /// configured date range. `on_page` sees each page as it arrives.
    std::vector<RawRecord> harvest(std::optional<std::size_t> max_pages = std::nullopt,
                                   const std::function<void(std::size_t offset, std::size_t count)>& on_page = {}) {
        std::vector<RawRecord> all;
        std::size_t offset = 0;
        for (std::size_t page = 0; !max_pages || page < *max_pages; ++page) {
            auto records = fetch_with_retry(offset);
            if (on_page) on_page(offset, records.size());
            const auto got = records.size();
            for (auto& r : records)
                if (in_range(r)) all.push_back(std::move(r));
            if (got < cfg_.page_size) break;
            offset += got;
        }
        return all;
    }

private:
    bool in_range(const RawRecord& r) const {
        if (!cfg_.from && !cfg_.to) return true;
        if (!r.date) return false;
        return (!cfg_.from || *r.date >= *cfg_.from) && (!cfg_.to || *r.date <= *cfg_.to);
    }

    std::vector<RawRecord> fetch_with_retry(std::size_t offset) {
        for (int attempt = 0;; ++attempt) {
            try {
                return fetch_listing_page(offset);
            } catch (const Error& e) {
                const bool transient = e.kind() == ErrorKind::NetworkFailure || e.kind() == ErrorKind::RateLimited;
                if (!transient || attempt >= cfg_.max_retries) throw;
                auto backoff = cfg_.polite_delay * (1 << attempt);
                if (e.kind() == ErrorKind::RateLimited) backoff *= 2;
                std::this_thread::sleep_for(backoff);
            }
        }
    }

    void wait_politely() const {
        if (!last_call_) return;
        const auto ready = *last_call_ + cfg_.polite_delay;
        const auto now = std::chrono::steady_clock::now();
        if (now < ready) std::this_thread::sleep_for(ready - now);
    }

    IngestConfig cfg_;
    std::optional<std::chrono::steady_clock::time_point> last_call_;
};

}  // namespace litmap::ingest
