// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "litmap/error.hpp"
#include "litmap/matrix.hpp"
#include "litmap/parallel.hpp"

namespace litmap::cluster {

struct ClusterModel {
    std::size_t k = 0;
    Matrix centroids;  // k x dim
    std::vector<int> labels;
    double inertia = 0.0;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Inertia after every assignment (and the final update), in order.
    std::vector<double> inertia_history;
};

struct KMeansOptions {
    std::size_t max_iters = 300;
    double tol = 1e-6;
    std::size_t threads = default_threads();
};

namespace detail {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

private:
    std::mt19937_64 engine_;
};

inline Matrix kmeans_plus_plus(const Matrix& x, std::size_t k, Rng& rng) {
    const std::size_t n = x.rows();
    Matrix c(k, x.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::vector<char> chosen(n, 0);
    std::size_t pick = rng.index(n);
    for (std::size_t m = 0; m < k; ++m) {
        if (m > 0) {
            double total = 0.0;
            for (double v : d2) total += v;
            if (total > 0.0) {
                const double r = rng.unit() * total;
                double acc = 0.0;
                pick = n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (d2[i] <= 0.0) continue;
                    acc += d2[i];
                    pick = i;
                    if (acc > r) break;
                }
            } else {
                // All remaining mass is zero: take the first unused point.
                pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
                if (pick == n) pick = 0;
            }
        }
        chosen[pick] = 1;
        std::copy(x.row(pick).begin(), x.row(pick).end(), c.row(m).begin());
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(x.row(i), c.row(m)));
    }
    return c;
}

// Nearest centroid per point (ties: lower index) and its squared distance.
inline void assign(const Matrix& x, const Matrix& c, std::vector<int>& labels, std::vector<double>& dist,
                   std::size_t threads) {
    parallel_for(
        x.rows(),
        [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                double best = std::numeric_limits<double>::infinity();
                int arg = 0;
                for (std::size_t m = 0; m < c.rows(); ++m) {
                    const double d = squared_distance(x.row(i), c.row(m));
                    if (d < best) {
                        best = d;
                        arg = static_cast<int>(m);
                    }
                }
                labels[i] = arg;
                dist[i] = best;
            }
        },
        threads);
}

// Serial sum in point order, so the result does not depend on threading.
inline double total(const std::vector<double>& dist) {
    double s = 0.0;
    for (double d : dist) s += d;
    return s;
}

// Centroids as label means. An empty cluster takes over the point farthest
// from its current centroid among clusters that can spare one.
inline Matrix update(const Matrix& x, std::vector<int>& labels, std::vector<double>& dist, std::size_t k) {
    const std::size_t n = x.rows();
    std::vector<std::size_t> counts(k, 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (std::size_t m = 0; m < k; ++m) {
        if (counts[m] != 0) continue;
        std::size_t far = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (counts[static_cast<std::size_t>(labels[i])] < 2) continue;
            if (far == n || dist[i] > dist[far]) far = i;
        }
        if (far == n) throw Error(ErrorKind::KTooLarge, "not enough points to populate every cluster");
        --counts[static_cast<std::size_t>(labels[far])];
        labels[far] = static_cast<int>(m);
        dist[far] = 0.0;
        counts[m] = 1;
    }
    Matrix c(k, x.cols());
    for (std::size_t i = 0; i < n; ++i) {
        auto row = c.row(static_cast<std::size_t>(labels[i]));
        const auto xi = x.row(i);
        for (std::size_t d = 0; d < row.size(); ++d) row[d] += xi[d];
    }
    for (std::size_t m = 0; m < k; ++m)
        for (double& v : c.row(m)) v /= static_cast<double>(counts[m]);
    return c;
}

inline double inertia_of(const Matrix& x, const Matrix& c, const std::vector<int>& labels) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) s += squared_distance(x.row(i), c.row(static_cast<std::size_t>(labels[i])));
    return s;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding. Stops when the largest centroid
/// shift drops below `tol`, assignments stop changing, or max_iters is hit;
/// the returned centroids are always the means of the returned labels.
inline ClusterModel kmeans_fit(const Matrix& x, std::size_t k, std::uint64_t seed, const KMeansOptions& opt = {}) {
    const std::size_t n = x.rows();
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
    if (k > n) throw Error(ErrorKind::KTooLarge, "k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
    if (!x.all_finite()) throw Error(ErrorKind::DegenerateInput, "non-finite input vector");

    detail::Rng rng(seed);
    ClusterModel model;
    model.k = k;
    model.seed = seed;
    model.centroids = detail::kmeans_plus_plus(x, k, rng);
    model.labels.assign(n, 0);
    std::vector<double> dist(n, 0.0);
    detail::assign(x, model.centroids, model.labels, dist, opt.threads);
    model.inertia_history.push_back(detail::total(dist));

    bool means_current = false;  // centroids == means(labels)?
    std::vector<int> next_labels(n, 0);
    for (std::size_t it = 0; it < opt.max_iters; ++it) {
        Matrix next = detail::update(x, model.labels, dist, k);
        double shift = 0.0;
        for (std::size_t m = 0; m < k; ++m)
            shift = std::max(shift, std::sqrt(squared_distance(next.row(m), model.centroids.row(m))));
        model.centroids = std::move(next);
        model.iterations = it + 1;

        detail::assign(x, model.centroids, next_labels, dist, opt.threads);
        model.inertia_history.push_back(detail::total(dist));
        const bool changed = next_labels != model.labels;
        std::swap(model.labels, next_labels);
        means_current = !changed;
        if (!changed || shift < opt.tol) {
            model.converged = true;
            break;
        }
    }
    if (!means_current) {
        model.centroids = detail::update(x, model.labels, dist, k);
        model.inertia_history.push_back(detail::inertia_of(x, model.centroids, model.labels));
    }
    model.inertia = model.inertia_history.back();
    return model;
}

/// Best (lowest-inertia) of `restarts` fits with seeds seed, seed+1, ...
inline ClusterModel kmeans_best_of(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t restarts,
                                   const KMeansOptions& opt = {}) {
    if (restarts == 0) throw Error(ErrorKind::InvalidArgument, "restarts must be >= 1");
    ClusterModel best = kmeans_fit(x, k, seed, opt);
    for (std::size_t r = 1; r < restarts; ++r) {
        auto m = kmeans_fit(x, k, seed + r, opt);
        if (m.inertia < best.inertia) best = std::move(m);
    }
    return best;
}

struct ElbowPoint {
    std::size_t k = 0;
    double inertia = 0.0;
};

/// Best-of-seeds inertia for each k (seeds base_seed .. base_seed + seeds_per_k - 1).
inline std::vector<ElbowPoint> elbow_scan(const Matrix& x, const std::vector<std::size_t>& ks, std::size_t seeds_per_k = 10,
                                          std::uint64_t base_seed = 0, const KMeansOptions& opt = {}) {
    for (auto k : ks)
        if (k > x.rows()) throw Error(ErrorKind::KTooLarge, "k=" + std::to_string(k) + " exceeds n=" + std::to_string(x.rows()));
    std::vector<ElbowPoint> out;
    out.reserve(ks.size());
    for (auto k : ks) out.push_back({k, kmeans_best_of(x, k, base_seed, seeds_per_k, opt).inertia});
    return out;
}

/// The k whose step from the previous scan entry removes the largest
/// fraction of the remaining inertia, (I[k-1] - I[k]) / I[k-1].
inline std::size_t elbow_k(const std::vector<ElbowPoint>& scan) {
    if (scan.size() < 2) throw Error(ErrorKind::InvalidArgument, "elbow needs at least two scan points");
    std::size_t best_k = scan[1].k;
    double best = -1.0;
    for (std::size_t i = 1; i < scan.size(); ++i) {
        const double prev = scan[i - 1].inertia;
        const double drop = prev > 0.0 ? (prev - scan[i].inertia) / prev : 0.0;
        if (drop > best) {
            best = drop;
            best_k = scan[i].k;
        }
    }
    return best_k;
}

/// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "labelings differ in length");
    const double n = static_cast<double>(a.size());
    if (a.size() < 2) return 1.0;
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        ra[a[i]] += 1;
        rb[b[i]] += 1;
    }
    auto c2 = [](double v) { return v * (v - 1) / 2; };
    double index = 0, sa = 0, sb = 0;
    for (const auto& [key, v] : joint) index += c2(v);
    for (const auto& [key, v] : ra) sa += c2(v);
    for (const auto& [key, v] : rb) sb += c2(v);
    const double expected = sa * sb / c2(n);
    const double max_index = 0.5 * (sa + sb);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

}  // namespace litmap::cluster
