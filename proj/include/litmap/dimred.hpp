// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

// UMAP projection to two dimensions: exact kNN, smooth-kNN bandwidth
// calibration, fuzzy union of the directed neighborhood graphs, and the
// stochastic layout optimization with negative sampling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <tuple>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "litmap/corpus.hpp"
#include "litmap/error.hpp"
#include "litmap/matrix.hpp"
#include "litmap/parallel.hpp"

namespace litmap::dimred {

inline constexpr double kMinSigma = 1e-3;
inline constexpr double kMaxSigma = 1e6;
inline constexpr double kCalibrationTolerance = 1e-5;
inline constexpr int kBisectionIterations = 64;
/// Below this neighborhood size projections become unstable.
inline constexpr std::size_t kStableNeighbors = 40;

struct CurveParams {
    double a = 0.0;
    double b = 0.0;
};

/// Least-squares fit of 1 / (1 + a d^(2b)) to the target membership curve
/// (1 for d < min_dist, exp(-(d - min_dist) / spread) beyond) sampled at 300
/// points on [0, 3 spread]. Levenberg-Marquardt from (a, b) = (1, 1).
inline CurveParams fit_curve(double min_dist, double spread = 1.0) {
    if (!(min_dist > 0.0) || !(spread > 0.0)) throw Error(ErrorKind::InvalidArgument, "min_dist and spread must be positive");
    constexpr int kSamples = 300;
    std::vector<double> xs(kSamples), ys(kSamples);
    for (int i = 0; i < kSamples; ++i) {
        xs[i] = 3.0 * spread * i / (kSamples - 1);
        ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
    }
    auto sse = [&](double a, double b) {
        double s = 0.0;
        for (int i = 0; i < kSamples; ++i) {
            const double r = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b)) - ys[i];
            s += r * r;
        }
        return s;
    };

    double a = 1.0, b = 1.0, lambda = 1e-3;
    double cost = sse(a, b);
    for (int iter = 0; iter < 500; ++iter) {
        // Normal equations J^T J + lambda diag(J^T J), J^T r.
        double jaa = 0, jab = 0, jbb = 0, ga = 0, gb = 0;
        for (int i = 0; i < kSamples; ++i) {
            const double x = xs[i];
            if (x <= 0.0) continue;  // residual is constant there
            const double u = std::pow(x, 2.0 * b);
            const double den = 1.0 + a * u;
            const double r = 1.0 / den - ys[i];
            const double da = -u / (den * den);
            const double db = -a * u * 2.0 * std::log(x) / (den * den);
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        bool improved = false;
        while (lambda < 1e12) {
            const double m00 = jaa * (1.0 + lambda), m11 = jbb * (1.0 + lambda), m01 = jab;
            const double det = m00 * m11 - m01 * m01;
            if (det == 0.0) {
                lambda *= 10.0;
                continue;
            }
            const double step_a = -(m11 * ga - m01 * gb) / det;
            const double step_b = -(m00 * gb - m01 * ga) / det;
            const double na = a + step_a, nb = b + step_b;
            const double ncost = (na > 0.0 && nb > 0.0) ? sse(na, nb) : INFINITY;
            if (ncost < cost) {
                const double rel = (cost - ncost) / std::max(cost, 1e-300);
                a = na;
                b = nb;
                cost = ncost;
                lambda = std::max(lambda / 10.0, 1e-12);
                improved = true;
                if (rel < 1e-15) return {a, b};
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) break;
    }
    return {a, b};
}

/// Curve parameters for the default min_dist = 0.1, spread = 1, fitted once.
inline CurveParams default_curve() {
    static const CurveParams curve = fit_curve(0.1, 1.0);
    return curve;
}

struct DimRedConfig {
    std::size_t n_neighbors = 250;
    std::size_t n_epochs = 200;
    double min_dist = 0.1;
    double spread = 1.0;
    CurveParams curve = default_curve();
    std::size_t negative_sample_rate = 5;
    std::uint64_t seed = 42;
    double init_range = 10.0;
    double initial_alpha = 1.0;

    /// Refits the curve parameters after min_dist or spread changed.
    void refit_curve() { curve = fit_curve(min_dist, spread); }

    void validate() const {
        if (n_neighbors < 2) throw Error(ErrorKind::InvalidArgument, "n_neighbors must be >= 2");
        if (n_epochs < 1) throw Error(ErrorKind::InvalidArgument, "n_epochs must be >= 1");
        if (negative_sample_rate < 1) throw Error(ErrorKind::InvalidArgument, "negative sample rate must be >= 1");
        if (!(min_dist > 0.0) || !(curve.a > 0.0) || !(curve.b > 0.0))
            throw Error(ErrorKind::InvalidArgument, "min_dist and curve parameters must be positive");
    }
};

/// Exact k-nearest-neighbor graph. Row i of `indices`/`distances` holds the
/// k nearest other points of i in ascending distance.
struct KnnGraph {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::uint32_t> indices;
    std::vector<double> distances;
    std::vector<double> rho;    // filled by calibrate_smooth_knn
    std::vector<double> sigma;  // filled by calibrate_smooth_knn

    std::span<const std::uint32_t> neighbors(std::size_t i) const { return {indices.data() + i * k, k}; }
    std::span<const double> neighbor_distances(std::size_t i) const { return {distances.data() + i * k, k}; }
    bool calibrated() const noexcept { return rho.size() == n && sigma.size() == n; }
};

/// For each point the k nearest others by Euclidean distance, ties broken
/// by lower index. Requires 1 <= k < n; the layout itself needs k >= 2.
inline KnnGraph knn_brute_force(const Matrix& points, std::size_t k, std::size_t threads = default_threads()) {
    const std::size_t n = points.rows();
    if (k < 1 || k >= n)
        throw Error(ErrorKind::TooFewPoints, "need 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    KnnGraph g;
    g.n = n;
    g.k = k;
    g.indices.resize(n * k);
    g.distances.resize(n * k);
    parallel_for(
        n,
        [&](std::size_t, std::size_t begin, std::size_t end) {
            std::vector<std::pair<double, std::uint32_t>> cand(n - 1);
            for (std::size_t i = begin; i < end; ++i) {
                std::size_t c = 0;
                for (std::size_t j = 0; j < n; ++j)
                    if (j != i) cand[c++] = {squared_distance(points.row(i), points.row(j)), static_cast<std::uint32_t>(j)};
                std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
                for (std::size_t m = 0; m < k; ++m) {
                    g.indices[i * k + m] = cand[m].second;
                    g.distances[i * k + m] = std::sqrt(cand[m].first);
                }
            }
        },
        threads);
    return g;
}

/// Sum of exp(-max(0, d - rho) / sigma) over a neighbor row.
inline double membership_sum(std::span<const double> distances, double rho, double sigma) noexcept {
    double s = 0.0;
    for (double d : distances) s += std::exp(-std::max(0.0, d - rho) / sigma);
    return s;
}

/// Bandwidth for one row: solves membership_sum = log2(k) by bisection on
/// [kMinSigma, kMaxSigma], clamping when the target lies outside the range.
inline double solve_sigma(std::span<const double> distances, double rho) {
    const double target = std::log2(static_cast<double>(distances.size()));
    double lo = kMinSigma, hi = kMaxSigma;
    if (membership_sum(distances, rho, hi) <= target) return kMaxSigma;
    if (membership_sum(distances, rho, lo) >= target) return kMinSigma;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < kBisectionIterations; ++it) {
        mid = 0.5 * (lo + hi);
        const double f = membership_sum(distances, rho, mid);
        if (std::abs(f - target) <= kCalibrationTolerance) break;
        (f > target ? hi : lo) = mid;
    }
    return mid;
}

/// rho = first positive neighbor distance (0 if none); sigma from solve_sigma.
inline KnnGraph calibrate_smooth_knn(KnnGraph g) {
    g.rho.assign(g.n, 0.0);
    g.sigma.assign(g.n, kMinSigma);
    for (std::size_t i = 0; i < g.n; ++i) {
        const auto d = g.neighbor_distances(i);
        const auto first_positive = std::find_if(d.begin(), d.end(), [](double x) { return x > 0.0; });
        g.rho[i] = first_positive == d.end() ? 0.0 : *first_positive;
        g.sigma[i] = solve_sigma(d, g.rho[i]);
    }
    return g;
}

inline double fuzzy_union_weight(double w_ij, double w_ji) noexcept { return w_ij + w_ji - w_ij * w_ji; }

struct FuzzyEdge {
    std::uint32_t i;  // i < j
    std::uint32_t j;
    double weight;
};

/// Symmetric sparse membership graph; each unordered pair is stored once.
struct FuzzyGraph {
    std::size_t n = 0;
    std::vector<FuzzyEdge> edges;  // sorted by (i, j)

    double weight(std::size_t a, std::size_t b) const noexcept {
        const auto lo = static_cast<std::uint32_t>(std::min(a, b));
        const auto hi = static_cast<std::uint32_t>(std::max(a, b));
        const auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{lo, hi}, [](const FuzzyEdge& e, const auto& key) {
            return std::pair{e.i, e.j} < key;
        });
        return (it != edges.end() && it->i == lo && it->j == hi) ? it->weight : 0.0;
    }
};

inline FuzzyGraph fuzzy_union(const KnnGraph& g) {
    if (!g.calibrated()) throw Error(ErrorKind::InvalidArgument, "kNN graph is not calibrated");
    struct Directed {
        std::uint32_t lo, hi;
        bool forward;  // lo -> hi
        double w;
    };
    std::vector<Directed> directed;
    directed.reserve(g.n * g.k);
    for (std::size_t i = 0; i < g.n; ++i) {
        const auto nb = g.neighbors(i);
        const auto d = g.neighbor_distances(i);
        for (std::size_t m = 0; m < g.k; ++m) {
            const double w = std::exp(-std::max(0.0, d[m] - g.rho[i]) / g.sigma[i]);
            const auto self = static_cast<std::uint32_t>(i);
            const auto other = nb[m];
            directed.push_back({std::min(self, other), std::max(self, other), self < other, w});
        }
    }
    std::sort(directed.begin(), directed.end(), [](const Directed& x, const Directed& y) {
        return std::tie(x.lo, x.hi, x.forward) < std::tie(y.lo, y.hi, y.forward);
    });
    FuzzyGraph out;
    out.n = g.n;
    for (std::size_t p = 0; p < directed.size();) {
        double fwd = 0.0, bwd = 0.0;
        std::size_t q = p;
        for (; q < directed.size() && directed[q].lo == directed[p].lo && directed[q].hi == directed[p].hi; ++q)
            (directed[q].forward ? fwd : bwd) = directed[q].w;
        const double mu = fuzzy_union_weight(fwd, bwd);
        if (mu > 0.0) out.edges.push_back({directed[p].lo, directed[p].hi, mu});
        p = q;
    }
    return out;
}

using Point2 = std::array<double, 2>;

namespace detail {

// Draws are built from raw engine output rather than <random> distributions,
// so a seed gives the same layout with any standard library.
class LayoutRng {
public:
    explicit LayoutRng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

private:
    std::mt19937_64 engine_;
};

inline double clip(double v) noexcept { return std::clamp(v, -4.0, 4.0); }

}  // namespace detail

/// Stochastic layout: positions start uniform in [-init_range, init_range]^2;
/// each edge direction is sampled on a schedule proportional to its weight
/// (an attractive step plus negative-sample repulsion), with the learning
/// rate decaying linearly to 0. Single-threaded and deterministic per seed.
inline std::vector<Point2> optimize_layout(const FuzzyGraph& graph, const DimRedConfig& cfg) {
    cfg.validate();
    if (graph.n == 0) throw Error(ErrorKind::TooFewPoints, "empty graph");
    detail::LayoutRng rng(cfg.seed);
    std::vector<Point2> y(graph.n);
    for (auto& p : y) {
        p[0] = rng.uniform(-cfg.init_range, cfg.init_range);
        p[1] = rng.uniform(-cfg.init_range, cfg.init_range);
    }
    if (graph.edges.empty()) return y;

    const double a = cfg.curve.a;
    const double b = cfg.curve.b;
    const auto n_epochs = static_cast<double>(cfg.n_epochs);
    double max_w = 0.0;
    for (const auto& e : graph.edges) max_w = std::max(max_w, e.weight);

    // Both directions of every kept edge; weights below max / n_epochs would
    // never be sampled and are dropped up front.
    struct Sample {
        std::uint32_t head, tail;
        double every, every_negative, next, next_negative;
    };
    std::vector<Sample> samples;
    samples.reserve(graph.edges.size() * 2);
    for (const auto& e : graph.edges) {
        if (e.weight < max_w / n_epochs) continue;
        const double every = max_w / e.weight;
        const double every_neg = every / static_cast<double>(cfg.negative_sample_rate);
        samples.push_back({e.i, e.j, every, every_neg, every, every_neg});
        samples.push_back({e.j, e.i, every, every_neg, every, every_neg});
    }

    for (std::size_t epoch = 0; epoch < cfg.n_epochs; ++epoch) {
        const double alpha = cfg.initial_alpha * (1.0 - static_cast<double>(epoch) / n_epochs);
        const auto now = static_cast<double>(epoch);
        for (auto& s : samples) {
            if (s.next > now) continue;
            auto& yj = y[s.head];
            auto& yk = y[s.tail];
            {
                const double dx = yj[0] - yk[0], dy = yj[1] - yk[1];
                const double d2 = dx * dx + dy * dy;
                double coeff = 0.0;
                if (d2 > 0.0) coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
                const double gx = detail::clip(coeff * dx), gy = detail::clip(coeff * dy);
                yj[0] += gx * alpha;
                yj[1] += gy * alpha;
                yk[0] -= gx * alpha;
                yk[1] -= gy * alpha;
            }
            s.next += s.every;

            const auto n_neg = static_cast<std::size_t>((now - s.next_negative) / s.every_negative);
            for (std::size_t p = 0; p < n_neg; ++p) {
                const std::size_t k = rng.index(graph.n);
                if (k == s.head) continue;
                const auto& yn = y[k];
                const double dx = yj[0] - yn[0], dy = yj[1] - yn[1];
                const double d2 = dx * dx + dy * dy;
                if (d2 > 0.0) {
                    const double coeff = 2.0 * b / ((0.001 + d2) * (a * std::pow(d2, b) + 1.0));
                    yj[0] += detail::clip(coeff * dx) * alpha;
                    yj[1] += detail::clip(coeff * dy) * alpha;
                } else {
                    yj[0] += 4.0 * alpha;
                    yj[1] += 4.0 * alpha;
                }
            }
            s.next_negative += static_cast<double>(n_neg) * s.every_negative;
        }
    }
    return y;
}

struct ProjectedPoint {
    std::string doc_id;
    double x = 0.0;
    double y = 0.0;

    bool operator==(const ProjectedPoint&) const = default;
};

struct Projection2D {
    std::vector<ProjectedPoint> points;
    std::vector<std::string> warnings;

    const ProjectedPoint* find(std::string_view id) const {
        for (const auto& p : points)
            if (p.doc_id == id) return &p;
        return nullptr;
    }
};

/// Full pipeline over row-aligned `ids` and `vectors`. A neighborhood at or
/// above n is reduced to n - 1 with a warning.
inline Projection2D project(const std::vector<std::string>& ids, const Matrix& vectors, DimRedConfig cfg,
                            std::size_t threads = default_threads()) {
    if (ids.size() != vectors.rows()) throw Error(ErrorKind::InvalidArgument, "ids and vectors differ in length");
    if (!vectors.all_finite()) throw Error(ErrorKind::DegenerateInput, "non-finite input vector");
    Projection2D out;
    const std::size_t n = vectors.rows();
    if (n < 3) throw Error(ErrorKind::TooFewPoints, "projection needs at least 3 points");
    if (cfg.n_neighbors >= n) {
        out.warnings.push_back("n_neighbors=" + std::to_string(cfg.n_neighbors) + " >= n=" + std::to_string(n) +
                               "; using " + std::to_string(n - 1));
        cfg.n_neighbors = n - 1;
    }
    if (cfg.n_neighbors < kStableNeighbors)
        out.warnings.push_back("n_neighbors=" + std::to_string(cfg.n_neighbors) + " is below " +
                               std::to_string(kStableNeighbors) + "; the layout may be unstable");
    cfg.validate();
    const auto fuzzy = fuzzy_union(calibrate_smooth_knn(knn_brute_force(vectors, cfg.n_neighbors, threads)));
    const auto layout = optimize_layout(fuzzy, cfg);
    out.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.points.push_back({ids[i], layout[i][0], layout[i][1]});
    return out;
}

inline void save_projection(const Projection2D& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open '" + path + "' for writing");
    for (const auto& pt : p.points) {
        ordered_json j;
        j["doc_id"] = pt.doc_id;
        j["x"] = pt.x;
        j["y"] = pt.y;
        out << j.dump() << '\n';
    }
    if (!out) throw Error(ErrorKind::IoFailure, "write to '" + path + "' failed");
}

inline Projection2D load_projection(const std::string& path) {
    Projection2D p;
    for_each_record(path, [&](const ordered_json& j, std::size_t line) {
        try {
            ProjectedPoint pt{j.at("doc_id").get<std::string>(), j.at("x").get<double>(), j.at("y").get<double>()};
            if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) throw Error(ErrorKind::MalformedRecord, "non-finite coordinate", line);
            p.points.push_back(std::move(pt));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::MalformedRecord, e.what(), line);
        }
    });
    return p;
}

}  // namespace litmap::dimred
