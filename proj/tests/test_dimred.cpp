// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#include <algorithm>
#include <catch_amalgamated.hpp>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace litmap;
using namespace litmap::dimred;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

static ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected litmap::Error");
    return ErrorKind::InvalidArgument;
}

static std::vector<std::vector<double>> rows_of(const Matrix& m) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
    return out;
}

TEST_CASE("curve parameters match a reference least-squares fit") {
    // Reference: scipy.optimize.curve_fit on the same 300-point target curve.
    const auto c = default_curve();
    CHECK_THAT(c.a, WithinRel(1.5769434602697652, 1e-6));
    CHECK_THAT(c.b, WithinRel(0.8950608778515733, 1e-6));
    CHECK(kind_of([] { fit_curve(0.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("knn on collinear points") {
    const auto m = Matrix::from_rows({{0.0, 0.0}, {1.0, 0.0}, {3.0, 0.0}});
    const auto g = knn_brute_force(m, 1);
    CHECK(g.neighbors(1)[0] == 0);
    CHECK(g.neighbor_distances(1)[0] == 1.0);
    CHECK(g.neighbors(2)[0] == 1);
}

TEST_CASE("knn with k = n - 1 lists every other point sorted") {
    const auto m = Matrix::from_rows({{0.0}, {5.0}, {1.0}, {2.5}});
    const auto g = knn_brute_force(m, 3);
    CHECK(std::vector<std::uint32_t>(g.neighbors(0).begin(), g.neighbors(0).end()) == std::vector<std::uint32_t>{2, 3, 1});
    const auto d = g.neighbor_distances(0);
    CHECK(std::vector<double>(d.begin(), d.end()) == std::vector<double>{1.0, 2.5, 5.0});
}

TEST_CASE("duplicate points come first at distance zero") {
    const auto m = Matrix::from_rows({{1.0, 1.0}, {4.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}});
    const auto g = knn_brute_force(m, 2);
    CHECK(g.neighbors(0)[0] == 2);
    CHECK(g.neighbor_distances(0)[0] == 0.0);
    CHECK(g.neighbors(2)[0] == 0);
    const auto cal = calibrate_smooth_knn(g);
    CHECK_THAT(cal.rho[0], WithinAbs(std::sqrt(2.0), 1e-15));
}

TEST_CASE("knn argument checks") {
    const auto m = Matrix::from_rows({{0.0}, {1.0}, {2.0}});
    CHECK(kind_of([&] { knn_brute_force(m, 3); }) == ErrorKind::TooFewPoints);
    CHECK(kind_of([&] { knn_brute_force(m, 0); }) == ErrorKind::TooFewPoints);
}

TEST_CASE("knn equals an O(n^2) recomputation") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 20 + rng() % 181, dim = 2 + rng() % 30, k = 1 + rng() % (n - 1);
        Matrix m(n, dim);
        for (std::size_t i = 0; i < n; ++i)
            for (auto& v : m.row(i)) v = g(rng);
        const auto got = knn_brute_force(m, k, 1 + trial % 3);
        const auto want = oracle::knn(rows_of(m), k);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                REQUIRE(got.neighbors(i)[j] == want[i][j].second);
                REQUIRE_THAT(got.neighbor_distances(i)[j], WithinAbs(want[i][j].first, 1e-12));
            }
    }
}

TEST_CASE("sigma for distances 1, 2, 3, 4") {
    // exp(-1/s) = t with t^3 + t^2 + t = 1, t = 0.5436890126920764.
    const std::vector<double> d{1, 2, 3, 4};
    const double sigma = solve_sigma(d, 1.0);
    const double t = 0.543689012692076;
    CHECK_THAT(sigma, WithinAbs(-1.0 / std::log(t), 1e-4));
    CHECK_THAT(oracle::sigma_log_bisection(d, 1.0), WithinRel(1.64101792992849, 1e-12));
    CHECK(std::abs(membership_sum(d, 1.0, sigma) - 2.0) <= kCalibrationTolerance);
}

TEST_CASE("sigma clamps") {
    SECTION("all distances equal rho") {
        const std::vector<double> d{2, 2, 2, 2};
        CHECK(solve_sigma(d, 2.0) == kMinSigma);
    }
    SECTION("a far second neighbor drives sigma to the upper clamp") {
        const std::vector<double> d{1, 1e9};
        // f(sigma) = 1 + exp(-(1e9 - 1)/sigma) stays above 1 for every sigma,
        // so the root lies beyond any finite bound.
        CHECK(solve_sigma(d, 1.0) == kMaxSigma);
    }
}

TEST_CASE("calibration residual is within tolerance off the clamps") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(150, 8);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (auto& v : m.row(i)) v = g(rng);
    // With k = 2 the nearest term alone reaches log2(2), so every row clamps.
    const auto pairs = calibrate_smooth_knn(knn_brute_force(m, 2));
    CHECK(std::all_of(pairs.sigma.begin(), pairs.sigma.end(), [](double s) { return s == kMinSigma; }));
    for (std::size_t k : {3, 5, 15, 60}) {
        const auto cal = calibrate_smooth_knn(knn_brute_force(m, k));
        const double target = std::log2(static_cast<double>(k));
        std::size_t interior = 0;
        for (std::size_t i = 0; i < cal.n; ++i) {
            REQUIRE(cal.sigma[i] >= kMinSigma);
            REQUIRE(cal.rho[i] == cal.neighbor_distances(i)[0]);
            if (cal.sigma[i] == kMinSigma || cal.sigma[i] == kMaxSigma) continue;
            ++interior;
            REQUIRE(std::abs(membership_sum(cal.neighbor_distances(i), cal.rho[i], cal.sigma[i]) - target) <= kCalibrationTolerance);
        }
        CHECK(interior > 0);
    }
}

TEST_CASE("fuzzy union weights") {
    CHECK(fuzzy_union_weight(1.0, 1.0) == 1.0);
    CHECK(fuzzy_union_weight(0.5, 0.0) == 0.5);
    CHECK(fuzzy_union_weight(0.5, 0.5) == 0.75);
}

TEST_CASE("fuzzy graph is symmetric and bounded") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(120, 5);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (auto& v : m.row(i)) v = g(rng);
    const auto cal = calibrate_smooth_knn(knn_brute_force(m, 10));
    const auto fz = fuzzy_union(cal);
    for (const auto& e : fz.edges) {
        REQUIRE(e.i < e.j);
        REQUIRE(e.weight > 0.0);
        REQUIRE(e.weight <= 1.0);
        REQUIRE(fz.weight(e.i, e.j) == fz.weight(e.j, e.i));
    }
    // Recompute every edge from the directed memberships.
    auto directed = [&](std::size_t i, std::size_t j) {
        const auto nb = cal.neighbors(i);
        for (std::size_t m2 = 0; m2 < cal.k; ++m2)
            if (nb[m2] == j) return std::exp(-std::max(0.0, cal.neighbor_distances(i)[m2] - cal.rho[i]) / cal.sigma[i]);
        return 0.0;
    };
    for (const auto& e : fz.edges) {
        const double a = directed(e.i, e.j), b = directed(e.j, e.i);
        REQUIRE_THAT(e.weight, WithinAbs(a + b - a * b, 1e-15));
    }
    CHECK(kind_of([&] { fuzzy_union(knn_brute_force(m, 10)); }) == ErrorKind::InvalidArgument);
}

static Matrix three_blobs(std::uint64_t seed) {
    return testutil::blobs({{0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, {20, 0, 0, 0, 0, 0, 0, 0, 0, 0}, {0, 20, 0, 0, 0, 0, 0, 0, 0, 0}}, 30, 1.0,
                           seed);
}

// Smallest inter-blob centroid distance over largest mean intra-blob distance.
static double separation_ratio(const std::vector<Point2>& y, std::size_t per_blob) {
    const std::size_t blobs = y.size() / per_blob;
    std::vector<Point2> centroid(blobs, {0, 0});
    std::vector<double> spread(blobs, 0.0);
    for (std::size_t b = 0; b < blobs; ++b) {
        for (std::size_t i = 0; i < per_blob; ++i)
            for (int d = 0; d < 2; ++d) centroid[b][d] += y[b * per_blob + i][d] / per_blob;
        double s = 0;
        for (std::size_t i = 0; i < per_blob; ++i)
            for (std::size_t j = i + 1; j < per_blob; ++j)
                s += std::hypot(y[b * per_blob + i][0] - y[b * per_blob + j][0], y[b * per_blob + i][1] - y[b * per_blob + j][1]);
        spread[b] = s / (per_blob * (per_blob - 1) / 2.0);
    }
    double min_inter = INFINITY;
    for (std::size_t a = 0; a < blobs; ++a)
        for (std::size_t b = a + 1; b < blobs; ++b)
            min_inter = std::min(min_inter, std::hypot(centroid[a][0] - centroid[b][0], centroid[a][1] - centroid[b][1]));
    return min_inter / *std::max_element(spread.begin(), spread.end());
}

static std::vector<Point2> layout_of(const Matrix& x, std::size_t k, std::uint64_t seed) {
    DimRedConfig cfg;
    cfg.n_neighbors = k;
    cfg.seed = seed;
    return optimize_layout(fuzzy_union(calibrate_smooth_knn(knn_brute_force(x, k))), cfg);
}

TEST_CASE("layout is deterministic per seed") {
    const auto x = three_blobs(1);
    const auto a = layout_of(x, 15, 7);
    const auto b = layout_of(x, 15, 7);
    CHECK(a == b);
    CHECK(a != layout_of(x, 15, 8));
}

TEST_CASE("a single point stays at its initial position") {
    FuzzyGraph g;
    g.n = 1;
    DimRedConfig cfg;
    cfg.seed = 99;
    const auto y = optimize_layout(g, cfg);
    litmap::dimred::detail::LayoutRng rng(99);
    const double x0 = rng.uniform(-10, 10), y0 = rng.uniform(-10, 10);
    CHECK(y[0] == Point2{x0, y0});
    CHECK(std::abs(x0) <= 10.0);
}

TEST_CASE("planted blobs stay apart in the layout") {
    const auto x = three_blobs(2);
    CHECK(separation_ratio(layout_of(x, 15, 42), 30) > 1.0);
    CHECK(separation_ratio(layout_of(x, 89, 42), 30) > 1.0);
}

TEST_CASE("layout coordinates are finite for 100 seeds") {
    const auto x = three_blobs(4);
    const auto fz = fuzzy_union(calibrate_smooth_knn(knn_brute_force(x, 15)));
    DimRedConfig cfg;
    cfg.n_neighbors = 15;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        cfg.seed = seed;
        for (const auto& p : optimize_layout(fz, cfg)) REQUIRE((std::isfinite(p[0]) && std::isfinite(p[1])));
    }
}

TEST_CASE("project reduces the neighborhood and warns") {
    const auto x = three_blobs(5);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < x.rows(); ++i) ids.push_back("d" + std::to_string(i));
    DimRedConfig cfg;
    const auto p = project(ids, x, cfg);
    REQUIRE(p.points.size() == 90);
    REQUIRE(p.warnings.size() == 1);
    CHECK(p.warnings[0].find("using 89") != std::string::npos);
    cfg.n_neighbors = 10;
    CHECK(project(ids, x, cfg).warnings.size() == 1);
    cfg.n_neighbors = 40;
    CHECK(project(ids, x, cfg).warnings.empty());
    CHECK(kind_of([&] { project({"a", "b"}, Matrix::from_rows({{0.0}, {1.0}}), cfg); }) == ErrorKind::TooFewPoints);
    CHECK(p.find("d3") == &p.points[3]);

    testutil::TempDir dir;
    save_projection(p, dir.file("p.jsonl"));
    CHECK(load_projection(dir.file("p.jsonl")).points == p.points);
}
