#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mzsm/geometry.hpp"
#include "mzsm/triangulate.hpp"
#include "oracles.hpp"

using namespace mzsm;

namespace {

PolyRegion square(double x0, double y0, double side) { return PolyRegion::box(x0, y0, x0 + side, y0 + side); }

double triangle_sum(const PolyRegion& r) {
    double s = 0.0;
    for (const auto& t : triangulate(r)) s += t.area();
    return s;
}

}  // namespace

TEST(Area, UnitSquare) { EXPECT_DOUBLE_EQ(region_area(square(0, 0, 1)), 1.0); }

TEST(Area, RightTriangle) { EXPECT_DOUBLE_EQ(region_area(PolyRegion::polygon({{0, 0}, {4, 0}, {0, 3}})), 6.0); }

TEST(Area, ClockwiseInputIsReoriented) {
    const auto r = PolyRegion::polygon({{0, 0}, {0, 2}, {3, 2}, {3, 0}});
    EXPECT_DOUBLE_EQ(r.area(), 6.0);
    EXPECT_GT(oracle::shoelace(r.faces()[0].outer.vertices), 0.0);
}

TEST(Area, EmptyRegion) {
    PolyRegion e;
    EXPECT_TRUE(e.empty());
    EXPECT_EQ(e.area(), 0.0);
    EXPECT_EQ(e.face_count(), 0u);
}

TEST(Area, MonteCarloStarPolygon) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const auto ring = oracle::random_star(rng, {0, 0}, 3.0, 10.0, 24);
        const auto r = PolyRegion::polygon(ring);
        EXPECT_NEAR(r.area(), oracle::shoelace(ring), 1e-9 * r.area());

        const Box2D b = r.bounds();
        std::uniform_real_distribution<double> ux(b.min.x, b.max.x), uy(b.min.y, b.max.y);
        const int n = 100000;
        int hits = 0;
        for (int i = 0; i < n; ++i) hits += oracle::winding(ring, {ux(rng), uy(rng)}) != 0;
        const double p = static_cast<double>(hits) / n;
        const double estimate = p * b.area();
        const double sigma = std::sqrt(p * (1 - p) / n) * b.area();
        EXPECT_NEAR(r.area(), estimate, 3.0 * sigma);
    }
}

TEST(Intersection, WithEmptyIsEmpty) {
    EXPECT_TRUE(region_intersection(square(0, 0, 10), PolyRegion{}).empty());
    EXPECT_TRUE(region_intersection(PolyRegion{}, square(0, 0, 10)).empty());
}

TEST(Intersection, OverlappingSquares) {
    const auto r = region_intersection(square(0, 0, 10), square(5, 5, 10));
    EXPECT_NEAR(r.area(), 25.0, 1e-12);
    EXPECT_TRUE(regions_equal(r, square(5, 5, 5)));
}

TEST(Intersection, TouchingSquaresAreEmpty) {
    EXPECT_TRUE(region_intersection(square(0, 0, 1), square(1, 0, 1)).empty());
    EXPECT_TRUE(region_intersection(square(0, 0, 1), square(1, 1, 1)).empty());
}

TEST(Intersection, MatchesSutherlandHodgman) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> c(-5.0, 5.0);
    int nonempty = 0;
    for (int i = 0; i < 500; ++i) {
        const auto a = oracle::random_convex(rng, {c(rng), c(rng)}, 8.0, 7);
        const auto b = oracle::random_convex(rng, {c(rng), c(rng)}, 8.0, 7);
        const double expect = std::abs(oracle::shoelace(oracle::sutherland_hodgman(a, b)));
        const auto ra = PolyRegion::polygon(a), rb = PolyRegion::polygon(b);
        const double got = region_intersection(ra, rb, 0.0).area();
        EXPECT_NEAR(got, expect, 1e-9 * std::max(1.0, ra.area())) << "pair " << i;
        nonempty += expect > 0.0;
    }
    EXPECT_GT(nonempty, 300);
}

TEST(Difference, SelfSubtractionIsEmpty) {
    std::mt19937_64 rng(3);
    const auto a = PolyRegion::polygon(oracle::random_star(rng, {0, 0}, 2, 6, 15));
    EXPECT_TRUE(region_difference(a, a).empty());
}

TEST(Difference, HoleInSquare) {
    const auto d = region_difference(square(0, 0, 10), square(4, 4, 2));
    EXPECT_NEAR(d.area(), 96.0, 1e-12);
    ASSERT_EQ(d.face_count(), 1u);
    EXPECT_EQ(d.faces()[0].holes.size(), 1u);
    EXPECT_LT(oracle::shoelace(d.faces()[0].holes[0].vertices), 0.0);
}

TEST(Difference, AreaAdditivity) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> c(-4.0, 4.0);
    for (int i = 0; i < 300; ++i) {
        const auto a = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 12));
        const auto b = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 12));
        const double sum = region_intersection(a, b, 0.0).area() + region_difference(a, b, 0.0).area();
        EXPECT_NEAR(sum, a.area(), 1e-9 * a.area()) << "pair " << i;
    }
}

TEST(Union, WithEmptyIsIdentity) {
    const auto a = square(1, 2, 3);
    EXPECT_TRUE(regions_equal(region_union(a, PolyRegion{}), a));
    EXPECT_TRUE(regions_equal(region_union(PolyRegion{}, a), a));
}

TEST(Union, DisjointSquaresGiveTwoFaces) {
    const auto u = region_union(square(0, 0, 1), square(3, 0, 1));
    EXPECT_EQ(u.face_count(), 2u);
    EXPECT_NEAR(u.area(), 2.0, 1e-12);
}

TEST(Union, SharedEdgeMergesToOneFace) {
    const auto u = region_union(square(0, 0, 1), square(1, 0, 1));
    EXPECT_EQ(u.face_count(), 1u);
    EXPECT_NEAR(u.area(), 2.0, 1e-12);
}

TEST(Union, InclusionExclusion) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> c(-4.0, 4.0);
    for (int i = 0; i < 300; ++i) {
        const auto a = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 12));
        const auto b = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 12));
        const double expect = a.area() + b.area() - region_intersection(a, b, 0.0).area();
        EXPECT_NEAR(region_union(a, b, 0.0).area(), expect, 1e-9 * (a.area() + b.area())) << "pair " << i;
    }
}

TEST(Union, ManyPiecesMatchesFold) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> c(-10.0, 10.0);
    std::vector<PolyRegion> parts;
    for (int i = 0; i < 20; ++i) parts.push_back(PolyRegion::polygon(oracle::random_convex(rng, {c(rng), c(rng)}, 4, 6)));
    PolyRegion fold;
    for (const auto& p : parts) fold = region_union(fold, p, 0.0);
    const auto all = region_union_all(parts, 0.0);
    EXPECT_NEAR(all.area(), fold.area(), 1e-9 * fold.area());
    EXPECT_LT(symmetric_difference_area(all, fold), 1e-9 * fold.area());
}

TEST(Algebra, CommutativityIdempotenceMonotonicity) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> c(-4.0, 4.0);
    for (int i = 0; i < 100; ++i) {
        const auto a = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 10));
        const auto b = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 10));
        const double scale = std::max(a.area(), b.area());
        EXPECT_LT(symmetric_difference_area(region_intersection(a, b), region_intersection(b, a)), 1e-9 * scale);
        EXPECT_LT(symmetric_difference_area(region_union(a, b), region_union(b, a)), 1e-9 * scale);
        EXPECT_LT(symmetric_difference_area(region_intersection(a, a), a), 1e-9 * scale);
        EXPECT_LT(symmetric_difference_area(region_union(a, a), a), 1e-9 * scale);
        EXPECT_LE(region_intersection(a, b).area(), a.area() * (1 + 1e-9));
        EXPECT_LE(region_difference(a, b).area(), a.area() * (1 + 1e-9));
    }
}

TEST(Algebra, DeMorganInBox) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> c(-4.0, 4.0);
    const auto u = PolyRegion::box(-20, -20, 20, 20);
    for (int i = 0; i < 100; ++i) {
        const auto a = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 10));
        const auto b = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 10));
        const double lhs = region_intersection(region_difference(u, a), region_difference(u, b)).area();
        const double rhs = region_difference(u, region_union(a, b)).area();
        EXPECT_NEAR(lhs, rhs, 1e-9 * u.area());
    }
}

TEST(Algebra, SliversArePruned) {
    // Two squares overlapping in a 1e-12 m wide strip.
    const auto r = region_intersection(PolyRegion::box(0, 0, 1, 1), PolyRegion::box(1 - 1e-12, 0, 2, 1));
    EXPECT_TRUE(r.empty());
}

TEST(Contains, ClosedSetSemantics) {
    const auto sq = square(0, 0, 10);
    EXPECT_TRUE(region_contains(sq, {5, 5}));
    EXPECT_TRUE(region_contains(sq, {0, 5}));
    EXPECT_TRUE(region_contains(sq, {10, 10}));
    EXPECT_FALSE(region_contains(sq, {10.001, 5}));
    EXPECT_FALSE(region_contains(PolyRegion{}, {0, 0}));
}

TEST(Contains, InsideHole) {
    const auto d = region_difference(square(0, 0, 10), square(4, 4, 2));
    EXPECT_FALSE(region_contains(d, {5, 5}));
    EXPECT_TRUE(region_contains(d, {1, 1}));
}

TEST(Contains, MatchesWindingNumber) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-12.0, 12.0);
    for (int t = 0; t < 10; ++t) {
        const auto outer = oracle::random_star(rng, {0, 0}, 6, 11, 20);
        const auto hole = oracle::random_star(rng, {0, 0}, 1, 3, 9);
        std::vector<Point2D> hole_cw(hole.rbegin(), hole.rend());
        const auto r = PolyRegion::polygon(outer, {hole_cw});
        for (int i = 0; i < 2000; ++i) {
            const Point2D q{u(rng), u(rng)};
            if (oracle::ring_distance(outer, q) < 1e-6 || oracle::ring_distance(hole, q) < 1e-6) continue;
            EXPECT_EQ(region_contains(r, q), oracle::inside(outer, {hole}, q)) << q.x << "," << q.y;
        }
    }
}

TEST(Validation, RejectsBadRings) {
    EXPECT_THROW(PolyRegion::polygon({{0, 0}, {1, 0}}), InvalidGeometry);
    EXPECT_THROW(PolyRegion::polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), InvalidGeometry);
    EXPECT_THROW(PolyRegion::polygon({{0, 0}, {NAN, 0}, {1, 1}}), InvalidGeometry);
    EXPECT_THROW(PolyRegion::polygon({{0, 0}, {10, 0}, {10, 10}, {0, 10}}, {{{20, 20}, {21, 20}, {21, 21}}}),
                 InvalidGeometry);
    EXPECT_THROW(PolyRegion::box(0, 0, 0, 1), InvalidGeometry);
}

TEST(Validation, OperationResultsAreValid) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> c(-4.0, 4.0);
    for (int i = 0; i < 100; ++i) {
        const auto a = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 12));
        const auto b = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 12));
        std::string why;
        EXPECT_TRUE(region_intersection(a, b).is_valid(&why)) << why;
        EXPECT_TRUE(region_difference(a, b).is_valid(&why)) << why;
        EXPECT_TRUE(region_union(a, b).is_valid(&why)) << why;
    }
}

TEST(Triangulate, SquareGivesTwoTriangles) {
    const auto t = triangulate(square(0, 0, 3));
    EXPECT_EQ(t.size(), 2u);
    EXPECT_NEAR(triangle_sum(square(0, 0, 3)), 9.0, 1e-12);
}

TEST(Triangulate, EmptyRegion) { EXPECT_TRUE(triangulate(PolyRegion{}).empty()); }

TEST(Triangulate, SquareWithHole) {
    EXPECT_NEAR(triangle_sum(region_difference(square(0, 0, 10), square(4, 4, 2))), 96.0, 96e-9);
}

TEST(Triangulate, RandomRegionsSumToArea) {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> c(-4.0, 4.0);
    for (int i = 0; i < 200; ++i) {
        const auto a = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 14));
        const auto b = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 1, 4, 9));
        const auto d = region_difference(a, b);
        EXPECT_NEAR(triangle_sum(d), d.area(), 1e-9 * d.area());
    }
}

TEST(Sampling, ZeroPoints) { EXPECT_TRUE(sample_uniform(square(0, 0, 1), 0, 1).empty()); }

TEST(Sampling, EmptyRegionThrows) { EXPECT_THROW(sample_uniform(PolyRegion{}, 1, 1), EmptyRegion); }

TEST(Sampling, PointsLieInRegion) {
    const auto d = region_difference(region_union(square(0, 0, 10), square(20, 0, 5)), square(4, 4, 2));
    for (const auto& p : sample_uniform(d, 5000, 3)) ASSERT_TRUE(region_contains(d, p));
}

TEST(Sampling, DeterministicPerSeed) {
    const auto a = sample_uniform(square(0, 0, 10), 100, 42);
    const auto b = sample_uniform(square(0, 0, 10), 100, 42);
    const auto c = sample_uniform(square(0, 0, 10), 100, 43);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(Sampling, ChiSquareUniformOnSquare) {
    const int n = 100000;
    const auto pts = sample_uniform(square(0, 0, 4), n, 99);
    std::vector<int> counts(16, 0);
    for (const auto& p : pts) {
        const int ix = std::min(3, static_cast<int>(p.x)), iy = std::min(3, static_cast<int>(p.y));
        ++counts[iy * 4 + ix];
    }
    const double expected = n / 16.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, oracle::chi2_critical_001(15));
}
