#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mzsm/baselines.hpp"
#include "mzsm/gmm.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace mzsm;

namespace {

std::vector<Point2D> two_blobs(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::vector<Point2D> x;
    for (std::size_t i = 0; i < n; ++i) {
        const double cx = coin(rng) ? 10.0 : -10.0;
        x.push_back({cx + z(rng), z(rng)});
    }
    return x;
}

// Street with a wide shadow in the middle that is very likely NLOS: nearly
// all of the mass sits at the two ends.
MosaicTree bimodal_street() {
    return build_mosaic({PolyRegion::box(0, 0, 100, 20), 1.0}, {{{"S", PolyRegion::box(10, -5, 90, 25)}, 0.99}});
}

GmmModel single_gaussian(Point2D mean, double var) {
    GmmModel m;
    m.weights = {1.0};
    m.means = {mean};
    m.covariances = {Eigen::Matrix2d::Identity() * var};
    return m;
}

}  // namespace

TEST(Gmm, SingleComponentIsSampleMoments) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> zx(3.0, 2.0), zy(-1.0, 0.5);
    std::vector<Point2D> x;
    for (int i = 0; i < 5000; ++i) {
        const double a = zx(rng);
        x.push_back({a, zy(rng) + 0.3 * a});
    }
    double mx = 0, my = 0;
    for (const auto& p : x) {
        mx += p.x;
        my += p.y;
    }
    mx /= x.size();
    my /= x.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : x) {
        sxx += (p.x - mx) * (p.x - mx);
        sxy += (p.x - mx) * (p.y - my);
        syy += (p.y - my) * (p.y - my);
    }
    sxx /= x.size();
    sxy /= x.size();
    syy /= x.size();
    const auto m = fit_gmm(x, 1, 5, 2);
    ASSERT_EQ(m.k(), 1u);
    EXPECT_NEAR(m.weights[0], 1.0, 1e-12);
    EXPECT_NEAR(m.means[0].x, mx, 1e-6);
    EXPECT_NEAR(m.means[0].y, my, 1e-6);
    EXPECT_NEAR(m.covariances[0](0, 0), sxx, 1e-6);
    EXPECT_NEAR(m.covariances[0](0, 1), sxy, 1e-6);
    EXPECT_NEAR(m.covariances[0](1, 1), syy, 1e-6);
}

TEST(Gmm, RecoversSyntheticMixture) {
    const auto m = fit_gmm(two_blobs(20000, 3), 2, 5, 4);
    ASSERT_EQ(m.k(), 2u);
    const std::size_t left = m.means[0].x < m.means[1].x ? 0 : 1, right = 1 - left;
    EXPECT_NEAR(m.means[left].x, -10.0, 0.5);
    EXPECT_NEAR(m.means[left].y, 0.0, 0.5);
    EXPECT_NEAR(m.means[right].x, 10.0, 0.5);
    EXPECT_NEAR(m.means[right].y, 0.0, 0.5);
    EXPECT_NEAR(m.weights[left], 0.5, 0.05);
    EXPECT_NEAR(m.weights[right], 0.5, 0.05);
}

TEST(Gmm, LogLikelihoodNonDecreasing) {
    const auto fit = fit_gmm_detailed(two_blobs(5000, 5), 3, 6);
    for (const auto& rep : fit.replicates) {
        ASSERT_FALSE(rep.log_likelihood_trace.empty());
        for (std::size_t i = 1; i < rep.log_likelihood_trace.size(); ++i) {
            const double prev = rep.log_likelihood_trace[i - 1];
            EXPECT_GE(rep.log_likelihood_trace[i], prev - 1e-9 * std::abs(prev));
        }
    }
}

TEST(Gmm, RejectsTooFewSamples) {
    EXPECT_THROW(fit_gmm(two_blobs(15, 1), 2, 5, 1), SingularFit);
    EXPECT_THROW(fit_gmm(two_blobs(100, 1), 0, 5, 1), SingularFit);
}

TEST(Gmm, DeterministicForSeed) {
    const auto x = two_blobs(3000, 8);
    const auto a = fit_gmm(x, 2, 3, 9), b = fit_gmm(x, 2, 3, 9);
    EXPECT_EQ(a.means[0].x, b.means[0].x);
    EXPECT_EQ(a.weights[1], b.weights[1]);
}

TEST(TruncatedPdf, ZeroOutsideAndNormalized) {
    const Box2D box{{0, 0}, {40, 20}};
    GmmModel m = single_gaussian({10, 5}, 30.0);
    m.weights = {0.6, 0.4};
    m.means.push_back({35, 18});
    m.covariances.push_back(Eigen::Matrix2d::Identity() * 8.0);
    const TruncatedGmm f(m, box, 0.5);
    EXPECT_EQ(f({-1, 5}), 0.0);
    EXPECT_EQ(f({10, 25}), 0.0);
    EXPECT_GT(f({10, 5}), 0.0);
    const double integral = oracle::adaptive_integral([&](const Point2D& p) { return f(p); }, box, 0.1, 0);
    EXPECT_NEAR(integral, 1.0, 1e-3);
    EXPECT_DOUBLE_EQ(truncated_gmm_pdf(m, box, {10, 5}), f({10, 5}));
}

TEST(TruncatedPdf, WideGaussianApproachesUniform) {
    const Box2D box{{0, 0}, {10, 10}};
    for (double var : {1e4, 1e6, 1e8}) {
        const TruncatedGmm f(single_gaussian({5, 5}, var), box);
        const double err = std::max(std::abs(f({5, 5}) - 0.01), std::abs(f({0.1, 9.9}) - 0.01));
        EXPECT_LT(err, 0.01 * 100.0 / var * 10.0);
    }
}

TEST(DeltaPercent, NearZeroForUniformLimit) {
    const MosaicTree tree({PolyRegion::box(0, 0, 10, 10), 1.0});
    EXPECT_LT(integrated_percent_error(single_gaussian({5, 5}, 1e8), tree), 1e-5);
}

TEST(DeltaPercent, BoundedForEveryFit) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 4; ++trial) {
        const auto s = scenes::random_setup(rng, 6);
        const auto tree = build_mosaic(s.aoi, s.shadows);
        const auto x = sample_mosaic(tree, 5000, 100 + trial);
        for (std::size_t k : {1u, 2u, 3u}) {
            const auto m = fit_gmm(x, k, 3, 7);
            for (double res : {2.0, 1.0, 0.5}) {
                const double d = integrated_percent_error(m, tree, res);
                EXPECT_GE(d, 0.0);
                EXPECT_LE(d, 2.0);
            }
        }
    }
}

TEST(DeltaPercent, SingleComponentMissesBimodalMosaic) {
    const auto tree = bimodal_street();
    const auto x = sample_mosaic(tree, 20000, 3);
    const double d1 = integrated_percent_error(fit_gmm(x, 1, 5, 1), tree);
    const double d2 = integrated_percent_error(fit_gmm(x, 2, 5, 1), tree);
    EXPECT_GT(d1, 0.9);
    EXPECT_GT(d1, d2);
}

TEST(Sagbsm, SingleSatelliteBranches) {
    const std::vector<ShadowRegion> sh{{"G", PolyRegion::box(0, 0, 10, 10)}};
    EXPECT_DOUBLE_EQ(sagbsm_score({20, 20}, sh, {0.85}), 0.85);
    EXPECT_DOUBLE_EQ(sagbsm_score({5, 5}, sh, {0.85}), 1.0 - 0.85);
    EXPECT_THROW(sagbsm_score({5, 5}, sh, {0.85, 0.5}), ProbabilityOutOfRange);
}

TEST(Sagbsm, ProductMatchesLoop) {
    std::mt19937_64 rng(17);
    const auto s = scenes::random_setup(rng, 8);
    std::vector<ShadowRegion> shadows;
    std::vector<double> p;
    std::vector<oracle::Poly> rings;
    for (const auto& ps : s.shadows) {
        shadows.push_back(ps.shadow);
        p.push_back(ps.p_los);
        rings.push_back(ps.shadow.region.faces().front().outer.vertices);
    }
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 500; ++i) {
        const Point2D q{u(rng), u(rng)};
        double expect = 1.0;
        for (std::size_t j = 0; j < rings.size(); ++j) expect *= oracle::winding(rings[j], q) != 0 ? 1 - p[j] : p[j];
        EXPECT_NEAR(sagbsm_score(q, shadows, p), expect, 1e-15);
    }
}

TEST(Grid, SingleCell) {
    const Aoi aoi{PolyRegion::box(0, 0, 10, 10), 1.0};
    const auto g = build_grid(aoi, 10.0, {{"G", PolyRegion::box(0, 0, 3, 3)}}, {0.85});
    ASSERT_EQ(g.cells.size(), 1u);
    EXPECT_DOUBLE_EQ(g.pmf[0], 1.0);
}

TEST(Grid, CellCountArithmetic) {
    const Aoi aoi{PolyRegion::box(0, 0, 100, 60), 1.0};
    EXPECT_EQ(build_grid(aoi, 10.0, {}, {}).cells.size(), 60u);
    EXPECT_EQ(build_grid(aoi, 5.0, {}, {}).cells.size(), 240u);
    const auto g = build_grid(aoi, 7.0, {}, {});
    EXPECT_EQ(g.cells.size(), 15u * 9u);
    double area = 0.0;
    for (const auto& c : g.cells) area += c.square.area();
    EXPECT_NEAR(area, 6000.0, 1e-9);
}

TEST(Grid, FootprintCellsScoreZeroAndPmfSumsToOne) {
    const Aoi aoi{region_difference(PolyRegion::box(0, 0, 30, 30), PolyRegion::box(10, 10, 20, 20)), 1.0};
    const auto g = build_grid(aoi, 10.0, {{"G", PolyRegion::box(0, 0, 30, 5)}}, {0.7});
    ASSERT_EQ(g.cells.size(), 9u);
    EXPECT_EQ(g.cells[4].score, 0.0);
    double sum = 0.0;
    for (double p : g.pmf) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

// Grid cells carry the leaf's combination score per unit area, so as cells
// shrink the grid mass collected inside each leaf approaches mass x area,
// renormalized.
TEST(Grid, ConvergesToAreaWeightedLeafMass) {
    const scenes::Setup s{{PolyRegion::box(0, 0, 50, 50), 1.0},
                          {{{"A", PolyRegion::polygon(oracle::hexagon(18, 21, 13, 9))}, 0.8},
                           {{"B", PolyRegion::polygon(oracle::hexagon(31, 27, 10, 14))}, 0.3}}};
    const auto ls = leaves(build_mosaic(s.aoi, s.shadows));
    std::vector<double> want;
    double total = 0.0;
    for (const auto& l : ls) total += l.mass * l.region.area();
    for (const auto& l : ls) want.push_back(l.mass * l.region.area() / total);
    std::vector<ShadowRegion> shadows{s.shadows[0].shadow, s.shadows[1].shadow};
    double previous = 1.0;
    for (double res : {10.0, 5.0, 2.5, 1.25, 0.625}) {
        const auto g = build_grid(s.aoi, res, shadows, {0.8, 0.3});
        std::vector<double> got(ls.size(), 0.0);
        for (std::size_t c = 0; c < g.cells.size(); ++c) {
            for (std::size_t i = 0; i < ls.size(); ++i) {
                if (region_contains(ls[i].region, g.cells[c].center)) got[i] += g.pmf[c];
            }
        }
        double tv = 0.0;
        for (std::size_t i = 0; i < ls.size(); ++i) tv += 0.5 * std::abs(got[i] - want[i]);
        EXPECT_LT(tv, previous + 0.01) << res;
        previous = tv;
    }
    EXPECT_LT(previous, 0.02);
}

TEST(GridCollection, GammaOneAndTopCell) {
    const Aoi aoi{PolyRegion::box(0, 0, 20, 10), 1.0};
    const auto g = build_grid(aoi, 10.0, {{"G", PolyRegion::box(10, 0, 20, 10)}}, {0.9});
    ASSERT_EQ(g.cells.size(), 2u);
    EXPECT_NEAR(g.pmf[0], 0.9, 1e-12);
    const auto top = grid_collection(g, 0.5);
    EXPECT_EQ(top.members, (std::vector<std::size_t>{0}));
    const auto all = grid_collection(g, 1.0);
    EXPECT_EQ(all.members.size(), 2u);
    EXPECT_NEAR(all.outline.area(), 200.0, 1e-9);
}

TEST(GridCollection, GammaOneSkipsZeroCells) {
    const Aoi aoi{PolyRegion::box(0, 0, 30, 10), 1.0};
    const auto g = build_grid(aoi, 10.0, {{"G", PolyRegion::box(20, 0, 30, 10)}}, {1.0});
    EXPECT_EQ(grid_collection(g, 1.0).members.size(), 2u);
}

TEST(Iou, AnalyticCases) {
    const auto a = PolyRegion::box(0, 0, 10, 10);
    EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
    EXPECT_DOUBLE_EQ(iou(a, PolyRegion::box(20, 0, 30, 10)), 0.0);
    EXPECT_NEAR(iou(a, PolyRegion::box(5, 5, 15, 15)), 1.0 / 7.0, 1e-12);
    EXPECT_DOUBLE_EQ(iou(a, PolyRegion{}), 0.0);
    EXPECT_THROW(iou(PolyRegion{}, PolyRegion{}), BothEmpty);
}

TEST(Iou, SymmetricAndBounded) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> c(-10, 10);
    for (int i = 0; i < 200; ++i) {
        const auto a = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 9, 8));
        const auto b = PolyRegion::polygon(oracle::random_convex(rng, {c(rng), c(rng)}, 8, 7));
        const double ab = iou(a, b);
        EXPECT_NEAR(ab, iou(b, a), 1e-12);
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
    }
}
