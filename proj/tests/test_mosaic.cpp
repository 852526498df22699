#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mzsm/mosaic.hpp"
#include "mzsm/properties.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace mzsm;

namespace {

PolyRegion square(double x0, double y0, double side) { return PolyRegion::box(x0, y0, x0 + side, y0 + side); }

double leaf_mass_sum(const MosaicTree& t) { return total_leaf_mass(leaves(t)); }

// Half-plane to the left of the directed line through p with heading theta,
// as a large square.
PolyRegion half_plane(Point2D p, double theta) {
    const double big = 1e4;
    const Point2D d{std::cos(theta), std::sin(theta)}, n{-d.y, d.x};
    return PolyRegion::polygon({{p.x - big * d.x, p.y - big * d.y},
                                {p.x + big * d.x, p.y + big * d.y},
                                {p.x + big * d.x + big * n.x, p.y + big * d.y + big * n.y},
                                {p.x - big * d.x + big * n.x, p.y - big * d.y + big * n.y}});
}

}  // namespace

TEST(Classify, ThreeCases) {
    const auto node = square(0, 0, 10);
    EXPECT_EQ(classify_overlap(node, square(20, 20, 5)), OverlapCase::NoShadowOverlap);
    EXPECT_EQ(classify_overlap(node, square(10, 0, 5)), OverlapCase::NoShadowOverlap);
    EXPECT_EQ(classify_overlap(node, square(-1, -1, 12)), OverlapCase::FullShadowOverlap);
    EXPECT_EQ(classify_overlap(node, node), OverlapCase::FullShadowOverlap);
    EXPECT_EQ(classify_overlap(node, PolyRegion::box(4, -5, 6, 15)), OverlapCase::SplitOverlap);
    EXPECT_EQ(classify_overlap(node, PolyRegion{}), OverlapCase::NoShadowOverlap);
}

TEST(Classify, DegenerateNodeThrows) {
    EXPECT_THROW(classify_overlap(PolyRegion{}, square(0, 0, 1)), DegenerateNode);
}

TEST(Classify, RandomPairsSatisfyPredicates) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> c(-10.0, 10.0);
    for (int i = 0; i < 300; ++i) {
        const auto node = PolyRegion::polygon(oracle::random_star(rng, {c(rng), c(rng)}, 2, 8, 9));
        const auto shadow = PolyRegion::polygon(oracle::random_convex(rng, {c(rng), c(rng)}, 12, 6));
        const auto r = check_overlap_case(node, shadow);
        EXPECT_TRUE(r.passed) << r.detail;
    }
}

TEST(Expand, IllustrativeExampleHasFourLeaves) {
    const auto setup = scenes::illustrative();
    MosaicTree tree(setup.aoi);
    std::vector<std::size_t> counts{tree.leaf_count()};
    for (const auto& s : setup.shadows) {
        tree.expand_in_place(s.shadow, s.p_los);
        counts.push_back(tree.leaf_count());
    }
    EXPECT_EQ(counts, (std::vector<std::size_t>{1, 2, 3, 4}));
    const auto ls = leaves(tree);
    ASSERT_EQ(ls.size(), 4u);
    std::vector<double> masses;
    for (const auto& l : ls) masses.push_back(l.mass);
    std::sort(masses.begin(), masses.end());
    EXPECT_NEAR(masses[0], 0.008, 1e-15);
    EXPECT_NEAR(masses[1], 0.032, 1e-15);
    EXPECT_NEAR(masses[2], 0.032, 1e-15);
    EXPECT_NEAR(masses[3], 0.128, 1e-15);
    EXPECT_NEAR(violation_probability(tree), 0.8, 1e-12);
}

TEST(Expand, IllustrativeExampleUsesEveryCase) {
    const auto setup = scenes::illustrative();
    MosaicTree tree(setup.aoi);
    std::set<OverlapCase> seen;
    for (const auto& s : setup.shadows) {
        tree.for_each_leaf([&](std::size_t, const MosaicNode& n) { seen.insert(classify_overlap(n.region, s.shadow.region)); });
        tree.expand_in_place(s.shadow, s.p_los);
    }
    EXPECT_EQ(seen.size(), 3u);
}

TEST(Expand, DisjointShadowScalesMasses) {
    const auto setup = scenes::illustrative();
    const auto before = build_mosaic(setup.aoi, setup.shadows);
    const double q = 0.37;
    const auto after = expand(before, {"far", square(500, 500, 10)}, q);
    const auto lb = leaves(before), la = leaves(after);
    ASSERT_EQ(lb.size(), la.size());
    for (std::size_t i = 0; i < lb.size(); ++i) {
        EXPECT_NEAR(la[i].mass, q * lb[i].mass, 1e-15);
        EXPECT_TRUE(regions_equal(la[i].region, lb[i].region));
    }
    EXPECT_NEAR(violation_probability(after) - violation_probability(before), (1 - q) * leaf_mass_sum(before), 1e-12);
}

TEST(Expand, RejectsBadProbability) {
    MosaicTree tree({square(0, 0, 10), 1.0});
    EXPECT_THROW(tree.expand_in_place({"S", square(0, 0, 5)}, 1.5), ProbabilityOutOfRange);
    EXPECT_THROW(tree.expand_in_place({"S", square(0, 0, 5)}, -0.1), ProbabilityOutOfRange);
    EXPECT_THROW(tree.expand_in_place({"S", square(0, 0, 5)}, NAN), ProbabilityOutOfRange);
}

TEST(Expand, RejectsBadAoi) {
    EXPECT_ANY_THROW(MosaicTree({PolyRegion{}, 1.0}));
    EXPECT_THROW(MosaicTree({square(0, 0, 1), 0.0}), ProbabilityOutOfRange);
    EXPECT_THROW(MosaicTree({square(0, 0, 1), 1.5}), ProbabilityOutOfRange);
}

TEST(Expand, NodeInvariants) {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const auto setup = scenes::random_setup(rng, 7);
        const auto tree = build_mosaic(setup.aoi, setup.shadows);
        EXPECT_LE(tree.depth(), setup.shadows.size());
        for (std::size_t i = 0; i < tree.node_count(); ++i) {
            const auto& n = tree.node(i);
            EXPECT_GT(n.region.area(), tree.eps());
            if (n.is_leaf()) continue;
            ASSERT_TRUE(n.los_child && n.nlos_child);
            const auto& a = tree.node(*n.los_child);
            const auto& b = tree.node(*n.nlos_child);
            EXPECT_LE(a.score, n.score);
            EXPECT_LE(b.score, n.score);
            EXPECT_LT(region_intersection(a.region, b.region, 0.0).area(), eps_area());
            EXPECT_NEAR(a.region.area() + b.region.area(), n.region.area(), 1e-9 * n.region.area());
            EXPECT_EQ(a.labels.size(), n.labels.size() + 1);
            EXPECT_EQ(a.labels.back().designation, Designation::LOS);
            EXPECT_EQ(b.labels.back().designation, Designation::NLOS);
        }
    }
}

TEST(Expand, OrderIndependence) {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 5; ++trial) {
        auto setup = scenes::random_setup(rng, 6);
        const auto ref = leaves(build_mosaic(setup.aoi, setup.shadows));
        for (int k = 0; k < 5; ++k) {
            std::shuffle(setup.shadows.begin(), setup.shadows.end(), rng);
            const auto r = match_leaf_multisets(ref, leaves(build_mosaic(setup.aoi, setup.shadows)),
                                                1e-6 * setup.aoi.region.area());
            EXPECT_TRUE(r.passed) << r.detail;
        }
    }
}

TEST(Expand, LineLikeShadowsGrowQuadratically) {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> c(-40.0, 40.0), th(0.0, 2.0 * std::numbers::pi);
    MosaicTree tree({PolyRegion::box(-50, -50, 50, 50), 1.0});
    for (std::size_t j = 1; j <= 12; ++j) {
        tree.expand_in_place({"H" + std::to_string(j), half_plane({c(rng), c(rng)}, th(rng))}, 0.5);
        EXPECT_LE(tree.leaf_count(), 1 + j * (j + 1) / 2);
    }
    EXPECT_GT(tree.leaf_count(), 12u);
}

TEST(Leaves, FreshTree) {
    const Aoi aoi{square(0, 0, 10), 0.9};
    const auto ls = leaves(MosaicTree(aoi));
    ASSERT_EQ(ls.size(), 1u);
    EXPECT_DOUBLE_EQ(ls[0].mass, 0.9);
    EXPECT_TRUE(regions_equal(ls[0].region, aoi.region));
    EXPECT_TRUE(ls[0].labels.empty());
}

TEST(Leaves, LosBeforeNlos) {
    const auto tree = build_mosaic({square(0, 0, 10), 1.0}, {{{"S", PolyRegion::box(5, 0, 20, 10)}, 0.3}});
    const auto ls = leaves(tree);
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_EQ(ls[0].labels.at(0).designation, Designation::LOS);
    EXPECT_NEAR(ls[0].mass, 0.3, 1e-15);
    EXPECT_NEAR(ls[1].mass, 0.7, 1e-15);
}

TEST(Violation, ConsistentShadowsGiveZero) {
    const Aoi aoi{square(0, 0, 10), 1.0};
    const auto tree = build_mosaic(aoi, {{{"A", square(20, 20, 5)}, 1.0}, {{"B", square(-5, -5, 30)}, 0.0}});
    EXPECT_EQ(violation_probability(tree), 0.0);
}

TEST(Violation, TenThousandth) {
    const auto s = scenes::venn4(0xF, 0.9);
    const auto tree = build_mosaic(s.aoi, s.shadows);
    EXPECT_EQ(tree.leaf_count(), 15u);
    EXPECT_NEAR(violation_probability(tree), 0.0001, 1e-12);
    const auto oracle = full_tree_oracle(s.aoi, s.shadows);
    std::size_t empty = 0;
    for (const auto& l : oracle) empty += l.region.empty();
    EXPECT_EQ(empty, 1u);
}

TEST(Violation, PointSixFiveSixOne) {
    const auto s = scenes::venn4(0x0, 0.9);
    const auto tree = build_mosaic(s.aoi, s.shadows);
    EXPECT_NEAR(violation_probability(tree), 0.6561, 1e-12);
}

TEST(Violation, MassConservationAfterEveryExpansion) {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 10; ++trial) {
        const auto setup = scenes::random_setup(rng, 8);
        const auto r = check_mass_conservation(setup.aoi, setup.shadows);
        EXPECT_TRUE(r.passed) << r.detail;
    }
}

TEST(Pmf, SingleLeaf) {
    const auto p = pmf(MosaicTree({square(0, 0, 10), 0.6}));
    ASSERT_EQ(p.entries.size(), 1u);
    EXPECT_DOUBLE_EQ(p.entries[0].conditional_mass, 1.0);
}

TEST(Pmf, UniformAtHalf) {
    std::mt19937_64 rng(61);
    auto setup = scenes::random_setup(rng, 8);
    for (auto& s : setup.shadows) s.p_los = 0.5;
    const auto p = pmf(build_mosaic(setup.aoi, setup.shadows));
    ASSERT_GT(p.entries.size(), 8u);
    for (const auto& e : p.entries) EXPECT_NEAR(e.conditional_mass, p.entries[0].conditional_mass, 1e-15);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
}

TEST(Pmf, AllMassLost) {
    const auto tree = build_mosaic({square(0, 0, 10), 1.0}, {{{"S", square(50, 50, 1)}, 0.0}});
    EXPECT_THROW(pmf(tree), AllMassLost);
}

TEST(Pmf, MatchesOracleNormalization) {
    std::mt19937_64 rng(67);
    const auto setup = scenes::random_setup(rng, 6);
    const auto tree = build_mosaic(setup.aoi, setup.shadows);
    const auto oracle = full_tree_oracle(setup.aoi, setup.shadows);
    double nonempty = 0.0;
    for (const auto& l : oracle) {
        if (!l.region.empty()) nonempty += l.mass;
    }
    const auto ls = leaves(tree);
    const auto p = pmf(ls);
    for (const auto& e : p.entries) EXPECT_NEAR(e.conditional_mass, ls[e.leaf].mass / nonempty, 1e-12);
}

TEST(Pdf, FreshTreeIsUniform) {
    const Aoi aoi{region_difference(square(0, 0, 10), square(4, 4, 2)), 1.0};
    const MosaicTree tree(aoi);
    EXPECT_NEAR(pdf_eval(tree, {1, 1}), 1.0 / 96.0, 1e-15);
    EXPECT_EQ(pdf_eval(tree, {5, 5}), 0.0);
    EXPECT_EQ(pdf_eval(tree, {50, 50}), 0.0);
}

TEST(Pdf, IntegratesToOne) {
    const auto setup = scenes::illustrative();
    const auto tree = build_mosaic(setup.aoi, setup.shadows);
    const MosaicDensity f(tree);
    const double integral = oracle::adaptive_integral([&](const Point2D& p) { return f(p); },
                                                      setup.aoi.region.bounds(), 0.25, 6);
    EXPECT_NEAR(integral, 1.0, 1e-3);
}

TEST(Sampling, SingleLeafIsUniform) {
    const auto pts = sample_mosaic(MosaicTree({square(0, 0, 4), 1.0}), 100000, 5);
    std::vector<int> counts(16, 0);
    for (const auto& p : pts) ++counts[std::min(3, static_cast<int>(p.y)) * 4 + std::min(3, static_cast<int>(p.x))];
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - 6250.0) * (c - 6250.0) / 6250.0;
    EXPECT_LT(chi2, oracle::chi2_critical_001(15));
}

TEST(Sampling, TwoLeafBinomial) {
    const auto tree = build_mosaic({square(0, 0, 10), 1.0}, {{{"S", PolyRegion::box(5, -1, 11, 11)}, 0.7}});
    const int n = 100000;
    const auto pts = sample_mosaic(tree, n, 9);
    int left = 0;
    for (const auto& p : pts) left += p.x < 5.0;
    const double sigma = std::sqrt(n * 0.7 * 0.3);
    EXPECT_NEAR(left, 70000, 3 * sigma);
}

TEST(Sampling, SupportAndDeterminism) {
    const auto setup = scenes::illustrative();
    const auto tree = build_mosaic(setup.aoi, setup.shadows);
    const MosaicDensity f(tree);
    const auto pts = sample_mosaic(tree, 2000, 3);
    for (const auto& p : pts) ASSERT_GT(f(p), 0.0);
    EXPECT_EQ(pts, sample_mosaic(tree, 2000, 3));
}

TEST(Oracle, NoShadows) {
    const Aoi aoi{square(0, 0, 10), 1.0};
    const auto ls = full_tree_oracle(aoi, {});
    ASSERT_EQ(ls.size(), 1u);
    EXPECT_TRUE(regions_equal(ls[0].region, aoi.region));
}

TEST(Oracle, IllustrativeExample) {
    const auto setup = scenes::illustrative();
    const auto ls = full_tree_oracle(setup.aoi, setup.shadows);
    EXPECT_EQ(ls.size(), 8u);
    std::size_t nonempty = 0;
    double total = 0.0;
    for (const auto& l : ls) {
        nonempty += !l.region.empty();
        total += l.mass;
    }
    EXPECT_EQ(nonempty, 4u);
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Oracle, CapExceeded) {
    std::vector<ProcessedShadow> many(13, {{"S", square(0, 0, 1)}, 0.5});
    EXPECT_THROW(full_tree_oracle({square(0, 0, 10), 1.0}, many), OracleCapExceeded);
}

TEST(Oracle, EquivalenceOnRandomScenarios) {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 8; ++trial) {
        const auto setup = scenes::random_setup(rng, 1 + trial % 8);
        const auto r = check_oracle_equivalence(setup.aoi, setup.shadows);
        EXPECT_TRUE(r.passed) << r.detail;
    }
}

TEST(Expected, ClassificationFollowsTruth) {
    const std::vector<ShadowRegion> shadows{{"A", square(0, 0, 10)}, {"B", square(20, 20, 10)}};
    const auto p = expected_classification(shadows, {5, 5}, 0.85);
    EXPECT_DOUBLE_EQ(p[0].p_los, 1.0 - 0.85);
    EXPECT_DOUBLE_EQ(p[1].p_los, 0.85);
    EXPECT_THROW(expected_classification(shadows, {NAN, 0}, 0.85), InvalidGeometry);
}

TEST(Expected, HalfPosteriorIsUniform) {
    std::mt19937_64 rng(73);
    const auto setup = scenes::random_setup(rng, 6);
    std::vector<ShadowRegion> shadows;
    for (const auto& s : setup.shadows) shadows.push_back(s.shadow);
    const auto p = pmf(expected_mosaic(setup.aoi, shadows, {0, 0}, 0.5));
    double lo = 1.0, hi = 0.0;
    for (const auto& e : p.entries) {
        lo = std::min(lo, e.conditional_mass);
        hi = std::max(hi, e.conditional_mass);
    }
    EXPECT_NEAR(hi / lo, 1.0, 1e-9);
}
