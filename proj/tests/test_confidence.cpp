#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "mzsm/confidence.hpp"
#include "scenes.hpp"

using namespace mzsm;

namespace {

struct Built {
    std::vector<LeafRecord> leaves;
    Pmf pmf;
};

Built build(const scenes::Setup& s) {
    auto ls = leaves(build_mosaic(s.aoi, s.shadows));
    auto p = pmf(ls);
    return {std::move(ls), std::move(p)};
}

// Two leaves: [0,7]x[0,1] with p_los 0.7 and [7,10]x[0,1] with 0.3.
Built seventy_thirty() {
    return build({{PolyRegion::box(0, 0, 10, 1), 1.0}, {{{"S", PolyRegion::box(7, -1, 11, 2)}, 0.7}}});
}

}  // namespace

TEST(Collection, GammaOneTakesEverything) {
    std::mt19937_64 rng(3);
    const auto b = build(scenes::random_setup(rng, 6));
    const auto c = build_collection(b.pmf, b.leaves, 1.0);
    EXPECT_EQ(c.members.size(), b.pmf.entries.size());
    EXPECT_NEAR(c.achieved, 1.0, 1e-12);
}

TEST(Collection, GreedyTopMass) {
    const auto b = seventy_thirty();
    const auto c = build_collection(b.pmf, b.leaves, 0.68);
    ASSERT_EQ(c.members.size(), 1u);
    EXPECT_NEAR(c.achieved, 0.7, 1e-12);
    EXPECT_NEAR(c.outline.area(), 7.0, 1e-9);
}

TEST(Collection, RejectsBadGamma) {
    const auto b = seventy_thirty();
    EXPECT_THROW(build_collection(b.pmf, b.leaves, 1.01), UnreachableConfidence);
    EXPECT_THROW(build_collection(b.pmf, b.leaves, 0.0), UnreachableConfidence);
}

TEST(Collection, TiesGoToLargerAreaThenIndex) {
    const std::vector<PolyRegion> regions{PolyRegion::box(0, 0, 1, 1), PolyRegion::box(2, 0, 4, 1),
                                          PolyRegion::box(5, 0, 6, 1)};
    const auto c = assemble_collection({{0, 0.4, 1}, {1, 0.4, 2}, {2, 0.2, 1}}, regions, 0.3);
    EXPECT_EQ(c.members, (std::vector<std::size_t>{1}));
    const auto d = assemble_collection({{0, 0.5, 1}, {1, 0.5, 1}}, regions, 0.3);
    EXPECT_EQ(d.members, (std::vector<std::size_t>{0}));
}

TEST(Collection, CoverageAndMinimality) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const auto b = build(scenes::random_setup(rng, 7));
        for (double g : {0.3, 0.5, 0.68, 0.9, 0.95, 0.99}) {
            const auto c = build_collection(b.pmf, b.leaves, g);
            ASSERT_FALSE(c.members.empty());
            EXPECT_GE(c.achieved, g - 1e-12);
            EXPECT_LT(c.achieved - c.member_masses.back(), g);
            EXPECT_TRUE(std::is_sorted(c.member_masses.rbegin(), c.member_masses.rend()));
        }
    }
}

TEST(Collection, MonotoneInGamma) {
    std::mt19937_64 rng(7);
    const auto b = build(scenes::random_setup(rng, 8));
    std::vector<std::size_t> previous;
    double previous_area = 0.0;
    for (double g = 0.05; g <= 1.0; g += 0.05) {
        const auto c = build_collection(b.pmf, b.leaves, std::min(g, 1.0));
        auto sorted = c.members;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_TRUE(std::includes(sorted.begin(), sorted.end(), previous.begin(), previous.end()));
        EXPECT_GE(c.outline.area(), previous_area - 1e-9);
        previous = sorted;
        previous_area = c.outline.area();
    }
}

TEST(Outline, AreaIsSumOfMembers) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const auto b = build(scenes::random_setup(rng, 7));
        const auto c = build_collection(b.pmf, b.leaves, 0.9);
        double sum = 0.0;
        for (std::size_t m : c.members) sum += b.leaves[m].region.area();
        EXPECT_NEAR(outline(c).area(), sum, 1e-9 * sum);
    }
}

TEST(Outline, SingleMemberIsLeaf) {
    const auto b = seventy_thirty();
    const auto c = build_collection(b.pmf, b.leaves, 0.5);
    EXPECT_TRUE(regions_equal(outline(c), b.leaves[c.members[0]].region));
}

TEST(Outline, AdjacentMembersMerge) {
    const auto b = seventy_thirty();
    const auto c = build_collection(b.pmf, b.leaves, 1.0);
    EXPECT_EQ(outline(c).face_count(), 1u);
    EXPECT_NEAR(outline(c).area(), 10.0, 1e-9);
}

TEST(Disjoint, SingleAndSeparated) {
    const std::vector<PolyRegion> regions{PolyRegion::box(0, 0, 1, 1), PolyRegion::box(5, 0, 6, 1)};
    const auto one = assemble_collection({{0, 0.6, 1}, {1, 0.4, 1}}, regions, 0.5);
    EXPECT_FALSE(is_disjoint(one).disjoint);
    EXPECT_EQ(is_disjoint(one).faces, 1u);
    const auto two = assemble_collection({{0, 0.6, 1}, {1, 0.4, 1}}, regions, 1.0);
    EXPECT_TRUE(is_disjoint(two).disjoint);
    EXPECT_EQ(is_disjoint(two).faces, 2u);
}

// A street band with one building shadow across its middle: at 85% the LOS
// leaf is the two street ends, so the 68% collection splits in two and the
// 90% collection pulls in the connecting middle.
TEST(Disjoint, BandedStreetAtEightyFive) {
    const auto b = build({{PolyRegion::box(0, 0, 100, 20), 1.0}, {{{"S", PolyRegion::box(30, -5, 70, 25)}, 0.85}}});
    const auto c68 = build_collection(b.pmf, b.leaves, 0.68);
    const auto c90 = build_collection(b.pmf, b.leaves, 0.90);
    EXPECT_TRUE(is_disjoint(c68).disjoint);
    EXPECT_EQ(is_disjoint(c68).faces, 2u);
    EXPECT_FALSE(is_disjoint(c90).disjoint);
    EXPECT_EQ(is_disjoint(c90).faces, 1u);
}

TEST(Disjoint, FaceCountEventuallyOne) {
    const auto s = scenes::illustrative();
    const auto b = build(s);
    std::size_t faces = 0;
    for (double g = 0.1; g < 1.0; g += 0.1) faces = is_disjoint(build_collection(b.pmf, b.leaves, g)).faces;
    EXPECT_EQ(is_disjoint(build_collection(b.pmf, b.leaves, 1.0)).faces, 1u);
    EXPECT_GE(faces, 1u);
}
