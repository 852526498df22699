#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "mzsm/scenario.hpp"
#include "mzsm/shadows.hpp"
#include "oracles.hpp"

using namespace mzsm;

namespace {

Building box_building(std::string id, double x0, double y0, double x1, double y1, double h) {
    return {std::move(id), PolyRegion::box(x0, y0, x1, y1), h};
}

bool segments_cross(Point2D p, Point2D q, Point2D a, Point2D b) {
    auto orient = [](Point2D o, Point2D u, Point2D v) { return (u.x - o.x) * (v.y - o.y) - (u.y - o.y) * (v.x - o.x); };
    const double d1 = orient(a, b, p), d2 = orient(a, b, q), d3 = orient(p, q, a), d4 = orient(p, q, b);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

// A ground point is blocked when the ray toward the satellite passes through
// the prism, i.e. its horizontal trace up to the roof-height distance enters
// the footprint.
bool ray_blocked(const oracle::Poly& footprint, double height, const Satellite& s, Point2D q) {
    const double deg = std::numbers::pi / 180.0;
    const double reach = height / std::tan(s.elevation_deg * deg);
    const Point2D end{q.x + reach * std::sin(s.azimuth_deg * deg), q.y + reach * std::cos(s.azimuth_deg * deg)};
    if (oracle::winding(footprint, q) != 0 || oracle::winding(footprint, end) != 0) return true;
    for (std::size_t i = 0; i < footprint.size(); ++i) {
        if (segments_cross(q, end, footprint[i], footprint[(i + 1) % footprint.size()])) return true;
    }
    return false;
}

void expect_matches_ray_cast(const oracle::Poly& fp, double h, const Satellite& s, std::uint64_t seed) {
    const Building b{"B", PolyRegion::polygon(fp), h};
    const auto shadow = building_shadow(b, s);
    const Box2D box = shadow.bounds();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(box.min.x - 5, box.max.x + 5), uy(box.min.y - 5, box.max.y + 5);
    std::vector<oracle::Poly> rings;
    for (const auto& f : shadow.faces()) {
        rings.push_back(f.outer.vertices);
        for (const auto& hole : f.holes) rings.push_back(hole.vertices);
    }
    int checked = 0;
    for (int i = 0; i < 4000; ++i) {
        const Point2D q{ux(rng), uy(rng)};
        bool near = false;
        for (const auto& r : rings) near = near || oracle::ring_distance(r, q) < 1e-6;
        if (near) continue;
        ++checked;
        ASSERT_EQ(region_contains(shadow, q), ray_blocked(fp, h, s, q)) << q.x << "," << q.y;
    }
    EXPECT_GT(checked, 3900);
}

}  // namespace

TEST(BuildingShadow, ZenithIsFootprint) {
    const auto b = box_building("B", 0, 0, 10, 10, 50);
    const auto sh = building_shadow(b, {"G", 90.0, 123.0});
    EXPECT_TRUE(regions_equal(sh, b.footprint));
}

TEST(BuildingShadow, SquareEastSatellite) {
    const auto b = box_building("B", 0, 0, 10, 10, 20);
    const Satellite s{"G", 45.0, 90.0};
    const auto sh = building_shadow(b, s);
    EXPECT_NEAR(sh.area(), 300.0, 1e-9);
    EXPECT_LT(symmetric_difference_area(sh, PolyRegion::box(-20, 0, 10, 10)), 1e-9);
    expect_matches_ray_cast({{0, 0}, {10, 0}, {10, 10}, {0, 10}}, 20, s, 1);
}

TEST(BuildingShadow, RayCastOracleConvexAndConcave) {
    const oracle::Poly ell{{0, 0}, {12, 0}, {12, 4}, {4, 4}, {4, 12}, {0, 12}};
    const oracle::Poly tee{{0, 0}, {3, 0}, {3, 6}, {7, 6}, {7, 9}, {-4, 9}, {-4, 6}, {0, 6}};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> el(10.0, 85.0), az(0.0, 360.0), h(5.0, 60.0);
    for (int i = 0; i < 12; ++i) {
        const Satellite s{"G", el(rng), az(rng)};
        expect_matches_ray_cast(i % 2 ? ell : tee, h(rng), s, 100 + i);
    }
    const auto hex = oracle::hexagon(0, 0, 6, 4);
    expect_matches_ray_cast(hex, 30, {"G", 30.0, 200.0}, 7);
}

TEST(BuildingShadow, VanishingHeightApproachesFootprint) {
    const Satellite s{"G", 30.0, 45.0};
    double previous = std::numeric_limits<double>::infinity();
    for (double h : {1.0, 1e-2, 1e-4, 1e-6}) {
        const double a = building_shadow(box_building("B", 0, 0, 10, 10, h), s).area();
        EXPECT_LT(a, previous);
        EXPECT_GE(a, 100.0 - 1e-9);
        previous = a;
    }
    EXPECT_NEAR(previous, 100.0, 1e-3);
}

TEST(BuildingShadow, ContainsFootprintAndShrinksWithElevation) {
    const Building b{"B", PolyRegion::polygon({{0, 0}, {12, 0}, {12, 4}, {4, 4}, {4, 12}, {0, 12}}), 25};
    double previous = std::numeric_limits<double>::infinity();
    for (double el = 5.0; el <= 90.0; el += 5.0) {
        const auto sh = building_shadow(b, {"G", el, 300.0});
        EXPECT_LT(region_difference(b.footprint, sh).area(), 1e-9);
        EXPECT_LE(sh.area(), previous + 1e-9);
        previous = sh.area();
    }
}

TEST(BuildingShadow, RejectsInvalidInputs) {
    const auto b = box_building("B", 0, 0, 1, 1, 10);
    EXPECT_THROW(building_shadow(b, {"G", 0.0, 10.0}), InvalidGeometry);
    EXPECT_THROW(building_shadow(b, {"G", -5.0, 10.0}), InvalidGeometry);
    EXPECT_THROW(building_shadow(b, {"G", 91.0, 10.0}), InvalidGeometry);
    EXPECT_THROW(building_shadow(b, {"G", 45.0, 360.0}), InvalidGeometry);
    EXPECT_THROW(building_shadow(box_building("B", 0, 0, 1, 1, 0.0), {"G", 45.0, 0.0}), InvalidGeometry);
    const Building holed{"H", region_difference(PolyRegion::box(0, 0, 10, 10), PolyRegion::box(4, 4, 6, 6)), 10};
    EXPECT_THROW(building_shadow(holed, {"G", 45.0, 0.0}), InvalidGeometry);
}

TEST(SceneShadow, SingleBuildingEqualsBuildingShadow) {
    const auto b = box_building("B", 0, 0, 10, 5, 30);
    const Satellite s{"G", 40.0, 170.0};
    const auto scene = scene_shadow({b}, s);
    EXPECT_EQ(scene.satellite_id, "G");
    EXPECT_TRUE(regions_equal(scene.region, building_shadow(b, s)));
}

TEST(SceneShadow, DisjointShadowsAdd) {
    const auto a = box_building("A", 0, 0, 5, 5, 10);
    const auto b = box_building("B", 100, 0, 105, 5, 10);
    const Satellite s{"G", 45.0, 0.0};
    const double sum = building_shadow(a, s).area() + building_shadow(b, s).area();
    const auto scene = scene_shadow({a, b}, s);
    EXPECT_NEAR(scene.region.area(), sum, 1e-9);
    EXPECT_EQ(scene.region.face_count(), 2u);
}

TEST(SceneShadow, OverlappingShadowsFollowInclusionExclusion) {
    const auto a = box_building("A", 0, 0, 5, 5, 30);
    const auto b = box_building("B", 0, -12, 5, -7, 30);
    const Satellite s{"G", 30.0, 0.0};  // shadows point south
    const auto sa = building_shadow(a, s), sb = building_shadow(b, s);
    const auto scene = scene_shadow({a, b}, s);
    const double expect = sa.area() + sb.area() - region_intersection(sa, sb).area();
    EXPECT_NEAR(scene.region.area(), expect, 1e-9 * expect);
    EXPECT_LT(scene.region.area(), sa.area() + sb.area());
    EXPECT_GE(scene.region.area(), std::max(sa.area(), sb.area()));
}

TEST(SceneShadow, EmptyBuildingListThrows) { EXPECT_ANY_THROW(scene_shadow({}, {"G", 45.0, 0.0})); }

TEST(Designation, OutsideAndInside) {
    const ShadowRegion sh{"G", PolyRegion::box(0, 0, 10, 10)};
    EXPECT_EQ(truth_designation({20, 20}, sh), Designation::LOS);
    EXPECT_EQ(truth_designation({5, 5}, sh), Designation::NLOS);
    EXPECT_EQ(truth_designation({5, 5}, ShadowRegion{"G", {}}), Designation::LOS);
}

TEST(Designation, IndependentOfReceiver) {
    // Shadows are a function of map and satellite only.
    const auto b = box_building("B", 0, 0, 10, 10, 20);
    const Satellite s{"G", 35.0, 250.0};
    EXPECT_TRUE(regions_equal(scene_shadow({b}, s).region, scene_shadow({b}, s).region));
}

TEST(Designation, ConstructedCanyonSplit) {
    CanyonOptions opt;
    opt.satellites = 14;
    opt.nlos_count = 10;
    const auto s = generate_canyon(opt);
    int nlos = 0;
    for (const auto& sh : scenario_shadows(s)) nlos += truth_designation(s.truth, sh) == Designation::NLOS;
    EXPECT_EQ(nlos, 10);
    EXPECT_EQ(s.satellites.size(), 14u);
}
