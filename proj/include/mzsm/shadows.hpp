#pragma once

// Ground-plane GNSS shadows of extruded-prism buildings. A satellite is a
// direction (elevation, azimuth); at street scale the direction is the same
// everywhere in the area of interest, so shadows do not depend on where the
// receiver is.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mzsm/errors.hpp"
#include "mzsm/geometry.hpp"

namespace mzsm {

struct Building {
    std::string id;
    PolyRegion footprint;  // one face, no holes
    double height = 0.0;   // meters
};

// Azimuth is clockwise from +y (north / along-street); +x is east.
struct Satellite {
    std::string id;
    double elevation_deg = 90.0;
    double azimuth_deg = 0.0;
};

struct ShadowRegion {
    std::string satellite_id;
    PolyRegion region;
};

enum class Designation { LOS, NLOS };

inline const char* to_string(Designation d) { return d == Designation::LOS ? "LOS" : "NLOS"; }

inline void validate(const Satellite& s) {
    if (!std::isfinite(s.elevation_deg) || s.elevation_deg <= 0.0 || s.elevation_deg > 90.0) {
        throw InvalidGeometry("satellite '" + s.id + "': elevation must lie in (0, 90] degrees");
    }
    if (!std::isfinite(s.azimuth_deg) || s.azimuth_deg < 0.0 || s.azimuth_deg >= 360.0) {
        throw InvalidGeometry("satellite '" + s.id + "': azimuth must lie in [0, 360) degrees");
    }
}

inline void validate(const Building& b) {
    if (!std::isfinite(b.height) || b.height <= 0.0) {
        throw InvalidGeometry("building '" + b.id + "': height must be finite and positive");
    }
    if (b.footprint.face_count() != 1 || b.footprint.area() <= 0.0) {
        throw InvalidGeometry("building '" + b.id + "': footprint must be a single face with positive area");
    }
    if (!b.footprint.geometry().front().inners().empty()) {
        throw InvalidGeometry("building '" + b.id + "': footprint must not have holes");
    }
}

// Horizontal displacement of a roof point's shadow: length h / tan(elevation),
// pointing away from the satellite azimuth.
inline Point2D shadow_offset(double height, const Satellite& s) {
    if (s.elevation_deg >= 90.0) return {0.0, 0.0};
    constexpr double deg = std::numbers::pi / 180.0;
    const double len = height / std::tan(s.elevation_deg * deg);
    const double az = s.azimuth_deg * deg;
    return {-len * std::sin(az), -len * std::cos(az)};
}

// Ground region swept by the footprint translated along t * offset, t in
// [0, 1]: the footprint united with one quadrilateral per footprint edge.
// Correct for non-convex footprints.
inline PolyRegion building_shadow(const Building& b, const Satellite& s) {
    validate(s);
    validate(b);
    const Point2D v = shadow_offset(b.height, s);
    if (std::hypot(v.x, v.y) <= 1e-12) return b.footprint;

    std::vector<PolyRegion> parts;
    parts.push_back(b.footprint);
    const auto ring = b.footprint.faces().front().outer.vertices;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2D& p = ring[i];
        const Point2D& q = ring[(i + 1) % n];
        const double twice_area = std::abs((q.x - p.x) * v.y - (q.y - p.y) * v.x);
        if (twice_area <= 1e-12) continue;  // edge parallel to the sweep
        parts.push_back(PolyRegion::polygon({p, q, {q.x + v.x, q.y + v.y}, {p.x + v.x, p.y + v.y}}));
    }
    return region_union_all(std::move(parts), 0.0);
}

inline ShadowRegion scene_shadow(const std::vector<Building>& buildings, const Satellite& s) {
    if (buildings.empty()) throw InvalidGeometry("scene_shadow needs at least one building");
    std::vector<PolyRegion> parts;
    parts.reserve(buildings.size());
    for (const auto& b : buildings) parts.push_back(building_shadow(b, s));
    return {s.id, region_union_all(std::move(parts))};
}

inline Designation truth_designation(const Point2D& p, const ShadowRegion& shadow) {
    return region_contains(shadow.region, p) ? Designation::NLOS : Designation::LOS;
}

}  // namespace mzsm
