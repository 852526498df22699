#pragma once

// Planar polygon-region kernel: possibly disjoint polygon sets with holes,
// boolean operations, area, and closed-set membership. Coordinates are a
// local metric frame (x cross-street, y along-street).

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/register/point.hpp>
#include <clipper2/clipper.h>

#include "mzsm/errors.hpp"

namespace mzsm {

struct Point2D {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2D&, const Point2D&) = default;
};

}  // namespace mzsm

BOOST_GEOMETRY_REGISTER_POINT_2D(mzsm::Point2D, double, boost::geometry::cs::cartesian, x, y)

namespace mzsm {

namespace bg = boost::geometry;

inline constexpr double kDefaultEpsArea = 1e-9;

// Area below which a region (or a face, or a hole) counts as empty.
// MZSM_EPS_AREA overrides the default once per process.
inline double eps_area() {
    static const double value = [] {
        if (const char* env = std::getenv("MZSM_EPS_AREA")) {
            char* end = nullptr;
            const double v = std::strtod(env, &end);
            if (end != env && std::isfinite(v) && v > 0.0) return v;
        }
        return kDefaultEpsArea;
    }();
    return value;
}

enum class RingOrientation { Outer, Hole };

// Open vertex list (first != last); closure is implicit.
struct Ring {
    std::vector<Point2D> vertices;
    RingOrientation orientation = RingOrientation::Outer;
};

struct Face {
    Ring outer;
    std::vector<Ring> holes;
};

struct Box2D {
    Point2D min{};
    Point2D max{};

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
    bool contains(const Point2D& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
    // Overlap with positive area; touching boxes do not count.
    bool overlaps(const Box2D& o) const {
        return min.x < o.max.x && o.min.x < max.x && min.y < o.max.y && o.min.y < max.y;
    }
    Point2D center() const { return {0.5 * (min.x + max.x), 0.5 * (min.y + max.y)}; }
};

struct Triangle {
    Point2D a, b, c;
    double area() const {
        return 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    }
};

namespace detail {

using BgPolygon = bg::model::polygon<Point2D, /*ClockWise=*/false, /*Closed=*/true>;
using BgMulti = bg::model::multi_polygon<BgPolygon>;
using BgRing = BgPolygon::ring_type;
using BgBox = bg::model::box<Point2D>;

inline double cross(const Point2D& o, const Point2D& a, const Point2D& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double signed_area(const std::vector<Point2D>& pts) {
    double s = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        s += (pts[j].x - pts[i].x) * (pts[j].y + pts[i].y);
    }
    return 0.5 * s;
}

// Strips duplicate and exactly-collinear vertices from a closed ring.
// Returns false when fewer than three distinct vertices remain.
inline bool clean_ring(BgRing& ring) {
    if (ring.size() < 4) return false;
    std::vector<Point2D> pts(ring.begin(), ring.end() - 1);
    bool changed = true;
    while (changed && pts.size() >= 3) {
        changed = false;
        std::vector<Point2D> kept;
        kept.reserve(pts.size());
        const std::size_t n = pts.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point2D& prev = kept.empty() ? pts[(i + n - 1) % n] : kept.back();
            const Point2D& cur = pts[i];
            const Point2D& next = pts[(i + 1) % n];
            const double la = std::hypot(cur.x - prev.x, cur.y - prev.y);
            const double lb = std::hypot(next.x - cur.x, next.y - cur.y);
            if (la <= 1e-12 || lb <= 1e-12 ||
                std::abs(cross(prev, cur, next)) <= 1e-12 * la * lb) {
                changed = true;
                continue;
            }
            kept.push_back(cur);
        }
        pts.swap(kept);
    }
    if (pts.size() < 3) return false;
    ring.assign(pts.begin(), pts.end());
    ring.push_back(pts.front());
    return true;
}

// Removes slivers, empty holes and collinear clutter, then restores the
// ring orientation convention (outer CCW, holes CW).
inline BgMulti normalize(BgMulti in, double eps) {
    BgMulti out;
    out.reserve(in.size());
    for (auto& poly : in) {
        if (!clean_ring(poly.outer())) continue;
        if (std::abs(bg::area(poly.outer())) < eps) continue;
        BgPolygon kept;
        kept.outer() = std::move(poly.outer());
        for (auto& hole : poly.inners()) {
            if (!clean_ring(hole)) continue;
            if (std::abs(bg::area(hole)) < eps) continue;
            kept.inners().push_back(std::move(hole));
        }
        bg::correct(kept);
        if (bg::area(kept) < eps) continue;
        out.push_back(std::move(kept));
    }
    return out;
}

// Booleans run on an integer lattice of 2^-32 m, where the clipping library
// has exact predicates. Dyadic inputs (integers, halves, ...) map exactly.
inline constexpr double kLatticeScale = 4294967296.0;
inline constexpr double kMaxCoordinate = 1e8;

inline Clipper2Lib::Path64 to_path(const BgRing& r) {
    Clipper2Lib::Path64 path;
    path.reserve(r.size());
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        if (!(std::abs(r[i].x) <= kMaxCoordinate) || !(std::abs(r[i].y) <= kMaxCoordinate)) {
            throw InvalidGeometry("coordinate outside the supported range");
        }
        path.emplace_back(std::llround(r[i].x * kLatticeScale), std::llround(r[i].y * kLatticeScale));
    }
    return path;
}

inline void append_paths(const BgMulti& m, Clipper2Lib::Paths64& out) {
    for (const auto& poly : m) {
        out.push_back(to_path(poly.outer()));
        for (const auto& h : poly.inners()) out.push_back(to_path(h));
    }
}

inline BgRing to_ring(const Clipper2Lib::Path64& path) {
    BgRing ring;
    ring.reserve(path.size() + 1);
    for (const auto& p : path) {
        ring.push_back({static_cast<double>(p.x) / kLatticeScale, static_cast<double>(p.y) / kLatticeScale});
    }
    if (!ring.empty()) ring.push_back(ring.front());
    return ring;
}

// Outer rings sit at even depth of the tree, their holes one level below;
// islands inside holes start new faces.
inline void collect_faces(const Clipper2Lib::PolyPath64& node, BgMulti& out) {
    for (const auto& outer : node) {
        BgPolygon poly;
        poly.outer() = to_ring(outer->Polygon());
        for (const auto& hole : *outer) {
            poly.inners().push_back(to_ring(hole->Polygon()));
            collect_faces(*hole, out);
        }
        out.push_back(std::move(poly));
    }
}

enum class OverlayOp { Intersection, Difference, Union };

inline BgMulti overlay(OverlayOp op, const std::vector<const BgMulti*>& subjects, const BgMulti* clip) {
    Clipper2Lib::Paths64 subj, clp;
    for (const auto* m : subjects) append_paths(*m, subj);
    if (clip) append_paths(*clip, clp);
    Clipper2Lib::Clipper64 c;
    c.PreserveCollinear(false);
    c.AddSubject(subj);
    if (!clp.empty()) c.AddClip(clp);
    const auto type = op == OverlayOp::Intersection ? Clipper2Lib::ClipType::Intersection
                      : op == OverlayOp::Difference ? Clipper2Lib::ClipType::Difference
                                                    : Clipper2Lib::ClipType::Union;
    Clipper2Lib::PolyTree64 tree;
    if (!c.Execute(type, Clipper2Lib::FillRule::NonZero, tree)) {
        throw InvalidGeometry("polygon overlay failed");
    }
    BgMulti out;
    collect_faces(tree, out);
    return out;
}

inline BgMulti overlay(OverlayOp op, const BgMulti& a, const BgMulti& b) { return overlay(op, {&a}, &b); }

inline bool finite(const Point2D& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline BgRing to_bg_ring(const std::vector<Point2D>& raw, const char* what) {
    std::vector<Point2D> pts = raw;
    if (pts.size() >= 2 && pts.front() == pts.back()) pts.pop_back();
    if (pts.size() < 3) {
        throw InvalidGeometry(std::string(what) + " ring needs at least 3 vertices");
    }
    for (const auto& p : pts) {
        if (!finite(p)) throw InvalidGeometry(std::string(what) + " ring has a non-finite vertex");
    }
    BgRing ring(pts.begin(), pts.end());
    ring.push_back(pts.front());
    return ring;
}

}  // namespace detail

// Vertex-represented polygon set. Faces are interior-disjoint; each face is
// one outer ring plus holes strictly inside it. The default value is the
// empty region. Instances are immutable after construction.
class PolyRegion {
public:
    using polygon_type = detail::BgPolygon;
    using multi_type = detail::BgMulti;

    PolyRegion() = default;

    // Validated construction from user-supplied faces. Ring orientation is
    // fixed up; self-intersections, overlapping faces and holes outside their
    // outer ring raise InvalidGeometry.
    static PolyRegion from_faces(const std::vector<Face>& faces) {
        multi_type mp;
        for (const auto& f : faces) {
            polygon_type poly;
            poly.outer() = detail::to_bg_ring(f.outer.vertices, "outer");
            for (const auto& h : f.holes) poly.inners().push_back(detail::to_bg_ring(h.vertices, "hole"));
            mp.push_back(std::move(poly));
        }
        bg::correct(mp);
        std::string reason;
        if (!bg::is_valid(mp, reason)) throw InvalidGeometry("invalid region: " + reason);
        return PolyRegion(detail::normalize(std::move(mp), 0.0));
    }

    static PolyRegion polygon(const std::vector<Point2D>& outer,
                              const std::vector<std::vector<Point2D>>& holes = {}) {
        Face f;
        f.outer.vertices = outer;
        for (const auto& h : holes) f.holes.push_back(Ring{h, RingOrientation::Hole});
        return from_faces({f});
    }

    static PolyRegion box(double min_x, double min_y, double max_x, double max_y) {
        if (!(max_x > min_x) || !(max_y > min_y)) throw InvalidGeometry("box must have positive extent");
        return polygon({{min_x, min_y}, {max_x, min_y}, {max_x, max_y}, {min_x, max_y}});
    }

    static PolyRegion box(const Box2D& b) { return box(b.min.x, b.min.y, b.max.x, b.max.y); }

    // Wraps the output of an overlay, pruning anything below eps.
    static PolyRegion from_overlay(multi_type mp, double eps) {
        return PolyRegion(detail::normalize(std::move(mp), eps));
    }

    bool empty() const { return mp_.empty(); }
    std::size_t face_count() const { return mp_.size(); }
    double area() const { return area_; }
    const Box2D& bounds() const { return bounds_; }
    const multi_type& geometry() const { return mp_; }

    std::size_t vertex_count() const {
        std::size_t n = 0;
        for (const auto& p : mp_) {
            n += p.outer().size() - 1;
            for (const auto& h : p.inners()) n += h.size() - 1;
        }
        return n;
    }

    std::vector<Face> faces() const {
        std::vector<Face> out;
        out.reserve(mp_.size());
        for (const auto& p : mp_) {
            Face f;
            f.outer.vertices.assign(p.outer().begin(), p.outer().end() - 1);
            f.outer.orientation = RingOrientation::Outer;
            for (const auto& h : p.inners()) {
                f.holes.push_back(Ring{{h.begin(), h.end() - 1}, RingOrientation::Hole});
            }
            out.push_back(std::move(f));
        }
        return out;
    }

    bool is_valid(std::string* reason = nullptr) const {
        std::string r;
        const bool ok = bg::is_valid(mp_, r);
        if (reason) *reason = r;
        return ok;
    }

private:
    explicit PolyRegion(multi_type mp) : mp_(std::move(mp)) {
        area_ = std::max(0.0, bg::area(mp_));
        if (!mp_.empty()) {
            detail::BgBox b;
            bg::envelope(mp_, b);
            bounds_ = {b.min_corner(), b.max_corner()};
        }
    }

    multi_type mp_;
    double area_ = 0.0;
    Box2D bounds_{};
};

inline double region_area(const PolyRegion& a) { return a.area(); }

inline PolyRegion region_intersection(const PolyRegion& a, const PolyRegion& b, double eps = eps_area()) {
    if (a.empty() || b.empty() || !a.bounds().overlaps(b.bounds())) return {};
    return PolyRegion::from_overlay(
        detail::overlay(detail::OverlayOp::Intersection, a.geometry(), b.geometry()), eps);
}

inline PolyRegion region_difference(const PolyRegion& a, const PolyRegion& b, double eps = eps_area()) {
    if (a.empty()) return {};
    if (b.empty() || !a.bounds().overlaps(b.bounds())) return a;
    return PolyRegion::from_overlay(
        detail::overlay(detail::OverlayOp::Difference, a.geometry(), b.geometry()), eps);
}

inline PolyRegion region_union(const PolyRegion& a, const PolyRegion& b, double eps = eps_area()) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return PolyRegion::from_overlay(detail::overlay(detail::OverlayOp::Union, a.geometry(), b.geometry()),
                                    eps);
}

// Union of many pieces in a single sweep.
inline PolyRegion region_union_all(const std::vector<PolyRegion>& parts, double eps = eps_area()) {
    std::vector<const detail::BgMulti*> subjects;
    for (const auto& p : parts) {
        if (!p.empty()) subjects.push_back(&p.geometry());
    }
    if (subjects.empty()) return {};
    if (subjects.size() == 1) {
        for (const auto& p : parts) {
            if (!p.empty()) return p;
        }
    }
    return PolyRegion::from_overlay(detail::overlay(detail::OverlayOp::Union, subjects, nullptr), eps);
}

// Closed-set membership: boundary points are inside.
inline bool region_contains(const PolyRegion& a, const Point2D& p) {
    if (a.empty() || !a.bounds().contains(p)) return false;
    return bg::covered_by(p, a.geometry());
}

inline double symmetric_difference_area(const PolyRegion& a, const PolyRegion& b) {
    const double inter = region_intersection(a, b, 0.0).area();
    return std::max(0.0, a.area() + b.area() - 2.0 * inter);
}

inline bool regions_equal(const PolyRegion& a, const PolyRegion& b, double eps = eps_area()) {
    return symmetric_difference_area(a, b) < eps;
}

}  // namespace mzsm
