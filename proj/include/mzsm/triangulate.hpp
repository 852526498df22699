#pragma once

// Ear-clipping triangulation for faces with holes (holes are bridged into
// the outer ring first), and area-weighted uniform sampling built on it.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "mzsm/errors.hpp"
#include "mzsm/geometry.hpp"

namespace mzsm {

namespace detail::earclip {

struct Node {
    std::size_t i;
    double x, y;
    Node* prev = nullptr;
    Node* next = nullptr;
    bool steiner = false;
};

// Owns every node of one face so the raw links never dangle.
class Arena {
public:
    Node* make(std::size_t i, double x, double y) {
        nodes_.push_back(Node{i, x, y});
        return &nodes_.back();
    }

private:
    std::deque<Node> nodes_;
};

// Twice the signed area with the sign flipped: negative for a CCW turn.
inline double turn(const Node* p, const Node* q, const Node* r) {
    return (q->y - p->y) * (r->x - q->x) - (q->x - p->x) * (r->y - q->y);
}

inline bool same(const Node* a, const Node* b) { return a->x == b->x && a->y == b->y; }

inline Node* insert(Arena& arena, std::size_t i, const Point2D& p, Node* last) {
    Node* n = arena.make(i, p.x, p.y);
    if (!last) {
        n->prev = n;
        n->next = n;
    } else {
        n->next = last->next;
        n->prev = last;
        last->next->prev = n;
        last->next = n;
    }
    return n;
}

inline void remove(Node* p) {
    p->next->prev = p->prev;
    p->prev->next = p->next;
}

// Builds a circular list; ccw selects the wanted winding.
inline Node* linked_list(Arena& arena, const std::vector<Point2D>& pts, std::size_t base, bool ccw) {
    const bool is_ccw = detail::signed_area(pts) > 0.0;
    Node* last = nullptr;
    if (ccw == is_ccw) {
        for (std::size_t k = 0; k < pts.size(); ++k) last = insert(arena, base + k, pts[k], last);
    } else {
        for (std::size_t k = pts.size(); k-- > 0;) last = insert(arena, base + k, pts[k], last);
    }
    if (last && same(last, last->next)) {
        remove(last);
        last = last->next;
    }
    return last;
}

inline Node* filter_points(Node* start, Node* end = nullptr) {
    if (!start) return start;
    if (!end) end = start;
    Node* p = start;
    bool again;
    do {
        again = false;
        if (!p->steiner && (same(p, p->next) || turn(p->prev, p, p->next) == 0.0)) {
            remove(p);
            p = end = p->prev;
            if (p == p->next) break;
            again = true;
        } else {
            p = p->next;
        }
    } while (again || p != end);
    return end;
}

inline bool point_in_triangle(double ax, double ay, double bx, double by, double cx, double cy, double px,
                              double py) {
    return (cx - px) * (ay - py) >= (ax - px) * (cy - py) && (ax - px) * (by - py) >= (bx - px) * (ay - py) &&
           (bx - px) * (cy - py) >= (cx - px) * (by - py);
}

inline bool is_ear(const Node* ear) {
    const Node* a = ear->prev;
    const Node* b = ear;
    const Node* c = ear->next;
    if (turn(a, b, c) >= 0.0) return false;
    const double x0 = std::min({a->x, b->x, c->x}), x1 = std::max({a->x, b->x, c->x});
    const double y0 = std::min({a->y, b->y, c->y}), y1 = std::max({a->y, b->y, c->y});
    for (const Node* p = c->next; p != a; p = p->next) {
        if (p->x >= x0 && p->x <= x1 && p->y >= y0 && p->y <= y1 &&
            point_in_triangle(a->x, a->y, b->x, b->y, c->x, c->y, p->x, p->y) &&
            turn(p->prev, p, p->next) >= 0.0) {
            return false;
        }
    }
    return true;
}

inline int sign(double v) { return (v > 0.0) - (v < 0.0); }

inline bool on_segment(const Node* p, const Node* q, const Node* r) {
    return q->x <= std::max(p->x, r->x) && q->x >= std::min(p->x, r->x) && q->y <= std::max(p->y, r->y) &&
           q->y >= std::min(p->y, r->y);
}

inline bool intersects(const Node* p1, const Node* q1, const Node* p2, const Node* q2) {
    const int o1 = sign(turn(p1, q1, p2));
    const int o2 = sign(turn(p1, q1, q2));
    const int o3 = sign(turn(p2, q2, p1));
    const int o4 = sign(turn(p2, q2, q1));
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, q2, q1)) return true;
    if (o3 == 0 && on_segment(p2, p1, q2)) return true;
    if (o4 == 0 && on_segment(p2, q1, q2)) return true;
    return false;
}

inline bool intersects_polygon(const Node* a, const Node* b) {
    const Node* p = a;
    do {
        if (p->i != a->i && p->next->i != a->i && p->i != b->i && p->next->i != b->i &&
            intersects(p, p->next, a, b)) {
            return true;
        }
        p = p->next;
    } while (p != a);
    return false;
}

inline bool locally_inside(const Node* a, const Node* b) {
    return turn(a->prev, a, a->next) < 0.0 ? turn(a, b, a->next) >= 0.0 && turn(a, a->prev, b) >= 0.0
                                           : turn(a, b, a->prev) < 0.0 || turn(a, a->next, b) < 0.0;
}

inline bool middle_inside(const Node* a, const Node* b) {
    const Node* p = a;
    bool inside = false;
    const double px = 0.5 * (a->x + b->x), py = 0.5 * (a->y + b->y);
    do {
        if (((p->y > py) != (p->next->y > py)) && p->next->y != p->y &&
            (px < (p->next->x - p->x) * (py - p->y) / (p->next->y - p->y) + p->x)) {
            inside = !inside;
        }
        p = p->next;
    } while (p != a);
    return inside;
}

inline bool is_valid_diagonal(const Node* a, const Node* b) {
    return a->next->i != b->i && a->prev->i != b->i && !intersects_polygon(a, b) &&
           ((locally_inside(a, b) && locally_inside(b, a) && middle_inside(a, b) &&
             (turn(a->prev, a, b->prev) != 0.0 || turn(a, b->prev, b) != 0.0)) ||
            (same(a, b) && turn(a->prev, a, a->next) > 0.0 && turn(b->prev, b, b->next) > 0.0));
}

// Links a and b with a diagonal; returns the duplicate of b in the second loop.
inline Node* split_polygon(Arena& arena, Node* a, Node* b) {
    Node* a2 = arena.make(a->i, a->x, a->y);
    Node* b2 = arena.make(b->i, b->x, b->y);
    Node* an = a->next;
    Node* bp = b->prev;
    a->next = b;
    b->prev = a;
    a2->next = an;
    an->prev = a2;
    b2->next = a2;
    a2->prev = b2;
    bp->next = b2;
    b2->prev = bp;
    return b2;
}

inline bool sector_contains_sector(const Node* m, const Node* p) {
    return turn(m->prev, m, p->prev) < 0.0 && turn(p->next, m, m->next) < 0.0;
}

inline Node* find_hole_bridge(Node* hole, Node* outer) {
    Node* p = outer;
    const double hx = hole->x, hy = hole->y;
    double qx = -std::numeric_limits<double>::infinity();
    Node* m = nullptr;
    do {
        if (hy <= p->y && hy >= p->next->y && p->next->y != p->y) {
            const double x = p->x + (hy - p->y) * (p->next->x - p->x) / (p->next->y - p->y);
            if (x <= hx && x > qx) {
                qx = x;
                m = p->x < p->next->x ? p : p->next;
                if (x == hx) return m;
            }
        }
        p = p->next;
    } while (p != outer);
    if (!m) return nullptr;

    Node* stop = m;
    const double mx = m->x, my = m->y;
    double tan_min = std::numeric_limits<double>::infinity();
    p = m;
    do {
        if (hx >= p->x && p->x >= mx && hx != p->x &&
            point_in_triangle(hy < my ? hx : qx, hy, mx, my, hy < my ? qx : hx, hy, p->x, p->y)) {
            const double t = std::abs(hy - p->y) / (hx - p->x);
            if (locally_inside(p, hole) &&
                (t < tan_min ||
                 (t == tan_min && (p->x > m->x || (p->x == m->x && sector_contains_sector(m, p)))))) {
                m = p;
                tan_min = t;
            }
        }
        p = p->next;
    } while (p != stop);
    return m;
}

inline Node* leftmost(Node* start) {
    Node* p = start;
    Node* best = start;
    do {
        if (p->x < best->x || (p->x == best->x && p->y < best->y)) best = p;
        p = p->next;
    } while (p != start);
    return best;
}

inline Node* eliminate_holes(Arena& arena, const std::vector<std::vector<Point2D>>& holes,
                             std::vector<std::size_t> bases, Node* outer) {
    std::vector<Node*> queue;
    for (std::size_t h = 0; h < holes.size(); ++h) {
        Node* list = linked_list(arena, holes[h], bases[h], /*ccw=*/false);
        if (!list) continue;
        if (list == list->next) list->steiner = true;
        queue.push_back(leftmost(list));
    }
    std::sort(queue.begin(), queue.end(), [](const Node* a, const Node* b) { return a->x < b->x; });
    for (Node* hole : queue) {
        Node* bridge = find_hole_bridge(hole, outer);
        if (!bridge) continue;
        Node* reverse = split_polygon(arena, bridge, hole);
        filter_points(reverse, reverse->next);
        outer = filter_points(bridge, bridge->next);
    }
    return outer;
}

struct Clipper {
    Arena& arena;
    std::vector<std::array<const Node*, 3>>& out;

    void emit(const Node* a, const Node* b, const Node* c) { out.push_back({a, b, c}); }

    Node* cure_local_intersections(Node* start) {
        Node* p = start;
        do {
            Node* a = p->prev;
            Node* b = p->next->next;
            if (!same(a, b) && intersects(a, p, p->next, b) && locally_inside(a, b) && locally_inside(b, a)) {
                emit(a, p, b);
                remove(p);
                remove(p->next);
                p = start = b;
            }
            p = p->next;
        } while (p != start);
        return filter_points(p);
    }

    void split_and_clip(Node* start) {
        Node* a = start;
        do {
            Node* b = a->next->next;
            while (b != a->prev) {
                if (a->i != b->i && is_valid_diagonal(a, b)) {
                    Node* c = split_polygon(arena, a, b);
                    a = filter_points(a, a->next);
                    c = filter_points(c, c->next);
                    clip(a, 0);
                    clip(c, 0);
                    return;
                }
                b = b->next;
            }
            a = a->next;
        } while (a != start);
    }

    void clip(Node* ear, int pass) {
        if (!ear) return;
        Node* stop = ear;
        while (ear->prev != ear->next) {
            Node* prev = ear->prev;
            Node* next = ear->next;
            if (is_ear(ear)) {
                emit(prev, ear, next);
                remove(ear);
                ear = next->next;
                stop = next->next;
                continue;
            }
            ear = next;
            if (ear == stop) {
                if (pass == 0) {
                    clip(filter_points(ear), 1);
                } else if (pass == 1) {
                    clip(cure_local_intersections(filter_points(ear)), 2);
                } else {
                    split_and_clip(ear);
                }
                break;
            }
        }
    }
};

}  // namespace detail::earclip

inline std::vector<Triangle> triangulate_face(const Face& face) {
    using namespace detail::earclip;
    Arena arena;
    std::vector<std::array<const Node*, 3>> raw;
    std::size_t base = face.outer.vertices.size();
    Node* outer = linked_list(arena, face.outer.vertices, 0, /*ccw=*/true);
    if (!outer || outer->next == outer->prev) return {};
    if (!face.holes.empty()) {
        std::vector<std::vector<Point2D>> holes;
        std::vector<std::size_t> bases;
        for (const auto& h : face.holes) {
            holes.push_back(h.vertices);
            bases.push_back(base);
            base += h.vertices.size();
        }
        outer = eliminate_holes(arena, holes, bases, outer);
    }
    Clipper clipper{arena, raw};
    clipper.clip(outer, 0);

    std::vector<Triangle> tris;
    tris.reserve(raw.size());
    for (const auto& t : raw) {
        Triangle tri{{t[0]->x, t[0]->y}, {t[1]->x, t[1]->y}, {t[2]->x, t[2]->y}};
        if (tri.area() > 0.0) tris.push_back(tri);
    }
    return tris;
}

inline std::vector<Triangle> triangulate(const PolyRegion& region) {
    std::vector<Triangle> out;
    for (const auto& face : region.faces()) {
        auto t = triangulate_face(face);
        out.insert(out.end(), t.begin(), t.end());
    }
    const double sum = std::accumulate(out.begin(), out.end(), 0.0,
                                       [](double s, const Triangle& t) { return s + t.area(); });
    if (std::abs(sum - region.area()) > 1e-9 * std::max(1.0, region.area())) {
        throw InvalidGeometry("triangulation does not cover the region");
    }
    return out;
}

// Uniform point generator over a fixed region. Triangles are picked by
// cumulative area, then a barycentric draw inside the triangle.
class RegionSampler {
public:
    explicit RegionSampler(const PolyRegion& region) : triangles_(triangulate(region)) {
        cumulative_.reserve(triangles_.size());
        double acc = 0.0;
        for (const auto& t : triangles_) {
            acc += t.area();
            cumulative_.push_back(acc);
        }
    }

    double area() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
    const std::vector<Triangle>& triangles() const { return triangles_; }

    template <class Rng>
    Point2D draw(Rng& rng) const {
        if (triangles_.empty()) throw EmptyRegion("cannot sample a zero-area region");
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double target = unit(rng) * area();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        if (it == cumulative_.end()) --it;
        const Triangle& t = triangles_[static_cast<std::size_t>(it - cumulative_.begin())];
        double r1 = unit(rng);
        double r2 = unit(rng);
        if (r1 + r2 > 1.0) {
            r1 = 1.0 - r1;
            r2 = 1.0 - r2;
        }
        return {t.a.x + r1 * (t.b.x - t.a.x) + r2 * (t.c.x - t.a.x),
                t.a.y + r1 * (t.b.y - t.a.y) + r2 * (t.c.y - t.a.y)};
    }

private:
    std::vector<Triangle> triangles_;
    std::vector<double> cumulative_;
};

inline std::vector<Point2D> sample_uniform(const PolyRegion& region, std::size_t n, std::uint64_t seed) {
    if (n == 0) return {};
    if (region.area() <= 0.0) throw EmptyRegion("cannot sample a zero-area region");
    RegionSampler sampler(region);
    std::mt19937_64 rng(seed);
    std::vector<Point2D> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pts.push_back(sampler.draw(rng));
    return pts;
}

}  // namespace mzsm
