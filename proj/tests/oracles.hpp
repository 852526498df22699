#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the polygon-boolean code under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "mzsm/geometry.hpp"

namespace oracle {

using mzsm::Point2D;
using Poly = std::vector<Point2D>;

inline double shoelace(const Poly& p) {
    double s = 0.0;
    for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) s += p[j].x * p[i].y - p[i].x * p[j].y;
    return 0.5 * s;
}

// Winding number of a closed ring around q (nonzero means inside).
inline int winding(const Poly& ring, const Point2D& q) {
    int wn = 0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point2D& a = ring[i];
        const Point2D& b = ring[(i + 1) % ring.size()];
        const double side = (b.x - a.x) * (q.y - a.y) - (q.x - a.x) * (b.y - a.y);
        if (a.y <= q.y) {
            if (b.y > q.y && side > 0) ++wn;
        } else if (b.y <= q.y && side < 0) {
            --wn;
        }
    }
    return wn;
}

inline double segment_distance(const Point2D& a, const Point2D& b, const Point2D& q) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((q.x - a.x) * dx + (q.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(a.x + t * dx - q.x, a.y + t * dy - q.y);
}

inline double ring_distance(const Poly& ring, const Point2D& q) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ring.size(); ++i) d = std::min(d, segment_distance(ring[i], ring[(i + 1) % ring.size()], q));
    return d;
}

// Membership for an outer ring with holes by winding numbers.
inline bool inside(const Poly& outer, const std::vector<Poly>& holes, const Point2D& q) {
    if (winding(outer, q) == 0) return false;
    for (const auto& h : holes) {
        if (winding(h, q) != 0) return false;
    }
    return true;
}

// Sutherland-Hodgman: clip `subject` by a convex counter-clockwise `clip`.
inline Poly sutherland_hodgman(const Poly& subject, const Poly& clip) {
    Poly out = subject;
    for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
        const Point2D a = clip[i], b = clip[(i + 1) % clip.size()];
        auto side = [&](const Point2D& p) { return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x); };
        Poly in = out;
        out.clear();
        for (std::size_t j = 0; j < in.size(); ++j) {
            const Point2D p = in[j], q = in[(j + 1) % in.size()];
            const double sp = side(p), sq = side(q);
            if (sp >= 0) out.push_back(p);
            if ((sp >= 0) != (sq >= 0)) {
                const double t = sp / (sp - sq);
                out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
            }
        }
    }
    return out;
}

// Convex polygon, counter-clockwise, from sorted random angles.
inline Poly random_convex(std::mt19937_64& rng, Point2D c, double r, std::size_t n) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    std::vector<double> a(n);
    for (auto& t : a) t = ang(rng);
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    Poly p;
    for (double t : a) p.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
    return p;
}

// Star-shaped simple polygon with random radii, counter-clockwise.
inline Poly random_star(std::mt19937_64& rng, Point2D c, double rmin, double rmax, std::size_t n) {
    std::uniform_real_distribution<double> rad(rmin, rmax);
    Poly p;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        const double r = rad(rng);
        p.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
    }
    return p;
}

// Regular-ish hexagon with independent x / y radii.
inline Poly hexagon(double cx, double cy, double rx, double ry) {
    Poly p;
    for (int i = 0; i < 6; ++i) {
        const double t = std::numbers::pi / 3.0 * i;
        p.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
    }
    return p;
}

// Upper 1% point of the chi-square distribution for small degrees of freedom.
inline double chi2_critical_001(int dof) {
    static const double table[] = {0, 6.635, 9.210, 11.345, 13.277, 15.086, 16.812, 18.475, 20.090,
                                   21.666, 23.209, 24.725, 26.217, 27.688, 29.141, 30.578};
    return table[dof];
}

// Integral of f over a box: a base grid of cells, each recursively split
// while the function differs between its corners and center, then midpoint
// rule on the finest cells. Resolves region boundaries of piecewise-constant
// densities far better than a plain midpoint grid at the same base size.
inline double adaptive_integral(const std::function<double(const Point2D&)>& f, const mzsm::Box2D& box,
                                double base, int max_depth) {
    std::function<double(double, double, double, double, int)> cell = [&](double x0, double y0, double x1,
                                                                         double y1, int depth) -> double {
        const Point2D m{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
        const double fm = f(m);
        if (depth < max_depth) {
            const double f00 = f({x0, y0}), f10 = f({x1, y0}), f01 = f({x0, y1}), f11 = f({x1, y1});
            if (f00 != fm || f10 != fm || f01 != fm || f11 != fm) {
                return cell(x0, y0, m.x, m.y, depth + 1) + cell(m.x, y0, x1, m.y, depth + 1) +
                       cell(x0, m.y, m.x, y1, depth + 1) + cell(m.x, m.y, x1, y1, depth + 1);
            }
        }
        return fm * (x1 - x0) * (y1 - y0);
    };
    const auto nx = static_cast<std::size_t>(std::ceil(box.width() / base - 1e-9));
    const auto ny = static_cast<std::size_t>(std::ceil(box.height() / base - 1e-9));
    double total = 0.0;
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const double y0 = box.min.y + static_cast<double>(iy) * base;
        const double y1 = std::min(box.max.y, y0 + base);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double x0 = box.min.x + static_cast<double>(ix) * base;
            const double x1 = std::min(box.max.x, x0 + base);
            total += cell(x0, y0, x1, y1, 0);
        }
    }
    return total;
}

}  // namespace oracle
