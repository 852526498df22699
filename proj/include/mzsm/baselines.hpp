#pragma once

// Comparison baselines and metrics: set-augmented grid shadow matching
// (square cells scored by a product of per-satellite match probabilities),
// the intersection-over-union metric, and the integrated absolute density
// error between a truncated GMM and the mosaic density.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mzsm/confidence.hpp"
#include "mzsm/errors.hpp"
#include "mzsm/geometry.hpp"
#include "mzsm/gmm.hpp"
#include "mzsm/mosaic.hpp"
#include "mzsm/shadows.hpp"

namespace mzsm {

// Product over satellites of p_los (cell LOS on the map) or 1 - p_los (cell
// NLOS). Building-boundary probabilities are the ideal-map constants 1 / 0.
inline double sagbsm_score(const Point2D& cell_center, const std::vector<ShadowRegion>& shadows,
                           const std::vector<double>& p_los) {
    if (shadows.size() != p_los.size()) throw ProbabilityOutOfRange("one p_los per shadow is required");
    double score = 1.0;
    for (std::size_t j = 0; j < shadows.size(); ++j) {
        check_probability(p_los[j], "p_los");
        const double bb = truth_designation(cell_center, shadows[j]) == Designation::LOS ? 1.0 : 0.0;
        score *= p_los[j] * bb + (1.0 - p_los[j]) * (1.0 - bb);
    }
    return score;
}

struct GridCell {
    Point2D center;
    PolyRegion square;
    double score = 0.0;
};

struct GridModel {
    double resolution = 0.0;
    Box2D box;
    std::vector<GridCell> cells;
    std::vector<double> pmf;  // per cell; all zero when no cell scores
};

// Square tiling of the box, anchored at its minimum corner; the last row and
// column are clipped to the box. Cells whose center is outside the AOI
// region (i.e. inside a building footprint) score zero.
inline GridModel build_grid(const Aoi& aoi, const Box2D& box, double resolution,
                            const std::vector<ShadowRegion>& shadows, const std::vector<double>& p_los) {
    if (!(resolution > 0.0)) throw InvalidGeometry("grid resolution must be positive");
    GridModel g;
    g.resolution = resolution;
    g.box = box;
    double total = 0.0;
    const auto nx = static_cast<std::size_t>(std::ceil(box.width() / resolution - 1e-9));
    const auto ny = static_cast<std::size_t>(std::ceil(box.height() / resolution - 1e-9));
    g.cells.reserve(nx * ny);
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const double y0 = box.min.y + static_cast<double>(iy) * resolution;
        const double y1 = std::min(box.max.y, y0 + resolution);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double x0 = box.min.x + static_cast<double>(ix) * resolution;
            const double x1 = std::min(box.max.x, x0 + resolution);
            GridCell cell;
            cell.center = {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
            cell.square = PolyRegion::box(x0, y0, x1, y1);
            cell.score = region_contains(aoi.region, cell.center) ? sagbsm_score(cell.center, shadows, p_los) : 0.0;
            total += cell.score;
            g.cells.push_back(std::move(cell));
        }
    }
    g.pmf.assign(g.cells.size(), 0.0);
    if (total > 0.0) {
        for (std::size_t i = 0; i < g.cells.size(); ++i) g.pmf[i] = g.cells[i].score / total;
    }
    return g;
}

inline GridModel build_grid(const Aoi& aoi, double resolution, const std::vector<ShadowRegion>& shadows,
                            const std::vector<double>& p_los) {
    return build_grid(aoi, aoi.region.bounds(), resolution, shadows, p_los);
}

inline ConfidenceCollection grid_collection(const GridModel& g, double gamma) {
    std::vector<WeightedPiece> pieces;
    std::vector<PolyRegion> squares;
    pieces.reserve(g.cells.size());
    squares.reserve(g.cells.size());
    for (std::size_t i = 0; i < g.cells.size(); ++i) {
        pieces.push_back({i, g.pmf[i], g.cells[i].square.area()});
        squares.push_back(g.cells[i].square);
    }
    return assemble_collection(pieces, squares, gamma);
}

inline double iou(const PolyRegion& a, const PolyRegion& b) {
    if (a.area() <= 0.0 && b.area() <= 0.0) throw BothEmpty("IOU is undefined for two empty regions");
    const double inter = region_intersection(a, b, 0.0).area();
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

// Integral of |f_gmm - f_mosaic| over the box by midpoint quadrature. Both
// densities are renormalized on the quadrature grid, so the triangle
// inequality bounds the result by 2.
inline double integrated_percent_error(const GmmModel& m, const MosaicDensity& mosaic, const Box2D& box,
                                       double quad_resolution = 0.5) {
    if (!(quad_resolution > 0.0)) throw InvalidGeometry("quadrature resolution must be positive");
    std::vector<double> g, f, w;
    for_each_quadrature_cell(box, quad_resolution, [&](const Point2D& c, double a) {
        g.push_back(m.density(c));
        f.push_back(mosaic(c));
        w.push_back(a);
    });
    double gs = 0.0, fs = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        gs += g[i] * w[i];
        fs += f[i] * w[i];
    }
    if (!(gs > 0.0) || !(fs > 0.0)) throw SingularFit("a density has no mass on the quadrature grid");
    double delta = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) delta += std::abs(g[i] / gs - f[i] / fs) * w[i];
    return delta;
}

inline double integrated_percent_error(const GmmModel& m, const MosaicTree& tree, double quad_resolution = 0.5) {
    return integrated_percent_error(m, MosaicDensity(tree), tree.aoi().region.bounds(), quad_resolution);
}

}  // namespace mzsm
