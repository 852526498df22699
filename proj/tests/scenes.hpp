#pragma once

// Hand-built mosaic inputs shared by the unit and acceptance tests.

#include <random>
#include <vector>

#include "mzsm/mosaic.hpp"
#include "oracles.hpp"

namespace scenes {

using namespace mzsm;

struct Setup {
    Aoi aoi;
    std::vector<ProcessedShadow> shadows;
};

// 60 m square AOI and three hexagonal shadows: one in the bottom-left
// corner, one in the top-right corner, and a long wide one reaching past
// the AOI that swallows the first and misses the second. p(NLOS) = 0.8.
inline Setup illustrative() {
    Setup s{{PolyRegion::box(0, 0, 60, 60), 1.0}, {}};
    const auto add = [&](const char* id, const oracle::Poly& ring) {
        s.shadows.push_back({{id, PolyRegion::polygon(ring)}, 0.2});
    };
    add("S1", oracle::hexagon(10, 10, 8, 8));
    add("S2", oracle::hexagon(52, 52, 8, 8));
    add("S3", oracle::hexagon(10, 14, 45, 22));
    return s;
}

// Four shadows over a 4x4 grid of 25 m cells. Each cell is assigned one
// LOS/NLOS combination (bit i set = NLOS for shadow i); every combination
// except `missing` appears, so exactly one full-tree leaf is empty.
inline Setup venn4(unsigned missing, double p_los) {
    Setup s{{PolyRegion::box(0, 0, 100, 100), 1.0}, {}};
    std::vector<unsigned> masks;
    for (unsigned m = 0; m < 16; ++m) {
        if (m != missing) masks.push_back(m);
    }
    masks.push_back(masks.front());
    for (unsigned bit = 0; bit < 4; ++bit) {
        std::vector<PolyRegion> cells;
        for (unsigned k = 0; k < 16; ++k) {
            if (!(masks[k] >> bit & 1u)) continue;
            const double x = 25.0 * (k % 4), y = 25.0 * (k / 4);
            cells.push_back(PolyRegion::box(x, y, x + 25, y + 25));
        }
        s.shadows.push_back({{"S" + std::to_string(bit + 1), region_union_all(cells)}, p_los});
    }
    return s;
}

// Random convex and star-shaped shadows scattered over and around a square
// AOI, with random LOS probabilities.
inline Setup random_setup(std::mt19937_64& rng, std::size_t n, double half = 50.0) {
    std::uniform_real_distribution<double> c(-half, half), r(10.0, 40.0), p(0.05, 0.95), coin(0.0, 1.0);
    Setup s{{PolyRegion::box(-half, -half, half, half), 1.0}, {}};
    for (std::size_t j = 0; j < n; ++j) {
        const Point2D center{c(rng), c(rng)};
        const auto ring = coin(rng) < 0.5 ? oracle::random_convex(rng, center, r(rng), 6)
                                          : oracle::random_star(rng, center, 0.4 * r(rng), r(rng), 9);
        s.shadows.push_back({{"S" + std::to_string(j + 1), PolyRegion::polygon(ring)}, p(rng)});
    }
    return s;
}

}  // namespace scenes
