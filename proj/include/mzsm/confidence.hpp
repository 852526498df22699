#pragma once

// Set-based confidence collections: the fewest mosaic pieces whose
// conditional masses reach a requested confidence level.

#include <algorithm>
#include <numeric>
#include <vector>

#include "mzsm/errors.hpp"
#include "mzsm/geometry.hpp"
#include "mzsm/mosaic.hpp"

namespace mzsm {

struct ConfidenceCollection {
    double gamma = 0.0;
    std::vector<std::size_t> members;       // descending mass
    std::vector<double> member_masses;      // conditional mass per member
    double achieved = 0.0;
    PolyRegion outline;
};

struct WeightedPiece {
    std::size_t index;
    double mass;
    double area;
};

// Greedy selection by descending mass; ties go to the larger area, then to
// the lower index. gamma = 1 takes every positive-mass piece.
inline std::vector<std::size_t> select_greedy(std::vector<WeightedPiece> pieces, double gamma,
                                              double* achieved = nullptr) {
    if (!(gamma > 0.0)) throw UnreachableConfidence("confidence level must be positive");
    if (gamma > 1.0) throw UnreachableConfidence("confidence level cannot exceed 1");
    std::erase_if(pieces, [](const WeightedPiece& p) { return !(p.mass > 0.0); });
    std::sort(pieces.begin(), pieces.end(), [](const WeightedPiece& a, const WeightedPiece& b) {
        if (a.mass != b.mass) return a.mass > b.mass;
        if (a.area != b.area) return a.area > b.area;
        return a.index < b.index;
    });
    std::vector<std::size_t> chosen;
    double acc = 0.0;
    for (const auto& p : pieces) {
        if (gamma < 1.0 && acc >= gamma) break;
        chosen.push_back(p.index);
        acc += p.mass;
    }
    if (achieved) *achieved = acc;
    return chosen;
}

inline ConfidenceCollection assemble_collection(const std::vector<WeightedPiece>& pieces,
                                                const std::vector<PolyRegion>& regions, double gamma) {
    ConfidenceCollection c;
    c.gamma = gamma;
    c.members = select_greedy(pieces, gamma, &c.achieved);
    std::vector<double> mass_of(regions.size(), 0.0);
    for (const auto& p : pieces) mass_of[p.index] = p.mass;
    std::vector<PolyRegion> parts;
    parts.reserve(c.members.size());
    for (std::size_t m : c.members) {
        c.member_masses.push_back(mass_of[m]);
        parts.push_back(regions[m]);
    }
    c.outline = region_union_all(std::move(parts));
    return c;
}

inline ConfidenceCollection build_collection(const Pmf& pmf, const std::vector<LeafRecord>& ls, double gamma) {
    std::vector<WeightedPiece> pieces;
    pieces.reserve(pmf.entries.size());
    for (const auto& e : pmf.entries) pieces.push_back({e.leaf, e.conditional_mass, ls.at(e.leaf).region.area()});
    std::vector<PolyRegion> regions;
    regions.reserve(ls.size());
    for (const auto& l : ls) regions.push_back(l.region);
    return assemble_collection(pieces, regions, gamma);
}

inline const PolyRegion& outline(const ConfidenceCollection& c) { return c.outline; }

struct Disjointness {
    bool disjoint = false;
    std::size_t faces = 0;
};

inline Disjointness is_disjoint(const ConfidenceCollection& c) {
    return {c.outline.face_count() >= 2, c.outline.face_count()};
}

}  // namespace mzsm
