#pragma once

// Probabilistic polytope mosaic. The area of interest is split recursively
// by GNSS shadows into LOS (outside the shadow) and NLOS (inside) children,
// with scores multiplied by the classifier's LOS / NLOS probabilities.
// Children that would be empty are never stored: their probability is
// folded into the surviving branch, and the mass lost that way is the
// AOI-violation probability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/geometry/index/rtree.hpp>

#include "mzsm/errors.hpp"
#include "mzsm/geometry.hpp"
#include "mzsm/shadows.hpp"
#include "mzsm/triangulate.hpp"

namespace mzsm {

struct Aoi {
    PolyRegion region;
    double prior = 1.0;
};

inline void validate(const Aoi& aoi) {
    if (aoi.region.area() <= 0.0) throw InvalidGeometry("AOI must have positive area");
    if (!(aoi.prior > 0.0 && aoi.prior <= 1.0)) throw ProbabilityOutOfRange("AOI prior must lie in (0, 1]");
}

// Bounding box minus the building footprints.
inline Aoi make_aoi(const Box2D& box, const std::vector<Building>& buildings, double prior = 1.0) {
    std::vector<PolyRegion> footprints;
    footprints.reserve(buildings.size());
    for (const auto& b : buildings) footprints.push_back(b.footprint);
    Aoi aoi{region_difference(PolyRegion::box(box), region_union_all(std::move(footprints))), prior};
    validate(aoi);
    return aoi;
}

enum class OverlapCase { NoShadowOverlap, SplitOverlap, FullShadowOverlap };

inline const char* to_string(OverlapCase c) {
    switch (c) {
        case OverlapCase::NoShadowOverlap: return "NoShadowOverlap";
        case OverlapCase::SplitOverlap: return "SplitOverlap";
        case OverlapCase::FullShadowOverlap: return "FullShadowOverlap";
    }
    return "?";
}

struct OverlapDetail {
    OverlapCase kind;
    PolyRegion intersection;
};

inline OverlapDetail classify_overlap_detail(const PolyRegion& node, const PolyRegion& shadow,
                                             double eps = eps_area()) {
    if (node.area() <= eps) throw DegenerateNode("node region has no area");
    PolyRegion inter = region_intersection(node, shadow, eps);
    const double a = inter.area();
    if (a <= eps) return {OverlapCase::NoShadowOverlap, {}};
    const double gap = node.area() - a;
    if (gap <= eps) return {OverlapCase::FullShadowOverlap, std::move(inter)};
    // Off-lattice inputs leave rounding noise in the area gap; settle near
    // misses on the difference itself.
    if (gap <= 1e-6 * node.area() && region_difference(node, shadow, eps).area() <= eps) {
        return {OverlapCase::FullShadowOverlap, std::move(inter)};
    }
    return {OverlapCase::SplitOverlap, std::move(inter)};
}

inline OverlapCase classify_overlap(const PolyRegion& node, const PolyRegion& shadow, double eps = eps_area()) {
    return classify_overlap_detail(node, shadow, eps).kind;
}

struct BranchLabel {
    std::string satellite_id;
    Designation designation;

    friend bool operator==(const BranchLabel&, const BranchLabel&) = default;
};

struct MosaicNode {
    PolyRegion region;
    double score = 0.0;
    std::optional<std::size_t> los_child;
    std::optional<std::size_t> nlos_child;
    // Only the splits actually applied on the way from the root.
    std::vector<BranchLabel> labels;

    bool is_leaf() const { return !los_child && !nlos_child; }
};

struct ProcessedShadow {
    ShadowRegion shadow;
    double p_los = 0.5;
};

struct LeafRecord {
    PolyRegion region;
    double mass = 0.0;
    std::vector<BranchLabel> labels;
};

inline void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ProbabilityOutOfRange(std::string(what) + " must lie in [0, 1]");
}

// Memory-efficient binary tree. Nodes live in an index-addressed arena so
// the whole tree is a copyable value. Leaf scores are kept current: the
// no-overlap and full-overlap cases push their factor down to every leaf of
// the affected subtree immediately. Internal-node scores are the values at
// split time and are not contractual.
class MosaicTree {
public:
    explicit MosaicTree(Aoi aoi, double eps = eps_area()) : aoi_(std::move(aoi)), eps_(eps) {
        validate(aoi_);
        nodes_.push_back(MosaicNode{aoi_.region, aoi_.prior, std::nullopt, std::nullopt, {}});
        leaf_count_ = 1;
    }

    const Aoi& aoi() const { return aoi_; }
    double prior() const { return aoi_.prior; }
    double eps() const { return eps_; }
    const MosaicNode& root() const { return nodes_.front(); }
    const MosaicNode& node(std::size_t i) const { return nodes_.at(i); }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const { return leaf_count_; }
    const std::vector<ProcessedShadow>& processed() const { return processed_; }

    std::size_t depth() const {
        std::size_t best = 0;
        for (const auto& n : nodes_) best = std::max(best, n.labels.size());
        return best;
    }

    void expand_in_place(const ShadowRegion& shadow, double p_los) {
        check_probability(p_los, "p_los");
        expand_node(0, shadow, p_los);
        processed_.push_back({shadow, p_los});
    }

    template <class Fn>
    void for_each_leaf(Fn&& fn) const {
        std::vector<std::size_t> stack{0};
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const MosaicNode& n = nodes_[i];
            if (n.is_leaf()) {
                fn(i, n);
                continue;
            }
            // NLOS pushed first so the LOS branch is visited first.
            if (n.nlos_child) stack.push_back(*n.nlos_child);
            if (n.los_child) stack.push_back(*n.los_child);
        }
    }

private:
    void scale_subtree(std::size_t i, double factor) {
        std::vector<std::size_t> stack{i};
        while (!stack.empty()) {
            MosaicNode& n = nodes_[stack.back()];
            stack.pop_back();
            if (n.is_leaf()) {
                n.score *= factor;
                continue;
            }
            if (n.los_child) stack.push_back(*n.los_child);
            if (n.nlos_child) stack.push_back(*n.nlos_child);
        }
    }

    void expand_node(std::size_t i, const ShadowRegion& shadow, double p_los) {
        OverlapDetail overlap = classify_overlap_detail(nodes_[i].region, shadow.region, eps_);
        PolyRegion los_region;
        if (overlap.kind == OverlapCase::SplitOverlap && nodes_[i].is_leaf()) {
            los_region = region_difference(nodes_[i].region, shadow.region, eps_);
            // The difference can come out empty even when the intersection
            // test left room for it; that is a full overlap after all.
            if (los_region.area() <= eps_) overlap.kind = OverlapCase::FullShadowOverlap;
        }

        switch (overlap.kind) {
            case OverlapCase::NoShadowOverlap:
                scale_subtree(i, p_los);
                return;
            case OverlapCase::FullShadowOverlap:
                scale_subtree(i, 1.0 - p_los);
                return;
            case OverlapCase::SplitOverlap:
                break;
        }

        if (!nodes_[i].is_leaf()) {
            const auto los = nodes_[i].los_child;
            const auto nlos = nodes_[i].nlos_child;
            if (los) expand_node(*los, shadow, p_los);
            if (nlos) expand_node(*nlos, shadow, p_los);
            return;
        }

        const double parent_score = nodes_[i].score;
        std::vector<BranchLabel> los_labels = nodes_[i].labels;
        std::vector<BranchLabel> nlos_labels = los_labels;
        los_labels.push_back({shadow.satellite_id, Designation::LOS});
        nlos_labels.push_back({shadow.satellite_id, Designation::NLOS});

        const std::size_t los_index = nodes_.size();
        nodes_.push_back(MosaicNode{std::move(los_region), p_los * parent_score, std::nullopt, std::nullopt,
                                    std::move(los_labels)});
        const std::size_t nlos_index = nodes_.size();
        nodes_.push_back(MosaicNode{std::move(overlap.intersection), (1.0 - p_los) * parent_score, std::nullopt,
                                    std::nullopt, std::move(nlos_labels)});
        nodes_[i].los_child = los_index;
        nodes_[i].nlos_child = nlos_index;
        ++leaf_count_;
    }

    Aoi aoi_;
    double eps_;
    std::vector<MosaicNode> nodes_;
    std::vector<ProcessedShadow> processed_;
    std::size_t leaf_count_ = 0;
};

inline MosaicTree expand(MosaicTree tree, const ShadowRegion& shadow, double p_los) {
    tree.expand_in_place(shadow, p_los);
    return tree;
}

inline MosaicTree build_mosaic(const Aoi& aoi, const std::vector<ProcessedShadow>& shadows,
                               double eps = eps_area()) {
    MosaicTree tree(aoi, eps);
    for (const auto& s : shadows) tree.expand_in_place(s.shadow, s.p_los);
    return tree;
}

// Depth-first, LOS before NLOS.
inline std::vector<LeafRecord> leaves(const MosaicTree& tree) {
    std::vector<LeafRecord> out;
    out.reserve(tree.leaf_count());
    tree.for_each_leaf([&](std::size_t, const MosaicNode& n) { out.push_back({n.region, n.score, n.labels}); });
    return out;
}

inline double total_leaf_mass(const std::vector<LeafRecord>& ls) {
    double s = 0.0;
    for (const auto& l : ls) s += l.mass;
    return s;
}

inline double violation_probability(const MosaicTree& tree) {
    double s = 0.0;
    tree.for_each_leaf([&](std::size_t, const MosaicNode& n) { s += n.score; });
    return std::clamp(tree.prior() - s, 0.0, tree.prior());
}

struct PmfEntry {
    std::size_t leaf = 0;
    double conditional_mass = 0.0;
};

// Leaf masses conditioned on the AOI. Zero-mass leaves (from p_los of
// exactly 0 or 1) carry no entry.
struct Pmf {
    std::vector<PmfEntry> entries;
    double total_mass = 0.0;

    double sum() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.conditional_mass;
        return s;
    }
};

inline Pmf pmf(const std::vector<LeafRecord>& ls) {
    Pmf out;
    out.total_mass = total_leaf_mass(ls);
    if (!(out.total_mass > 0.0)) throw AllMassLost("every leaf has zero mass; the PMF is undefined");
    for (std::size_t i = 0; i < ls.size(); ++i) {
        if (ls[i].mass > 0.0) out.entries.push_back({i, ls[i].mass / out.total_mass});
    }
    return out;
}

inline Pmf pmf(const MosaicTree& tree) { return pmf(leaves(tree)); }

// Piecewise-constant density over the mosaic; leaves are indexed by an
// R-tree on their bounding boxes for point queries.
class MosaicDensity {
public:
    explicit MosaicDensity(std::vector<LeafRecord> ls) : leaves_(std::move(ls)) {
        const Pmf p = pmf(leaves_);
        density_.assign(leaves_.size(), 0.0);
        std::vector<Entry> boxes;
        for (const auto& e : p.entries) {
            const auto& region = leaves_[e.leaf].region;
            density_[e.leaf] = e.conditional_mass / region.area();
            const Box2D& b = region.bounds();
            boxes.emplace_back(detail::BgBox(b.min, b.max), e.leaf);
        }
        index_ = Index(boxes.begin(), boxes.end());
    }

    explicit MosaicDensity(const MosaicTree& tree) : MosaicDensity(mzsm::leaves(tree)) {}

    double operator()(const Point2D& p) const {
        double f = 0.0;
        for (auto it = index_.qbegin(bg::index::covers(p)); it != index_.qend(); ++it) {
            if (region_contains(leaves_[it->second].region, p)) f += density_[it->second];
        }
        return f;
    }

    const std::vector<LeafRecord>& leaves() const { return leaves_; }

private:
    using Entry = std::pair<detail::BgBox, std::size_t>;
    using Index = bg::index::rtree<Entry, bg::index::quadratic<16>>;

    std::vector<LeafRecord> leaves_;
    std::vector<double> density_;
    Index index_;
};

inline double pdf_eval(const MosaicTree& tree, const Point2D& p) { return MosaicDensity(tree)(p); }

// Draws leaves by their conditional mass, then a uniform point inside.
class MosaicSampler {
public:
    struct Draw {
        std::size_t leaf;
        Point2D point;
    };

    explicit MosaicSampler(std::vector<LeafRecord> ls) : leaves_(std::move(ls)), pmf_(pmf(leaves_)) {
        double acc = 0.0;
        for (const auto& e : pmf_.entries) {
            acc += e.conditional_mass;
            cumulative_.push_back(acc);
        }
        samplers_.resize(pmf_.entries.size());
    }

    explicit MosaicSampler(const MosaicTree& tree) : MosaicSampler(mzsm::leaves(tree)) {}

    template <class Rng>
    Draw draw(Rng& rng) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double u = unit(rng) * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        const auto k = static_cast<std::size_t>(it - cumulative_.begin());
        if (!samplers_[k]) samplers_[k].emplace(leaves_[pmf_.entries[k].leaf].region);
        return {pmf_.entries[k].leaf, samplers_[k]->draw(rng)};
    }

    const std::vector<LeafRecord>& leaves() const { return leaves_; }

private:
    std::vector<LeafRecord> leaves_;
    Pmf pmf_;
    std::vector<double> cumulative_;
    std::vector<std::optional<RegionSampler>> samplers_;
};

inline std::vector<Point2D> sample_mosaic(const MosaicTree& tree, std::size_t n, std::uint64_t seed) {
    if (n == 0) return {};
    MosaicSampler sampler(tree);
    std::mt19937_64 rng(seed);
    std::vector<Point2D> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pts.push_back(sampler.draw(rng).point);
    return pts;
}

inline constexpr std::size_t kDefaultOracleCap = 12;

// Exhaustive 2^n expansion with no pruning: every LOS/NLOS combination is a
// leaf, empty ones included (empty region, positive mass). Used to check
// the pruned tree.
inline std::vector<LeafRecord> full_tree_oracle(const Aoi& aoi, const std::vector<ProcessedShadow>& shadows,
                                                std::size_t cap = kDefaultOracleCap, double eps = eps_area()) {
    validate(aoi);
    if (shadows.size() > cap) {
        throw OracleCapExceeded("full-tree oracle limited to " + std::to_string(cap) + " shadows");
    }
    for (const auto& s : shadows) check_probability(s.p_los, "p_los");

    std::vector<LeafRecord> out;
    out.reserve(std::size_t{1} << shadows.size());
    std::vector<BranchLabel> labels;
    auto recurse = [&](auto&& self, const PolyRegion& region, double mass, std::size_t j) -> void {
        if (j == shadows.size()) {
            out.push_back({region.area() > eps ? region : PolyRegion{}, mass, labels});
            return;
        }
        const auto& [shadow, p_los] = shadows[j];
        PolyRegion los, nlos;
        if (region.area() > eps) {
            los = region_difference(region, shadow.region, eps);
            nlos = region_intersection(region, shadow.region, eps);
        }
        labels.push_back({shadow.satellite_id, Designation::LOS});
        self(self, los, mass * p_los, j + 1);
        labels.back().designation = Designation::NLOS;
        self(self, nlos, mass * (1.0 - p_los), j + 1);
        labels.pop_back();
    };
    recurse(recurse, aoi.region, aoi.prior, 0);
    return out;
}

// Classifier with equal true-positive and true-negative rates: a shadow
// whose satellite is LOS at the truth gets p_los = posterior, otherwise
// 1 - posterior.
inline std::vector<ProcessedShadow> expected_classification(const std::vector<ShadowRegion>& shadows,
                                                            const Point2D& truth, double posterior) {
    check_probability(posterior, "posterior");
    if (!detail::finite(truth)) throw InvalidGeometry("truth position must be finite");
    std::vector<ProcessedShadow> out;
    out.reserve(shadows.size());
    for (const auto& s : shadows) {
        const bool los = truth_designation(truth, s) == Designation::LOS;
        out.push_back({s, los ? posterior : 1.0 - posterior});
    }
    return out;
}

inline MosaicTree expected_mosaic(const Aoi& aoi, const std::vector<ShadowRegion>& shadows, const Point2D& truth,
                                  double posterior, double eps = eps_area()) {
    return build_mosaic(aoi, expected_classification(shadows, truth, posterior), eps);
}

}  // namespace mzsm
