#pragma once

// Executable correctness properties of the mosaic: overlap-case
// exclusivity, order independence, partition completeness, agreement with
// the exhaustive tree, mass conservation and the GMM error bound. Shared by
// the `validate` subcommand and the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mzsm/baselines.hpp"
#include "mzsm/export.hpp"
#include "mzsm/gmm.hpp"
#include "mzsm/mosaic.hpp"
#include "mzsm/scenario.hpp"

namespace mzsm {

struct PropertyResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

// Convex polygon from sorted random angles around a center.
inline PolyRegion random_convex_polygon(std::mt19937_64& rng, const Point2D& center, double radius,
                                        std::size_t vertices = 6) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> scale(0.5, 1.0);
    std::vector<double> a(vertices);
    for (auto& t : a) t = angle(rng);
    std::sort(a.begin(), a.end());
    const double r = radius * scale(rng);
    std::vector<Point2D> ring;
    for (double t : a) ring.push_back({center.x + r * std::cos(t), center.y + r * std::sin(t)});
    return PolyRegion::polygon(ring);
}

// The classified case must be the single one whose defining area predicate
// holds: no overlap iff area(N ∩ S) <= eps, full iff area(N \ S) <= eps.
inline PropertyResult check_overlap_case(const PolyRegion& node, const PolyRegion& shadow, double eps = eps_area()) {
    PropertyResult r{"overlap-case", true, {}};
    const auto kind = classify_overlap(node, shadow, eps);
    const double inter = region_intersection(node, shadow, eps).area();
    const double outside = region_difference(node, shadow, eps).area();
    const bool none = inter <= eps;
    const bool full = !none && outside <= eps;
    const bool partial = !none && !full;
    if (none + full + partial != 1) {
        r.passed = false;
        r.detail = "predicates not exclusive";
        return r;
    }
    const OverlapCase expect = none ? OverlapCase::NoShadowOverlap : full ? OverlapCase::FullShadowOverlap
                                                                    : OverlapCase::SplitOverlap;
    if (kind != expect) {
        r.passed = false;
        r.detail = std::string("classified ") + to_string(kind) + ", predicates say " + to_string(expect) +
                   " (inter " + format_double(inter) + ", outside " + format_double(outside) + ")";
    }
    return r;
}

// Pairs leaves of two mosaics: candidates must agree in mass within
// mass_tol and have overlapping bounds; the candidate with the largest
// overlap wins. Each pair must then differ by less than area_tol.
inline PropertyResult match_leaf_multisets(const std::vector<LeafRecord>& a, const std::vector<LeafRecord>& b,
                                           double area_tol, double mass_tol = 1e-9) {
    PropertyResult r{"leaf-multiset", true, {}};
    if (a.size() != b.size()) {
        r.passed = false;
        r.detail = "leaf counts differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size());
        return r;
    }
    std::vector<bool> used(b.size(), false);
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::vector<std::size_t> cands;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j] || std::abs(a[i].mass - b[j].mass) >= mass_tol) continue;
            if (!a[i].region.bounds().overlaps(b[j].region.bounds())) continue;
            cands.push_back(j);
        }
        if (cands.empty()) {
            r.passed = false;
            r.detail = "leaf " + std::to_string(i) + " (mass " + format_double(a[i].mass) + ") has no partner";
            return r;
        }
        std::size_t best = cands.front();
        double best_inter = -1.0;
        for (auto j : cands) {
            const double inter = region_intersection(a[i].region, b[j].region, 0.0).area();
            if (inter > best_inter) {
                best_inter = inter;
                best = j;
            }
        }
        used[best] = true;
        const double sym = a[i].region.area() + b[best].region.area() - 2.0 * best_inter;
        if (!(sym < area_tol)) {
            r.passed = false;
            r.detail = "leaf " + std::to_string(i) + " symmetric difference " + format_double(sym);
            return r;
        }
    }
    return r;
}

// Leaves cover the AOI and do not overlap.
inline PropertyResult check_partition(const std::vector<LeafRecord>& ls, const Aoi& aoi, double eps = eps_area()) {
    PropertyResult r{"partition", true, {}};
    const double aoi_area = aoi.region.area();
    std::vector<PolyRegion> regions;
    for (const auto& l : ls) regions.push_back(l.region);
    const PolyRegion all = region_union_all(regions, 0.0);
    const double covered = all.area();
    const double missing = region_difference(aoi.region, all, 0.0).area();
    if (!(std::abs(covered - aoi_area) < 1e-6 * aoi_area) || !(missing < 1e-6 * aoi_area)) {
        r.passed = false;
        r.detail = "union area " + format_double(covered) + " vs AOI " + format_double(aoi_area);
        return r;
    }
    for (std::size_t i = 0; i < ls.size(); ++i) {
        for (std::size_t j = i + 1; j < ls.size(); ++j) {
            if (!ls[i].region.bounds().overlaps(ls[j].region.bounds())) continue;
            const double o = region_intersection(ls[i].region, ls[j].region, 0.0).area();
            if (!(o < eps)) {
                r.passed = false;
                r.detail = "leaves " + std::to_string(i) + " and " + std::to_string(j) + " overlap by " +
                           format_double(o);
                return r;
            }
        }
    }
    return r;
}

// Non-empty oracle leaves equal the pruned leaves; the oracle's empty-leaf
// mass equals the violation probability.
inline PropertyResult check_oracle_equivalence(const Aoi& aoi, const std::vector<ProcessedShadow>& shadows,
                                               double eps = eps_area()) {
    PropertyResult r{"oracle-equivalence", true, {}};
    const auto tree = build_mosaic(aoi, shadows, eps);
    const auto oracle = full_tree_oracle(aoi, shadows, kDefaultOracleCap, eps);
    std::vector<LeafRecord> nonempty;
    double empty_mass = 0.0;
    for (const auto& l : oracle) {
        if (l.region.area() > eps) nonempty.push_back(l);
        else empty_mass += l.mass;
    }
    auto m = match_leaf_multisets(leaves(tree), nonempty, 1e-6 * aoi.region.area());
    if (!m.passed) {
        r.passed = false;
        r.detail = m.detail;
        return r;
    }
    const double diff = std::abs(violation_probability(tree) - empty_mass);
    if (!(diff <= 1e-12)) {
        r.passed = false;
        r.detail = "p_empty " + format_double(violation_probability(tree)) + " vs oracle " + format_double(empty_mass);
    }
    return r;
}

// Sum of leaf masses plus p_empty equals the prior after every expansion.
inline PropertyResult check_mass_conservation(const Aoi& aoi, const std::vector<ProcessedShadow>& shadows,
                                              double eps = eps_area(), double tol = 1e-12) {
    PropertyResult r{"mass-conservation", true, {}};
    MosaicTree tree(aoi, eps);
    for (std::size_t j = 0; j <= shadows.size(); ++j) {
        if (j > 0) tree.expand_in_place(shadows[j - 1].shadow, shadows[j - 1].p_los);
        const double drift = std::abs(total_leaf_mass(leaves(tree)) + violation_probability(tree) - aoi.prior);
        if (!(drift <= tol)) {
            r.passed = false;
            r.detail = "after " + std::to_string(j) + " expansions drift is " + format_double(drift);
            return r;
        }
    }
    return r;
}

struct ValidateOptions {
    std::size_t oracle_n = 8;   // shadows used for ordering and oracle checks
    std::size_t orderings = 20;
    std::vector<std::size_t> gmm_ks{1, 2, 3};
    std::size_t gmm_samples = 20000;
    std::uint64_t seed = 1;
    double eps = eps_area();
};

inline std::vector<PropertyResult> validate_scenario(const Scenario& s, const ValidateOptions& opt = {}) {
    std::vector<PropertyResult> out;
    auto guarded = [&out](const std::string& name, auto&& fn) {
        try {
            auto r = fn();
            r.name = name;
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("error: ") + e.what()});
        }
    };
    const Aoi aoi = scenario_aoi(s);
    const auto shadows = classify_shadows(s, scenario_shadows(s));
    const double tol = 1e-6 * aoi.region.area();
    const std::vector<ProcessedShadow> head(shadows.begin(),
                                            shadows.begin() + static_cast<std::ptrdiff_t>(
                                                                  std::min(opt.oracle_n, shadows.size())));

    guarded("overlap cases", [&] {
        PropertyResult r;
        std::size_t checked = 0;
        MosaicTree tree(aoi, opt.eps);
        for (const auto& sh : shadows) {
            std::vector<PolyRegion> ls;
            tree.for_each_leaf([&](std::size_t, const MosaicNode& n) { ls.push_back(n.region); });
            for (const auto& l : ls) {
                auto c = check_overlap_case(l, sh.shadow.region, opt.eps);
                ++checked;
                if (!c.passed) return c;
            }
            tree.expand_in_place(sh.shadow, sh.p_los);
        }
        r.detail = std::to_string(checked) + " (leaf, shadow) pairs";
        return r;
    });

    guarded("order independence", [&] {
        PropertyResult r;
        const auto reference = leaves(build_mosaic(aoi, head, opt.eps));
        std::mt19937_64 rng(opt.seed);
        auto order = head;
        for (std::size_t k = 0; k < opt.orderings; ++k) {
            std::shuffle(order.begin(), order.end(), rng);
            auto m = match_leaf_multisets(reference, leaves(build_mosaic(aoi, order, opt.eps)), tol);
            if (!m.passed) {
                m.detail = "ordering " + std::to_string(k) + ": " + m.detail;
                return m;
            }
        }
        r.detail = std::to_string(opt.orderings) + " orderings of " + std::to_string(head.size()) + " shadows";
        return r;
    });

    guarded("partition", [&] { return check_partition(leaves(build_mosaic(aoi, shadows, opt.eps)), aoi, opt.eps); });

    guarded("oracle equivalence", [&] {
        auto r = check_oracle_equivalence(aoi, head, opt.eps);
        if (r.passed) r.detail = std::to_string(head.size()) + " shadows";
        return r;
    });

    guarded("mass conservation", [&] { return check_mass_conservation(aoi, shadows, opt.eps); });

    guarded("GMM error bound", [&] {
        PropertyResult r;
        const auto tree = build_mosaic(aoi, shadows, opt.eps);
        const MosaicDensity density(tree);
        const auto samples = sample_mosaic(tree, opt.gmm_samples, opt.seed);
        for (auto k : opt.gmm_ks) {
            const auto model = fit_gmm(samples, k, 5, opt.seed + k);
            const double d = integrated_percent_error(model, density, aoi.region.bounds());
            r.detail += (r.detail.empty() ? "" : ", ") + std::string("k=") + std::to_string(k) + ": " +
                        format_double(d);
            if (!(d >= 0.0 && d <= 2.0)) r.passed = false;
        }
        return r;
    });
    return out;
}

}  // namespace mzsm
