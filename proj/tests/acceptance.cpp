// Acceptance run: one PASS/FAIL line per criterion. Exits 1 when any
// criterion fails; with --allow-known-gaps, failures of the criteria listed
// in kKnownGaps are still printed as FAIL but do not fail the run.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "CLI11.hpp"

#include "mzsm/properties.hpp"
#include "mzsm/run.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace mzsm;

namespace {

// The posterior curve is concave on this canyon, not convex; see README.
const std::set<std::string> kKnownGaps{"Self-monitoring trend"};

struct Outcome {
    bool passed = true;
    std::string detail;
};

struct Tally {
    int passed = 0, failed = 0, tolerated = 0;
    bool allow_known = false;

    void run(const std::string& name, const std::function<Outcome()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool known = kKnownGaps.count(name) > 0;
        std::printf("[%s] %s: %s (%.1f s)%s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), s,
                    !o.passed && known ? " [known gap]" : "");
        std::fflush(stdout);
        if (o.passed) ++passed;
        else if (known && allow_known) ++tolerated;
        else ++failed;
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Scenario canyon(std::uint64_t seed) {
    CanyonOptions opt;
    opt.satellites = 14;
    opt.seed = seed;
    return generate_canyon(opt);
}

scenes::Setup expected_setup(const Scenario& s, double posterior) {
    return {scenario_aoi(s), expected_classification(scenario_shadows(s), s.truth, posterior)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria for the mosaic library"};
    std::string scenario_path = MZSM_SCENARIO_DIR "/canyon14.json";
    std::size_t b_scenarios = 100, b_orderings = 20, a_pairs = 10000;
    Tally tally;
    app.add_option("--scenario", scenario_path, "Fixed 14-shadow canyon scenario");
    app.add_option("--order-scenarios", b_scenarios, "Random scenarios in the ordering suite");
    app.add_option("--orderings", b_orderings, "Orderings per scenario");
    app.add_option("--pairs", a_pairs, "Random (node, shadow) pairs in the overlap-case suite");
    app.add_flag("--allow-known-gaps", tally.allow_known, "Do not fail the run on documented gaps");
    CLI11_PARSE(app, argc, argv);

    const Scenario fixed = load_scenario(scenario_path);
    const double eps = 1e-9;

    // Random scenarios shared by the ordering, partition, oracle and mass checks.
    std::vector<scenes::Setup> random_setups;
    {
        std::mt19937_64 rng(2024);
        for (std::size_t i = 0; i < b_scenarios; ++i) random_setups.push_back(scenes::random_setup(rng, 1 + i % 8));
    }
    std::vector<scenes::Setup> named{scenes::illustrative(), scenes::venn4(0xF, 0.9), scenes::venn4(0x0, 0.9),
                                     expected_setup(fixed, 0.85)};

    tally.run("Overlap-case exclusivity", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> c(-15, 15), pick(0, 1);
        std::size_t counts[3] = {0, 0, 0};
        for (std::size_t i = 0; i < a_pairs; ++i) {
            const Point2D nc{c(rng), c(rng)};
            const auto node = pick(rng) < 0.5 ? PolyRegion::polygon(oracle::random_star(rng, nc, 3, 10, 9))
                                              : PolyRegion::polygon(oracle::random_convex(rng, nc, 10, 7));
            const double u = pick(rng);
            PolyRegion shadow;
            if (u < 0.2) shadow = PolyRegion::polygon(oracle::random_convex(rng, nc, 40, 8));  // mostly covers
            else if (u < 0.3) shadow = region_union(node, PolyRegion::box(nc.x, nc.y, nc.x + 30, nc.y + 30));
            else shadow = PolyRegion::polygon(oracle::random_star(rng, {c(rng) * 2, c(rng) * 2}, 4, 16, 11));
            const auto r = check_overlap_case(node, shadow, eps);
            if (!r.passed) return Outcome{false, fmt("pair %zu: %s", i, r.detail.c_str())};
            ++counts[static_cast<int>(classify_overlap(node, shadow, eps))];
        }
        const double s = elapsed_since(t0);
        const bool all_cases = counts[0] > 0 && counts[1] > 0 && counts[2] > 0;
        return Outcome{all_cases && s < 60.0 && a_pairs >= 10000,
                       fmt("%zu pairs, cases %zu/%zu/%zu, %.1f s of 60", a_pairs, counts[0], counts[1], counts[2], s)};
    });

    std::size_t partition_checks = 0;
    std::string partition_failure;
    auto check_c = [&](const std::vector<LeafRecord>& ls, const Aoi& aoi) {
        ++partition_checks;
        const auto r = check_partition(ls, aoi, eps);
        if (!r.passed && partition_failure.empty()) partition_failure = r.detail;
    };

    tally.run("Order independence", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(11);
        for (std::size_t i = 0; i < random_setups.size(); ++i) {
            auto s = random_setups[i];
            const auto ref = leaves(build_mosaic(s.aoi, s.shadows, eps));
            check_c(ref, s.aoi);
            for (std::size_t k = 0; k < b_orderings; ++k) {
                std::shuffle(s.shadows.begin(), s.shadows.end(), rng);
                const auto ls = leaves(build_mosaic(s.aoi, s.shadows, eps));
                check_c(ls, s.aoi);
                const auto m = match_leaf_multisets(ref, ls, 1e-6 * s.aoi.region.area(), 1e-9);
                if (!m.passed) return Outcome{false, fmt("scenario %zu ordering %zu: %s", i, k, m.detail.c_str())};
            }
        }
        const double s = elapsed_since(t0);
        return Outcome{s < 600.0 && random_setups.size() >= 100 && b_orderings >= 20,
                       fmt("%zu scenarios x %zu orderings, n <= 8, %.1f s of 600", random_setups.size(), b_orderings, s)};
    });

    tally.run("Partition completeness", [&] {
        for (const auto& s : named) check_c(leaves(build_mosaic(s.aoi, s.shadows, eps)), s.aoi);
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto s = expected_setup(canyon(seed), 0.85);
            check_c(leaves(build_mosaic(s.aoi, s.shadows, eps)), s.aoi);
        }
        if (!partition_failure.empty()) return Outcome{false, partition_failure};
        return Outcome{true, fmt("%zu trees", partition_checks)};
    });

    tally.run("Oracle equivalence", [&] {
        for (std::size_t i = 0; i < random_setups.size(); ++i) {
            const auto r = check_oracle_equivalence(random_setups[i].aoi, random_setups[i].shadows, eps);
            if (!r.passed) return Outcome{false, fmt("scenario %zu: %s", i, r.detail.c_str())};
        }
        const auto ill = scenes::illustrative();
        if (!check_oracle_equivalence(ill.aoi, ill.shadows, eps).passed) return Outcome{false, "illustrative example"};
        const auto lo = scenes::venn4(0xF, 0.9), hi = scenes::venn4(0x0, 0.9);
        const double p_lo = violation_probability(build_mosaic(lo.aoi, lo.shadows, eps));
        const double p_hi = violation_probability(build_mosaic(hi.aoi, hi.shadows, eps));
        const bool exact = std::abs(p_lo - 0.0001) <= 1e-12 && std::abs(p_hi - 0.6561) <= 1e-12;
        const bool oracles = check_oracle_equivalence(lo.aoi, lo.shadows, eps).passed &&
                             check_oracle_equivalence(hi.aoi, hi.shadows, eps).passed;
        return Outcome{exact && oracles, fmt("%zu random scenarios; constructions give %.17g and %.17g",
                                             random_setups.size(), p_lo, p_hi)};
    });

    tally.run("Mass conservation", [&] {
        std::vector<scenes::Setup> all = random_setups;
        all.insert(all.end(), named.begin(), named.end());
        for (std::uint64_t seed = 1; seed <= 10; ++seed) all.push_back(expected_setup(canyon(seed), 0.85));
        for (double q : {0.5, 0.75, 0.95, 0.9999}) all.push_back(expected_setup(fixed, q));
        for (std::size_t i = 0; i < all.size(); ++i) {
            const auto r = check_mass_conservation(all[i].aoi, all[i].shadows, eps, 1e-12);
            if (!r.passed) return Outcome{false, fmt("scenario %zu: %s", i, r.detail.c_str())};
        }
        return Outcome{true, fmt("%zu scenarios, every expansion within 1e-12", all.size())};
    });

    tally.run("Self-monitoring trend", [&] {
        const std::vector<double> q{0.5, 0.75, 0.85, 0.95, 0.9999};
        const Aoi aoi = scenario_aoi(fixed);
        const auto shadows = scenario_shadows(fixed);
        if (!region_contains(aoi.region, fixed.truth)) return Outcome{false, "truth is outside the AOI"};
        std::vector<double> p;
        for (double v : q) p.push_back(violation_probability(expected_mosaic(aoi, shadows, fixed.truth, v)));
        bool decreasing = true, convex = true;
        for (std::size_t i = 1; i < p.size(); ++i) decreasing = decreasing && p[i] < p[i - 1];
        for (std::size_t i = 2; i < p.size(); ++i) {
            const double s0 = (p[i - 1] - p[i - 2]) / (q[i - 1] - q[i - 2]);
            const double s1 = (p[i] - p[i - 1]) / (q[i] - q[i - 1]);
            convex = convex && s1 >= s0;
        }
        const bool ends = p.back() < 0.01 && p.front() > 0.5;
        return Outcome{decreasing && ends && convex,
                       fmt("p_empty %.4g %.4g %.4g %.4g %.4g; decreasing %s, endpoints %s, convex %s", p[0], p[1], p[2],
                           p[3], p[4], decreasing ? "yes" : "no", ends ? "yes" : "no", convex ? "yes" : "no")};
    });

    tally.run("Quadratic complexity", [&] {
        double min_r2 = 1.0, min_a = 1e300, max_a = -1e300;
        RunOptions opt;
        opt.repetitions = 1;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto r = run_mosaic(canyon(seed), opt).second;
            min_r2 = std::min(min_r2, r.fit.r2);
            min_a = std::min(min_a, r.fit.a);
            max_a = std::max(max_a, r.fit.a);
        }
        return Outcome{min_r2 > 0.95, fmt("10 canyons, min R2 %.4f, quadratic coefficient %.2f..%.2f", min_r2, min_a, max_a)};
    });

    tally.run("Timing budget", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto [tree, r] = run_mosaic(fixed, {});
        const double wall = elapsed_since(t0) / 5.0;
        return Outcome{r.total_ms < 5000.0 && wall < 5.0,
                       fmt("%zu shadows, %zu leaves, median %.1f ms, %.2f s per run with shadows", tree.processed().size(),
                           tree.leaf_count(), r.total_ms, wall)};
    });

    std::vector<SweepRow> rows;
    tally.run("GMM error bound", [&] {
        SweepConfig cfg;
        cfg.gammas = {0.95};
        rows = run_sweep(fixed, cfg);
        std::size_t fits = 0;
        double lo = 2.0, hi = 0.0;
        for (const auto& r : rows) {
            if (r.kind != RowKind::Gmm) continue;
            if (!r.ok() || !r.delta_percent) return Outcome{false, "sweep row: " + r.status};
            ++fits;
            lo = std::min(lo, *r.delta_percent);
            hi = std::max(hi, *r.delta_percent);
        }
        const auto street = build_mosaic({PolyRegion::box(0, 0, 100, 20), 1.0},
                                         {{{"S", PolyRegion::box(10, -5, 90, 25)}, 0.99}}, eps);
        const auto x = sample_mosaic(street, 100000, 1);
        const double d1 = integrated_percent_error(fit_gmm(x, 1, 5, 1), street);
        const double d2 = integrated_percent_error(fit_gmm(x, 2, 5, 1), street);
        const bool bounded = fits > 0 && lo >= 0.0 && hi <= 2.0;
        return Outcome{bounded && d1 > d2 && d1 > 0.9,
                       fmt("%zu sweep fits in [%.3f, %.3f]; bimodal street k=1 %.3f, k=2 %.3f", fits, lo, hi, d1, d2)};
    });

    tally.run("PDF normalization", [&] {
        std::vector<scenes::Setup> cases = named;
        for (double q : {0.5, 0.9999}) cases.push_back(expected_setup(fixed, q));
        for (std::size_t i = 0; i < 5; ++i) cases.push_back(random_setups[i * 7 + 3]);
        double worst = 0.0;
        for (const auto& s : cases) {
            const MosaicDensity f(build_mosaic(s.aoi, s.shadows, eps));
            const double v =
                oracle::adaptive_integral([&](const Point2D& p) { return f(p); }, s.aoi.region.bounds(), 0.25, 6);
            worst = std::max(worst, std::abs(v - 1.0));
        }
        return Outcome{worst < 1e-3, fmt("%zu scenarios, worst |integral - 1| = %.2e", cases.size(), worst)};
    });

    tally.run("IOU convergence", [&] {
        std::vector<double> v;
        for (const auto& r : rows) {
            if (r.kind == RowKind::Collection && r.posterior == 0.85 && r.gamma == 0.95 && r.iou) v.push_back(*r.iou);
        }
        if (v.size() != 3) return Outcome{false, "sweep did not produce three collection rows at 0.85 / 0.95"};
        const bool monotone = v[1] >= v[0] - 0.05 && v[2] >= v[1] - 0.05;
        return Outcome{monotone && v[2] - v[0] >= 0.15, fmt("IOU at 30/10/3 m: %.3f %.3f %.3f", v[0], v[1], v[2])};
    });

    tally.run("Uniform PMF", [&] {
        double worst = 0.0;
        std::vector<scenes::Setup> cases{expected_setup(fixed, 0.5)};
        for (std::uint64_t seed = 2; seed <= 4; ++seed) cases.push_back(expected_setup(canyon(seed), 0.5));
        for (const auto& s : cases) {
            const auto p = pmf(build_mosaic(s.aoi, s.shadows, eps));
            double lo = 1.0, hi = 0.0;
            for (const auto& e : p.entries) {
                lo = std::min(lo, e.conditional_mass);
                hi = std::max(hi, e.conditional_mass);
            }
            worst = std::max(worst, hi / lo - 1.0);
        }
        return Outcome{worst <= 1e-9, fmt("%zu scenarios, worst max/min - 1 = %.2e", cases.size(), worst)};
    });

    tally.run("Illustrative example", [&] {
        const auto s = scenes::illustrative();
        const auto tree = build_mosaic(s.aoi, s.shadows, eps);
        const auto oracle = full_tree_oracle(s.aoi, s.shadows, kDefaultOracleCap, eps);
        return Outcome{tree.leaf_count() == 4 && oracle.size() == 8,
                       fmt("%zu leaves, full tree %zu leaves at depth %zu", tree.leaf_count(), oracle.size(), s.shadows.size())};
    });

    std::printf("%d passed, %d failed, %d known gaps tolerated\n", tally.passed, tally.failed, tally.tolerated);
    return tally.failed == 0 ? 0 : 1;
}
