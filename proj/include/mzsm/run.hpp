#pragma once

// Experiment orchestration: a timed mosaic run with per-layer statistics and
// the posterior / gamma / grid-resolution / GMM-k sweep.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mzsm/baselines.hpp"
#include "mzsm/confidence.hpp"
#include "mzsm/export.hpp"
#include "mzsm/gmm.hpp"
#include "mzsm/mosaic.hpp"
#include "mzsm/scenario.hpp"

namespace mzsm {

struct QuadraticFit {
    double a = 0.0, b = 0.0, c = 0.0;
    double r2 = 0.0;
};

// Least squares y = a x^2 + b x + c. R^2 is 1 for a constant series that
// the fit reproduces exactly.
inline QuadraticFit fit_quadratic(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) throw InvalidGeometry("quadratic fit needs at least 3 points");
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd Y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = x[i] * x[i];
        A(i, 1) = x[i];
        A(i, 2) = 1.0;
        Y(i) = y[i];
    }
    const Eigen::Vector3d coef = A.colPivHouseholderQr().solve(Y);
    const double mean = Y.mean();
    const double ss_res = (A * coef - Y).squaredNorm();
    const double ss_tot = (Y.array() - mean).square().sum();
    QuadraticFit f{coef(0), coef(1), coef(2), 0.0};
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res < 1e-18 ? 1.0 : 0.0);
    return f;
}

struct RunOptions {
    std::size_t repetitions = 5;
    std::optional<double> posterior;  // overrides the scenario classifier
    double eps = eps_area();
};

struct RunReport {
    std::vector<std::size_t> leaf_counts;  // index j: after j expansions
    std::vector<double> layer_ms;          // median wall time of expansion j+1
    std::vector<double> p_empty_trace;     // index j: after j expansions
    QuadraticFit fit;
    double total_ms = 0.0;                 // median over repetitions
    std::vector<std::string> export_paths;
};

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline std::pair<MosaicTree, RunReport> run_mosaic(const Scenario& s, const RunOptions& opt = {}) {
    using clock = std::chrono::steady_clock;
    const std::size_t reps = std::max<std::size_t>(1, opt.repetitions);
    const Aoi aoi = scenario_aoi(s);
    const auto shadows = classify_shadows(s, scenario_shadows(s), opt.posterior);
    const std::size_t n = shadows.size();

    RunReport report;
    std::vector<std::vector<double>> layer_samples(n);
    std::vector<double> totals;
    std::optional<MosaicTree> result;
    for (std::size_t r = 0; r < reps; ++r) {
        MosaicTree tree(aoi, opt.eps);
        std::vector<std::size_t> counts{tree.leaf_count()};
        std::vector<double> trace{violation_probability(tree)};
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const auto t0 = clock::now();
            tree.expand_in_place(shadows[j].shadow, shadows[j].p_los);
            const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
            layer_samples[j].push_back(ms);
            total += ms;
            counts.push_back(tree.leaf_count());
            trace.push_back(violation_probability(tree));
        }
        totals.push_back(total);
        if (r == 0) {
            report.leaf_counts = std::move(counts);
            report.p_empty_trace = std::move(trace);
            result.emplace(std::move(tree));
        }
    }
    for (auto& v : layer_samples) report.layer_ms.push_back(median(v));
    report.total_ms = median(totals);
    if (report.leaf_counts.size() >= 3) {
        std::vector<double> xs, ys;
        for (std::size_t j = 0; j < report.leaf_counts.size(); ++j) {
            xs.push_back(static_cast<double>(j));
            ys.push_back(static_cast<double>(report.leaf_counts[j]));
        }
        report.fit = fit_quadratic(xs, ys);
    }
    return {std::move(*result), std::move(report)};
}

inline CsvTable report_table(const RunReport& r) {
    CsvTable t({"layer", "leaf_count", "layer_ms", "p_empty"});
    for (std::size_t j = 0; j < r.leaf_counts.size(); ++j) {
        t.add_row({std::to_string(j), std::to_string(r.leaf_counts[j]),
                   j == 0 ? std::string{} : format_double(r.layer_ms[j - 1]), format_double(r.p_empty_trace[j])});
    }
    return t;
}

struct SweepConfig {
    std::vector<double> posteriors{0.5, 0.75, 0.85, 0.95, 0.9999};
    std::vector<double> gammas{0.95};
    std::vector<double> grid_resolutions{30.0, 10.0, 3.0};
    std::vector<std::size_t> gmm_ks{1, 2, 3};
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    double quad_resolution = 0.5;
    std::size_t replicates = 5;
    std::string pmf_dir;  // when set, one PMF CSV per posterior is written here
};

enum class RowKind { Mosaic, Gmm, Collection };

inline const char* to_string(RowKind k) {
    switch (k) {
        case RowKind::Mosaic: return "mosaic";
        case RowKind::Gmm: return "gmm";
        case RowKind::Collection: return "collection";
    }
    return "?";
}

// One sweep result. Fields that do not apply to the row kind stay empty.
struct SweepRow {
    RowKind kind = RowKind::Mosaic;
    double posterior = 0.0;
    std::optional<double> gamma, resolution;
    std::optional<std::size_t> k;
    std::optional<double> p_empty;
    std::optional<std::size_t> n_leaves;
    std::optional<double> delta_percent, iou;
    std::optional<std::size_t> mzsm_members, grid_members, mzsm_faces;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

namespace detail::sweep {

inline std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }
inline std::string cell(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string{}; }

template <class Fn>
void guarded(SweepRow& row, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
    }
}

}  // namespace detail::sweep

// Every row is checked against the module invariants; failures are flagged
// in the status column and the sweep carries on.
inline std::vector<SweepRow> run_sweep(const Scenario& s, const SweepConfig& cfg) {
    using detail::sweep::guarded;
    const Aoi aoi = scenario_aoi(s);
    const auto shadows = scenario_shadows(s);
    std::vector<SweepRow> rows;

    for (double posterior : cfg.posteriors) {
        SweepRow mrow;
        mrow.kind = RowKind::Mosaic;
        mrow.posterior = posterior;
        std::optional<MosaicTree> tree;
        std::vector<ProcessedShadow> processed;
        guarded(mrow, [&] {
            processed = expected_classification(shadows, s.truth, posterior);
            tree.emplace(build_mosaic(aoi, processed));
            const auto ls = leaves(*tree);
            mrow.p_empty = violation_probability(*tree);
            mrow.n_leaves = ls.size();
            const double drift = std::abs(total_leaf_mass(ls) + *mrow.p_empty - aoi.prior);
            if (drift > 1e-12) mrow.status = "violation: mass conservation off by " + format_double(drift);
            if (!cfg.pmf_dir.empty()) {
                char tag[32];
                std::snprintf(tag, sizeof tag, "%.6g", posterior);
                const auto path = (std::filesystem::path(cfg.pmf_dir) /
                                   ("pmf_posterior_" + std::string(tag) + ".csv")).string();
                pmf_table(ls, pmf(ls)).save(path);
            }
        });
        rows.push_back(mrow);
        if (!tree) continue;

        std::optional<MosaicDensity> density;
        std::vector<Point2D> samples;
        if (!cfg.gmm_ks.empty()) {
            SweepRow probe;
            guarded(probe, [&] {
                density.emplace(*tree);
                samples = sample_mosaic(*tree, cfg.samples, cfg.seed);
            });
            if (!probe.ok()) {
                for (auto k : cfg.gmm_ks) {
                    SweepRow r;
                    r.kind = RowKind::Gmm;
                    r.posterior = posterior;
                    r.k = k;
                    r.status = probe.status;
                    rows.push_back(r);
                }
            }
        }
        if (density) {
            for (auto k : cfg.gmm_ks) {
                SweepRow r;
                r.kind = RowKind::Gmm;
                r.posterior = posterior;
                r.k = k;
                guarded(r, [&] {
                    const auto model = fit_gmm(samples, k, cfg.replicates, cfg.seed + k);
                    const double d = integrated_percent_error(model, *density, aoi.region.bounds(),
                                                              cfg.quad_resolution);
                    r.delta_percent = d;
                    if (!(d >= 0.0 && d <= 2.0)) r.status = "violation: delta outside [0, 2]";
                });
                rows.push_back(r);
            }
        }

        std::vector<double> p_los;
        for (const auto& p : processed) p_los.push_back(p.p_los);
        for (double gamma : cfg.gammas) {
            std::optional<ConfidenceCollection> mc;
            for (double res : cfg.grid_resolutions) {
                SweepRow r;
                r.kind = RowKind::Collection;
                r.posterior = posterior;
                r.gamma = gamma;
                r.resolution = res;
                guarded(r, [&] {
                    if (!mc) {
                        const auto ls = leaves(*tree);
                        mc.emplace(build_collection(pmf(ls), ls, gamma));
                    }
                    const auto grid = build_grid(aoi, s.aoi_box, res, shadows, p_los);
                    const auto gc = grid_collection(grid, gamma);
                    r.mzsm_members = mc->members.size();
                    r.grid_members = gc.members.size();
                    r.mzsm_faces = mc->outline.face_count();
                    const double v = iou(mc->outline, gc.outline);
                    r.iou = v;
                    if (!(v >= 0.0 && v <= 1.0)) r.status = "violation: IOU outside [0, 1]";
                });
                rows.push_back(r);
            }
        }
    }
    return rows;
}

inline CsvTable sweep_table(const std::vector<SweepRow>& rows) {
    using detail::sweep::cell;
    CsvTable t({"kind", "posterior", "gamma", "resolution", "k", "p_empty", "n_leaves", "delta_percent", "iou",
                "mzsm_members", "grid_members", "mzsm_faces", "status"});
    for (const auto& r : rows) {
        t.add_row({to_string(r.kind), format_double(r.posterior), cell(r.gamma), cell(r.resolution), cell(r.k),
                   cell(r.p_empty), cell(r.n_leaves), cell(r.delta_percent), cell(r.iou), cell(r.mzsm_members),
                   cell(r.grid_members), cell(r.mzsm_faces), r.status});
    }
    return t;
}

}  // namespace mzsm
