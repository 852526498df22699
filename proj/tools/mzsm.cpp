// mzsm command-line tool: build mosaics, run sweeps, validate scenarios and
// generate canyon scenarios.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mzsm/export.hpp"
#include "mzsm/properties.hpp"
#include "mzsm/run.hpp"
#include "mzsm/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kInputError = 2;

std::string join(const std::filesystem::path& dir, const std::string& name) { return (dir / name).string(); }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw mzsm::IoError("cannot create directory '" + dir + "': " + ec.message());
}

struct MosaicArgs {
    std::string scenario;
    std::string out;
    std::uint64_t seed = 1;
    std::size_t reps = 5;
    std::size_t samples = 0;
    double gamma = 0.95;
    double posterior = -1.0;
};

int cmd_mosaic(const MosaicArgs& a) {
    const auto s = mzsm::load_scenario(a.scenario);
    mzsm::RunOptions opt;
    opt.repetitions = a.reps;
    if (a.posterior >= 0.0) opt.posterior = a.posterior;
    auto [tree, report] = mzsm::run_mosaic(s, opt);
    const auto ls = mzsm::leaves(tree);

    std::printf("scenario      %s\n", s.name.c_str());
    std::printf("eps_area      %g\n", mzsm::eps_area());
    std::printf("shadows       %zu\n", tree.processed().size());
    std::printf("leaves        %zu\n", ls.size());
    std::printf("p_empty       %.17g\n", mzsm::violation_probability(tree));
    std::printf("leaf counts  ");
    for (auto c : report.leaf_counts) std::printf(" %zu", c);
    std::printf("\nquadratic     a=%.6g b=%.6g c=%.6g R2=%.6f\n", report.fit.a, report.fit.b, report.fit.c,
                report.fit.r2);
    std::printf("total ms      %.3f (median of %zu)\n", report.total_ms, a.reps);

    if (a.out.empty()) return kOk;
    ensure_dir(a.out);
    const std::filesystem::path dir(a.out);
    mzsm::export_mosaic(tree, join(dir, "mosaic.geojson"));
    mzsm::report_table(report).save(join(dir, "report.csv"));
    std::vector<std::string> written{join(dir, "mosaic.geojson"), join(dir, "report.csv")};
    if (total_leaf_mass(ls) > 0.0) {
        const auto p = mzsm::pmf(ls);
        mzsm::pmf_table(ls, p).save(join(dir, "pmf.csv"));
        std::vector<mzsm::PolyRegion> regions;
        for (const auto& l : ls) regions.push_back(l.region);
        mzsm::export_collection(mzsm::build_collection(p, ls, a.gamma), regions, join(dir, "collection.geojson"));
        written.push_back(join(dir, "pmf.csv"));
        written.push_back(join(dir, "collection.geojson"));
        if (a.samples > 0) {
            mzsm::CsvTable t({"x", "y"});
            for (const auto& q : mzsm::sample_mosaic(tree, a.samples, a.seed)) {
                t.add_row({mzsm::format_double(q.x), mzsm::format_double(q.y)});
            }
            t.save(join(dir, "samples.csv"));
            written.push_back(join(dir, "samples.csv"));
        }
    } else {
        std::fprintf(stderr, "all mass lies outside the AOI; PMF and collection not written\n");
    }
    for (const auto& w : written) std::printf("wrote         %s\n", w.c_str());
    return kOk;
}

struct SweepArgs {
    std::string scenario;
    std::string out;
    mzsm::SweepConfig cfg;
};

int cmd_sweep(SweepArgs a) {
    const auto s = mzsm::load_scenario(a.scenario);
    if (!a.out.empty()) {
        ensure_dir(a.out);
        a.cfg.pmf_dir = a.out;
    }
    const auto rows = mzsm::run_sweep(s, a.cfg);
    const auto table = mzsm::sweep_table(rows);
    std::fputs(table.str().c_str(), stdout);
    if (!a.out.empty()) table.save(join(a.out, "sweep.csv"));
    for (const auto& r : rows) {
        if (!r.ok()) return kFailed;
    }
    return kOk;
}

struct ValidateArgs {
    std::string scenario;
    mzsm::ValidateOptions opt;
};

int cmd_validate(const ValidateArgs& a) {
    const auto s = mzsm::load_scenario(a.scenario);
    bool ok = true;
    for (const auto& r : mzsm::validate_scenario(s, a.opt)) {
        std::printf("[%s] %s%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.empty() ? "" : ": ",
                    r.detail.c_str());
        ok = ok && r.passed;
    }
    return ok ? kOk : kFailed;
}

struct GenerateArgs {
    std::string templ = "canyon";
    std::string out;
    mzsm::CanyonOptions opt;
};

int cmd_generate(const GenerateArgs& a) {
    if (a.templ != "canyon") throw mzsm::SchemaError("unknown template '" + a.templ + "'");
    const auto s = mzsm::generate_canyon(a.opt);
    if (a.out.empty()) {
        std::printf("%s\n", mzsm::scenario_to_json(s).dump(2).c_str());
    } else {
        mzsm::save_scenario(s, a.out);
        std::printf("wrote %s\n", a.out.c_str());
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mosaic zonotope shadow matching"};
    app.require_subcommand(1);

    MosaicArgs margs;
    auto* mosaic = app.add_subcommand("mosaic", "Build the mosaic for a scenario and export it");
    mosaic->add_option("scenario", margs.scenario, "Scenario JSON file")->required();
    mosaic->add_option("--out", margs.out, "Output directory");
    mosaic->add_option("--seed", margs.seed, "Seed for --samples");
    mosaic->add_option("--reps", margs.reps, "Timing repetitions")->check(CLI::PositiveNumber);
    mosaic->add_option("--samples", margs.samples, "Write this many position samples");
    mosaic->add_option("--gamma", margs.gamma, "Confidence level of the exported collection");
    mosaic->add_option("--posterior", margs.posterior, "Override the classifier with an expected-mosaic posterior");

    SweepArgs sargs;
    auto* sweep = app.add_subcommand("sweep", "Sweep posteriors, confidence levels, grid sizes and GMM sizes");
    sweep->add_option("scenario", sargs.scenario, "Scenario JSON file")->required();
    sweep->add_option("--posteriors", sargs.cfg.posteriors)->delimiter(',');
    sweep->add_option("--gammas", sargs.cfg.gammas)->delimiter(',');
    sweep->add_option("--grid", sargs.cfg.grid_resolutions, "Grid resolutions in meters")->delimiter(',');
    sweep->add_option("--gmm-k", sargs.cfg.gmm_ks, "Mixture sizes")->delimiter(',');
    sweep->add_option("--samples", sargs.cfg.samples, "Samples drawn for each GMM fit");
    sweep->add_option("--seed", sargs.cfg.seed);
    sweep->add_option("--quad", sargs.cfg.quad_resolution, "Quadrature resolution for the density error");
    sweep->add_option("--out", sargs.out, "Output directory for sweep.csv and PMF files");

    ValidateArgs vargs;
    auto* validate = app.add_subcommand("validate", "Run the property suite on a scenario");
    validate->add_option("scenario", vargs.scenario, "Scenario JSON file")->required();
    validate->add_option("--oracle-n", vargs.opt.oracle_n, "Shadows used by ordering and oracle checks")
        ->check(CLI::Range(1, 12));
    validate->add_option("--orderings", vargs.opt.orderings);
    validate->add_option("--seed", vargs.opt.seed);

    GenerateArgs gargs;
    auto* generate = app.add_subcommand("generate", "Generate a template scenario");
    generate->add_option("--template", gargs.templ, "Scenario template (canyon)");
    generate->add_option("--satellites", gargs.opt.satellites)->required();
    generate->add_option("--seed", gargs.opt.seed);
    generate->add_option("--posterior", gargs.opt.posterior);
    generate->add_option("--nlos", gargs.opt.nlos_count, "Exact number of satellites blocked at the truth position");
    generate->add_option("--out", gargs.out, "Output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*mosaic) return cmd_mosaic(margs);
        if (*sweep) return cmd_sweep(sargs);
        if (*validate) return cmd_validate(vargs);
        if (*generate) return cmd_generate(gargs);
    } catch (const mzsm::SchemaError& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return kInputError;
    } catch (const mzsm::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kInputError;
    } catch (const mzsm::InvalidGeometry& e) {
        std::fprintf(stderr, "invalid geometry: %s\n", e.what());
        return kInputError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFailed;
    }
    return kOk;
}
