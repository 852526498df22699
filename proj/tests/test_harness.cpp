#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mzsm/export.hpp"
#include "mzsm/run.hpp"
#include "mzsm/scenario.hpp"
#include "scenes.hpp"

using namespace mzsm;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "name": "minimal",
  "aoi": {"min": [0, 0], "max": [40, 40]},
  "prior": 1.0,
  "truth": [5, 35],
  "buildings": [{"id": "B1", "height": 20, "footprint": [[15, 15], [25, 15], [25, 25], [15, 25]]}],
  "satellites": [{"id": "G01", "elevation": 45, "azimuth": 90}],
  "classifier": {"posterior": 0.85}
})";

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mzsm_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string schema_message(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const SchemaError& e) {
        return e.what();
    }
    return "no error";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    s.replace(s.find(from), from.size(), to);
    return s;
}

Scenario small_canyon(std::size_t sats, std::uint64_t seed) {
    CanyonOptions opt;
    opt.satellites = sats;
    opt.seed = seed;
    return generate_canyon(opt);
}

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" MZSM_CLI "\" " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Scenario, MinimalRoundTrip) {
    const auto dir = scratch("roundtrip");
    const auto s = parse_scenario(kMinimal);
    save_scenario(s, (dir / "s.json").string());
    const auto back = load_scenario((dir / "s.json").string());
    EXPECT_EQ(scenario_to_json(back), scenario_to_json(s));
    EXPECT_EQ(back.name, "minimal");
    EXPECT_EQ(back.satellites.at(0).azimuth_deg, 90.0);
    EXPECT_EQ(back.classifier.posterior, 0.85);
}

TEST(Scenario, FootprintsLeaveTheAoi) {
    auto text = replace(kMinimal, "[[15, 15], [25, 15], [25, 25], [15, 25]]", "[[30, -10], [50, -10], [50, 10], [30, 10]]");
    const auto s = parse_scenario(text);
    EXPECT_NEAR(scenario_aoi(s).region.area(), 1600.0 - 10.0 * 10.0, 1e-9);
    EXPECT_NEAR(scenario_aoi(parse_scenario(kMinimal)).region.area(), 1500.0, 1e-9);
}

TEST(Scenario, SchemaErrorsNameTheField) {
    EXPECT_NE(schema_message(replace(kMinimal, "\"elevation\": 45", "\"elevation\": 0")).find("$.satellites[0].elevation"),
              std::string::npos);
    EXPECT_NE(schema_message(replace(kMinimal, ", \"azimuth\": 90", "")).find("$.satellites[0]"), std::string::npos);
    EXPECT_NE(schema_message(replace(kMinimal, "\"height\": 20", "\"height\": -1")).find("$.buildings[0].height"),
              std::string::npos);
    EXPECT_NE(schema_message(replace(kMinimal, "\"prior\": 1.0", "\"prior\": 2")).find("$.prior"), std::string::npos);
    EXPECT_NE(schema_message(replace(kMinimal, "[5, 35]", "\"here\"")).find("$.truth"), std::string::npos);
    const auto dup = replace(kMinimal, R"([{"id": "G01", "elevation": 45, "azimuth": 90}])",
                             R"([{"id": "G01", "elevation": 45, "azimuth": 90}, {"id": "G01", "elevation": 30, "azimuth": 9}])");
    EXPECT_NE(schema_message(dup).find("duplicate"), std::string::npos);
    EXPECT_NE(schema_message("{\n\"aoi\": [1,\n").find("line"), std::string::npos);
}

TEST(Scenario, ExplicitClassifier) {
    const auto s = parse_scenario(replace(kMinimal, R"({"posterior": 0.85})", R"({"p_los": {"G01": 0.3}})"));
    EXPECT_EQ(s.classifier.p_los.at("G01"), 0.3);
    EXPECT_NE(schema_message(replace(kMinimal, R"({"posterior": 0.85})", R"({"p_los": {"G02": 0.3}})")).find("unknown"),
              std::string::npos);
}

TEST(Scenario, MissingFileIsIoError) { EXPECT_THROW(load_scenario("/nonexistent/mzsm.json"), IoError); }

TEST(Scenario, GeneratorIsDeterministic) {
    EXPECT_EQ(scenario_to_json(small_canyon(8, 4)), scenario_to_json(small_canyon(8, 4)));
    EXPECT_NE(scenario_to_json(small_canyon(8, 4)), scenario_to_json(small_canyon(8, 5)));
}

TEST(Export, MosaicRoundTrip) {
    const auto dir = scratch("mosaic");
    std::mt19937_64 rng(2);
    const auto setup = scenes::random_setup(rng, 7);
    const auto tree = build_mosaic(setup.aoi, setup.shadows);
    export_mosaic(tree, (dir / "m.geojson").string());
    const auto back = import_mosaic((dir / "m.geojson").string());
    const auto ls = leaves(tree);
    ASSERT_EQ(back.size(), ls.size());
    for (std::size_t i = 0; i < ls.size(); ++i) {
        EXPECT_NEAR(back[i].region.area(), ls[i].region.area(), 1e-9);
        EXPECT_NEAR(back[i].mass, ls[i].mass, 1e-9);
        EXPECT_LT(symmetric_difference_area(back[i].region, ls[i].region), 1e-9);
    }
}

TEST(Export, EmptyCollectionHasNoFeatures) {
    const auto dir = scratch("empty");
    export_collection(ConfidenceCollection{}, {}, (dir / "c.geojson").string());
    const auto doc = load_json((dir / "c.geojson").string());
    EXPECT_EQ(doc.at("type"), "FeatureCollection");
    EXPECT_TRUE(doc.at("features").is_array());
    EXPECT_TRUE(doc.at("features").empty());
}

TEST(Export, PmfCsvSumsToOne) {
    const auto dir = scratch("pmf");
    const auto s = scenes::illustrative();
    export_pmf(build_mosaic(s.aoi, s.shadows), (dir / "p.csv").string());
    std::ifstream in(dir / "p.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "leaf,mass,conditional_mass,area");
    double sum = 0.0;
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        for (int c = 0; c < 3; ++c) std::getline(ss, cell, ',');
        sum += std::stod(cell);
        ++rows;
    }
    EXPECT_EQ(rows, 4);
    EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Export, UnwritablePathIsIoError) {
    const auto s = scenes::illustrative();
    EXPECT_THROW(export_pmf(build_mosaic(s.aoi, s.shadows), "/nonexistent/dir/p.csv"), IoError);
    CsvTable t({"a", "b"});
    EXPECT_THROW(t.add_row({"1"}), IoError);
}

TEST(Export, CsvIsByteStable) {
    const auto s = small_canyon(8, 3);
    SweepConfig cfg;
    cfg.posteriors = {0.85};
    cfg.grid_resolutions = {10.0};
    cfg.gmm_ks = {2};
    cfg.samples = 3000;
    cfg.quad_resolution = 2.0;
    cfg.replicates = 2;
    EXPECT_EQ(sweep_table(run_sweep(s, cfg)).str(), sweep_table(run_sweep(s, cfg)).str());
    const auto tree = run_mosaic(s, {1}).first;
    const auto a = grid_table(build_grid(tree.aoi(), 5.0, scenario_shadows(s), std::vector<double>(8, 0.7))).str();
    const auto b = grid_table(build_grid(tree.aoi(), 5.0, scenario_shadows(s), std::vector<double>(8, 0.7))).str();
    EXPECT_EQ(a, b);
}

TEST(Run, FitQuadraticExact) {
    std::vector<double> x, y;
    for (int j = 0; j < 8; ++j) {
        x.push_back(j);
        y.push_back(1.2 * j * j - 3.0 * j + 4.0);
    }
    const auto f = fit_quadratic(x, y);
    EXPECT_NEAR(f.a, 1.2, 1e-9);
    EXPECT_NEAR(f.b, -3.0, 1e-9);
    EXPECT_NEAR(f.c, 4.0, 1e-9);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(Run, ReportTracksEveryLayer) {
    const auto s = small_canyon(10, 7);
    RunOptions opt;
    opt.repetitions = 3;
    const auto [tree, r] = run_mosaic(s, opt);
    ASSERT_EQ(r.leaf_counts.size(), 11u);
    ASSERT_EQ(r.layer_ms.size(), 10u);
    ASSERT_EQ(r.p_empty_trace.size(), 11u);
    EXPECT_EQ(r.leaf_counts.front(), 1u);
    EXPECT_EQ(r.leaf_counts.back(), tree.leaf_count());
    for (std::size_t j = 1; j < r.leaf_counts.size(); ++j) {
        EXPECT_GE(r.leaf_counts[j], r.leaf_counts[j - 1]);
        EXPECT_GE(r.p_empty_trace[j], r.p_empty_trace[j - 1] - 1e-15);
    }
    EXPECT_EQ(r.p_empty_trace.front(), 0.0);
    EXPECT_NEAR(r.p_empty_trace.back(), violation_probability(tree), 1e-15);
    EXPECT_GE(r.fit.r2, 0.0);
    EXPECT_LE(r.fit.r2, 1.0);
    EXPECT_EQ(report_table(r).str(), report_table(r).str());
}

TEST(Sweep, PosteriorTrendAndInvariants) {
    const auto s = small_canyon(8, 11);
    SweepConfig cfg;
    cfg.gmm_ks = {1};
    cfg.samples = 3000;
    cfg.quad_resolution = 2.0;
    cfg.replicates = 2;
    const auto rows = run_sweep(s, cfg);
    std::vector<double> p_empty;
    for (const auto& r : rows) {
        EXPECT_TRUE(r.ok()) << r.status;
        if (r.kind == RowKind::Mosaic) p_empty.push_back(*r.p_empty);
        if (r.delta_percent) {
            EXPECT_GE(*r.delta_percent, 0.0);
            EXPECT_LE(*r.delta_percent, 2.0);
        }
        if (r.iou) {
            EXPECT_GE(*r.iou, 0.0);
            EXPECT_LE(*r.iou, 1.0);
        }
    }
    ASSERT_EQ(p_empty.size(), 5u);
    for (std::size_t i = 1; i < p_empty.size(); ++i) EXPECT_LT(p_empty[i], p_empty[i - 1]);
    // nonlinear: the drop per unit posterior is not constant
    const double s1 = (p_empty[0] - p_empty[1]) / 0.25, s2 = (p_empty[3] - p_empty[4]) / (0.9999 - 0.95);
    EXPECT_GT(std::abs(s1 - s2), 0.05 * std::max(s1, s2));
}

TEST(Sweep, HalfPosteriorIsUniformAndMaximal) {
    const auto s = small_canyon(8, 11);
    const auto shadows = scenario_shadows(s);
    const auto tree = expected_mosaic(scenario_aoi(s), shadows, s.truth, 0.5);
    const auto p = pmf(tree);
    for (const auto& e : p.entries) EXPECT_NEAR(e.conditional_mass, 1.0 / p.entries.size(), 1e-12);
    const double half = violation_probability(tree);
    for (double q : {0.6, 0.85, 0.99}) {
        EXPECT_GT(half, violation_probability(expected_mosaic(scenario_aoi(s), shadows, s.truth, q)));
    }
}

TEST(Sweep, BadRowIsFlaggedAndRunContinues) {
    const auto s = small_canyon(6, 2);
    SweepConfig cfg;
    cfg.posteriors = {1.5, 0.85};
    cfg.grid_resolutions = {10.0};
    cfg.gmm_ks = {1};
    cfg.samples = 2000;
    cfg.quad_resolution = 2.0;
    cfg.replicates = 1;
    const auto rows = run_sweep(s, cfg);
    ASSERT_FALSE(rows.empty());
    EXPECT_FALSE(rows.front().ok());
    EXPECT_EQ(rows.front().posterior, 1.5);
    EXPECT_TRUE(rows.back().ok()) << rows.back().status;
    EXPECT_EQ(rows.back().posterior, 0.85);
}

TEST(Sweep, WritesPmfPerPosterior) {
    const auto dir = scratch("sweep_pmf");
    SweepConfig cfg;
    cfg.posteriors = {0.75, 0.95};
    cfg.grid_resolutions = {};
    cfg.gmm_ks = {};
    cfg.pmf_dir = dir.string();
    run_sweep(small_canyon(6, 2), cfg);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir)) files += e.path().extension() == ".csv";
    EXPECT_EQ(files, 2u);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    const auto scenario = (dir / "s.json").string();
    {
        std::ofstream(scenario) << kMinimal;
        std::ofstream(dir / "bad.json") << "{\n  \"aoi\": [";
    }
    EXPECT_EQ(run_cli("validate " + scenario + " --orderings 3"), 0);
    EXPECT_EQ(run_cli("mosaic " + scenario + " --reps 1 --out " + (dir / "out").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "mosaic.geojson"));
    EXPECT_TRUE(fs::exists(dir / "out" / "pmf.csv"));
    EXPECT_EQ(run_cli("generate --satellites 6 --seed 3 --out " + (dir / "gen.json").string()), 0);
    EXPECT_NO_THROW(load_scenario((dir / "gen.json").string()));
    EXPECT_EQ(run_cli("validate /nonexistent/mzsm.json"), 2);
    EXPECT_EQ(run_cli("validate " + (dir / "bad.json").string()), 2);
    EXPECT_EQ(run_cli("no-such-command"), 2);
    EXPECT_EQ(run_cli("sweep " + scenario + " --posteriors 1.5 --gammas 0.9 --grid 10 --gmm-k 1 --samples 500"), 1);
}

TEST(Cli, EpsOverrideReachesValidation) {
    const auto dir = scratch("cli_eps");
    const auto s = small_canyon(8, 1);
    save_scenario(s, (dir / "s.json").string());
    const std::string args = "validate " + (dir / "s.json").string() + " --oracle-n 6 --orderings 2";
    EXPECT_EQ(run_cli(args), 0);
    EXPECT_EQ(run_cli(args, "MZSM_EPS_AREA=50"), 1);
}

TEST(Cli, SamplesAreByteStable) {
    const auto dir = scratch("cli_samples");
    const auto scenario = (dir / "s.json").string();
    std::ofstream(scenario) << kMinimal;
    for (const char* out : {"a", "b"}) {
        ASSERT_EQ(run_cli("mosaic " + scenario + " --reps 1 --samples 500 --seed 9 --out " + (dir / out).string()), 0);
    }
    // report.csv carries timings, so only the seeded outputs are compared
    EXPECT_EQ(slurp(dir / "a" / "pmf.csv"), slurp(dir / "b" / "pmf.csv"));
    EXPECT_EQ(slurp(dir / "a" / "samples.csv"), slurp(dir / "b" / "samples.csv"));
    EXPECT_FALSE(slurp(dir / "a" / "samples.csv").empty());
}
