#pragma once

// Scenario files: a single JSON document describing buildings (footprint +
// height), satellites (elevation / azimuth), the AOI box, the true receiver
// position and the classifier. Also the urban-canyon scenario generator.
//
//   {
//     "aoi": {"min": [-60, -60], "max": [60, 60]},
//     "prior": 1.0,
//     "truth": [0, -18],
//     "buildings": [{"id": "B1", "height": 40, "footprint": [[x, y], ...]}],
//     "satellites": [{"id": "G01", "elevation": 45, "azimuth": 90}],
//     "classifier": {"posterior": 0.85}          // or {"p_los": {"G01": 0.9}}
//   }

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mzsm/errors.hpp"
#include "mzsm/geometry.hpp"
#include "mzsm/mosaic.hpp"
#include "mzsm/shadows.hpp"

namespace mzsm {

struct Classifier {
    // Expected-mosaic mode: symmetric true-positive / true-negative rate.
    std::optional<double> posterior;
    // Explicit mode: per-satellite probability of LOS.
    std::map<std::string, double> p_los;
};

struct Scenario {
    std::string name;
    std::vector<Building> buildings;
    std::vector<Satellite> satellites;
    Box2D aoi_box;
    Point2D truth;
    double prior = 1.0;
    Classifier classifier;
};

namespace detail::schema {

using nlohmann::json;

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path + "." + key + ": missing required field");
    return *it;
}

inline double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(path + ": must be finite");
    return d;
}

inline std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaError(path + ": expected a string");
    return v.get<std::string>();
}

inline Point2D point(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) throw SchemaError(path + ": expected [x, y]");
    return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
}

inline std::string line_of(const std::string& doc, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(byte, doc.size()); ++i) line += doc[i] == '\n';
    return "line " + std::to_string(line);
}

}  // namespace detail::schema

inline Scenario scenario_from_json(const nlohmann::json& doc) {
    using namespace detail::schema;
    Scenario s;
    if (!doc.is_object()) throw SchemaError("$: expected an object");
    if (auto it = doc.find("name"); it != doc.end()) s.name = text(*it, "$.name");

    const json& aoi = field(doc, "aoi", "$");
    s.aoi_box.min = point(field(aoi, "min", "$.aoi"), "$.aoi.min");
    s.aoi_box.max = point(field(aoi, "max", "$.aoi"), "$.aoi.max");
    if (!(s.aoi_box.width() > 0.0 && s.aoi_box.height() > 0.0)) {
        throw SchemaError("$.aoi: max must exceed min in both coordinates");
    }
    if (auto it = doc.find("prior"); it != doc.end()) {
        s.prior = number(*it, "$.prior");
        if (!(s.prior > 0.0 && s.prior <= 1.0)) throw SchemaError("$.prior: must lie in (0, 1]");
    }
    s.truth = point(field(doc, "truth", "$"), "$.truth");

    const json& bs = field(doc, "buildings", "$");
    if (!bs.is_array()) throw SchemaError("$.buildings: expected an array");
    for (std::size_t i = 0; i < bs.size(); ++i) {
        const std::string path = "$.buildings[" + std::to_string(i) + "]";
        Building b;
        b.id = text(field(bs[i], "id", path), path + ".id");
        b.height = number(field(bs[i], "height", path), path + ".height");
        if (!(b.height > 0.0)) throw SchemaError(path + ".height: must be positive");
        const json& fp = field(bs[i], "footprint", path);
        if (!fp.is_array()) throw SchemaError(path + ".footprint: expected an array of [x, y]");
        std::vector<Point2D> ring;
        for (std::size_t k = 0; k < fp.size(); ++k) {
            ring.push_back(point(fp[k], path + ".footprint[" + std::to_string(k) + "]"));
        }
        b.footprint = PolyRegion::polygon(ring);  // InvalidGeometry on bad rings
        s.buildings.push_back(std::move(b));
    }

    const json& sats = field(doc, "satellites", "$");
    if (!sats.is_array()) throw SchemaError("$.satellites: expected an array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < sats.size(); ++i) {
        const std::string path = "$.satellites[" + std::to_string(i) + "]";
        Satellite sat;
        sat.id = text(field(sats[i], "id", path), path + ".id");
        sat.elevation_deg = number(field(sats[i], "elevation", path), path + ".elevation");
        sat.azimuth_deg = number(field(sats[i], "azimuth", path), path + ".azimuth");
        if (!(sat.elevation_deg > 0.0 && sat.elevation_deg <= 90.0)) {
            throw SchemaError(path + ".elevation: must lie in (0, 90]");
        }
        if (!(sat.azimuth_deg >= 0.0 && sat.azimuth_deg < 360.0)) {
            throw SchemaError(path + ".azimuth: must lie in [0, 360)");
        }
        if (!ids.insert(sat.id).second) throw SchemaError(path + ".id: duplicate satellite id '" + sat.id + "'");
        s.satellites.push_back(sat);
    }

    if (auto it = doc.find("classifier"); it != doc.end()) {
        const json& c = *it;
        if (!c.is_object()) throw SchemaError("$.classifier: expected an object");
        const bool has_post = c.contains("posterior");
        const bool has_plos = c.contains("p_los");
        if (has_post == has_plos) throw SchemaError("$.classifier: give exactly one of 'posterior' or 'p_los'");
        if (has_post) {
            const double p = number(c["posterior"], "$.classifier.posterior");
            if (!(p >= 0.0 && p <= 1.0)) throw SchemaError("$.classifier.posterior: must lie in [0, 1]");
            s.classifier.posterior = p;
        } else {
            const json& m = c["p_los"];
            if (!m.is_object()) throw SchemaError("$.classifier.p_los: expected an object keyed by satellite id");
            for (const auto& [id, v] : m.items()) {
                const std::string path = "$.classifier.p_los." + id;
                if (!ids.count(id)) throw SchemaError(path + ": unknown satellite id");
                const double p = number(v, path);
                if (!(p >= 0.0 && p <= 1.0)) throw SchemaError(path + ": must lie in [0, 1]");
                s.classifier.p_los[id] = p;
            }
            for (const auto& id : ids) {
                if (!s.classifier.p_los.count(id)) throw SchemaError("$.classifier.p_los: missing satellite '" + id + "'");
            }
        }
    } else {
        s.classifier.posterior = 0.85;
    }
    return s;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
    using nlohmann::json;
    json doc;
    if (!s.name.empty()) doc["name"] = s.name;
    doc["aoi"] = {{"min", {s.aoi_box.min.x, s.aoi_box.min.y}}, {"max", {s.aoi_box.max.x, s.aoi_box.max.y}}};
    doc["prior"] = s.prior;
    doc["truth"] = {s.truth.x, s.truth.y};
    json bs = json::array();
    for (const auto& b : s.buildings) {
        json ring = json::array();
        const auto faces = b.footprint.faces();
        for (const auto& p : faces.front().outer.vertices) ring.push_back({p.x, p.y});
        bs.push_back({{"id", b.id}, {"height", b.height}, {"footprint", ring}});
    }
    doc["buildings"] = bs;
    json sats = json::array();
    for (const auto& sat : s.satellites) {
        sats.push_back({{"id", sat.id}, {"elevation", sat.elevation_deg}, {"azimuth", sat.azimuth_deg}});
    }
    doc["satellites"] = sats;
    if (s.classifier.posterior) {
        doc["classifier"] = {{"posterior", *s.classifier.posterior}};
    } else {
        json m = json::object();
        for (const auto& [id, p] : s.classifier.p_los) m[id] = p;
        doc["classifier"] = {{"p_los", m}};
    }
    return doc;
}

inline Scenario parse_scenario(const std::string& text, const std::string& source = "<memory>") {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(source + ": " + detail::schema::line_of(text, e.byte) + ": malformed JSON: " + e.what());
    }
    try {
        return scenario_from_json(doc);
    } catch (const SchemaError& e) {
        throw SchemaError(source + ": " + e.what());
    }
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

inline void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write scenario file '" + path + "'");
    out << scenario_to_json(s).dump(2) << '\n';
    if (!out) throw IoError("failed writing scenario file '" + path + "'");
}

inline Aoi scenario_aoi(const Scenario& s) { return make_aoi(s.aoi_box, s.buildings, s.prior); }

inline std::vector<ShadowRegion> scenario_shadows(const Scenario& s) {
    std::vector<ShadowRegion> out;
    out.reserve(s.satellites.size());
    for (const auto& sat : s.satellites) {
        out.push_back(s.buildings.empty() ? ShadowRegion{sat.id, {}} : scene_shadow(s.buildings, sat));
    }
    return out;
}

// Pairs each shadow with the classifier's LOS probability. posterior_override
// forces expected-mosaic mode.
inline std::vector<ProcessedShadow> classify_shadows(const Scenario& s, const std::vector<ShadowRegion>& shadows,
                                                     std::optional<double> posterior_override = std::nullopt) {
    const auto posterior = posterior_override ? posterior_override : s.classifier.posterior;
    if (posterior) return expected_classification(shadows, s.truth, *posterior);
    std::vector<ProcessedShadow> out;
    for (const auto& sh : shadows) out.push_back({sh, s.classifier.p_los.at(sh.satellite_id)});
    return out;
}

struct CanyonOptions {
    std::size_t satellites = 14;
    std::uint64_t seed = 1;
    double half_size = 60.0;      // AOI is a square of side 2 * half_size
    double street_half_width = 9.0;
    double posterior = 0.85;
    // When set, satellites are redrawn until exactly this many are NLOS at
    // the truth position.
    std::optional<std::size_t> nlos_count;
};

// Two rows of rectangular buildings flanking a north-south street through
// the origin, with cross streets between blocks; satellites at random
// elevation / azimuth. Truth sits in the street south of the origin.
inline Scenario generate_canyon(const CanyonOptions& opt = {}) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    auto round_to = [](double v, double q) { return std::round(v / q) * q; };

    Scenario s;
    s.name = "canyon-" + std::to_string(opt.satellites) + "-seed" + std::to_string(opt.seed);
    const double h = opt.half_size;
    s.aoi_box = {{-h, -h}, {h, h}};
    s.truth = {0.0, -18.0};
    s.classifier.posterior = opt.posterior;

    const double w = opt.street_half_width;
    int count = 0;
    for (int side : {-1, 1}) {
        double y = -h - 10.0;
        while (y < h + 10.0) {
            const double len = round_to(uniform(22.0, 40.0), 0.5);
            const double depth = round_to(uniform(20.0, 35.0), 0.5);
            const double setback = round_to(uniform(0.0, 3.0), 0.5);
            const double x_in = side * (w + setback);
            const double x_out = side * (w + setback + depth);
            Building b;
            b.id = "B" + std::to_string(++count);
            b.height = round_to(uniform(25.0, 120.0), 1.0);
            b.footprint = PolyRegion::box(std::min(x_in, x_out), y, std::max(x_in, x_out), y + len);
            s.buildings.push_back(std::move(b));
            y += len + round_to(uniform(8.0, 14.0), 0.5);  // cross street
        }
    }
    std::vector<bool> want_nlos(opt.satellites, false);
    if (opt.nlos_count) {
        if (*opt.nlos_count > opt.satellites) throw SchemaError("nlos_count exceeds the satellite count");
        std::fill(want_nlos.begin(), want_nlos.begin() + static_cast<std::ptrdiff_t>(*opt.nlos_count), true);
        std::shuffle(want_nlos.begin(), want_nlos.end(), rng);
    }
    for (std::size_t i = 0; i < opt.satellites; ++i) {
        Satellite sat;
        char id[8];
        std::snprintf(id, sizeof id, "G%02zu", i + 1);
        sat.id = id;
        for (int attempt = 0;; ++attempt) {
            if (attempt == 10000) throw SchemaError("could not place a satellite with the requested designation");
            sat.elevation_deg = uniform(15.0, 75.0);
            sat.azimuth_deg = uniform(0.0, 360.0);
            if (!opt.nlos_count) break;
            const bool nlos = truth_designation(s.truth, scene_shadow(s.buildings, sat)) == Designation::NLOS;
            if (nlos == want_nlos[i]) break;
        }
        s.satellites.push_back(sat);
    }
    return s;
}

}  // namespace mzsm
