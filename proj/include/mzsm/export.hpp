#pragma once

// File exports: GeoJSON FeatureCollections for regions (mosaic leaves,
// confidence collections) and CSV for tables. Doubles are written with
// round-trip precision, so identical inputs give identical bytes.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mzsm/baselines.hpp"
#include "mzsm/confidence.hpp"
#include "mzsm/errors.hpp"
#include "mzsm/geometry.hpp"
#include "mzsm/mosaic.hpp"

namespace mzsm {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Minimal CSV table with a fixed header; cells are preformatted strings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row) {
        if (row.size() != header_.size()) throw IoError("CSV row width does not match header");
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    std::string str() const {
        std::ostringstream out;
        write_line(out, header_);
        for (const auto& r : rows_) write_line(out, r);
        return out.str();
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write '" + path + "'");
        out << str();
        if (!out) throw IoError("failed writing '" + path + "'");
    }

private:
    static void write_line(std::ostream& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
            if (!quote) {
                out << cells[i];
                continue;
            }
            out << '"';
            for (char c : cells[i]) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        }
        out << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline nlohmann::json region_to_geojson(const PolyRegion& r) {
    using nlohmann::json;
    json polys = json::array();
    for (const auto& face : r.faces()) {
        json rings = json::array();
        auto add = [&rings](const Ring& ring) {
            json coords = json::array();
            for (const auto& p : ring.vertices) coords.push_back({p.x, p.y});
            coords.push_back({ring.vertices.front().x, ring.vertices.front().y});
            rings.push_back(std::move(coords));
        };
        add(face.outer);
        for (const auto& h : face.holes) add(h);
        polys.push_back(std::move(rings));
    }
    return {{"type", "MultiPolygon"}, {"coordinates", polys}};
}

inline PolyRegion region_from_geojson(const nlohmann::json& g) {
    if (!g.is_object() || g.value("type", "") != "MultiPolygon" || !g.contains("coordinates")) {
        throw SchemaError("geometry: expected a MultiPolygon");
    }
    std::vector<Face> faces;
    for (const auto& poly : g["coordinates"]) {
        Face f;
        bool first = true;
        for (const auto& ring : poly) {
            Ring r;
            r.orientation = first ? RingOrientation::Outer : RingOrientation::Hole;
            for (const auto& c : ring) r.vertices.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
            if (first) f.outer = std::move(r);
            else f.holes.push_back(std::move(r));
            first = false;
        }
        faces.push_back(std::move(f));
    }
    return PolyRegion::from_faces(faces);
}

inline nlohmann::json labels_to_json(const std::vector<BranchLabel>& labels) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& l : labels) out.push_back({{"satellite", l.satellite_id}, {"designation", to_string(l.designation)}});
    return out;
}

inline nlohmann::json mosaic_geojson(const std::vector<LeafRecord>& ls, double prior, double p_empty) {
    using nlohmann::json;
    const double total = total_leaf_mass(ls);
    json features = json::array();
    for (std::size_t i = 0; i < ls.size(); ++i) {
        features.push_back({{"type", "Feature"},
                            {"geometry", region_to_geojson(ls[i].region)},
                            {"properties",
                             {{"leaf", i},
                              {"mass", ls[i].mass},
                              {"conditional_mass", total > 0.0 ? ls[i].mass / total : 0.0},
                              {"area", ls[i].region.area()},
                              {"labels", labels_to_json(ls[i].labels)}}}});
    }
    return {{"type", "FeatureCollection"}, {"prior", prior}, {"p_empty", p_empty}, {"features", features}};
}

inline nlohmann::json mosaic_geojson(const MosaicTree& tree) {
    return mosaic_geojson(leaves(tree), tree.prior(), violation_probability(tree));
}

inline nlohmann::json collection_geojson(const ConfidenceCollection& c, const std::vector<PolyRegion>& pieces) {
    using nlohmann::json;
    json features = json::array();
    for (std::size_t k = 0; k < c.members.size(); ++k) {
        features.push_back({{"type", "Feature"},
                            {"geometry", region_to_geojson(pieces.at(c.members[k]))},
                            {"properties", {{"member", c.members[k]}, {"conditional_mass", c.member_masses[k]}}}});
    }
    return {{"type", "FeatureCollection"},
            {"gamma", c.gamma},
            {"achieved", c.achieved},
            {"outline_faces", c.outline.face_count()},
            {"features", features}};
}

inline void save_json(const nlohmann::json& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << doc.dump(1) << '\n';
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

inline void export_mosaic(const MosaicTree& tree, const std::string& path) { save_json(mosaic_geojson(tree), path); }

// Reads back leaves written by export_mosaic.
inline std::vector<LeafRecord> import_mosaic(const std::string& path) {
    const auto doc = load_json(path);
    if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
        throw SchemaError(path + ": expected a FeatureCollection");
    }
    std::vector<LeafRecord> out;
    for (const auto& f : doc["features"]) {
        LeafRecord l;
        l.region = region_from_geojson(f.at("geometry"));
        const auto& props = f.at("properties");
        l.mass = props.at("mass").get<double>();
        for (const auto& lab : props.value("labels", nlohmann::json::array())) {
            l.labels.push_back({lab.at("satellite").get<std::string>(),
                                lab.at("designation").get<std::string>() == "LOS" ? Designation::LOS
                                                                                  : Designation::NLOS});
        }
        out.push_back(std::move(l));
    }
    return out;
}

inline CsvTable pmf_table(const std::vector<LeafRecord>& ls, const Pmf& p) {
    CsvTable t({"leaf", "mass", "conditional_mass", "area"});
    for (const auto& e : p.entries) {
        t.add_row({std::to_string(e.leaf), format_double(ls[e.leaf].mass), format_double(e.conditional_mass),
                   format_double(ls[e.leaf].region.area())});
    }
    return t;
}

inline void export_pmf(const MosaicTree& tree, const std::string& path) {
    const auto ls = leaves(tree);
    pmf_table(ls, pmf(ls)).save(path);
}

inline void export_collection(const ConfidenceCollection& c, const std::vector<PolyRegion>& pieces,
                              const std::string& path) {
    save_json(collection_geojson(c, pieces), path);
}

inline CsvTable grid_table(const GridModel& g) {
    CsvTable t({"cell", "center_x", "center_y", "score", "pmf"});
    for (std::size_t i = 0; i < g.cells.size(); ++i) {
        t.add_row({std::to_string(i), format_double(g.cells[i].center.x), format_double(g.cells[i].center.y),
                   format_double(g.cells[i].score), format_double(g.pmf[i])});
    }
    return t;
}

inline void export_grid(const GridModel& g, const std::string& path) { grid_table(g).save(path); }

}  // namespace mzsm
