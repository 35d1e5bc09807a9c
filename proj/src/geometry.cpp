#include "rdv/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rdv/errors.hpp"

namespace rdv {

namespace {

std::string path_tag(PathId id) { return "path " + std::to_string(id); }

}  // namespace

Path::Path(PathId id, std::vector<Vec2> vertices) : id_(id), vertices_(std::move(vertices)) {
    if (vertices_.size() < 2) {
        throw ValidationError(path_tag(id_) + ": needs at least 2 vertices, got " +
                              std::to_string(vertices_.size()));
    }
    cumulative_.reserve(vertices_.size());
    cumulative_.push_back(0.0);
    for (std::size_t k = 1; k < vertices_.size(); ++k) {
        const double seg = distance(vertices_[k - 1], vertices_[k]);
        if (!(seg > 0.0) || !std::isfinite(seg)) {
            throw ValidationError(path_tag(id_) + ", vertex " + std::to_string(k) +
                                  ": coincides with previous vertex or is not finite");
        }
        cumulative_.push_back(cumulative_.back() + seg);
    }
}

Vec2 Path::evaluate(double theta) const {
    if (!(theta >= 0.0 && theta <= length())) {
        std::ostringstream msg;
        msg << path_tag(id_) << ": arc length " << theta << " outside [0, " << length() << "]";
        throw DomainError(msg.str());
    }
    // first vertex with cumulative length >= theta
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), theta);
    const auto k = static_cast<std::size_t>(it - cumulative_.begin());
    if (*it == theta) {
        return vertices_[k];
    }
    const double s0 = cumulative_[k - 1];
    const double w = (theta - s0) / (cumulative_[k] - s0);
    return vertices_[k - 1] + (vertices_[k] - vertices_[k - 1]) * w;
}

Vec2 Path::evaluate_clamped(double theta) const {
    return evaluate(std::clamp(theta, 0.0, length()));
}

double divergence_arc_length(const Path& a, const Path& b, double tol) {
    if (distance(a.vertices().front(), b.vertices().front()) > tol) {
        return 0.0;
    }
    const double end = std::min(a.length(), b.length());
    std::vector<double> breaks;
    for (double s : a.cumulative_lengths()) {
        if (s <= end) breaks.push_back(s);
    }
    for (double s : b.cumulative_lengths()) {
        if (s <= end) breaks.push_back(s);
    }
    breaks.push_back(end);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    // Both paths are linear between consecutive breakpoints, so agreement at
    // both ends of an interval means agreement on the whole interval.
    for (std::size_t k = 1; k < breaks.size(); ++k) {
        if (distance(a.evaluate(breaks[k]), b.evaluate(breaks[k])) > tol) {
            return breaks[k - 1];
        }
    }
    return end;
}

PathMap::PathMap(std::vector<Path> paths, Vec2 landing_site, Vec2 abort_site)
    : paths_(std::move(paths)), landing_(landing_site), abort_(abort_site) {
    if (paths_.empty()) {
        throw ValidationError("map has no paths");
    }
    for (std::size_t i = 0; i < paths_.size(); ++i) {
        if (paths_[i].id() != static_cast<PathId>(i + 1)) {
            throw ValidationError(path_tag(paths_[i].id()) + ": ids must be 1..N in order, expected " +
                                  std::to_string(i + 1));
        }
        if (distance(paths_[i].vertices().front(), paths_[0].vertices().front()) > 1e-9) {
            throw ValidationError(path_tag(paths_[i].id()) +
                                  ", vertex 0: does not start at the common origin of path 1");
        }
    }
    const std::size_t n = paths_.size();
    divergence_.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        divergence_[i][i] = paths_[i].length();
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = divergence_arc_length(paths_[i], paths_[j]);
            divergence_[i][j] = s;
            divergence_[j][i] = s;
        }
    }
}

const Path& PathMap::path(PathId id) const {
    if (id < 1 || id > static_cast<PathId>(paths_.size())) {
        throw DomainError("unknown path id " + std::to_string(id));
    }
    return paths_[static_cast<std::size_t>(id - 1)];
}

double PathMap::shared_prefix_end(PathId i, PathId j) const {
    path(i);
    path(j);
    return divergence_[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
}

nlohmann::json PathMap::to_json() const {
    nlohmann::json doc;
    doc["paths"] = nlohmann::json::array();
    for (const auto& p : paths_) {
        nlohmann::json verts = nlohmann::json::array();
        for (const auto& v : p.vertices()) verts.push_back({v.x, v.y});
        doc["paths"].push_back({{"id", p.id()}, {"vertices", verts}});
    }
    doc["landing_site"] = {landing_.x, landing_.y};
    doc["abort_site"] = {abort_.x, abort_.y};
    return doc;
}

namespace {

Vec2 point_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ValidationError(where + ": expected [x, y] in meters");
    }
    Vec2 p{j[0].get<double>(), j[1].get<double>()};
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw ValidationError(where + ": coordinates must be finite");
    }
    return p;
}

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ValidationError(where + ": unknown key '" + key + "'");
        }
    }
}

}  // namespace

PathMap map_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("map: expected a JSON object");
    reject_unknown(doc, {"paths", "landing_site", "abort_site"}, "map");
    if (!doc.contains("paths") || !doc["paths"].is_array() || doc["paths"].empty()) {
        throw ValidationError("map: 'paths' must be a non-empty array");
    }
    if (!doc.contains("landing_site")) throw ValidationError("map: missing 'landing_site'");
    const Vec2 landing = point_from_json(doc["landing_site"], "map.landing_site");
    const Vec2 abort_site =
        doc.contains("abort_site") ? point_from_json(doc["abort_site"], "map.abort_site") : landing;

    std::vector<Path> paths;
    PathId expected = 1;
    for (const auto& entry : doc["paths"]) {
        if (!entry.is_object()) throw ValidationError("map.paths: entries must be objects");
        reject_unknown(entry, {"id", "vertices"}, "map.paths[" + std::to_string(expected - 1) + "]");
        const PathId id = entry.value("id", expected);
        const std::string tag = path_tag(id);
        if (!entry.contains("vertices") || !entry["vertices"].is_array()) {
            throw ValidationError(tag + ": missing 'vertices' array");
        }
        std::vector<Vec2> verts;
        std::size_t k = 0;
        for (const auto& v : entry["vertices"]) {
            verts.push_back(point_from_json(v, tag + ", vertex " + std::to_string(k)));
            ++k;
        }
        paths.emplace_back(id, std::move(verts));
        ++expected;
    }
    return PathMap(std::move(paths), landing, abort_site);
}

PathMap load_map(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open map file " + file.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("map file " + file.string() + ": " + e.what());
    }
    return map_from_json(doc);
}

ReachableSet ReachableSet::all(const PathMap& map) {
    ReachableSet rs;
    for (const auto& p : map.paths()) rs.active.insert(p.id());
    return rs;
}

ReachableSet prune_reachable(const ReachableSet& rs, const PathMap& map, double measured_theta,
                             Vec2 measured_point, double match_tolerance) {
    if (measured_theta < rs.driver_theta) {
        throw DomainError("prune_reachable: measured arc length " + std::to_string(measured_theta) +
                          " is behind current " + std::to_string(rs.driver_theta));
    }
    std::vector<PathId> matching;
    for (PathId id : rs.active) {
        const Vec2 p = map.path(id).evaluate_clamped(measured_theta);
        if (distance(p, measured_point) <= match_tolerance) matching.push_back(id);
    }
    if (matching.empty()) {
        throw InconsistentMeasurement("measurement at arc length " + std::to_string(measured_theta) +
                                      " matches no active path");
    }
    ReachableSet out;
    out.driver_theta = measured_theta;
    for (PathId j : rs.active) {
        // a driver parked at the end of its path still matches that path
        const bool parked = measured_theta >= map.path(j).length() &&
                            std::find(matching.begin(), matching.end(), j) != matching.end();
        const bool keep = parked || std::any_of(matching.begin(), matching.end(), [&](PathId k) {
            return measured_theta <= map.shared_prefix_end(j, k);
        });
        if (keep) out.active.insert(j);
    }
    return out;
}

}  // namespace rdv
