#ifndef RDV_GEOMETRY_HPP
#define RDV_GEOMETRY_HPP

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace rdv {

// ----------------------------------------------------------------------------
// Planar vectors [m], [m/s]
// ----------------------------------------------------------------------------

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr bool operator==(const Vec2&) const = default;

    double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

using PathId = int;  // 1-based, matches the map file

/**
 * @brief Arc-length parametrized polyline.
 *
 * cumulative_lengths()[k] is the arc length at vertices()[k]; the first entry is 0.
 */
class Path {
public:
    Path(PathId id, std::vector<Vec2> vertices);

    PathId id() const { return id_; }
    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<double>& cumulative_lengths() const { return cumulative_; }
    double length() const { return cumulative_.back(); }

    /// Point at arc length theta. Throws DomainError outside [0, length()].
    Vec2 evaluate(double theta) const;

    /// Same as evaluate() with theta clamped into [0, length()].
    Vec2 evaluate_clamped(double theta) const;

private:
    PathId id_;
    std::vector<Vec2> vertices_;
    std::vector<double> cumulative_;
};

inline Vec2 evaluate_path(const Path& path, double theta) { return path.evaluate(theta); }

/// Arc length up to which two paths with a common origin coincide.
double divergence_arc_length(const Path& a, const Path& b, double tol = 1e-9);

/**
 * @brief Road network: N paths sharing the driver's start, plus landing and abort sites.
 *
 * Pairwise divergence arc lengths are derived from geometry at construction.
 */
class PathMap {
public:
    PathMap(std::vector<Path> paths, Vec2 landing_site, Vec2 abort_site);

    std::size_t size() const { return paths_.size(); }
    const std::vector<Path>& paths() const { return paths_; }
    const Path& path(PathId id) const;
    Vec2 landing_site() const { return landing_; }
    Vec2 abort_site() const { return abort_; }

    /// Symmetric; shared_prefix_end(i, i) is the length of path i.
    double shared_prefix_end(PathId i, PathId j) const;

    nlohmann::json to_json() const;

private:
    std::vector<Path> paths_;
    std::vector<std::vector<double>> divergence_;
    Vec2 landing_;
    Vec2 abort_;
};

/// Parse and validate a map document; the first violation is reported with path id and vertex index.
PathMap map_from_json(const nlohmann::json& doc);
PathMap load_map(const std::filesystem::path& file);

// ----------------------------------------------------------------------------
// Reachability
// ----------------------------------------------------------------------------

struct ReachableSet {
    std::set<PathId> active;
    double driver_theta = 0.0;

    static ReachableSet all(const PathMap& map);
    bool contains(PathId id) const { return active.count(id) != 0; }
};

/// Measurement point matches no active path; the caller keeps the previous set.
class InconsistentMeasurement : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Drop every active path the driver can no longer be on.
 *
 * Paths whose geometry at measured_theta lies within match_tolerance of
 * measured_point are the matching set; an active path survives if some
 * matching path still shares geometry with it at measured_theta (ties at the
 * divergence point are kept).
 */
ReachableSet prune_reachable(const ReachableSet& rs, const PathMap& map, double measured_theta,
                             Vec2 measured_point, double match_tolerance = 1.0);

}  // namespace rdv

#endif  // RDV_GEOMETRY_HPP
