#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "datev/env.hpp"

namespace datev {

/// One raw GPS sample: "lat lon occupancy unix_ts".
struct TracePoint {
    double latitude = 0.0;
    double longitude = 0.0;
    int occupancy = 0;  // passed through, unused
    std::int64_t timestamp = 0;

    bool operator==(const TracePoint&) const = default;
};

struct RegionSpec {
    double lat_min = 37.74;
    double lat_max = 37.76;
    double lon_min = -122.42;
    double lon_max = -122.39;

    bool contains(double lat, double lon) const {
        return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
    }
};

class TraceParseError : public std::runtime_error {
public:
    TraceParseError(const std::string& path, int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_ = 0;
};

/// Reads one vehicle's samples, sorted by timestamp ascending. Malformed
/// lines raise TraceParseError with their line number; an empty file gives
/// an empty list.
std::vector<TracePoint> parse_trace_file(const std::string& path);

/// Inverse of parse_trace_file up to 5-decimal-place coordinate formatting.
std::string serialize_trace_points(const std::vector<TracePoint>& points);

/// Splits a time-sorted trace into maximal contiguous in-region runs;
/// runs shorter than 2 points are dropped.
std::vector<std::vector<TracePoint>> crop_region(const std::vector<TracePoint>& points,
                                                 const RegionSpec& region);

/// Equirectangular projection of geographic coordinates onto local planar
/// meters about a reference point; adequate at the few-kilometer extents
/// used here.
struct Projection {
    double ref_lat = 0.0;
    double ref_lon = 0.0;

    static Projection centered_on(const RegionSpec& region);
    std::pair<double, double> to_xy(double lat, double lon) const;
};

/// Evenly spaces `count` units along the region's long axis, centered, with
/// the given gap. Throws std::invalid_argument when spacing * count exceeds
/// the region extent along that axis.
RsuLayout deploy_rsus(const RegionSpec& region, double spacing, int count,
                      double coverage_radius = 300.0);

struct ManifestEntry {
    int vehicle_id = 0;
    std::string path;
};

/// Manifest lines are "vehicle_id path".
std::vector<ManifestEntry> load_manifest(const std::string& path);

/// Parses every manifest entry, crops to the region, and projects to planar
/// meters. Each maximal in-region run becomes its own Vehicle (ids are
/// vehicle_id * 100 + run index) so positions are never interpolated across
/// an absence from the region.
std::vector<Vehicle> build_vehicles(const std::vector<ManifestEntry>& entries,
                                    const RegionSpec& region, const Projection& projection);

/// Canonical planar form, one line per sample: "vehicle_id,t,x_m,y_m".
std::string to_canonical_csv(const std::vector<Vehicle>& vehicles);
std::vector<Vehicle> from_canonical_csv(const std::string& csv);

}  // namespace datev
