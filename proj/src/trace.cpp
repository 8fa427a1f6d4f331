#include "datev/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace datev {

namespace {
constexpr double kEarthRadius = 6371000.0;  // meters
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}  // namespace

TraceParseError::TraceParseError(const std::string& path, int line, const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::vector<TracePoint> parse_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file " + path);
    std::vector<TracePoint> points;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(line);
        TracePoint p;
        std::string extra;
        if (!(fields >> p.latitude >> p.longitude >> p.occupancy >> p.timestamp) ||
            (fields >> extra)) {
            throw TraceParseError(path, line_no, "expected 'lat lon occupancy unix_ts'");
        }
        if (p.latitude < -90.0 || p.latitude > 90.0 || p.longitude < -180.0 || p.longitude > 180.0)
            throw TraceParseError(path, line_no, "coordinate out of range");
        points.push_back(p);
    }
    std::stable_sort(points.begin(), points.end(),
                     [](const TracePoint& a, const TracePoint& b) { return a.timestamp < b.timestamp; });
    return points;
}

std::string serialize_trace_points(const std::vector<TracePoint>& points) {
    std::string out;
    char buf[128];
    for (const TracePoint& p : points) {
        std::snprintf(buf, sizeof buf, "%.5f %.5f %d %lld\n", p.latitude, p.longitude, p.occupancy,
                      static_cast<long long>(p.timestamp));
        out += buf;
    }
    return out;
}

std::vector<std::vector<TracePoint>> crop_region(const std::vector<TracePoint>& points,
                                                 const RegionSpec& region) {
    std::vector<std::vector<TracePoint>> runs;
    std::vector<TracePoint> current;
    auto flush = [&] {
        if (current.size() >= 2) runs.push_back(current);
        current.clear();
    };
    for (const TracePoint& p : points) {
        if (region.contains(p.latitude, p.longitude)) {
            current.push_back(p);
        } else {
            flush();
        }
    }
    flush();
    return runs;
}

Projection Projection::centered_on(const RegionSpec& region) {
    return {0.5 * (region.lat_min + region.lat_max), 0.5 * (region.lon_min + region.lon_max)};
}

std::pair<double, double> Projection::to_xy(double lat, double lon) const {
    double x = kEarthRadius * std::cos(ref_lat * kDegToRad) * (lon - ref_lon) * kDegToRad;
    double y = kEarthRadius * (lat - ref_lat) * kDegToRad;
    return {x, y};
}

RsuLayout deploy_rsus(const RegionSpec& region, double spacing, int count,
                      double coverage_radius) {
    if (count < 1) throw std::invalid_argument("need at least one roadside unit");
    if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");

    Projection proj = Projection::centered_on(region);
    auto [x_max, y_max] = proj.to_xy(region.lat_max, region.lon_max);
    auto [x_min, y_min] = proj.to_xy(region.lat_min, region.lon_min);
    double x_extent = x_max - x_min;
    double y_extent = y_max - y_min;
    bool along_x = x_extent >= y_extent;
    double extent = along_x ? x_extent : y_extent;
    if (spacing * count > extent)
        throw std::invalid_argument("spacing * count exceeds the region extent (" +
                                    std::to_string(spacing * count) + " > " +
                                    std::to_string(extent) + " m)");

    RsuLayout layout;
    layout.coverage_radius = coverage_radius;
    double span = spacing * (count - 1);
    for (int i = 0; i < count; ++i) {
        double offset = -span / 2.0 + spacing * i;
        if (along_x)
            layout.positions.emplace_back(offset, 0.0);
        else
            layout.positions.emplace_back(0.0, offset);
    }
    return layout;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path);
    std::vector<ManifestEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(line);
        ManifestEntry e;
        if (!(fields >> e.vehicle_id >> e.path))
            throw TraceParseError(path, line_no, "expected 'vehicle_id path'");
        // Relative trace paths are taken relative to the manifest itself.
        std::filesystem::path trace_path(e.path);
        if (trace_path.is_relative())
            e.path = (std::filesystem::path(path).parent_path() / trace_path).string();
        entries.push_back(e);
    }
    return entries;
}

std::vector<Vehicle> build_vehicles(const std::vector<ManifestEntry>& entries,
                                    const RegionSpec& region, const Projection& projection) {
    std::vector<Vehicle> vehicles;
    for (const ManifestEntry& entry : entries) {
        std::vector<TracePoint> points = parse_trace_file(entry.path);
        int run_index = 0;
        for (const auto& run : crop_region(points, region)) {
            Vehicle v;
            v.id = entry.vehicle_id * 100 + run_index++;
            double last_t = -1e308;
            for (const TracePoint& p : run) {
                auto [x, y] = projection.to_xy(p.latitude, p.longitude);
                double t = static_cast<double>(p.timestamp);
                if (t <= last_t) continue;  // duplicate timestamps carry no motion information
                last_t = t;
                v.trace.push_back({t, x, y});
            }
            if (v.trace.size() >= 2) vehicles.push_back(std::move(v));
        }
    }
    return vehicles;
}

std::string to_canonical_csv(const std::vector<Vehicle>& vehicles) {
    std::string out = "vehicle_id,t,x_m,y_m\n";
    char buf[160];
    for (const Vehicle& v : vehicles) {
        for (const TimedPosition& p : v.trace) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", v.id, p.t, p.x, p.y);
            out += buf;
        }
    }
    return out;
}

std::vector<Vehicle> from_canonical_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "vehicle_id,t,x_m,y_m")
        throw std::runtime_error("canonical trace CSV must start with its header");
    std::map<int, Vehicle> by_id;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        int id = 0;
        TimedPosition p;
        if (std::sscanf(line.c_str(), "%d,%lg,%lg,%lg", &id, &p.t, &p.x, &p.y) != 4)
            throw TraceParseError("canonical csv", line_no, "expected 'vehicle_id,t,x_m,y_m'");
        Vehicle& v = by_id[id];
        v.id = id;
        v.trace.push_back(p);
    }
    std::vector<Vehicle> vehicles;
    for (auto& [id, v] : by_id) vehicles.push_back(std::move(v));
    return vehicles;
}

}  // namespace datev
