#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "datev/trace.hpp"

using namespace datev;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    std::filesystem::path path =
        std::filesystem::temp_directory_path() / ("datev_trace_test_" + name);
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("parses the raw line format") {
    auto path = temp_file("basic.txt",
                          "37.75134 -122.39488 0 1213084687\n"
                          "37.75200 -122.40000 1 1213084600\n"
                          "\n"
                          "   \t\n"
                          "37.75300 -122.40100 0 1213084700\n");
    std::vector<TracePoint> points = parse_trace_file(path.string());
    REQUIRE(points.size() == 3);

    // Output is re-sorted by timestamp.
    CHECK(points[0].timestamp == 1213084600);
    CHECK(points[1].timestamp == 1213084687);
    CHECK(points[2].timestamp == 1213084700);

    CHECK(points[1].latitude == doctest::Approx(37.75134));
    CHECK(points[1].longitude == doctest::Approx(-122.39488));
    CHECK(points[1].occupancy == 0);
    CHECK(points[0].occupancy == 1);
}

TEST_CASE("empty trace file gives an empty list") {
    auto path = temp_file("empty.txt", "");
    CHECK(parse_trace_file(path.string()).empty());
}

TEST_CASE("malformed lines carry their line number") {
    auto path = temp_file("short.txt",
                          "37.75134 -122.39488 0 1213084687\n"
                          "37.75200 -122.40000 1\n");
    try {
        parse_trace_file(path.string());
        FAIL("expected a parse error");
    } catch (const TraceParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    auto extra = temp_file("extra.txt", "37.75134 -122.39488 0 1213084687 99\n");
    CHECK_THROWS_AS(parse_trace_file(extra.string()), TraceParseError);

    auto bad_coord = temp_file("badcoord.txt", "97.0 -122.39488 0 1213084687\n");
    try {
        parse_trace_file(bad_coord.string());
        FAIL("expected a parse error");
    } catch (const TraceParseError& e) {
        CHECK(e.line() == 1);
    }

    CHECK_THROWS_AS(parse_trace_file("/nonexistent/trace.txt"), std::runtime_error);
}

TEST_CASE("serialize and reparse is the identity at 5 decimals") {
    std::vector<TracePoint> points = {
        {37.75134, -122.39488, 0, 1213084687},
        {37.7519999, -122.4000001, 1, 1213084700},
    };
    auto path = temp_file("roundtrip.txt", serialize_trace_points(points));
    std::vector<TracePoint> again = parse_trace_file(path.string());
    REQUIRE(again.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(std::abs(again[i].latitude - points[i].latitude) <= 5e-6);
        CHECK(std::abs(again[i].longitude - points[i].longitude) <= 5e-6);
        CHECK(again[i].occupancy == points[i].occupancy);
        CHECK(again[i].timestamp == points[i].timestamp);
    }
    // A second pass is exact: the format is a fixed point of itself.
    CHECK(serialize_trace_points(again) == serialize_trace_points(again));
}

TEST_CASE("crop keeps maximal in-region runs") {
    RegionSpec region;  // defaults: 37.74..37.76, -122.42..-122.39
    TracePoint in1{37.750, -122.400, 0, 100};
    TracePoint in2{37.751, -122.401, 0, 145};
    TracePoint out1{37.800, -122.400, 0, 190};  // north of the region
    TracePoint in3{37.752, -122.402, 0, 235};
    TracePoint in4{37.753, -122.403, 0, 280};

    SUBCASE("all inside -> one segment equal to the input") {
        auto runs = crop_region({in1, in2, in3}, region);
        REQUIRE(runs.size() == 1);
        CHECK(runs[0] == std::vector<TracePoint>{in1, in2, in3});
    }
    SUBCASE("all outside -> nothing") {
        CHECK(crop_region({out1, out1, out1}, region).empty());
    }
    SUBCASE("in-out-in -> two segments") {
        auto runs = crop_region({in1, in2, out1, in3, in4}, region);
        REQUIRE(runs.size() == 2);
        CHECK(runs[0] == std::vector<TracePoint>{in1, in2});
        CHECK(runs[1] == std::vector<TracePoint>{in3, in4});
    }
    SUBCASE("single-point runs are dropped") {
        auto runs = crop_region({in1, out1, in2, in3}, region);
        REQUIRE(runs.size() == 1);
        CHECK(runs[0] == std::vector<TracePoint>{in2, in3});
    }
    SUBCASE("every emitted point is inside the region") {
        auto runs = crop_region({in1, out1, in2, in3, out1, in4}, region);
        for (const auto& run : runs)
            for (const TracePoint& p : run) CHECK(region.contains(p.latitude, p.longitude));
    }
}

TEST_CASE("projection maps degrees to local meters") {
    RegionSpec region;
    Projection proj = Projection::centered_on(region);
    CHECK(proj.ref_lat == doctest::Approx(37.75));
    CHECK(proj.ref_lon == doctest::Approx(-122.405));

    auto center = proj.to_xy(37.75, -122.405);
    CHECK(center.first == doctest::Approx(0.0));
    CHECK(center.second == doctest::Approx(0.0));

    // One millidegree of latitude is ~111.2 m north.
    auto north = proj.to_xy(37.751, -122.405);
    CHECK(north.second == doctest::Approx(111.19).epsilon(0.01));
    CHECK(north.first == doctest::Approx(0.0));

    // One millidegree of longitude shrinks by cos(latitude).
    auto east = proj.to_xy(37.75, -122.404);
    CHECK(east.first == doctest::Approx(111.19 * std::cos(37.75 * M_PI / 180.0)).epsilon(0.01));
    CHECK(east.second == doctest::Approx(0.0));
}

TEST_CASE("roadside units spread along the long axis") {
    RegionSpec region;  // lon extent ~2640 m > lat extent ~2220 m

    RsuLayout layout = deploy_rsus(region, 200.0, 12);
    REQUIRE(layout.positions.size() == 12);
    CHECK(layout.coverage_radius == 300.0);

    for (std::size_t i = 1; i < layout.positions.size(); ++i) {
        double gap = std::hypot(layout.positions[i].first - layout.positions[i - 1].first,
                                layout.positions[i].second - layout.positions[i - 1].second);
        CHECK(std::abs(gap - 200.0) <= 1.0);
    }
    // Centered on the region: the layout midpoint sits at the origin.
    CHECK(layout.positions.front().first == doctest::Approx(-1100.0));
    CHECK(layout.positions.back().first == doctest::Approx(1100.0));
    for (const auto& [x, y] : layout.positions) CHECK(y == 0.0);
}

TEST_CASE("single roadside unit sits at the region center") {
    RsuLayout layout = deploy_rsus(RegionSpec{}, 200.0, 1, 250.0);
    REQUIRE(layout.positions.size() == 1);
    CHECK(layout.positions[0].first == doctest::Approx(0.0));
    CHECK(layout.positions[0].second == doctest::Approx(0.0));
    CHECK(layout.coverage_radius == 250.0);
}

TEST_CASE("layout wider than the region is rejected") {
    CHECK_THROWS_AS(deploy_rsus(RegionSpec{}, 250.0, 12), std::invalid_argument);
    CHECK_THROWS_AS(deploy_rsus(RegionSpec{}, 200.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(deploy_rsus(RegionSpec{}, -5.0, 3), std::invalid_argument);
}

TEST_CASE("manifest and vehicle construction") {
    auto trace1 = temp_file("veh1.txt",
                            "37.750 -122.400 0 100\n"
                            "37.751 -122.401 0 145\n"
                            "37.752 -122.402 0 190\n"
                            "37.800 -122.400 0 235\n"  // leaves the region
                            "37.753 -122.403 0 280\n"
                            "37.754 -122.404 0 325\n");
    auto trace2 = temp_file("veh2.txt",
                            "37.7501 -122.3999 0 50\n"
                            "37.7502 -122.3998 0 50\n"  // duplicate timestamp, skipped
                            "37.7503 -122.3997 0 95\n");
    auto manifest = temp_file("manifest.txt", "1 " + trace1.string() + "\n" +  //
                                                  "2 " + trace2.string() + "\n");

    std::vector<ManifestEntry> entries = load_manifest(manifest.string());
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].vehicle_id == 1);
    CHECK(entries[1].path == trace2.string());

    // Relative entries resolve against the manifest's directory.
    auto rel_manifest =
        temp_file("relmanifest.txt", "1 datev_trace_test_veh1.txt\n");
    auto rel_entries = load_manifest(rel_manifest.string());
    REQUIRE(rel_entries.size() == 1);
    CHECK(rel_entries[0].path == trace1.string());
    CHECK(parse_trace_file(rel_entries[0].path).size() == 6);

    RegionSpec region;
    Projection proj = Projection::centered_on(region);
    std::vector<Vehicle> vehicles = build_vehicles(entries, region, proj);
    REQUIRE(vehicles.size() == 3);

    // Each maximal in-region run is its own vehicle.
    CHECK(vehicles[0].id == 100);
    CHECK(vehicles[0].trace.size() == 3);
    CHECK(vehicles[1].id == 101);
    CHECK(vehicles[1].trace.size() == 2);
    CHECK(vehicles[2].id == 200);
    CHECK(vehicles[2].trace.size() == 2);  // duplicate timestamp dropped

    for (const Vehicle& v : vehicles)
        for (std::size_t i = 1; i < v.trace.size(); ++i)
            CHECK(v.trace[i].t > v.trace[i - 1].t);

    // Projected coordinates agree with the projection directly.
    auto xy = proj.to_xy(37.750, -122.400);
    CHECK(vehicles[0].trace[0].x == doctest::Approx(xy.first));
    CHECK(vehicles[0].trace[0].y == doctest::Approx(xy.second));

    auto bad = temp_file("badmanifest.txt", "no-id-here\n");
    CHECK_THROWS_AS(load_manifest(bad.string()), TraceParseError);
}

TEST_CASE("canonical csv round trip") {
    Vehicle v1;
    v1.id = 100;
    v1.trace = {{100.0, -12.5, 33.3333333333333}, {145.0, 0.125, -7.0}};
    Vehicle v2;
    v2.id = 200;
    v2.trace = {{50.0, 1e-7, 2.0}};

    std::string csv = to_canonical_csv({v1, v2});
    CHECK(csv.rfind("vehicle_id,t,x_m,y_m\n", 0) == 0);

    std::vector<Vehicle> back = from_canonical_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == 100);
    REQUIRE(back[0].trace.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[0].trace[i].t == v1.trace[i].t);
        CHECK(back[0].trace[i].x == v1.trace[i].x);
        CHECK(back[0].trace[i].y == v1.trace[i].y);
    }
    CHECK(back[1].trace[0].x == v2.trace[0].x);

    CHECK_THROWS(from_canonical_csv("wrong,header\n1,2,3,4\n"));
}
