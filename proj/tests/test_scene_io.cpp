#include "oracles.hpp"
#include "test_util.hpp"

#include "cmsar/error.hpp"
#include "cmsar/scene_io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace cmsar;

namespace {

ReflectivityGrid random_grid(std::size_t n1, std::size_t n2, std::uint64_t seed, GridKind kind) {
    oracle::Rng rng(seed);
    ReflectivityGrid g(GridAxis(-1.5, 2.0, n1), GridAxis(-0.5, 0.75, n2), kind);
    for (double& v : g.values()) v = rng.uniform(-1e3, 1e3) * std::pow(10.0, rng.uniform(-200.0, 200.0));
    return g;
}

bool same_bits(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("scene_io") {

TEST_CASE("grid axis nodes") {
    const GridAxis a(-1.0, 1.0, 128);
    CHECK(a.node(0) == -1.0);
    CHECK(a.node(127) == 1.0);
    CHECK(a.symmetric());
    for (std::size_t i = 0; i < 128; ++i) {
        REQUIRE(a.node(i) == -a.node(127 - i));
        REQUIRE(a.index_of(a.node(i)) == doctest::Approx(static_cast<double>(i)).epsilon(1e-12));
    }
    const GridAxis b(0.3, 2.5, 12);
    CHECK(b.step() == doctest::Approx(0.2).epsilon(1e-14));
    CHECK_FALSE(b.symmetric());
    CHECK(b.contains(0.3));
    CHECK_FALSE(b.contains(0.29));
    CHECK_THROWS_AS(GridAxis(0.0, 1.0, 1), GeometryMismatch);
    CHECK_THROWS_AS(GridAxis(1.0, 1.0, 4), GeometryMismatch);
    CHECK_THROWS_AS(GridAxis(2.0, 1.0, 4), GeometryMismatch);
    CHECK_THROWS_AS(GridAxis(0.0, INFINITY, 4), GeometryMismatch);
}

TEST_CASE("containers validate their shapes") {
    const GridAxis a(-1.0, 1.0, 4), b(-1.0, 1.0, 5);
    CHECK_THROWS_AS(ReflectivityGrid(a, b, std::vector<double>(19)), GeometryMismatch);
    CHECK_NOTHROW(ReflectivityGrid(a, b, std::vector<double>(20)));
    CHECK_THROWS_AS(Sinogram(GridAxis(0.0, 1.0, 4), b), GeometryMismatch);
    CHECK_THROWS_AS(Sinogram(GridAxis(0.1, 1.0, 4), b, std::vector<double>(3)), GeometryMismatch);
}

TEST_CASE("rasterize an empty scene") {
    const ReflectivityGrid g = rasterize({}, GridAxis(-1.0, 1.0, 16), GridAxis(-1.0, 1.0, 8));
    CHECK(g.n1() == 16);
    CHECK(g.n2() == 8);
    for (double v : g.values()) REQUIRE(v == 0.0);
}

TEST_CASE("rasterize a point on a node") {
    const GridAxis x1(-1.0, 1.0, 21), x2(-1.0, 1.0, 11);
    SceneSpec spec;
    spec.points.push_back({{x1.node(13), x2.node(4)}, 1.0});
    const ReflectivityGrid g = rasterize(spec, x1, x2);
    for (std::size_t i2 = 0; i2 < g.n2(); ++i2) {
        for (std::size_t i1 = 0; i1 < g.n1(); ++i1) {
            REQUIRE(g.at(i1, i2) == ((i1 == 13 && i2 == 4) ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("bilinear splat conserves mass and centroid") {
    const GridAxis x1(-1.0, 1.0, 33), x2(-2.0, 1.0, 17);
    oracle::Rng rng(21);
    for (int k = 0; k < 200; ++k) {
        const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-2.0, 1.0), amp = rng.uniform(-3.0, 3.0);
        SceneSpec spec;
        spec.points.push_back({{a, b}, amp});
        const ReflectivityGrid g = rasterize(spec, x1, x2);
        double mass = 0.0, m1 = 0.0, m2 = 0.0;
        std::size_t nonzero = 0;
        for (std::size_t i2 = 0; i2 < g.n2(); ++i2) {
            for (std::size_t i1 = 0; i1 < g.n1(); ++i1) {
                const double v = g.at(i1, i2);
                nonzero += v != 0.0;
                mass += v;
                m1 += v * x1.node(i1);
                m2 += v * x2.node(i2);
            }
        }
        REQUIRE(nonzero <= 4);
        REQUIRE(mass == doctest::Approx(amp).epsilon(1e-13));
        REQUIRE(m1 / mass == doctest::Approx(a).epsilon(1e-12));
        REQUIRE(m2 / mass == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("rasterize is additive") {
    const GridAxis x1(-1.0, 1.0, 24), x2(-1.0, 1.0, 20);
    oracle::Rng rng(22);
    SceneSpec a, b;
    for (int k = 0; k < 6; ++k) {
        a.points.push_back({{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}, rng.uniform(-2.0, 2.0)});
        b.points.push_back({{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}, rng.uniform(-2.0, 2.0)});
    }
    a.rects.push_back({-0.5, 0.2, -0.3, 0.6, 2.0});
    b.rects.push_back({0.1, 0.9, -0.9, -0.1, -1.5});
    SceneSpec both = a;
    both.points.insert(both.points.end(), b.points.begin(), b.points.end());
    both.rects.insert(both.rects.end(), b.rects.begin(), b.rects.end());
    const ReflectivityGrid ga = rasterize(a, x1, x2), gb = rasterize(b, x1, x2), gab = rasterize(both, x1, x2);
    for (std::size_t k = 0; k < gab.values().size(); ++k) {
        REQUIRE(gab.values()[k] == doctest::Approx(ga.values()[k] + gb.values()[k]).epsilon(1e-14));
    }
}

TEST_CASE("rectangles fill the nodes inside them") {
    const GridAxis x1(-1.0, 1.0, 11), x2(-1.0, 1.0, 11);
    SceneSpec spec;
    spec.rects.push_back({-0.25, 0.45, 0.0, 0.5, 3.0});
    const ReflectivityGrid g = rasterize(spec, x1, x2);
    for (std::size_t i2 = 0; i2 < 11; ++i2) {
        for (std::size_t i1 = 0; i1 < 11; ++i1) {
            const double a = x1.node(i1), b = x2.node(i2);
            const bool inside = a >= -0.25 && a <= 0.45 && b >= 0.0 && b <= 0.5;
            REQUIRE(g.at(i1, i2) == (inside ? 3.0 : 0.0));
        }
    }
}

TEST_CASE("out-of-grid scatterers name their index") {
    const GridAxis x1(-1.0, 1.0, 8), x2(-1.0, 1.0, 8);
    SceneSpec spec;
    spec.points.push_back({{0.0, 0.0}, 1.0});
    spec.points.push_back({{1.5, 0.0}, 1.0});
    try {
        rasterize(spec, x1, x2);
        FAIL("expected SceneError");
    } catch (const SceneError& e) {
        CHECK(e.index() == 1);
    }
    spec.points.pop_back();
    spec.rects.push_back({-0.5, 0.5, -0.5, 0.5, 1.0});
    spec.rects.push_back({-0.5, 0.5, -0.5, 1.5, 1.0});
    try {
        rasterize(spec, x1, x2);
        FAIL("expected SceneError");
    } catch (const SceneError& e) {
        CHECK(e.index() == 2);
    }
}

TEST_CASE("grid and sinogram roundtrip bit-exactly") {
    testutil::TempDir dir;
    for (const GridKind kind : {GridKind::Reflectivity, GridKind::Image}) {
        const ReflectivityGrid g = random_grid(13, 7, 23, kind);
        save_grid(g, dir / "g.cmsar");
        const ReflectivityGrid r = load_grid(dir / "g.cmsar");
        CHECK(r.kind() == kind);
        CHECK(r.same_geometry(g));
        CHECK(same_bits(r.values(), g.values()));
    }
    oracle::Rng rng(24);
    Sinogram d(GridAxis(0.3, 2.5, 9), GridAxis(2.0, 6.0, 31));
    for (double& v : d.values()) v = rng.uniform(-1.0, 1.0) / 3.0;
    save_sinogram(d, dir / "d.cmsar");
    const Sinogram e = load_sinogram(dir / "d.cmsar");
    CHECK(e.s() == d.s());
    CHECK(e.t() == d.t());
    CHECK(same_bits(e.values(), d.values()));
}

TEST_CASE("scene JSON roundtrips exactly") {
    oracle::Rng rng(25);
    SceneSpec spec;
    for (int k = 0; k < 5; ++k) spec.points.push_back({{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}, rng.uniform(-1.0, 1.0)});
    spec.rects.push_back({-0.1 / 3.0, 0.7, -0.9, 0.2, std::sqrt(2.0)});
    testutil::TempDir dir;
    save_scene(spec, dir / "scene.json");
    const SceneSpec r = load_scene(dir / "scene.json");
    REQUIRE(r.points.size() == spec.points.size());
    for (std::size_t k = 0; k < spec.points.size(); ++k) {
        CHECK(r.points[k].at == spec.points[k].at);
        CHECK(r.points[k].amplitude == spec.points[k].amplitude);
    }
    REQUIRE(r.rects.size() == 1);
    CHECK(r.rects[0].x1_min == spec.rects[0].x1_min);
    CHECK(r.rects[0].amplitude == spec.rects[0].amplitude);
}

TEST_CASE("scene JSON parsing") {
    const SceneSpec s = parse_scene_json(R"({"points":[{"x1":0.5,"x2":-0.25}]})");
    REQUIRE(s.points.size() == 1);
    CHECK(s.points[0].amplitude == 1.0);
    CHECK(s.rects.empty());
    CHECK(parse_scene_json("{}").points.empty());
    CHECK_THROWS_AS(parse_scene_json("[1,2]"), ConfigError);
    CHECK_THROWS_AS(parse_scene_json("{"), ConfigError);
    CHECK_THROWS_AS(parse_scene_json(R"({"points":[{"x1":0.5}]})"), ConfigError);
}

TEST_CASE("container error classes are distinct") {
    testutil::TempDir dir;
    const ReflectivityGrid g = random_grid(4, 3, 26, GridKind::Reflectivity);
    save_grid(g, dir / "g.cmsar");
    const std::string bytes = testutil::read_bytes(dir / "g.cmsar");

    SUBCASE("wrong magic") {
        std::string b = bytes;
        b[0] = 'X';
        testutil::write_bytes(dir / "bad.cmsar", b);
        CHECK_THROWS_AS(load_grid(dir / "bad.cmsar"), FormatError);
        testutil::write_bytes(dir / "bad.cmsar", "");
        CHECK_THROWS_AS(load_grid(dir / "bad.cmsar"), FormatError);
    }
    SUBCASE("truncated payload") {
        testutil::write_bytes(dir / "bad.cmsar", bytes.substr(0, bytes.size() - 8));
        CHECK_THROWS_AS(load_grid(dir / "bad.cmsar"), TruncationError);
    }
    SUBCASE("payload longer than declared") {
        testutil::write_bytes(dir / "bad.cmsar", bytes + std::string(8, '\0'));
        CHECK_THROWS_AS(load_grid(dir / "bad.cmsar"), TruncationError);
    }
    SUBCASE("version mismatch") {
        std::string b = bytes;
        b[5] = '2';
        testutil::write_bytes(dir / "bad.cmsar", b);
        CHECK_THROWS_AS(load_grid(dir / "bad.cmsar"), VersionError);
    }
    SUBCASE("malformed header") {
        const auto nl = bytes.find('\n');
        std::string b = bytes.substr(0, nl + 1) + "kind=reflectivity axis0=1,2 endian=little\n";
        testutil::write_bytes(dir / "bad.cmsar", b);
        CHECK_THROWS_AS(load_grid(dir / "bad.cmsar"), FormatError);
        b = bytes.substr(0, nl + 1) + "kind=reflectivity axis0=-1,1,4 axis1=-1,1,3 endian=big\n";
        testutil::write_bytes(dir / "bad.cmsar", b);
        CHECK_THROWS_AS(load_grid(dir / "bad.cmsar"), FormatError);
    }
    SUBCASE("kind mismatch") {
        CHECK_THROWS_AS(load_sinogram(dir / "g.cmsar"), FormatError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_grid(dir / "nope.cmsar"), IoError);
    }
    // Every class still derives from the library base.
    CHECK_THROWS_AS(load_grid(dir / "nope.cmsar"), Error);
}

TEST_CASE("non-finite samples are not written") {
    testutil::TempDir dir;
    ReflectivityGrid g(GridAxis(-1.0, 1.0, 2), GridAxis(-1.0, 1.0, 2));
    g.at(0, 0) = std::nan("");
    CHECK_THROWS_AS(save_grid(g, dir / "g.cmsar"), FormatError);
}

TEST_CASE("PGM levels") {
    SUBCASE("constant grid is mid-gray") {
        const ReflectivityGrid z(GridAxis(-1.0, 1.0, 5), GridAxis(-1.0, 1.0, 3));
        for (unsigned char p : image_pixels(z, Normalization::Linear)) REQUIRE(p == 128);
        for (unsigned char p : image_pixels(z, Normalization::Log)) REQUIRE(p == 128);
    }
    SUBCASE("two by two linear") {
        const ReflectivityGrid g(GridAxis(-1.0, 1.0, 2), GridAxis(-1.0, 1.0, 2), {0.0, 1.0, 1.0, 0.0});
        const auto px = image_pixels(g, Normalization::Linear);
        CHECK(px == std::vector<unsigned char>{255, 0, 0, 255});
    }
    SUBCASE("top row is the largest x2") {
        const ReflectivityGrid g(GridAxis(-1.0, 1.0, 2), GridAxis(-1.0, 1.0, 2), {0.0, 0.0, 1.0, 1.0});
        CHECK(image_pixels(g, Normalization::Linear) == std::vector<unsigned char>{255, 255, 0, 0});
    }
    SUBCASE("log levels are equally spaced for decades") {
        const ReflectivityGrid g(GridAxis(-1.0, 1.0, 3), GridAxis(-1.0, 1.0, 2), {1.0, 10.0, 100.0, 1.0, 10.0, 100.0});
        const auto px = image_pixels(g, Normalization::Log);
        CHECK(px[0] == 0);
        CHECK(px[2] == 255);
        CHECK(std::abs((px[1] - px[0]) - (px[2] - px[1])) <= 1);
    }
    SUBCASE("file layout") {
        testutil::TempDir dir;
        const ReflectivityGrid g(GridAxis(-1.0, 1.0, 3), GridAxis(-1.0, 1.0, 2), {0.0, 1.0, 2.0, 3.0, 4.0, 5.0});
        export_image(g, dir / "g.pgm");
        const std::string b = testutil::read_bytes(dir / "g.pgm");
        const std::string header = "P5\n3 2\n255\n";
        REQUIRE(b.size() == header.size() + 6);
        CHECK(b.substr(0, header.size()) == header);
        const auto px = image_pixels(g, Normalization::Linear);
        CHECK(std::memcmp(b.data() + header.size(), px.data(), 6) == 0);
    }
}

}
