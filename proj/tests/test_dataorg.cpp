#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "oracles.hpp"
#include "pcgk/common/error.hpp"
#include "pcgk/dataorg/cloud_io.hpp"
#include "pcgk/dataorg/patches.hpp"
#include "pcgk/dataorg/synthetic.hpp"
#include "pcgk/geometry/hpr.hpp"

using namespace pcgk;
using geometry::PointCloud;
using geometry::Vec3;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

// Re-absolutized coordinates reproduce the source point up to the rounding of (p - c) + c.
bool reproduces(const Vec3& rel, const Vec3& center, const Vec3& p) {
    const Vec3 a = rel + center;
    return std::abs(a.x - p.x) <= 1e-15 && std::abs(a.y - p.y) <= 1e-15 && std::abs(a.z - p.z) <= 1e-15;
}

Vec3 circumcenter(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    // 2 (x_i - a) . o = |x_i|^2 - |a|^2, solved by Cramer's rule.
    const Vec3 r0 = (b - a) * 2.0, r1 = (c - a) * 2.0, r2 = (d - a) * 2.0;
    const double aa = geometry::dot(a, a);
    const double rhs[3] = {geometry::dot(b, b) - aa, geometry::dot(c, c) - aa, geometry::dot(d, d) - aa};
    const double det = geometry::dot(r0, geometry::cross(r1, r2));
    const Vec3 c0{r0.x, r1.x, r2.x}, c1{r0.y, r1.y, r2.y}, c2{r0.z, r1.z, r2.z}, rv{rhs[0], rhs[1], rhs[2]};
    return {geometry::dot(rv, geometry::cross(c1, c2)) / det, geometry::dot(c0, geometry::cross(rv, c2)) / det,
            geometry::dot(c0, geometry::cross(c1, rv)) / det};
}

}  // namespace

TEST_CASE("sample_pose") {
    Rng a(42), b(42);
    const auto pa = dataorg::sample_pose(a), pb = dataorg::sample_pose(b);
    CHECK(pa.azimuth() == pb.azimuth());
    CHECK(pa.elevation() == pb.elevation());

    Rng rng(1);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto p = dataorg::sample_pose(rng);
        CHECK(p.distance() == 1.0);
        CHECK(p.azimuth() >= 0.0);
        CHECK(p.azimuth() < 2 * std::numbers::pi);
        CHECK(p.elevation() < 2 * std::numbers::pi);
        sum += p.azimuth();
    }
    CHECK(std::abs(sum / 10000 - std::numbers::pi) < 0.1);
}

TEST_CASE("synthetic shapes") {
    Rng rng(3);
    for (const auto& p : dataorg::sample_sphere(rng, 500)) CHECK(geometry::norm(p) == doctest::Approx(1.0).epsilon(1e-12));
    const std::array<double, 3> half{0.6, 0.8, 0.9};
    for (const auto& p : dataorg::sample_box(rng, 500, half)) {
        int on_face = 0;
        for (std::size_t a = 0; a < 3; ++a) {
            CHECK(std::abs(p[a]) <= half[a]);
            on_face += std::abs(p[a]) == half[a];
        }
        CHECK(on_face >= 1);
    }
    for (const auto& p : dataorg::sample_torus(rng, 500)) {
        const double ring = std::hypot(p.x, p.y) - 0.25;
        CHECK(std::hypot(ring, p.z) == doctest::Approx(0.1).epsilon(1e-9));
    }
    for (const auto& p : dataorg::sample_cylinder(rng, 500, 0.5, 0.7)) {
        const double r = std::hypot(p.x, p.y);
        const bool side = std::abs(r - 0.5) < 1e-12 && std::abs(p.z) <= 0.7;
        const bool cap = std::abs(std::abs(p.z) - 0.7) < 1e-12 && r <= 0.5 + 1e-12;
        CHECK((side || cap));
    }

    const auto rot = dataorg::random_rotation(rng);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double d = 0.0;
            for (int t = 0; t < 3; ++t) d += rot[static_cast<std::size_t>(3 * t + i)] * rot[static_cast<std::size_t>(3 * t + j)];
            CHECK(d == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        }
}

TEST_CASE("synthetic dataset") {
    const auto ds = dataorg::make_synthetic_dataset(50, 256, 7);
    REQUIRE(ds.size() == 200);
    std::map<int, int> counts;
    for (const auto& c : ds) {
        REQUIRE(c.label.has_value());
        ++counts[*c.label];
        CHECK(c.size() == 256);
        double rmax = 0.0;
        for (const auto& p : c.points) rmax = std::max(rmax, geometry::norm(p));
        CHECK(rmax == doctest::Approx(0.35).epsilon(1e-12));
    }
    CHECK(counts == std::map<int, int>{{0, 50}, {1, 50}, {2, 50}, {3, 50}});
    // Sphere samples stay on one sphere after recentring: all points equidistant
    // from the circumcenter of four of them.
    for (int s = 0; s < 50; ++s) {
        const auto& pts = ds[static_cast<std::size_t>(s)].points;
        const Vec3 c = circumcenter(pts[0], pts[1], pts[2], pts[3]);
        const double r = geometry::norm(pts[0] - c);
        CHECK(r <= 0.35 + 1e-12);
        for (const auto& p : pts) CHECK(std::abs(geometry::norm(p - c) - r) < 1e-9);
    }

    const auto again = dataorg::make_synthetic_dataset(50, 256, 7);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(again[i].points == ds[i].points);
    CHECK(dataorg::make_synthetic_dataset(1, 64, 8)[0].points != dataorg::make_synthetic_dataset(1, 64, 7)[0].points);
    CHECK_THROWS_AS(dataorg::make_synthetic_dataset(0, 256, 1), ConfigError);
    CHECK_THROWS_AS(dataorg::make_synthetic_dataset(1, 32, 1), ConfigError);
}

TEST_CASE("cloud I/O round trips") {
    TempDir dir("pcgk_cloud_io");
    Rng rng(5);
    PointCloud cloud{oracle::random_ball(rng, 300), 2};
    for (auto enc : {dataorg::PlyEncoding::binary_le, dataorg::PlyEncoding::ascii}) {
        dataorg::save_cloud(cloud, dir.path / "a.ply", enc);
        const auto back = dataorg::load_cloud(dir.path / "a.ply");
        REQUIRE(back.size() == cloud.size());
        CHECK(back.label == cloud.label);
        for (std::size_t i = 0; i < cloud.size(); ++i)
            for (std::size_t a = 0; a < 3; ++a) CHECK(std::abs(back.points[i][a] - cloud.points[i][a]) < 1e-6);
    }
    dataorg::save_cloud(cloud, dir.path / "a.off");
    const auto off = dataorg::load_cloud(dir.path / "a.off");
    REQUIRE(off.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) CHECK(std::abs(off.points[i].z - cloud.points[i].z) < 1e-6);
    CHECK_THROWS_AS(dataorg::save_cloud(cloud, dir.path / "a.xyz"), DataError);
}

TEST_CASE("cloud readers: OFF variants and PLY extras") {
    TempDir dir("pcgk_cloud_read");
    {
        std::ofstream os(dir.path / "tet.off");
        os << "OFF\n# tetrahedron\n4 0 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n";
    }
    const auto tet = dataorg::load_cloud(dir.path / "tet.off");
    REQUIRE(tet.size() == 4);
    CHECK(tet.points[3] == Vec3{0, 0, 1});
    {
        std::ofstream os(dir.path / "faces.off");
        os << "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
    }
    CHECK(dataorg::load_cloud(dir.path / "faces.off").size() == 3);
    {
        std::ofstream os(dir.path / "extra.ply");
        os << "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty uchar red\nproperty float y\n"
              "property float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n"
              "1 255 2 3\n4 0 5 6\n3 0 1 1\n";
    }
    const auto extra = dataorg::load_cloud(dir.path / "extra.ply");
    REQUIRE(extra.size() == 2);
    CHECK(extra.points[1] == Vec3{4, 5, 6});
    CHECK_FALSE(extra.label.has_value());
}

TEST_CASE("cloud readers: errors") {
    TempDir dir("pcgk_cloud_err");
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream os(dir.path / name, std::ios::binary);
        os << text;
        return dir.path / name;
    };
    CHECK_THROWS_WITH_AS(dataorg::load_cloud(write("bad.ply", "ply\nformat ascii 1.0\nelement vertex x\nend_header\n")),
                         doctest::Contains("line 3"), DataError);
    CHECK_THROWS_WITH_AS(dataorg::load_cloud(write("short.ply", "ply\nformat ascii 1.0\nelement vertex 3\n"
                                                                "property float x\nproperty float y\nproperty float z\n"
                                                                "end_header\n1 2 3\n1 2\n")),
                         doctest::Contains("line 9"), DataError);
    CHECK_THROWS_WITH_AS(dataorg::load_cloud(write("trunc.ply", "ply\nformat binary_little_endian 1.0\nelement vertex 2\n"
                                                                "property float x\nproperty float y\nproperty float z\n"
                                                                "end_header\n0123456789abcdef")),
                         doctest::Contains("byte offset 131"), DataError);
    CHECK_THROWS_WITH_AS(dataorg::load_cloud(write("trunc.off", "OFF\n3 0 0\n0 0 0\n")),
                         doctest::Contains("byte offset"), DataError);
    CHECK_THROWS_AS(dataorg::load_cloud(write("magic.off", "OFX\n1 0 0\n0 0 0\n")), DataError);
    CHECK_THROWS_AS(dataorg::load_cloud(write("nan.off", "OFF\n1 0 0\nnan 0 0\n")), DataError);
    CHECK_THROWS_AS(dataorg::load_cloud(dir.path / "missing.ply"), DataError);
}

TEST_CASE("dataset manifest") {
    TempDir dir("pcgk_manifest");
    const auto ds = dataorg::make_synthetic_dataset(2, 64, 1);
    dataorg::save_dataset(ds, dir.path);
    const auto entries = dataorg::read_manifest(dir.path / "manifest.csv");
    REQUIRE(entries.size() == 8);
    CHECK(entries[0].path.filename() == "cloud_0000.ply");
    CHECK(entries[7].label == 3);
    const auto back = dataorg::load_dataset(dir.path / "manifest.csv");
    REQUIRE(back.size() == 8);
    CHECK(back[4].label == 2);
    {
        std::ofstream os(dir.path / "bad.csv");
        os << "path,label\ncloud_0000.ply,x\n";
    }
    CHECK_THROWS_WITH_AS(dataorg::read_manifest(dir.path / "bad.csv"), doctest::Contains("line 2"), DataError);
}

TEST_CASE("build_patches: desk shapes and construction invariants") {
    const auto ds = dataorg::make_synthetic_dataset(3, 256, 11);
    dataorg::PatchParams params;
    Rng rng(2);
    for (std::size_t ci = 0; ci < ds.size(); ++ci) {
        const auto& cloud = ds[ci];
        const auto pose = dataorg::sample_pose(rng);
        const auto ps = dataorg::build_patches(cloud, pose, params, 100 + ci, ci);
        CHECK(ps.visible_patches.size() == 16 * 16);
        CHECK(ps.visible_centers.size() == 16);
        CHECK(ps.hidden_centers.size() == 16);
        CHECK(ps.target_patches.size() == 16 * 16);
        CHECK(ps.visible_indices.size() + ps.hidden_indices.size() == cloud.size());
        // The split equals HPR's at the pose actually used.
        const auto split = geometry::hidden_point_removal(cloud, ps.pose, params.gamma);
        CHECK(split.visible == ps.visible_indices);
        CHECK(split.hidden == ps.hidden_indices);
        if (ps.attempts == 1) CHECK(ps.pose == pose);

        const std::set<std::size_t> vis(ps.visible_indices.begin(), ps.visible_indices.end());
        for (std::size_t c = 0; c < 16; ++c) {
            CHECK(vis.count(ps.visible_patch_indices[c * 16]) == 1);
            CHECK(ps.visible_patches[c * 16] == Vec3{});  // nearest neighbour of a center is itself
            for (std::size_t j = 0; j < 16; ++j) {
                const auto vi = ps.visible_patch_indices[c * 16 + j], ti = ps.target_patch_indices[c * 16 + j];
                CHECK(vis.count(vi) == 1);
                CHECK(reproduces(ps.visible_patches[c * 16 + j], ps.visible_centers[c], cloud.points[vi]));
                CHECK(reproduces(ps.target_patches[c * 16 + j], ps.hidden_centers[c], cloud.points[ti]));
            }
            CHECK(vis.count(ps.target_patch_indices[c * 16]) == 0);
        }
    }
}

TEST_CASE("build_patches: every visible point its own patch") {
    const auto cloud = dataorg::make_synthetic_dataset(1, 128, 4)[1];
    const auto split = geometry::hidden_point_removal(cloud, geometry::CameraPose(0.5, 0.3, 1.0));
    const auto ps = dataorg::patches_from_split(cloud, split.visible, split.visible.size(), 0, 4, 1, 9);
    CHECK(ps.visible_centers.size() == split.visible.size());
    std::set<std::size_t> centers;
    for (std::size_t i = 0; i < ps.v; ++i) {
        CHECK(ps.visible_patches[i] == Vec3{});
        centers.insert(ps.visible_patch_indices[i]);
    }
    CHECK(centers.size() == split.visible.size());
    CHECK(ps.hidden_centers.empty());
}

TEST_CASE("build_patches: input modes grow the visible set") {
    const auto cloud = dataorg::make_synthetic_dataset(1, 256, 5)[3];
    const geometry::CameraPose pose(1.0, 0.4, 1.0);
    dataorg::PatchParams params;
    std::vector<std::size_t> sizes;
    for (auto m : {"view1", "view1+p2", "view1+p8"}) {
        params.input_mode = dataorg::parse_input_mode(m);
        const auto ps = dataorg::build_patches(cloud, pose, params, 3);
        CHECK(dataorg::to_string(params.input_mode) == m);
        sizes.push_back(ps.visible_indices.size());
    }
    CHECK(sizes[0] < sizes[1]);
    CHECK(sizes[1] < sizes[2]);
    params.input_mode = dataorg::InputMode::view2;
    const auto two = dataorg::build_patches(cloud, pose, params, 3);
    const auto one = geometry::hidden_point_removal(cloud, pose).visible;
    CHECK(std::includes(two.visible_indices.begin(), two.visible_indices.end(), one.begin(), one.end()));
    CHECK_THROWS_AS(dataorg::parse_input_mode("view3"), ConfigError);
}

TEST_CASE("build_patches: retry budget") {
    // A line of points: any HPR call fails on the degenerate hull, so every pose is rejected.
    PointCloud line;
    for (int i = 0; i < 40; ++i) line.points.push_back({0.01 * i, 0, 0});
    dataorg::PatchParams params;
    CHECK_THROWS_WITH_AS(dataorg::build_patches(line, geometry::CameraPose(0, 0, 1), params, 1, 77),
                         doctest::Contains("cloud 77"), DataError);

    // Too many hidden centers requested: also exhausts the budget.
    const auto cloud = dataorg::make_synthetic_dataset(1, 64, 2)[0];
    params.h = 60;
    CHECK_THROWS_WITH_AS(dataorg::build_patches(cloud, geometry::CameraPose(0, 0, 1), params, 1, 5),
                         doctest::Contains("8 attempts"), DataError);
}

TEST_CASE("build_sample") {
    const auto cloud = dataorg::make_synthetic_dataset(1, 256, 6)[2];
    dataorg::SampleParams params;
    const auto a = dataorg::build_sample(cloud, params, 99, 0);
    const auto b = dataorg::build_sample(cloud, params, 99, 0);
    CHECK(a.patches.visible_patches == b.patches.visible_patches);
    CHECK(a.target_image.data() == b.target_image.data());
    CHECK(a.input_pose == a.patches.pose);
    CHECK_FALSE(a.align_pose == a.target_pose);
    CHECK(a.align_image.height() == 16);
    CHECK(a.target_image.mean() > 0.0);
}
