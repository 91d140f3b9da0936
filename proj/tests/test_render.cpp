#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <queue>

#include "oracles.hpp"
#include "pcgk/common/error.hpp"
#include "pcgk/render/image_io.hpp"
#include "pcgk/render/raster.hpp"

using namespace pcgk;
using geometry::CameraPose;
using geometry::Vec3;
using render::ImageGrid;
using render::RenderMode;

namespace {

std::vector<Vec3> fibonacci_sphere(std::size_t n, double radius) {
    std::vector<Vec3> out;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double r = std::sqrt(1.0 - z * z), t = golden * static_cast<double>(i);
        out.push_back(Vec3{r * std::cos(t), r * std::sin(t), z} * radius);
    }
    return out;
}

// Foreground components where pixels within Chebyshev distance 2 are joined,
// i.e. 4-connectivity tolerant of single-pixel gaps.
std::size_t gap_tolerant_components(const ImageGrid& img) {
    const long n = static_cast<long>(img.height());
    std::vector<int> label(static_cast<std::size_t>(n * n), -1);
    std::size_t comps = 0;
    for (long s = 0; s < n * n; ++s) {
        if (img.data()[static_cast<std::size_t>(s)] == 0.0 || label[static_cast<std::size_t>(s)] >= 0) continue;
        std::queue<long> q;
        q.push(s);
        label[static_cast<std::size_t>(s)] = static_cast<int>(comps);
        while (!q.empty()) {
            const long cur = q.front();
            q.pop();
            const long r = cur / n, c = cur % n;
            for (long dr = -2; dr <= 2; ++dr)
                for (long dc = -2; dc <= 2; ++dc) {
                    const long rr = r + dr, cc = c + dc;
                    if (rr < 0 || cc < 0 || rr >= n || cc >= n) continue;
                    const auto id = static_cast<std::size_t>(rr * n + cc);
                    if (img.data()[id] == 0.0 || label[id] >= 0) continue;
                    label[id] = static_cast<int>(comps);
                    q.push(rr * n + cc);
                }
        }
        ++comps;
    }
    return comps;
}

}  // namespace

TEST_CASE("image grid validates shape and range") {
    CHECK_THROWS_AS(ImageGrid(0, 4, 1), ShapeError);
    CHECK_THROWS_AS(ImageGrid(4, 4, 2), ShapeError);
    CHECK_THROWS_AS(ImageGrid(2, 2, 1, {0, 0, 0}), ShapeError);
    CHECK_THROWS_AS(ImageGrid(1, 2, 1, {0.5, 1.5}), DataError);
    ImageGrid g(2, 2, 1);
    g.set(0, 1, 7.0);
    CHECK(g.at(0, 1) == 1.0);
    g.set(1, 1, std::nan(""));
    CHECK(g.at(1, 1) == 0.0);
}

TEST_CASE("project_points: principal ray and hand geometry") {
    const CameraPose pose(0, 0, 1);
    const std::vector<Vec3> pts{{0, 0, 0}, {0.1, 0, 0}, {-0.2, 0, 0}};
    const auto proj = render::project_points(pts, pose, 16, 16, 50);
    REQUIRE(proj.size() == 3);
    CHECK(std::abs(proj[0].u - 8.0) <= 0.5);
    CHECK(std::abs(proj[0].v - 8.0) <= 0.5);
    CHECK(std::abs(proj[1].depth - 0.9) < 1e-9);
    CHECK(proj[1].u == doctest::Approx(proj[2].u).epsilon(1e-12));
    CHECK(proj[1].v == doctest::Approx(proj[2].v).epsilon(1e-12));
    CHECK(proj[1].depth != proj[2].depth);
}

TEST_CASE("project_points: orientation and drop behind camera") {
    const CameraPose pose(0, 0, 1);  // camera on +x looking at -x, up +z
    const std::vector<Vec3> pts{{0, 0, 0.1}, {0, 0.1, 0}, {2, 0, 0}};
    const auto proj = render::project_points(pts, pose, 16, 16, 50);
    REQUIRE(proj.size() == 2);
    CHECK(proj[0].v < 8.0);  // +z appears above center
    CHECK(proj[1].index == 1);
    CHECK(proj[1].u != doctest::Approx(8.0));

    // Looking straight down the z axis uses the +x fallback and stays finite.
    const auto top = render::project_points(pts, CameraPose(0, std::numbers::pi / 2, 1), 16, 16, 50);
    for (const auto& p : top) {
        CHECK(std::isfinite(p.u));
        CHECK(std::isfinite(p.v));
    }
}

TEST_CASE("rasterize: empty cloud, silhouette values, size precondition") {
    const CameraPose pose(0.3, 0.2, 1);
    const auto empty = render::rasterize({}, pose, 16, RenderMode::depth);
    for (double v : empty.data()) CHECK(v == 0.0);
    CHECK_THROWS_AS(render::rasterize({}, pose, 4, RenderMode::depth), ShapeError);

    Rng rng(3);
    const auto pts = oracle::random_ball(rng, 256);
    const auto sil = render::rasterize(pts, pose, 16, RenderMode::silhouette);
    std::size_t on = 0;
    for (double v : sil.data()) {
        CHECK((v == 0.0 || v == 1.0));
        on += v == 1.0;
    }
    CHECK(on >= 16 * 16 / 5);
    const auto dep = render::rasterize(pts, pose, 16, RenderMode::depth);
    for (std::size_t i = 0; i < dep.size(); ++i) {
        CHECK((dep.data()[i] > 0.0) == (sil.data()[i] > 0.0));
        CHECK(dep.data()[i] <= 1.0);
    }
    CHECK(render::rasterize(pts, pose, 16, RenderMode::depth).data() == dep.data());
}

TEST_CASE("rasterize: single point splats a 2x2 footprint") {
    const auto img = render::rasterize(std::vector<Vec3>{{0.1, 0, 0}}, CameraPose(0, 0, 1), 16, RenderMode::depth);
    std::size_t on = 0;
    for (double v : img.data())
        if (v > 0) {
            ++on;
            CHECK(v == doctest::Approx(1.0 - (0.9 - 0.5)).epsilon(1e-12));
        }
    CHECK(on == 4);
}

TEST_CASE("rasterize: depth nearest wins") {
    Rng rng(11);
    const CameraPose pose(1.1, 0.4, 1);
    const auto pts = oracle::random_ball(rng, 200);
    const auto base = render::rasterize(pts, pose, 16, RenderMode::depth);
    const Vec3 eye = geometry::camera_position(pose);
    for (int t = 0; t < 50; ++t) {
        // Push an existing point farther along its own viewing ray.
        const Vec3 src = pts[static_cast<std::size_t>(t) * 3];
        const Vec3 farther = eye + (src - eye) * (1.0 + uniform(rng, 0.01, 0.3));
        auto more = pts;
        more.push_back(farther);
        const auto img = render::rasterize(more, pose, 16, RenderMode::depth);
        for (std::size_t i = 0; i < img.size(); ++i)
            if (base.data()[i] > 0) CHECK(img.data()[i] == base.data()[i]);
    }
}

TEST_CASE("rasterize: sphere silhouette is connected at 32x32") {
    const auto sphere = fibonacci_sphere(512, 0.35);
    Rng rng(5);
    for (int t = 0; t < 25; ++t) {
        const CameraPose pose(uniform(rng, 0, 2 * std::numbers::pi), uniform(rng, 0, 2 * std::numbers::pi), 1.0);
        const auto img = render::rasterize(sphere, pose, 32, RenderMode::silhouette);
        CHECK(gap_tolerant_components(img) == 1);
    }
}

TEST_CASE("image pyramid") {
    Rng rng(9);
    std::vector<double> data(16 * 16);
    for (auto& v : data) v = uniform01(rng);
    const ImageGrid img(16, 16, 1, data);
    const auto levels = render::image_pyramid(img, 3);
    REQUIRE(levels.size() == 3);
    CHECK(levels[0].data() == img.data());
    CHECK(levels[1].height() == 8);
    CHECK(levels[2].width() == 4);
    CHECK(levels[1].at(2, 3) == doctest::Approx(0.25 * (img.at(4, 6) + img.at(4, 7) + img.at(5, 6) + img.at(5, 7))));
    for (const auto& l : levels) CHECK(std::abs(l.mean() - img.mean()) < 1e-12);
    CHECK(render::image_pyramid(img, 1).size() == 1);
    CHECK_THROWS_AS(render::image_pyramid(img, 0), ShapeError);
    CHECK_THROWS_AS(render::image_pyramid(ImageGrid(12, 12, 1), 4), ShapeError);

    const ImageGrid flat(8, 8, 1, std::vector<double>(64, 0.4));
    for (const auto& l : render::image_pyramid(flat, 4))
        for (double v : l.data()) CHECK(v == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("PGM and PNG export") {
    const auto dir = std::filesystem::temp_directory_path() / "pcgk_render_test";
    std::filesystem::create_directories(dir);
    std::vector<double> data(12);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>(i * 20) / 255.0;
    const ImageGrid img(3, 4, 1, data);
    render::write_pgm(img, dir / "a.pgm");
    const auto back = render::read_pgm(dir / "a.pgm");
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(back.data()[i] == doctest::Approx(data[i]).epsilon(1e-12));

    {
        std::ofstream os(dir / "ascii.pgm");
        os << "P2\n# comment\n2 1\n4\n0 4\n";
    }
    const auto ascii = render::read_pgm(dir / "ascii.pgm");
    CHECK(ascii.at(0, 1) == 1.0);

    {
        std::ofstream os(dir / "trunc.pgm", std::ios::binary);
        os << "P5\n4 4\n255\nabc";
    }
    CHECK_THROWS_WITH_AS(render::read_pgm(dir / "trunc.pgm"), doctest::Contains("byte offset"), DataError);
    CHECK_THROWS_AS(render::read_pgm(dir / "missing.pgm"), DataError);

    render::write_image(img, dir / "a.png");
    std::ifstream png(dir / "a.png", std::ios::binary);
    char sig[8] = {};
    png.read(sig, 8);
    CHECK(std::string(sig + 1, 3) == "PNG");
    std::filesystem::remove_all(dir);
}
