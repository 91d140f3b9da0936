#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pcgk/common/error.hpp"
#include "pcgk/losses/losses.hpp"
#include "pcgk/tensor/grad_check.hpp"
#include "pcgk/tensor/ops.hpp"
#include "values.hpp"

using namespace pcgk;
using namespace pcgk::losses;
using geometry::Vec3;
using tensor::Value;

namespace {

Value random_value(Rng& rng, tensor::Shape shape, double lo = -1.0, double hi = 1.0, bool grad = false) {
    std::vector<double> d(tensor::numel(shape));
    for (auto& x : d) x = uniform(rng, lo, hi);
    return Value(std::move(shape), std::move(d), grad);
}

std::vector<Vec3> points_of(const Value& v, std::size_t offset, std::size_t n) {
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({v.at(3 * (offset + i)), v.at(3 * (offset + i) + 1), v.at(3 * (offset + i) + 2)});
    return out;
}

}  // namespace

TEST_CASE("chamfer: identities and the single-point fixture") {
    Rng rng(1);
    const Value x = random_value(rng, {2, 3, 5, 3});
    CHECK(chamfer(x, x).item() == 0.0);
    const Value a({1, 1, 3}, {0, 0, 0}), b({1, 1, 3}, {0.3, 0, 0.4});
    CHECK(chamfer(a, b).item() == doctest::Approx(2 * 0.25).epsilon(1e-15));

    const Value y = random_value(rng, {2, 3, 5, 3});
    CHECK(std::fabs(chamfer(x, y).item() - chamfer(y, x).item()) < 1e-15);
    CHECK(chamfer(x, y).item() > 0.0);
}

TEST_CASE("chamfer: zero exactly on equal integer sets in any order") {
    const Value a({1, 4, 3}, {0, 0, 0, 1, 0, 0, 0, 2, 0, 1, 1, 1});
    const Value b({1, 4, 3}, {1, 1, 1, 0, 2, 0, 0, 0, 0, 1, 0, 0});
    const Value c({1, 4, 3}, {1, 1, 1, 0, 2, 0, 0, 0, 0, 1, 0, 1});
    CHECK(chamfer(a, b).item() == 0.0);
    CHECK(chamfer(a, c).item() > 0.0);
}

TEST_CASE("chamfer: brute-force oracle in both modes") {
    Rng rng(2);
    const Value pred = random_value(rng, {1, 2, 6, 3}), gt = random_value(rng, {1, 2, 4, 3});
    const double ref = 0.5 * (oracle::brute_chamfer(points_of(pred, 0, 6), points_of(gt, 0, 4)) +
                              oracle::brute_chamfer(points_of(pred, 6, 6), points_of(gt, 4, 4)));
    CHECK(std::fabs(chamfer(pred, gt).item() - ref) < 1e-12);

    const Value p2 = random_value(rng, {2, 2, 3, 3}), g2 = random_value(rng, {2, 2, 3, 3});
    const Value centers = random_value(rng, {2, 2, 3});
    double gref = 0.0;
    for (std::size_t s = 0; s < 2; ++s) {
        std::vector<Vec3> ps, gs;
        for (std::size_t j = 0; j < 2; ++j) {
            const Vec3 c{centers.at(s * 6 + j * 3), centers.at(s * 6 + j * 3 + 1), centers.at(s * 6 + j * 3 + 2)};
            for (const auto& q : points_of(p2, s * 6 + j * 3, 3)) ps.push_back(q + c);
            for (const auto& q : points_of(g2, s * 6 + j * 3, 3)) gs.push_back(q + c);
        }
        gref += 0.5 * oracle::brute_chamfer(ps, gs);
    }
    CHECK(std::fabs(chamfer(p2, g2, ChamferMode::global, &centers).item() - gref) < 1e-12);
    CHECK_THROWS_AS(chamfer(p2, g2, ChamferMode::global), ShapeError);
}

TEST_CASE("cross_modal: fixtures and structure") {
    Rng rng(3);
    const Value z1 = random_value(rng, {1, 8}), h1 = random_value(rng, {1, 8});
    CHECK(cross_modal(z1, h1, 0.07).item() == 0.0);

    const Value e({2, 2}, {1, 0, 0, 1});
    const double expect = -std::log(std::exp(1.0) / (2.0 + std::exp(1.0)));
    CHECK(std::fabs(cross_modal(e, e, 1.0).item() - expect) < 1e-9);
    CHECK(std::fabs(oracle::naive_cross_modal(vals(e), vals(e), 2, 2, 1.0) - expect) < 1e-12);
    CHECK(expect == doctest::Approx(0.55144).epsilon(1e-4));

    const Value z = random_value(rng, {6, 5}), h = random_value(rng, {6, 5});
    for (double tau : {0.07, 0.5, 1.0}) {
        const double v = cross_modal(z, h, tau).item();
        CHECK(v >= 0.0);
        CHECK(std::fabs(v - oracle::naive_cross_modal(vals(z), vals(h), 6, 5, tau)) < 1e-10);
    }
    std::vector<double> d = vals(z);
    for (std::size_t j = 0; j < 5; ++j) d[2 * 5 + j] *= 7.3;
    CHECK(std::fabs(cross_modal(Value({6, 5}, d), h, 0.07).item() - cross_modal(z, h, 0.07).item()) < 1e-9);

    std::vector<double> zero = vals(z);
    for (std::size_t j = 0; j < 5; ++j) zero[5 + j] = 0.0;
    CHECK_THROWS_AS(cross_modal(Value({6, 5}, zero), h, 0.07), NumericError);
}

TEST_CASE("image losses: fixtures") {
    const Value zeros = Value::zeros({1, 1, 8, 8}), ones = Value::full({1, 1, 8, 8}, 1.0);
    CHECK(l1_image(zeros, ones).item() == 1.0);
    CHECK(l1_image(ones, ones).item() == 0.0);
    CHECK(msfr(ones, ones, 2).item() == 0.0);

    // Constant c against 0 at one scale: all energy in the DC bin.
    for (double c : {0.25, 0.7})
        CHECK(msfr(Value::full({1, 1, 16, 16}, c), Value::zeros({1, 1, 16, 16}), 1).item() ==
              doctest::Approx(c).epsilon(1e-12));

    Rng rng(4);
    const Value a = random_value(rng, {1, 1, 16, 16}, 0, 1), b = random_value(rng, {1, 1, 16, 16}, 0, 1);
    double l1_ref = 0.0;
    for (std::size_t i = 0; i < 256; ++i) l1_ref += std::fabs(a.at(i) - b.at(i)) / 256.0;
    CHECK(std::fabs(l1_image(a, b).item() - l1_ref) < 1e-12);
    for (std::size_t scales : {1, 2, 3})
        CHECK(std::fabs(msfr(a, b, scales).item() - oracle::naive_msfr(vals(a), vals(b), 16, scales)) < 1e-9);
    CHECK(msfr(a, b, 2).item() > 0.0);

    LossWeights w;
    CHECK(std::fabs(image_gen_loss(a, b, w).item() - (l1_image(a, b).item() + 0.2 * msfr(a, b, 2).item())) < 1e-12);
    w.beta = 0.0;
    CHECK(image_gen_loss(a, b, w).item() == l1_image(a, b).item());
    CHECK(image_gen_loss(a, a, LossWeights{}).item() == 0.0);
    w.gen_loss = GenLossKind::l1_l2;
    w.beta = 1.0;
    CHECK(std::fabs(image_gen_loss(a, b, w).item() - (l1_image(a, b).item() + l2_image(a, b).item())) < 1e-12);

    CHECK_THROWS_AS(l1_image(a, Value::zeros({1, 1, 8, 8})), ShapeError);
    CHECK_THROWS_AS(msfr(Value::zeros({1, 1, 6, 6}), Value::zeros({1, 1, 6, 6}), 3), ShapeError);
    w.alpha = -1;
    CHECK_THROWS_AS(image_gen_loss(a, b, w), ConfigError);
}

TEST_CASE("total loss and weights") {
    const LossWeights w;
    const Value a = Value::scalar(0.3), b = Value::scalar(1.7), c = Value::scalar(0.05);
    CHECK(std::fabs(total_loss(a, b, c, w).item() - (0.3 + 1.7 + 0.05)) < 1e-12);
    CHECK(total_loss(Value::scalar(0), Value::scalar(0), Value::scalar(0), w).item() == 0.0);
    LossWeights hpc = w;
    hpc.phi = hpc.psi = 0.0;
    CHECK(total_loss(a, b, c, hpc).item() == 0.3);
    LossWeights none = w;
    none.omega = none.phi = none.psi = 0.0;
    CHECK_THROWS_AS(none.validate(), ConfigError);
    CHECK_THROWS_AS(total_loss(a, b, c, none), ConfigError);
    LossWeights bad_tau = w;
    bad_tau.tau = 0.0;
    CHECK_THROWS_AS(bad_tau.validate(), ConfigError);
    CHECK(parse_chamfer_mode(to_string(ChamferMode::global)) == ChamferMode::global);
    CHECK(parse_gen_loss("l1_l2") == GenLossKind::l1_l2);
    CHECK_THROWS_AS(parse_gen_loss("ms_ssim"), ConfigError);
}

TEST_CASE("every loss passes a central-difference check") {
    Rng rng(5);
    Value pred = random_value(rng, {2, 3, 4, 3}, -1, 1, true);
    const Value gt = random_value(rng, {2, 3, 5, 3}), gt4 = random_value(rng, {2, 3, 4, 3});
    const Value centers = random_value(rng, {2, 3, 3});
    CHECK(tensor::grad_check([&] { return chamfer(pred, gt); }, {pred}) < 1e-4);
    CHECK(tensor::grad_check([&] { return chamfer(pred, gt4, ChamferMode::global, &centers); }, {pred}) < 1e-4);

    Value z = random_value(rng, {4, 6}, -1, 1, true), h = random_value(rng, {4, 6}, -1, 1, true);
    CHECK(tensor::grad_check([&] { return cross_modal(z, h, 0.07); }, {z, h}) < 1e-4);
    CHECK(tensor::grad_check([&] { return cross_modal(z, h, 1.0); }, {z, h}) < 1e-4);

    Value img = random_value(rng, {2, 1, 8, 8}, 0.05, 0.95, true);
    const Value tgt = random_value(rng, {2, 1, 8, 8}, 0, 1);
    CHECK(tensor::grad_check([&] { return l1_image(tgt, img); }, {img}) < 1e-4);
    CHECK(tensor::grad_check([&] { return l2_image(tgt, img); }, {img}) < 1e-4);
    CHECK(tensor::grad_check([&] { return msfr(tgt, img, 2); }, {img}) < 1e-4);
    CHECK(tensor::grad_check([&] { return image_gen_loss(tgt, img, LossWeights{}); }, {img}) < 1e-4);
    Value a = random_value(rng, {1}, -1, 1, true), b = random_value(rng, {1}, -1, 1, true);
    CHECK(tensor::grad_check([&] { return total_loss(a, b, a, LossWeights{}); }, {a, b}) < 1e-4);
}
