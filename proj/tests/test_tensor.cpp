#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "grad_cases.hpp"
#include "oracles.hpp"
#include "pcgk/common/error.hpp"
#include "pcgk/common/rng.hpp"
#include "pcgk/tensor/dft.hpp"
#include "pcgk/tensor/grad_check.hpp"
#include "pcgk/tensor/ops.hpp"
#include "pcgk/tensor/param_store.hpp"

using namespace pcgk;
using namespace pcgk::tensor;

namespace {

using gradcases::random_value;

double max_dft_error(const Value& img) {
    const auto [re, im] = dft2(img);
    const auto ref = oracle::naive_dft(img.data(), img.dim(0), img.dim(1));
    double err = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        err = std::max(err, std::fabs(re.at(i) - ref[i].real()));
        err = std::max(err, std::fabs(im.at(i) - ref[i].imag()));
    }
    return err;
}

}  // namespace

TEST_SUITE("tensor") {
    TEST_CASE("matmul with identity returns the other operand") {
        Value eye({2, 2}, {1, 0, 0, 1});
        Value a({2, 2}, {1.5, -2, 3, 4.25});
        const Value out = matmul(eye, a);
        for (std::size_t i = 0; i < 4; ++i) CHECK(out.at(i) == a.at(i));
    }

    TEST_CASE("matmul matches a scalar reference in every batch layout") {
        Rng rng(3);
        const Value a = random_value(rng, {2, 3, 4});
        const Value b = random_value(rng, {4, 5});
        const Value bb = random_value(rng, {2, 4, 5});
        const Value a2 = random_value(rng, {3, 4});
        auto ref = [](const Value& x, std::size_t xo, const Value& y, std::size_t yo, std::size_t i, std::size_t j) {
            double s = 0.0;
            for (std::size_t p = 0; p < 4; ++p) s += x.at(xo + i * 4 + p) * y.at(yo + p * 5 + j);
            return s;
        };
        const Value c1 = matmul(a, b), c2 = matmul(a2, bb), c3 = matmul(a, bb);
        for (std::size_t t = 0; t < 2; ++t)
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 5; ++j) {
                    const std::size_t o = t * 15 + i * 5 + j;
                    CHECK(c1.at(o) == doctest::Approx(ref(a, t * 12, b, 0, i, j)).epsilon(1e-12));
                    CHECK(c2.at(o) == doctest::Approx(ref(a2, 0, bb, t * 20, i, j)).epsilon(1e-12));
                    CHECK(c3.at(o) == doctest::Approx(ref(a, t * 12, bb, t * 20, i, j)).epsilon(1e-12));
                }
    }

    TEST_CASE("softmax of uniform logits is uniform and rows sum to one") {
        const Value s = softmax(Value({4}, {0, 0, 0, 0}), 0);
        for (std::size_t i = 0; i < 4; ++i) CHECK(s.at(i) == doctest::Approx(0.25).epsilon(1e-15));

        Rng rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            const Value x = random_value(rng, {3, 5, 4}, -20, 20);
            for (std::size_t axis = 0; axis < 3; ++axis) {
                const Value y = softmax(x, axis);
                const Value sums = sum_axis(y, axis);
                for (double v : sums.data()) CHECK(std::fabs(v - 1.0) < 1e-12);
                for (double v : y.data()) CHECK(v >= 0.0);
            }
        }
    }

    TEST_CASE("layer_norm of [1,2,3]") {
        const Value y = layer_norm(Value({3}, {1, 2, 3}), Value({3}, {1, 1, 1}), Value({3}, {0, 0, 0}), 1e-5);
        const double expect = 1.0 / std::sqrt(2.0 / 3.0 + 1e-5);
        CHECK(y.at(0) == doctest::Approx(-expect).epsilon(1e-12));
        CHECK(std::fabs(y.at(1)) < 1e-15);
        CHECK(y.at(2) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(y.at(2) == doctest::Approx(1.2247).epsilon(1e-4));
    }

    TEST_CASE("backward of sum of squares") {
        Value x({3}, {1, 2, 3}, true);
        backward(sum(mul(x, x)));
        const auto g = x.grad();
        CHECK(g == std::vector<double>{2, 4, 6});
    }

    TEST_CASE("backward through identity matmul gives ones") {
        Value a({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
        Value x({3, 1}, {0.3, -1, 2}, true);
        backward(sum(matmul(a, x)));
        CHECK(x.grad() == std::vector<double>{1, 1, 1});
    }

    TEST_CASE("repeated backward accumulates leaf gradients") {
        Value x({2}, {1.5, -0.5}, true);
        const Value loss = sum(square(scalar_mul(x, 3.0)));
        backward(loss);
        const auto once = x.grad();
        backward(loss);
        const auto twice = x.grad();
        for (std::size_t i = 0; i < 2; ++i) CHECK(twice[i] == 2.0 * once[i]);
        x.zero_grad();
        CHECK(!x.has_grad());
    }

    TEST_CASE("three layer MLP gradients match central differences") {
        Rng rng(5);
        const Value x = random_value(rng, {4, 3}, -1, 1, false);
        std::vector<Value> params = {random_value(rng, {3, 8}), random_value(rng, {1, 8}), random_value(rng, {8, 8}),
                                     random_value(rng, {8, 2})};
        auto f = [&] {
            Value hdn = gelu(add(matmul(x, params[0]), broadcast_to(params[1], {4, 8})));
            hdn = sigmoid(matmul(hdn, params[2]));
            return mean(square(matmul(hdn, params[3])));
        };
        CHECK(grad_check(f, params, 1e-6) < 1e-6);
    }

    TEST_CASE("errors: non-scalar root, shape mismatch, zero extent") {
        Value x({2}, {1, 2}, true);
        CHECK_THROWS_AS(backward(x), ShapeError);
        CHECK_THROWS_AS(Value({0, 3}, {}), ShapeError);
        try {
            (void)add(x, Value({3}, {1, 2, 3}));
            FAIL("expected ShapeError");
        } catch (const ShapeError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("add") != std::string::npos);
            CHECK(msg.find("(2)") != std::string::npos);
            CHECK(msg.find("(3)") != std::string::npos);
        }
        CHECK_THROWS_AS(matmul(Value({2, 3}, std::vector<double>(6)), Value({2, 3}, std::vector<double>(6))),
                        ShapeError);
        CHECK_THROWS_AS(reshape(x, {3}), ShapeError);
        CHECK_THROWS_AS(slice(x, 0, 1, 1), ShapeError);
    }

    TEST_CASE("every primitive passes a central-difference check on random shapes") {
        Rng rng(2024);
        for (int trial = 0; trial < 20; ++trial) {
            CAPTURE(trial);
            for (const auto& c : gradcases::primitive_cases(rng)) {
                CAPTURE(c.name);
                CHECK(grad_check(c.f, c.inputs, 1e-6) < 1e-6);
            }
        }
    }

    TEST_CASE("reshape and transpose round-trip") {
        Rng rng(8);
        const Value x = random_value(rng, {2, 3, 4});
        const Value t = transpose(transpose(x, {1, 2, 0}), {2, 0, 1});
        const Value r = reshape(reshape(x, {4, 6}), {2, 3, 4});
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(t.at(i) == x.at(i));
            CHECK(r.at(i) == x.at(i));
        }
    }

    TEST_CASE("conv2d_transpose is the adjoint of conv2d") {
        Rng rng(17);
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t stride = 1 + trial % 2, pad = trial % 3, k = 3 + trial % 2;
            const Value x = random_value(rng, {2, 3, 9, 9}, -1, 1, false);
            const Value ker = random_value(rng, {4, 3, k, k}, -1, 1, false);
            const Value cx = conv2d(x, ker, stride, pad);
            const Value y = random_value(rng, cx.shape(), -1, 1, false);
            const Value ty = conv2d_transpose(y, ker, stride, pad, 9, 9);
            double lhs = 0.0, rhs = 0.0;
            for (std::size_t i = 0; i < cx.size(); ++i) lhs += cx.at(i) * y.at(i);
            for (std::size_t i = 0; i < x.size(); ++i) rhs += x.at(i) * ty.at(i);
            CHECK(std::fabs(lhs - rhs) < 1e-9);
        }
    }

    TEST_CASE("conv2d_transpose with k4 s2 p1 doubles the spatial size") {
        const Value y = Value::full({1, 2, 4, 4}, 1.0);
        const Value k = Value::full({2, 3, 4, 4}, 0.1);
        CHECK(conv2d_transpose(y, k, 2, 1).shape() == Shape{1, 3, 8, 8});
    }

    TEST_CASE("DFT of a constant image has a single DC bin") {
        const double c = 0.37;
        const auto [re, im] = dft2(Value::full({4, 4}, c));
        CHECK(re.at(0) == doctest::Approx(16 * c).epsilon(1e-14));
        for (std::size_t i = 1; i < 16; ++i) {
            CHECK(std::fabs(re.at(i)) < 1e-12);
            CHECK(std::fabs(im.at(i)) < 1e-12);
        }
        CHECK(std::fabs(im.at(0)) < 1e-12);
    }

    TEST_CASE("DFT of a delta image is flat") {
        std::vector<double> d(16, 0.0);
        d[0] = 1.0;
        const auto [re, im] = dft2(Value({4, 4}, d));
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(re.at(i) == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(std::fabs(im.at(i)) < 1e-14);
        }
    }

    TEST_CASE("matmul DFT matches the naive double-sum DFT") {
        Rng rng(99);
        CHECK(max_dft_error(random_value(rng, {8, 8}, 0, 1, false)) < 1e-10);
        CHECK(max_dft_error(random_value(rng, {16, 16}, 0, 1, false)) < 1e-9);
        CHECK(max_dft_error(random_value(rng, {6, 10}, 0, 1, false)) < 1e-10);
    }

    TEST_CASE("DFT satisfies Parseval") {
        Rng rng(4);
        for (int trial = 0; trial < 5; ++trial) {
            const Value x = random_value(rng, {16, 16}, -1, 1, false);
            const auto [re, im] = dft2(x);
            double lhs = 0.0, rhs = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                lhs += re.at(i) * re.at(i) + im.at(i) * im.at(i);
                rhs += x.at(i) * x.at(i);
            }
            CHECK(std::fabs(lhs - 256.0 * rhs) <= 1e-8 * lhs);
        }
    }

    TEST_CASE("param store checkpoint round-trip is bit exact") {
        Rng rng(12);
        ParamStore store(77);
        store.add("enc.w", random_value(rng, {3, 4}));
        store.add("a.bias", random_value(rng, {4}, -1e300, 1e300));
        store.add("z.k", random_value(rng, {2, 1, 3, 3}));
        std::stringstream ss;
        store.save(ss);
        const std::string blob = ss.str();
        CHECK(blob.substr(0, 4) == "PCGK");

        ParamStore back = ParamStore::load(ss);
        CHECK(back.size() == 3);
        std::stringstream again;
        back.save(again);
        CHECK(again.str() == blob);
        for (const auto& [name, v] : back) CHECK(v.requires_grad());

        std::stringstream truncated(blob.substr(0, blob.size() - 5));
        try {
            (void)ParamStore::load(truncated);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
        }
    }

    TEST_CASE("param store iterates lexicographically and rejects duplicates") {
        ParamStore store;
        store.add("b", Value::scalar(1));
        store.add("a", Value::scalar(2));
        CHECK(store.begin()->first == "a");
        CHECK_THROWS_AS(store.add("a", Value::scalar(3)), ShapeError);
    }

    TEST_CASE("grad_check on a sum of squares is exact") {
        Rng rng(1);
        ParamStore store;
        Value p = store.add("p", random_value(rng, {5}, -3, 3));
        CHECK(grad_check([&] { return sum(square(p)); }, store, 1e-4) < 1e-9);
        Value bad = Value::scalar(-1.0, true);
        CHECK_THROWS_AS(grad_check([&] { return log(bad); }, std::vector<Value>{bad}), NumericError);
    }
}
