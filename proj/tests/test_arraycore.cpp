#include <doctest.h>

#include "colonmap/arrayops.hpp"
#include "colonmap/gradcheck.hpp"
#include "test_support.hpp"

using namespace colonmap;
using test::bitwise_equal;
using test::random_grid;

namespace {

// Independent six-nested-loop cross-correlation, double precision throughout.
Grid conv2d_oracle(const Grid &input, const ConvKernel &k, int stride, int padding) {
    const int oh = (input.height() + 2 * padding - k.kh) / stride + 1;
    const int ow = (input.width() + 2 * padding - k.kw) / stride + 1;
    Grid out(oh, ow, k.out_channels);
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox)
            for (int oc = 0; oc < k.out_channels; ++oc) {
                double acc = k.bias.empty() ? 0.0 : k.bias[oc];
                for (int ic = 0; ic < k.in_channels; ++ic)
                    for (int ky = 0; ky < k.kh; ++ky)
                        for (int kx = 0; kx < k.kw; ++kx) {
                            const int y = oy * stride - padding + ky;
                            const int x = ox * stride - padding + kx;
                            if (y < 0 || y >= input.height() || x < 0 || x >= input.width())
                                continue;
                            acc += static_cast<double>(input.at(y, x, ic)) * k.w(oc, ic, ky, kx);
                        }
                out.at(oy, ox, oc) = static_cast<float>(acc);
            }
    return out;
}

Grid avg_pool_oracle(const Grid &input, int window, int stride) {
    const int oh = (input.height() - window) / stride + 1;
    const int ow = (input.width() - window) / stride + 1;
    Grid out(oh, ow, input.channels());
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox)
            for (int c = 0; c < input.channels(); ++c) {
                double acc = 0;
                for (int ky = 0; ky < window; ++ky)
                    for (int kx = 0; kx < window; ++kx)
                        acc += input.at(oy * stride + ky, ox * stride + kx, c);
                out.at(oy, ox, c) = static_cast<float>(acc / (window * window));
            }
    return out;
}

} // namespace

TEST_CASE("conv2d: 1x1 identity kernel is the identity") {
    Rng rng(1);
    const Grid input = random_grid(5, 7, 3, rng);
    const Grid out = conv2d(input, ConvKernel::identity_1x1(3));
    CHECK(bitwise_equal(out, input));
}

TEST_CASE("conv2d: impulse response of the all-ones 3x3 kernel") {
    Grid input(5, 5, 1);
    input.at(2, 2, 0) = 1.0f;
    ConvKernel ones(1, 1, 3, 3);
    for (float &w : ones.weights)
        w = 1.0f;
    const Grid out = conv2d(input, ones, 1, 1);
    REQUIRE(out.height() == 5);
    REQUIRE(out.width() == 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) {
            const bool in_block = std::abs(y - 2) <= 1 && std::abs(x - 2) <= 1;
            CHECK(out.at(y, x, 0) == (in_block ? 1.0f : 0.0f));
        }
}

TEST_CASE("conv2d: random kernels match the nested-loop oracle") {
    Rng rng(2);
    for (int trial = 0; trial < 4; ++trial) {
        const int stride = 1 + trial % 2;
        const int padding = trial / 2;
        const Grid input = random_grid(8, 8, 2, rng);
        ConvKernel k(3, 2, 3, 3);
        for (float &w : k.weights)
            w = static_cast<float>(rng.uniform(-1, 1));
        for (float &b : k.bias)
            b = static_cast<float>(rng.uniform(-1, 1));
        const Grid got = conv2d(input, k, stride, padding);
        const Grid want = conv2d_oracle(input, k, stride, padding);
        REQUIRE(got.same_shape(want));
        CHECK(test::max_abs_diff(got, want) <= 1e-6);
    }
}

TEST_CASE("conv2d: shape errors") {
    Rng rng(3);
    const Grid input = random_grid(4, 4, 2, rng);
    CHECK_THROWS_AS(conv2d(input, ConvKernel(1, 3, 3, 3)), ShapeError);    // in_ch mismatch
    CHECK_THROWS_AS((void)ConvKernel(1, 1, 2, 2), ShapeError);             // even kernel
    CHECK_THROWS_AS(conv2d(input, ConvKernel(1, 2, 3, 3), 0, 0), ShapeError);
}

TEST_CASE("conv2d: repeated calls are bit-identical") {
    Rng rng(4);
    const Grid input = random_grid(9, 9, 3, rng);
    ConvKernel k(2, 3, 3, 3);
    for (float &w : k.weights)
        w = static_cast<float>(rng.uniform(-1, 1));
    const Grid a = conv2d(input, k, 1, 1);
    const Grid b = conv2d(input, k, 1, 1);
    CHECK(bitwise_equal(a, b));
}

TEST_CASE("avg_pool: constant invariance") {
    const Grid input = Grid::constant(6, 6, 2, 0.37f);
    const Grid out = avg_pool(input, 3, 2);
    for (float v : out.data())
        CHECK(v == doctest::Approx(0.37f).epsilon(1e-7));
}

TEST_CASE("avg_pool: 2x2 arithmetic mean") {
    Grid input(2, 2, 1, {1.0f, 2.0f, 3.0f, 4.0f});
    const Grid out = avg_pool(input, 2, 2);
    REQUIRE(out.size() == 1);
    CHECK(out.at(0, 0, 0) == 2.5f);
}

TEST_CASE("avg_pool: random grid matches windowed-mean oracle") {
    Rng rng(5);
    const Grid input = random_grid(7, 7, 2, rng);
    const Grid got = avg_pool(input, 3, 2);
    const Grid want = avg_pool_oracle(input, 3, 2);
    REQUIRE(got.same_shape(want));
    CHECK(test::max_abs_diff(got, want) <= 1e-7);
}

TEST_CASE("avg_pool: window larger than grid is a shape error") {
    CHECK_THROWS_AS(avg_pool(Grid(3, 3, 1), 4, 1), ShapeError);
}

TEST_CASE("bilinear_sample: identity coordinates reproduce the input") {
    Rng rng(6);
    const Grid input = random_grid(5, 6, 3, rng);
    Grid coords(5, 6, 2);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 6; ++x) {
            coords.at(y, x, 0) = static_cast<float>(x);
            coords.at(y, x, 1) = static_cast<float>(y);
        }
    const SampleResult res = bilinear_sample(input, coords);
    CHECK(bitwise_equal(res.values, input));
    for (float v : res.valid.grid.data())
        CHECK(v == 1.0f);
}

TEST_CASE("bilinear_sample: out-of-bounds coordinates give value 0, mask 0") {
    const Grid input = Grid::constant(4, 4, 1, 5.0f);
    Grid coords(1, 1, 2);
    coords.at(0, 0, 0) = -5.0f;
    coords.at(0, 0, 1) = -5.0f;
    const SampleResult res = bilinear_sample(input, coords);
    CHECK(res.values.at(0, 0, 0) == 0.0f);
    CHECK(res.valid.at(0, 0) == 0.0f);
}

TEST_CASE("bilinear_sample: linear ramp interpolates exactly") {
    // ramp(x, y) = 2x + 3y + 1 stays linear under bilinear interpolation,
    // so fractional samples must match the closed form.
    Grid ramp(6, 6, 1);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x)
            ramp.at(y, x, 0) = static_cast<float>(2.0 * x + 3.0 * y + 1.0);
    Rng rng(7);
    Grid coords(4, 4, 2);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            coords.at(y, x, 0) = static_cast<float>(rng.uniform(0.0, 5.0));
            coords.at(y, x, 1) = static_cast<float>(rng.uniform(0.0, 5.0));
        }
    const SampleResult res = bilinear_sample(ramp, coords);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            const double expect = 2.0 * coords.at(y, x, 0) + 3.0 * coords.at(y, x, 1) + 1.0;
            CHECK(res.values.at(y, x, 0) == doctest::Approx(expect).epsilon(1e-6));
            CHECK(res.valid.at(y, x) == 1.0f);
        }
}

TEST_CASE("bilinear_sample: boundary pixel centers are exact") {
    Rng rng(8);
    const Grid input = random_grid(3, 3, 1, rng);
    Grid coords(1, 1, 2);
    coords.at(0, 0, 0) = 2.0f; // last column/row
    coords.at(0, 0, 1) = 2.0f;
    const SampleResult res = bilinear_sample(input, coords);
    CHECK(res.valid.at(0, 0) == 1.0f);
    CHECK(res.values.at(0, 0, 0) == input.at(2, 2, 0));
}

TEST_CASE("grad_check: quadratic with analytic gradient passes") {
    Rng rng(9);
    const Grid at = random_grid(4, 4, 1, rng);
    Grid grad(4, 4, 1);
    for (std::size_t i = 0; i < at.size(); ++i)
        grad.data()[i] = 2.0f * at.data()[i];
    const auto f = [](const Grid &g) {
        double acc = 0;
        for (float v : g.data())
            acc += static_cast<double>(v) * v;
        return acc;
    };
    const GradCheckReport rep = grad_check(f, at, grad, 1e-3, 1e-4);
    CHECK(rep.passed);
    CHECK(rep.max_rel_deviation < 1e-4);
}

TEST_CASE("grad_check: L1 subgradient away from kinks") {
    Rng rng(10);
    Grid at = random_grid(4, 4, 1, rng);
    // All residuals well above 10x the probe step of 1e-3.
    for (float &v : at.data())
        v = v >= 0 ? v + 0.1f : v - 0.1f;
    Grid grad(4, 4, 1);
    for (std::size_t i = 0; i < at.size(); ++i)
        grad.data()[i] = at.data()[i] > 0 ? 1.0f : -1.0f;
    const auto f = [](const Grid &g) {
        double acc = 0;
        for (float v : g.data())
            acc += std::abs(static_cast<double>(v));
        return acc;
    };
    const GradCheckReport rep = grad_check(f, at, grad, 1e-3, 1e-4);
    CHECK(rep.passed);
}

TEST_CASE("grad_check: deliberately wrong gradient is flagged") {
    Rng rng(11);
    const Grid at = random_grid(3, 3, 1, rng);
    const Grid wrong = Grid::constant(3, 3, 1, 42.0f);
    const auto f = [](const Grid &g) {
        double acc = 0;
        for (float v : g.data())
            acc += static_cast<double>(v) * v;
        return acc;
    };
    const GradCheckReport rep = grad_check(f, at, wrong, 1e-3, 1e-4);
    CHECK_FALSE(rep.passed);
    CHECK(rep.max_rel_deviation > 1e-4);
}

TEST_CASE("grad_check: non-finite function value is an evaluation error") {
    const Grid at = Grid::constant(2, 2, 1, 1.0f);
    const Grid grad(2, 2, 1);
    const auto f = [](const Grid &) { return std::numeric_limits<double>::quiet_NaN(); };
    CHECK_THROWS_AS(grad_check(f, at, grad, 1e-3, 1e-4), EvalError);
}

TEST_CASE("Grid: invariants") {
    CHECK_THROWS_AS(Grid(0, 3, 1), ShapeError);
    CHECK_THROWS_AS(Grid(2, 2, 1, {1.0f, 2.0f, 3.0f}), ShapeError); // wrong length
    std::vector<float> bad = {1.0f, std::numeric_limits<float>::infinity(), 0.0f, 0.0f};
    CHECK_THROWS_AS(Grid(2, 2, 1, std::move(bad)), Error);
    CHECK_THROWS_AS(WeightMask(Grid::constant(2, 2, 1, 1.5f)), Error); // outside [0,1]
}
