#include "colonmap/arrayops.hpp"

#include <cmath>
#include <string>

namespace colonmap {

ConvKernel::ConvKernel(int out_ch, int in_ch, int kh_, int kw_)
    : out_channels(out_ch), in_channels(in_ch), kh(kh_), kw(kw_),
      weights(static_cast<std::size_t>(out_ch) * in_ch * kh_ * kw_, 0.0f),
      bias(out_ch, 0.0f) {
    validate();
}

ConvKernel ConvKernel::identity_1x1(int channels) {
    ConvKernel k(channels, channels, 1, 1);
    for (int c = 0; c < channels; ++c)
        k.w(c, c, 0, 0) = 1.0f;
    return k;
}

void ConvKernel::validate() const {
    if (out_channels <= 0 || in_channels <= 0 || kh <= 0 || kw <= 0)
        throw ShapeError("ConvKernel: non-positive dimension");
    if (kh % 2 == 0 || kw % 2 == 0)
        throw ShapeError("ConvKernel: kernel dims must be odd, got " + std::to_string(kh) +
                         "x" + std::to_string(kw));
    if (weights.size() != static_cast<std::size_t>(out_channels) * in_channels * kh * kw)
        throw ShapeError("ConvKernel: weight count does not match dims");
    if (!bias.empty() && bias.size() != static_cast<std::size_t>(out_channels))
        throw ShapeError("ConvKernel: bias count does not match out_channels");
}

Grid conv2d(const Grid &input, const ConvKernel &kernel, int stride, int padding) {
    kernel.validate();
    if (kernel.in_channels != input.channels())
        throw ShapeError("conv2d: kernel expects " + std::to_string(kernel.in_channels) +
                         " input channels, grid has " + std::to_string(input.channels()));
    if (stride <= 0)
        throw ShapeError("conv2d: stride must be positive");
    if (padding < 0)
        throw ShapeError("conv2d: padding must be non-negative");

    const int oh = (input.height() + 2 * padding - kernel.kh) / stride + 1;
    const int ow = (input.width() + 2 * padding - kernel.kw) / stride + 1;
    if (oh <= 0 || ow <= 0)
        throw ShapeError("conv2d: kernel larger than padded input");

    Grid out(oh, ow, kernel.out_channels);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const int y0 = oy * stride - padding;
            const int x0 = ox * stride - padding;
            for (int oc = 0; oc < kernel.out_channels; ++oc) {
                double acc = kernel.bias.empty() ? 0.0 : kernel.bias[oc];
                for (int ic = 0; ic < kernel.in_channels; ++ic) {
                    for (int ky = 0; ky < kernel.kh; ++ky) {
                        const int y = y0 + ky;
                        if (y < 0 || y >= input.height())
                            continue;
                        for (int kx = 0; kx < kernel.kw; ++kx) {
                            const int x = x0 + kx;
                            if (x < 0 || x >= input.width())
                                continue;
                            acc += static_cast<double>(input.at(y, x, ic)) *
                                   kernel.w(oc, ic, ky, kx);
                        }
                    }
                }
                out.at(oy, ox, oc) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Grid avg_pool(const Grid &input, int window, int stride) {
    if (window <= 0 || stride <= 0)
        throw ShapeError("avg_pool: window and stride must be positive");
    if (window > input.height() || window > input.width())
        throw ShapeError("avg_pool: window " + std::to_string(window) + " larger than input " +
                         std::to_string(input.height()) + "x" + std::to_string(input.width()));

    const int oh = (input.height() - window) / stride + 1;
    const int ow = (input.width() - window) / stride + 1;
    const double inv = 1.0 / (static_cast<double>(window) * window);

    Grid out(oh, ow, input.channels());
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int c = 0; c < input.channels(); ++c) {
                double acc = 0.0;
                for (int ky = 0; ky < window; ++ky)
                    for (int kx = 0; kx < window; ++kx)
                        acc += input.at(oy * stride + ky, ox * stride + kx, c);
                out.at(oy, ox, c) = static_cast<float>(acc * inv);
            }
        }
    }
    return out;
}

bool bilinear_at(const Grid &input, double x, double y, float *out) {
    const int w = input.width();
    const int h = input.height();
    const int ch = input.channels();
    if (!(x >= 0.0 && x <= w - 1 && y >= 0.0 && y <= h - 1)) {
        for (int c = 0; c < ch; ++c)
            out[c] = 0.0f;
        return false;
    }
    // Base corner clamped so x0+1/y0+1 stay in range; the fraction then
    // lands in [0, 1] and x == W-1 resolves to the last column exactly.
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    if (x0 > w - 2)
        x0 = w - 2;
    if (y0 > h - 2)
        y0 = h - 2;
    if (x0 < 0)
        x0 = 0; // only when w == 1
    if (y0 < 0)
        y0 = 0;
    const int x1 = (w == 1) ? 0 : x0 + 1;
    const int y1 = (h == 1) ? 0 : y0 + 1;
    const double fx = x - x0;
    const double fy = y - y0;
    const double w00 = (1.0 - fx) * (1.0 - fy);
    const double w01 = fx * (1.0 - fy);
    const double w10 = (1.0 - fx) * fy;
    const double w11 = fx * fy;
    for (int c = 0; c < ch; ++c) {
        const double v = w00 * input.at(y0, x0, c) + w01 * input.at(y0, x1, c) +
                         w10 * input.at(y1, x0, c) + w11 * input.at(y1, x1, c);
        out[c] = static_cast<float>(v);
    }
    return true;
}

SampleResult bilinear_sample(const Grid &input, const Grid &coords) {
    coords.require_channels(2, "bilinear_sample coords");

    Grid values(coords.height(), coords.width(), input.channels());
    Grid mask(coords.height(), coords.width(), 1);
    std::vector<float> px(input.channels());
    for (int y = 0; y < coords.height(); ++y) {
        for (int x = 0; x < coords.width(); ++x) {
            const bool ok =
                bilinear_at(input, coords.at(y, x, 0), coords.at(y, x, 1), px.data());
            mask.at(y, x, 0) = ok ? 1.0f : 0.0f;
            for (int c = 0; c < input.channels(); ++c)
                values.at(y, x, c) = px[c];
        }
    }
    return {std::move(values), WeightMask(std::move(mask))};
}

} // namespace colonmap
