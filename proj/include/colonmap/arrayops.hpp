#pragma once

#include <vector>

#include "colonmap/grid.hpp"

namespace colonmap {

// Dense 4-D convolution weights, layout [out_ch][in_ch][ky][kx].
// Kernels are odd-sized. An empty bias means all zeros.
struct ConvKernel {
    int out_channels = 0;
    int in_channels = 0;
    int kh = 0;
    int kw = 0;
    std::vector<float> weights;
    std::vector<float> bias;

    ConvKernel() = default;
    ConvKernel(int out_ch, int in_ch, int kh_, int kw_);

    static ConvKernel identity_1x1(int channels);

    float &w(int oc, int ic, int ky, int kx) {
        return weights[((static_cast<std::size_t>(oc) * in_channels + ic) * kh + ky) * kw + kx];
    }
    float w(int oc, int ic, int ky, int kx) const {
        return weights[((static_cast<std::size_t>(oc) * in_channels + ic) * kh + ky) * kw + kx];
    }

    void validate() const;
};

// Cross-correlation with zero padding. Output spatial dims are
// floor((dim + 2*padding - k) / stride) + 1. Accumulation is in double,
// in fixed row-major order, so results are bit-reproducible.
Grid conv2d(const Grid &input, const ConvKernel &kernel, int stride = 1, int padding = 0);

// Windowed mean with no padding, each channel independently.
Grid avg_pool(const Grid &input, int window, int stride);

struct SampleResult {
    Grid values;
    WeightMask valid;
};

// Bilinear sampling of `input` at per-pixel (x, y) positions given in
// `coords` (2 channels). Integer coordinates address pixel centers. A sample
// is valid when (x, y) lies within the convex hull of pixel centers,
// i.e. x in [0, W-1] and y in [0, H-1]; invalid samples get value 0, mask 0.
SampleResult bilinear_sample(const Grid &input, const Grid &coords);

// Single bilinear lookup with the same convention. Returns false (and zeros
// `out`) when (x, y) is out of bounds. `out` must hold input.channels().
bool bilinear_at(const Grid &input, double x, double y, float *out);

} // namespace colonmap
