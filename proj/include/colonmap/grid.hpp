#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "colonmap/error.hpp"

namespace colonmap {

// Dense H x W x C array of float32, row-major and channel-interleaved:
// element (y, x, c) lives at ((y * width + x) * channels + c).
//
// Stored values are finite; invalid pixels are expressed through a paired
// WeightMask, never through NaN/Inf.
class Grid {
  public:
    Grid() = default;

    Grid(int height, int width, int channels)
        : height_(height), width_(width), channels_(channels),
          data_(check_dims(height, width, channels), 0.0f) {}

    Grid(int height, int width, int channels, std::vector<float> data)
        : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
        if (data_.size() != check_dims(height, width, channels))
            throw ShapeError("Grid: data length " + std::to_string(data_.size()) +
                             " does not match " + std::to_string(height) + "x" +
                             std::to_string(width) + "x" + std::to_string(channels));
        for (float v : data_)
            if (!std::isfinite(v))
                throw Error("Grid: non-finite value in initializer");
    }

    static Grid constant(int height, int width, int channels, float value) {
        Grid g(height, width, channels);
        for (float &v : g.data_)
            v = value;
        return g;
    }

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float &at(int y, int x, int c) {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    float at(int y, int x, int c) const {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }

    std::vector<float> &data() { return data_; }
    const std::vector<float> &data() const { return data_; }

    bool same_shape(const Grid &o) const {
        return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
    }

    void require_shape(int h, int w, int c, const char *what) const {
        if (height_ != h || width_ != w || channels_ != c)
            throw ShapeError(std::string(what) + ": expected " + std::to_string(h) + "x" +
                             std::to_string(w) + "x" + std::to_string(c) + ", got " +
                             std::to_string(height_) + "x" + std::to_string(width_) + "x" +
                             std::to_string(channels_));
    }

    void require_channels(int c, const char *what) const {
        if (channels_ != c)
            throw ShapeError(std::string(what) + ": expected " + std::to_string(c) +
                             " channels, got " + std::to_string(channels_));
    }

    void check_finite(const char *what) const {
        for (float v : data_)
            if (!std::isfinite(v))
                throw Error(std::string(what) + ": grid contains a non-finite value");
    }

  private:
    static std::size_t check_dims(int h, int w, int c) {
        if (h <= 0 || w <= 0 || c <= 0)
            throw ShapeError("Grid: dimensions must be positive, got " + std::to_string(h) +
                             "x" + std::to_string(w) + "x" + std::to_string(c));
        return static_cast<std::size_t>(h) * w * c;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

// Per-pixel validity/occlusion weights in [0, 1], one channel.
struct WeightMask {
    Grid grid;

    WeightMask() = default;

    explicit WeightMask(Grid g) : grid(std::move(g)) {
        grid.require_channels(1, "WeightMask");
        for (float v : grid.data())
            if (v < 0.0f || v > 1.0f)
                throw Error("WeightMask: value outside [0, 1]");
    }

    static WeightMask ones(int height, int width) {
        return WeightMask(Grid::constant(height, width, 1, 1.0f));
    }

    float at(int y, int x) const { return grid.at(y, x, 0); }
    float &at(int y, int x) { return grid.at(y, x, 0); }
    int height() const { return grid.height(); }
    int width() const { return grid.width(); }
};

} // namespace colonmap
