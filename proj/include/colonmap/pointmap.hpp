#pragma once

#include "colonmap/grid.hpp"

namespace colonmap {

// Frame label for grids whose interpretation depends on which camera frame
// they belong to. kUnknownFrame marks data without a meaningful label.
inline constexpr int kUnknownFrame = -1;

// Per-pixel 3D points. pm(y, x) is the scene point seen at pixel (x, y) of
// frame `source_frame`, expressed in the camera coordinates of frame
// `coord_frame`. A "self" point map has source_frame == coord_frame.
struct PointMap {
    Grid grid;
    int source_frame = kUnknownFrame;
    int coord_frame = kUnknownFrame;

    PointMap() = default;

    PointMap(Grid g, int source, int coord)
        : grid(std::move(g)), source_frame(source), coord_frame(coord) {
        grid.require_channels(3, "PointMap");
    }

    int height() const { return grid.height(); }
    int width() const { return grid.width(); }
};

// Dense pixel displacement. Lives on `to_frame`'s pixel grid: adding
// flow(p) to pixel p of frame `to_frame` gives the matching location on
// frame `from_frame`'s grid.
struct FlowField {
    Grid grid;
    int to_frame = kUnknownFrame;
    int from_frame = kUnknownFrame;

    FlowField() = default;

    FlowField(Grid g, int to, int from) : grid(std::move(g)), to_frame(to), from_frame(from) {
        grid.require_channels(2, "FlowField");
    }

    int height() const { return grid.height(); }
    int width() const { return grid.width(); }
};

// Per-pixel reliability weights. Values never drop below `floor`; the
// default floor of 1 matches backbones that parameterize confidence as
// 1 + exp(.), which keeps log(C) >= 0.
struct ConfidenceMap {
    Grid grid;
    double floor = 1.0;

    ConfidenceMap() = default;

    explicit ConfidenceMap(Grid g, double conf_floor = 1.0) : grid(std::move(g)), floor(conf_floor) {
        grid.require_channels(1, "ConfidenceMap");
        if (!(conf_floor > 0.0))
            throw Error("ConfidenceMap: floor must be positive");
        for (float v : grid.data())
            if (v < conf_floor)
                throw Error("ConfidenceMap: value below floor");
    }

    static ConfidenceMap uniform(int height, int width, float value = 1.0f,
                                 double conf_floor = 1.0) {
        return ConfidenceMap(Grid::constant(height, width, 1, value), conf_floor);
    }

    float at(int y, int x) const { return grid.at(y, x, 0); }
    int height() const { return grid.height(); }
    int width() const { return grid.width(); }
};

} // namespace colonmap
