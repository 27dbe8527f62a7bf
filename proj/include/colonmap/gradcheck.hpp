#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "colonmap/grid.hpp"

namespace colonmap {

struct GradCheckReport {
    double max_rel_deviation = 0.0;
    std::size_t worst_index = 0;
    double worst_numeric = 0.0;
    double worst_analytic = 0.0;
    std::size_t checked = 0;
    double tolerance = 0.0;
    bool passed = false;
};

// Central-difference check of an analytic gradient, coordinate by coordinate.
// `indices` selects which flat grid coordinates to probe (empty = all).
// The actually-applied step is re-measured after float32 rounding so the
// quotient uses the exact perturbation. Deviation is relative:
// |fd - g| / max(|fd|, |g|), treated as 0 when both are below 1e-12.
GradCheckReport grad_check(const std::function<double(const Grid &)> &f, const Grid &at,
                           const Grid &analytic_grad, double step, double tolerance,
                           const std::vector<std::size_t> &indices = {});

} // namespace colonmap
