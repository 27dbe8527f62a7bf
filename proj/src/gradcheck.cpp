#include "colonmap/gradcheck.hpp"

#include <cmath>
#include <numeric>

namespace colonmap {

GradCheckReport grad_check(const std::function<double(const Grid &)> &f, const Grid &at,
                           const Grid &analytic_grad, double step, double tolerance,
                           const std::vector<std::size_t> &indices) {
    if (step <= 0.0)
        throw Error("grad_check: step must be positive");
    if (!at.same_shape(analytic_grad))
        throw ShapeError("grad_check: gradient shape does not match point");

    std::vector<std::size_t> idx = indices;
    if (idx.empty()) {
        idx.resize(at.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
    }

    GradCheckReport report;
    report.tolerance = tolerance;
    Grid probe = at;
    for (std::size_t i : idx) {
        const float orig = probe.data()[i];
        const float plus = static_cast<float>(static_cast<double>(orig) + step);
        const float minus = static_cast<float>(static_cast<double>(orig) - step);

        probe.data()[i] = plus;
        const double f_plus = f(probe);
        probe.data()[i] = minus;
        const double f_minus = f(probe);
        probe.data()[i] = orig;

        if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
            throw EvalError("grad_check: function returned a non-finite value");

        const double h = static_cast<double>(plus) - static_cast<double>(minus);
        const double fd = (f_plus - f_minus) / h;
        const double g = analytic_grad.data()[i];

        const double denom = std::max(std::abs(fd), std::abs(g));
        const double dev = denom < 1e-12 ? 0.0 : std::abs(fd - g) / denom;
        if (dev >= report.max_rel_deviation) {
            report.max_rel_deviation = dev;
            report.worst_index = i;
            report.worst_numeric = fd;
            report.worst_analytic = g;
        }
        ++report.checked;
    }
    report.passed = report.max_rel_deviation <= tolerance;
    return report;
}

} // namespace colonmap
