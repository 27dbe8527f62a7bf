#include <doctest.h>

#include "colonmap/camera.hpp"
#include "test_support.hpp"

using namespace colonmap;
using test::random_grid;

namespace {

Grid random_depth(int h, int w, Rng &rng, double lo = 0.5, double hi = 3.0) {
    Grid d(h, w, 1);
    for (float &v : d.data())
        v = static_cast<float>(rng.uniform(lo, hi));
    return d;
}

// The exact objective the estimator minimizes, evaluated from the point map.
double focal_l1_objective(const PointMap &pm, double f) {
    const double cx = (pm.width() - 1) / 2.0;
    const double cy = (pm.height() - 1) / 2.0;
    double obj = 0;
    for (int y = 0; y < pm.height(); ++y)
        for (int x = 0; x < pm.width(); ++x) {
            const double z = pm.grid.at(y, x, 2);
            if (!(z > 1e-6))
                continue;
            const double qx = pm.grid.at(y, x, 0) / z;
            const double qy = pm.grid.at(y, x, 1) / z;
            if (qx * qx + qy * qy < 1e-24)
                continue;
            obj += std::hypot((x - cx) - f * qx, (y - cy) - f * qy);
        }
    return obj;
}

// 1-D golden-section search on the same objective.
double golden_section_focal(const PointMap &pm, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = focal_l1_objective(pm, c);
    double fd = focal_l1_objective(pm, d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = focal_l1_objective(pm, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = focal_l1_objective(pm, d);
        }
    }
    return (a + b) / 2.0;
}

} // namespace

TEST_CASE("project: principal-axis point lands on the principal point") {
    const Intrinsics k = Intrinsics::centered(100.0, 9, 7);
    Grid g(1, 1, 3, {0.0f, 0.0f, 1.0f});
    const ProjectionResult res = project(k, PointMap(g, 0, 0));
    CHECK(res.pixels.at(0, 0, 0) == doctest::Approx(k.cx));
    CHECK(res.pixels.at(0, 0, 1) == doctest::Approx(k.cy));
    CHECK(res.valid.at(0, 0) == 1.0f);
}

TEST_CASE("project: zero depth is masked, not an error") {
    const Intrinsics k = Intrinsics::centered(100.0, 4, 4);
    Grid g(1, 1, 3, {0.5f, 0.5f, 0.0f});
    const ProjectionResult res = project(k, PointMap(g, 0, 0));
    CHECK(res.valid.at(0, 0) == 0.0f);
}

TEST_CASE("project: random point map matches the pinhole formula oracle") {
    Rng rng(30);
    const Intrinsics k = Intrinsics::centered(300.0, 12, 10);
    const PointMap pm(random_grid(10, 12, 3, rng, 0.1f, 2.0f), 0, 0);
    const ProjectionResult res = project(k, pm);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 12; ++x) {
            const double px = pm.grid.at(y, x, 0);
            const double py = pm.grid.at(y, x, 1);
            const double pz = pm.grid.at(y, x, 2);
            CHECK(res.pixels.at(y, x, 0) ==
                  doctest::Approx(300.0 * px / pz + k.cx).epsilon(1e-6));
            CHECK(res.pixels.at(y, x, 1) ==
                  doctest::Approx(300.0 * py / pz + k.cy).epsilon(1e-6));
        }
}

TEST_CASE("unproject: constant depth at the principal point") {
    const Intrinsics k = Intrinsics::centered(100.0, 5, 5);
    const PointMap pm = unproject(k, Grid::constant(5, 5, 1, 1.0f));
    CHECK(pm.grid.at(2, 2, 0) == doctest::Approx(0.0));
    CHECK(pm.grid.at(2, 2, 1) == doctest::Approx(0.0));
    CHECK(pm.grid.at(2, 2, 2) == doctest::Approx(1.0));
}

TEST_CASE("unproject then project reproduces the pixel grid") {
    Rng rng(31);
    const Intrinsics k = Intrinsics::centered(300.0, 16, 12);
    const PointMap pm = unproject(k, random_depth(12, 16, rng));
    const ProjectionResult res = project(k, pm);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 16; ++x) {
            CHECK(res.valid.at(y, x) == 1.0f);
            CHECK(std::abs(res.pixels.at(y, x, 0) - x) < 1e-5);
            CHECK(std::abs(res.pixels.at(y, x, 1) - y) < 1e-5);
        }
}

TEST_CASE("estimate_focal_weiszfeld: exact recovery on a noise-free forward model") {
    Rng rng(32);
    const Intrinsics k = Intrinsics::centered(300.0, 32, 32);
    const PointMap pm = unproject(k, random_depth(32, 32, rng));
    const FocalEstimate est = estimate_focal_weiszfeld(pm);
    CHECK(std::abs(est.focal - 300.0) / 300.0 < 1e-6);
    CHECK(est.iterations <= 10);
}

TEST_CASE("estimate_focal_weiszfeld: noisy directions match the golden-section oracle") {
    Rng rng(33);
    const double f_true = 300.0;
    const Intrinsics k = Intrinsics::centered(f_true, 32, 32);
    PointMap pm = unproject(k, random_depth(32, 32, rng));
    // sigma = 0.01 direction noise: perturb x/y, leave z.
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const double z = pm.grid.at(y, x, 2);
            pm.grid.at(y, x, 0) += static_cast<float>(0.01 * z * rng.gaussian());
            pm.grid.at(y, x, 1) += static_cast<float>(0.01 * z * rng.gaussian());
        }
    const FocalEstimate est = estimate_focal_weiszfeld(pm, nullptr, 200, 1e-12);
    const double f_oracle = golden_section_focal(pm, 50.0, 1500.0, 1e-7);
    CHECK(std::abs(est.focal - f_oracle) / f_oracle < 1e-3);
}

TEST_CASE("estimate_focal_weiszfeld: principal-axis-only scene is degenerate") {
    Grid g(4, 4, 3);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            g.at(y, x, 2) = 1.0f; // x = y = 0 everywhere
    CHECK_THROWS_AS(estimate_focal_weiszfeld(PointMap(g, 0, 0)), DegenerateError);
}

TEST_CASE("estimate_focal_weiszfeld: scale invariance of the point map") {
    Rng rng(34);
    const Intrinsics k = Intrinsics::centered(250.0, 24, 24);
    PointMap pm = unproject(k, random_depth(24, 24, rng));
    for (int i = 0; i < 50; ++i) { // break the exact forward model a little
        const std::size_t j = rng.below(pm.grid.size());
        pm.grid.data()[j] += static_cast<float>(rng.uniform(-0.02, 0.02));
    }
    const FocalEstimate a = estimate_focal_weiszfeld(pm);
    PointMap scaled = pm;
    for (float &v : scaled.grid.data())
        v *= 4.0f; // power of two: exact in float32
    const FocalEstimate b = estimate_focal_weiszfeld(scaled);
    CHECK(std::abs(a.focal - b.focal) / a.focal < 1e-9);
}

TEST_CASE("estimate_focal_weiszfeld: objective is non-increasing across iterations") {
    Rng rng(35);
    const Intrinsics k = Intrinsics::centered(200.0, 24, 24);
    PointMap pm = unproject(k, random_depth(24, 24, rng));
    for (float &v : pm.grid.data())
        v += static_cast<float>(0.01 * rng.gaussian());
    const FocalEstimate est = estimate_focal_weiszfeld(pm, nullptr, 100, 1e-12);
    REQUIRE(est.objective_history.size() >= 2);
    for (std::size_t i = 1; i < est.objective_history.size(); ++i)
        CHECK(est.objective_history[i] <= est.objective_history[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("estimate_focal_weiszfeld: confidence weighting can reject corrupted pixels") {
    Rng rng(36);
    const double f_true = 400.0;
    const Intrinsics k = Intrinsics::centered(f_true, 24, 24);
    PointMap pm = unproject(k, random_depth(24, 24, rng));
    Grid conf = Grid::constant(24, 24, 1, 1.0f);
    for (int i = 0; i < 60; ++i) {
        const int y = static_cast<int>(rng.below(24));
        const int x = static_cast<int>(rng.below(24));
        pm.grid.at(y, x, 0) += static_cast<float>(rng.uniform(1.0, 4.0));
        conf.at(y, x, 0) = 1e-6f;
    }
    const ConfidenceMap cmap(conf, 1e-6);
    const FocalEstimate est = estimate_focal_weiszfeld(pm, &cmap);
    CHECK(std::abs(est.focal - f_true) / f_true < 1e-3);
}
