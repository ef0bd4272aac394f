#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "nlcl/dynamics.hpp"
#include "nlcl/errors.hpp"
#include "nlcl/measure.hpp"
#include "nlcl/model.hpp"
#include "nlcl/oracle.hpp"
#include "nlcl/verify.hpp"

using namespace nlcl;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QuantileGrid delta_grid(std::size_t N, double x = 0.0) {
    QuantileGrid g;
    g.values.assign(N + 1, x);
    return g;
}

// Trajectory assembled from the closed-form fan; reconstructs to the exact
// rarefaction density at every time.
Trajectory fan_trajectory(std::size_t N, const std::vector<double>& times) {
    Trajectory traj;
    traj.model = builtin_model("burgers_indicator");
    traj.mode = RhsMode::ParticleV;
    traj.initial = delta_grid(N);
    traj.dt = 0.0;
    for (double t : times) {
        QuantileGrid snap = oracle::exact_indicator_particles(traj.initial, t);
        snap.time = t;
        traj.snapshots.push_back(snap);
    }
    return traj;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    return out;
}

Trajectory integrate_fan(std::size_t N, const std::vector<double>& times) {
    IntegrateOptions opts;
    opts.horizon = times.back();
    opts.snapshot_times = times;
    return integrate(delta_grid(N), builtin_model("burgers_indicator"), RhsMode::ParticleV, opts);
}

}  // namespace

TEST_CASE("bump partials match finite differences and vanish outside") {
    TestBump bump{0.5, 0.5, 0.3, 0.3};
    const double h = 1e-6;
    for (double x : {0.3, 0.45, 0.6, 0.79}) {
        for (double t : {0.25, 0.5, 0.7}) {
            const double fd_x = (bump.value(x + h, t) - bump.value(x - h, t)) / (2 * h);
            const double fd_t = (bump.value(x, t + h) - bump.value(x, t - h)) / (2 * h);
            CHECK(bump.dx_partial(x, t) == doctest::Approx(fd_x).epsilon(1e-6));
            CHECK(bump.dt_partial(x, t) == doctest::Approx(fd_t).epsilon(1e-6));
        }
    }
    for (double u : {0.8001, 1.5, -2.0}) {
        CHECK(bump.value(0.5 + u, 0.5) == 0.0);
        CHECK(bump.dx_partial(0.5 + u, 0.5) == 0.0);
        CHECK(bump.dt_partial(0.5, 0.5 + u) == 0.0);
    }
}

TEST_CASE("gap check is tight on the exact fan") {
    const Trajectory traj = integrate_fan(4, {0.0, 1.0});
    const BoundReport r = check_gap(traj);
    REQUIRE(r.pass.has_value());
    CHECK(*r.pass);
    // at t = 1 the observed min gap 1/4 equals the degenerate-limit bound
    CHECK(r.observed_values[1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(r.bound_values[1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(r.bound_values[0] == 0.0);  // t = 0 bound is zero: always passes
}

TEST_CASE("gap check flags a corrupted trajectory") {
    Trajectory traj = integrate_fan(8, {1.0});
    auto& values = traj.snapshots[0].values;
    values[3] -= 2.0 * (values[3] - values[2]);
    const BoundReport r = check_gap(traj);
    REQUIRE(r.pass.has_value());
    CHECK_FALSE(*r.pass);
    CHECK(r.margin < 0.0);
}

TEST_CASE("discrete smoothing check is tight on the exact fan") {
    const Trajectory traj = integrate_fan(16, {0.1, 1.0});
    const BoundReport r = check_smoothing(traj);
    REQUIRE(r.pass.has_value());
    CHECK(*r.pass);
    CHECK(r.observed_values[0] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(r.bound_values[0] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(r.observed_values[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.bound_values[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("smoothing and gap bounds hold along an integrated diffusive run") {
    IntegrateOptions opts;
    opts.horizon = 1.0;
    opts.snapshot_times = {0.1, 0.5, 1.0};
    const ModelSpec expo = builtin_model("exponential");
    const Trajectory traj = integrate(delta_grid(64), expo, RhsMode::ParticleV, opts);
    const BoundReport r = check_smoothing(traj);
    REQUIRE(r.pass.has_value());
    CHECK(*r.pass);
    const BoundReport g = check_gap(traj);
    REQUIRE(g.pass.has_value());
    CHECK(*g.pass);
    CHECK(g.margin > 0.0);
}

TEST_CASE("maximum principle applies to monotone positive kernels only") {
    IntegrateOptions opts;
    opts.horizon = 2.0;
    opts.snapshot_times = {0.0, 0.5, 1.0, 2.0};
    const QuantileGrid start = quantile_of(Measure1D::uniform(0.0, 1.0), 64);

    const Trajectory ok = integrate(start, builtin_model("exponential"), RhsMode::ParticleV, opts);
    const BoundReport r = check_max_principle(ok, 1.0);
    REQUIRE(r.pass.has_value());
    CHECK(*r.pass);
    // t = 0: uniform data sit exactly on the bound m/R
    CHECK(r.observed_values[0] == doctest::Approx(r.bound_values[0]).epsilon(1e-14));

    const Trajectory na = integrate(start, builtin_model("ramp"), RhsMode::ParticleV, opts);
    const BoundReport skip = check_max_principle(na, 1.0);
    CHECK_FALSE(skip.pass.has_value());
    CHECK_FALSE(skip.note.empty());

    const BoundReport atoms = check_max_principle(ok, kInf);
    CHECK_FALSE(atoms.pass.has_value());
}

TEST_CASE("support growth is exact for the fan and bounded for diffusive runs") {
    const Trajectory fan = integrate_fan(16, {0.5, 1.0});
    const BoundReport r = check_support(fan);
    REQUIRE(r.pass.has_value());
    CHECK(*r.pass);
    CHECK(r.observed_values[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.bound_values[0] == doctest::Approx(0.5).epsilon(1e-12));

    IntegrateOptions opts;
    opts.horizon = 2.0;
    opts.snapshot_times = {2.0};
    const Trajectory expo = integrate(quantile_of(Measure1D::uniform(0.0, 1.0), 32),
                                      builtin_model("exponential"), RhsMode::ParticleV, opts);
    const BoundReport r2 = check_support(expo);
    CHECK(*r2.pass);
    CHECK(r2.bound_values[0] == doctest::Approx(3.0));
    CHECK(r2.observed_values[0] <= 3.0 + 1e-9);
}

TEST_CASE("stability of identical runs has margin exactly zero") {
    const Trajectory traj = integrate_fan(8, {0.5, 1.0});
    for (double p : {1.0, 2.0, kInf}) {
        const BoundReport r = check_stability(traj, traj, p);
        CHECK(r.margin == 0.0);
        CHECK(*r.pass);
    }
}

TEST_CASE("translated fans keep their distance constant") {
    IntegrateOptions opts;
    opts.horizon = 1.0;
    opts.snapshot_times = {0.25, 0.5, 1.0};
    const ModelSpec ind = builtin_model("burgers_indicator");
    const Trajectory a = integrate(delta_grid(64, 0.0), ind, RhsMode::ParticleV, opts);
    const Trajectory b = integrate(delta_grid(64, 0.1), ind, RhsMode::ParticleV, opts);
    for (double p : {1.0, 2.0, kInf}) {
        const BoundReport r = check_stability(a, b, p);
        REQUIRE(*r.pass);
        for (double observed : r.observed_values)
            CHECK(std::abs(observed - 0.1) <= 1e-10);
    }
}

TEST_CASE("stability rejects mismatched runs") {
    const Trajectory a = integrate_fan(8, {0.5, 1.0});
    const Trajectory b = integrate_fan(8, {0.5, 0.9});
    CHECK_THROWS_AS(check_stability(a, b, 2.0), std::invalid_argument);
    const Trajectory c = integrate_fan(16, {0.5, 1.0});
    CHECK_THROWS_AS(check_stability(a, c, 2.0), std::invalid_argument);
}

TEST_CASE("weak residual of the exact solution is quadrature noise") {
    const TestBump bump{0.5, 0.5, 0.3, 0.3};
    const Trajectory traj = fan_trajectory(64, linspace(0.2, 0.8, 64));
    const double res = weak_residual(traj, {bump}, VelocitySource::Reconstruction);
    CHECK(res <= 1e-6);
}

TEST_CASE("weak residual vanishes for bumps off the support") {
    const Trajectory traj = fan_trajectory(32, linspace(0.2, 0.8, 64));
    const TestBump far_in_time{0.5, 5.0, 0.3, 0.3};
    CHECK(weak_residual(traj, {far_in_time}) == 0.0);
    const TestBump far_in_space{25.0, 0.5, 0.3, 0.3};
    CHECK(weak_residual(traj, {far_in_space}) == 0.0);
}

TEST_CASE("weak residual needs enough snapshots inside the bump") {
    const Trajectory traj = fan_trajectory(32, linspace(0.2, 0.8, 5));
    const TestBump bump{0.5, 0.5, 0.3, 0.3};
    CHECK_THROWS_AS(weak_residual(traj, {bump}), ResolutionError);
}

TEST_CASE("scheme-velocity residual shrinks linearly in the particle count") {
    const TestBump bump{0.5, 0.5, 0.3, 0.3};
    const auto times = linspace(0.2, 0.8, 64);
    std::vector<double> residuals;
    for (std::size_t N : {std::size_t{32}, std::size_t{64}, std::size_t{128}})
        residuals.push_back(weak_residual(fan_trajectory(N, times), {bump},
                                          VelocitySource::Particle));
    CHECK(residuals[0] > residuals[1]);
    CHECK(residuals[1] > residuals[2]);
    CHECK(residuals[2] <= residuals[0] / 2.0);
}

TEST_CASE("oracle residual drops by at least 3x when quadrature doubles") {
    const TestBump bump{0.5, 0.5, 0.25, 0.25};
    const Trajectory coarse = fan_trajectory(48, linspace(0.25, 0.75, 32));
    const Trajectory fine = fan_trajectory(48, linspace(0.25, 0.75, 64));
    const double r_coarse = weak_residual(coarse, {bump}, VelocitySource::Reconstruction, 8);
    const double r_fine = weak_residual(fine, {bump}, VelocitySource::Reconstruction, 16);
    CHECK(r_coarse / r_fine >= 3.0);
}

TEST_CASE("convergence study is flat where the scheme is exact") {
    const auto rows = convergence_study(builtin_model("burgers_indicator"),
                                        Measure1D::dirac(0.0), {8, 16, 32}, 1.0, 1.0);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) CHECK(row.distance <= 1e-12);
}

TEST_CASE("convergence study at a vanishing horizon sees the sampling gap") {
    const Measure1D mixed({{0.0, 0.5}}, {{1.0, 2.0, 0.5}});
    const auto rows = convergence_study(builtin_model("exponential"), mixed, {64}, 1.0, 1e-9);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].distance <= mixed.support_width() / 64.0);
}

TEST_CASE("convergence study distances shrink with refinement") {
    const Measure1D mixed({{0.0, 0.5}}, {{1.0, 2.0, 0.5}});
    const auto rows =
        convergence_study(builtin_model("exponential"), mixed, {16, 32, 64}, 1.0, 1.0);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].distance > rows[1].distance);
    CHECK(rows[1].distance > rows[2].distance);
}

TEST_CASE("bound reports serialize to json") {
    Trajectory traj = integrate_fan(8, {1.0});
    const std::string ok = to_json_string(check_gap(traj));
    CHECK(ok.find("\"bound\":\"gap\"") != std::string::npos);
    CHECK(ok.find("\"pass\":true") != std::string::npos);
    CHECK(ok.find("\"series\"") != std::string::npos);

    const BoundReport na = check_max_principle(traj, kInf);
    const std::string skipped = to_json_string(na);
    CHECK(skipped.find("\"pass\":null") != std::string::npos);
}
