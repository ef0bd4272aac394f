#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlcl/measure.hpp"
#include "nlcl/model.hpp"

namespace nlcl {

/// Right-hand-side discretizations of the quantile dynamics.
///   ParticleV  velocity from the one-sided kernel sum over indices k > i,
///              with V(0) evaluating to lambda (requires an ordered state)
///   ParticleU  the equivalent form through the continuous extension U and
///              the -m·lambda·(i+1) offset (defined for any state)
///   QuantileU  trapezoid collocation of the integral form with the exact
///              lambda·z_i term
enum class RhsMode { QuantileU, ParticleU, ParticleV };

std::string to_string(RhsMode mode);
RhsMode rhs_mode_from_string(const std::string& name);

struct Trajectory {
    ModelSpec model;
    RhsMode mode = RhsMode::ParticleV;
    QuantileGrid initial;                 // state at t = 0
    std::vector<QuantileGrid> snapshots;  // recorded states, times strictly increasing
    double dt = 0.0;                      // base step used
    std::map<std::string, double> meta;
};

struct VelocityFieldSample {
    std::vector<double> positions;
    std::vector<double> velocities;
};

/// Velocities of all M+1 values of `state`. O(M^2) in general; O(M) for the
/// indicator kernel. ParticleV throws OrderViolation on decreasing states.
std::vector<double> rhs(const QuantileGrid& state, const ModelSpec& model, RhsMode mode);

struct IntegrateOptions {
    double horizon = 0.0;               // T > 0
    std::optional<double> dt;           // empty = auto step
    std::vector<double> snapshot_times; // sorted, within [0, T]; empty = {T}
};

/// Auto step: min(T/64, 0.1/(lip_v·(lip_V + lambda) + b·lambda)).
double auto_dt(const ModelSpec& model, double horizon);

/// Classical fixed-step RK4. Steps land exactly on every requested snapshot
/// time (the last step before a snapshot is shortened). Throws StepRejected
/// if a step leaves the state decreasing beyond 1e-9·(span+1).
Trajectory integrate(const QuantileGrid& initial, const ModelSpec& model, RhsMode mode,
                     const IntegrateOptions& opts);

/// Eulerian velocity field of the reconstructed density at the query
/// positions: v(conv - lambda·F) with the convolution of U against the
/// piecewise density evaluated exactly for piecewise-linear kernels and by
/// midpoint quadrature with 4 nodes per piece otherwise. Requires a strictly
/// increasing state.
VelocityFieldSample velocity_field(const QuantileGrid& state, const ModelSpec& model,
                                   std::vector<double> query);

/// Max absolute componentwise deviation between the ParticleU and ParticleV
/// right-hand sides, both evaluated raw (no order check, no clamping).
double equivalence_check(const QuantileGrid& state, const ModelSpec& model);

}  // namespace nlcl
