#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlcl/dynamics.hpp"

namespace nlcl {

/// Result of checking one closed-form estimate along a trajectory. `margin`
/// is the smallest slack against the effective bound (the raw bound with the
/// check's multiplicative factor applied), signed so that >= -tolerance
/// passes. `pass` is empty when the check does not apply to the run.
struct BoundReport {
    std::string bound_name;
    std::vector<double> times;
    std::vector<double> bound_values;    // raw bound per time
    std::vector<double> observed_values;
    double margin = 0.0;
    double tolerance = 0.0;
    double slack_factor = 1.0;
    std::optional<bool> pass;
    std::string note;
};

std::string to_json_string(const BoundReport& report);

/// Compactly supported C^2 space-time test function
/// phi(x,t) = B((x-x0)/a)·B((t-t0)/s) with B(u) = (1-u^2)^3 on |u| < 1.
struct TestBump {
    double x0 = 0.0, t0 = 0.0;
    double a = 1.0, s = 1.0;

    double value(double x, double t) const;
    double dt_partial(double x, double t) const;
    double dx_partial(double x, double t) const;
};

/// Min gap >= 0.9·gap_bound per snapshot.
BoundReport check_gap(const Trajectory& traj);

/// Max reconstructed density (mesh/min-gap) <= 1.01·discrete smoothing bound
/// per positive-time snapshot.
BoundReport check_smoothing(const Trajectory& traj);

/// Min gap >= 0.999·mesh/R per snapshot. Applies only to monotone positive
/// kernels with absolutely continuous initial data of sup density R;
/// otherwise the report is marked not applicable (pass empty).
BoundReport check_max_principle(const Trajectory& traj, double initial_sup_density);

/// Width(t) <= width(0) + lip_v·lambda·t + 1e-9 per snapshot.
BoundReport check_support(const Trajectory& traj);

/// W_p between paired snapshots <= 1.01·e^{Ct}·W_p(initial) per snapshot.
/// Requires equal models, modes, grid sizes and snapshot times.
BoundReport check_stability(const Trajectory& a, const Trajectory& b, double p);

/// Which velocity enters the weak-form residual: the velocities particles
/// actually move with (piecewise constant per gap), or the Eulerian field of
/// the reconstructed density.
enum class VelocitySource { Particle, Reconstruction };

/// Max over bumps of |∫∫ rho ∂t(phi) + rho·G·∂x(phi)| along the trajectory:
/// Gauss-Legendre per density piece in x (exact for polynomial integrands),
/// trapezoid over snapshots in t. Each bump overlapping the recorded time
/// range must contain at least 8 snapshots, else ResolutionError.
double weak_residual(const Trajectory& traj, const std::vector<TestBump>& bumps,
                     VelocitySource source = VelocitySource::Particle,
                     int gauss_points = 16);

struct ConvergenceRow {
    std::size_t N = 0;
    double distance = 0.0;
};

/// W_p(T) between each run in Ns and a reference run at 2·max(Ns), all with
/// the same model/initial datum and auto step.
std::vector<ConvergenceRow> convergence_study(const ModelSpec& model, const Measure1D& initial,
                                              const std::vector<std::size_t>& Ns, double p,
                                              double horizon);

}  // namespace nlcl
