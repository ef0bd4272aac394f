#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nlcl {

/// Velocity map v with its declared structural constants: Lipschitz constant
/// lip_v and strict-decrease constant b (v(r2)-v(r1) <= -b(r2-r1) for
/// r2 >= r1 >= 0).
struct VelocitySpec {
    std::function<double(double)> eval;
    double lip_v = 0.0;
    double b = 0.0;
};

/// Interaction kernel V supported on (-inf, 0] with a downward jump
/// lambda = V(0-) at the origin, together with its continuous extension U
/// (U = V on (-inf,0], U = lambda on (0,inf)). eval_V(0) evaluates to lambda.
struct KernelSpec {
    std::function<double(double)> eval_V;
    std::function<double(double)> eval_U;
    double lambda = 0.0;
    double lip_V = 0.0;  // Lipschitz constant of V on (-inf, 0]
    /// True iff V is non-decreasing and > 0 on (-inf, 0]; enables the
    /// maximum-principle checks.
    bool monotone_positive = false;
    /// True for the constant indicator kernel; enables O(M) right-hand sides.
    bool indicator = false;
    /// Kink positions (all <= 0) when U is piecewise linear; empty otherwise.
    /// Used for exact convolution against piecewise densities.
    std::vector<double> linear_breaks;
    bool piecewise_linear = false;
};

struct ModelSpec {
    std::string name;
    VelocitySpec velocity;
    KernelSpec kernel;
};

/// Breakpoint/value table for a piecewise-linear kernel on x <= 0. The last
/// breakpoint must be 0; below the first breakpoint the kernel extends as a
/// constant.
struct KernelTable {
    std::vector<double> x;
    std::vector<double> y;
};

/// Built-in models (velocity map is v(r) = 1 - r in each case):
///   burgers_indicator  V = 1_{(-inf,0]}      lambda=1, lip_V=0
///   exponential        V(x) = e^x on x<=0    lambda=1, lip_V=1
///   ramp               V(x) = max(0, 1+x)    lambda=1, lip_V=1
ModelSpec builtin_model(const std::string& name);

/// Piecewise-linear kernel model with v(r) = 1 - r. Declared lambda / lip_V
/// overrides are spot-verified against the table.
ModelSpec table_model(const KernelTable& table, std::optional<double> lambda_override,
                      std::optional<double> lip_V_override);

/// Lipschitz constant of the quantile-space operator: 2^((p+1)/p)·lip_v·lip_V
/// for finite p, 2·lip_v·lip_V for p = inf.
double stability_constant(double p, const ModelSpec& m);

/// Density bound L/(b·lambda·(1 - e^{-Lt})) with L = lip_v·lip_V; continuous
/// limit 1/(b·lambda·t) when L < 1e-14. t must be > 0.
double smoothing_bound(const ModelSpec& m, double t);

/// Per-gap density bound 2L/(b·lambda·(1 - e^{-2Lt})); same L -> 0 limit.
double discrete_smoothing_bound(const ModelSpec& m, double t);

/// Lower bound on consecutive particle gaps:
/// b·lambda·m_N/(2L)·(1 - e^{-2Lt}) with m_N = 1/N; limit b·lambda·t/N.
double gap_bound(const ModelSpec& m, std::size_t particle_count, double t);

/// initial_width + lip_v·lambda·horizon.
double support_bound(const ModelSpec& m, double initial_width, double horizon);

/// lip_v·lip_V/(b·lambda); degenerates to 0 for kernels with lip_V = 0.
double threshold_density(const ModelSpec& m);

/// Probe-sample the declared constants; throw std::invalid_argument if the
/// declarations are violated on the probe grid.
void check_velocity_spec(const VelocitySpec& v);
void check_kernel_spec(const KernelSpec& k);

}  // namespace nlcl
