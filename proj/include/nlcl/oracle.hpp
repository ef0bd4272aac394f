#pragma once

#include "nlcl/measure.hpp"

namespace nlcl::oracle {

/// Closed-form references for the model v(r) = 1 - r with the indicator
/// kernel, where the CDF solves Burgers' equation. Two weak solutions emerge
/// from a unit point mass at the origin: the entropy rarefaction fan and a
/// non-entropy travelling shock.
enum class RiemannKind { Rarefaction, ShockNonEntropy };

struct RarefactionValue {
    double F;
    double density;
};

/// F(x,t) = clamp(x/t) and density (1/t)·1_{[0,t]}. Requires t > 0.
RarefactionValue rarefaction(double x, double t);

/// Non-entropy shock CDF: 0 for x < t/2, 1 for x >= t/2.
double shock(double x, double t);

struct RiemannSolution {
    RiemannKind kind;
    double F(double x, double t) const;
    double density(double x, double t) const;
    /// The solution at time t > 0 as a measure: uniform on [0, t] for the
    /// rarefaction, a point mass at t/2 for the shock.
    Measure1D measure_at(double t) const;
};

RiemannSolution riemann_solution(RiemannKind kind);

/// Exact particle trajectories for the indicator model: constant velocities
/// i/N, so x_i(t) = x_i(0) + (i/N)·t.
QuantileGrid exact_indicator_particles(const QuantileGrid& initial, double t);

}  // namespace nlcl::oracle
