#include "nlcl/oracle.hpp"

#include <stdexcept>

namespace nlcl::oracle {

RarefactionValue rarefaction(double x, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("rarefaction needs t > 0");
    RarefactionValue out{};
    if (x < 0.0) {
        out.F = 0.0;
        out.density = 0.0;
    } else if (x < t) {
        out.F = x / t;
        out.density = 1.0 / t;
    } else {
        out.F = 1.0;
        out.density = x == t ? 1.0 / t : 0.0;  // density supported on [0, t]
    }
    return out;
}

double shock(double x, double t) { return x >= 0.5 * t ? 1.0 : 0.0; }

double RiemannSolution::F(double x, double t) const {
    return kind == RiemannKind::Rarefaction ? rarefaction(x, t).F : shock(x, t);
}

double RiemannSolution::density(double x, double t) const {
    if (kind == RiemannKind::Rarefaction) return rarefaction(x, t).density;
    return 0.0;  // the shock branch carries a point mass, not a density
}

Measure1D RiemannSolution::measure_at(double t) const {
    if (kind == RiemannKind::Rarefaction) {
        if (!(t > 0.0)) throw std::invalid_argument("rarefaction needs t > 0");
        return Measure1D::uniform(0.0, t);
    }
    return Measure1D::dirac(0.5 * t);
}

RiemannSolution riemann_solution(RiemannKind kind) { return RiemannSolution{kind}; }

QuantileGrid exact_indicator_particles(const QuantileGrid& initial, double t) {
    const std::size_t N = initial.intervals();
    QuantileGrid out = initial;
    out.time = initial.time + t;
    for (std::size_t i = 0; i <= N; ++i) {
        const double speed = static_cast<double>(i) / static_cast<double>(N);
        out.values[i] = initial.values[i] + speed * t;
    }
    return out;
}

}  // namespace nlcl::oracle
