#include "nlcl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nlcl/errors.hpp"

namespace nlcl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bump_profile(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    return w * w * w;
}

double bump_profile_derivative(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    return -6.0 * u * w * w;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
// Legendre recurrence.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int k = 0; k < half; ++k) {
        double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 64; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[k] = -x;
        rule.nodes[n - 1 - k] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[k] = w;
        rule.weights[n - 1 - k] = w;
    }
    return rule;
}

struct SeriesPoint {
    double t, bound, observed;
};

// margin is min(observed - slack·bound) for lower bounds and
// min(slack·bound - observed) for upper bounds.
BoundReport make_report(std::string name, const std::vector<SeriesPoint>& series,
                        bool lower_bound, double slack, double tolerance) {
    BoundReport r;
    r.bound_name = std::move(name);
    r.slack_factor = slack;
    r.tolerance = tolerance;
    r.margin = kInf;
    for (const auto& pt : series) {
        r.times.push_back(pt.t);
        r.bound_values.push_back(pt.bound);
        r.observed_values.push_back(pt.observed);
        const double margin =
            lower_bound ? pt.observed - slack * pt.bound : slack * pt.bound - pt.observed;
        r.margin = std::min(r.margin, margin);
    }
    if (series.empty()) r.margin = 0.0;
    r.pass = r.margin >= -tolerance;
    return r;
}

}  // namespace

std::string to_json_string(const BoundReport& report) {
    nlohmann::ordered_json j;
    j["bound"] = report.bound_name;
    if (report.pass)
        j["pass"] = *report.pass;
    else
        j["pass"] = nullptr;
    j["margin"] = report.margin;
    j["tolerance"] = report.tolerance;
    j["slack_factor"] = report.slack_factor;
    if (!report.note.empty()) j["note"] = report.note;
    j["series"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        j["series"].push_back({{"t", report.times[k]},
                               {"bound", report.bound_values[k]},
                               {"observed", report.observed_values[k]}});
    }
    return j.dump();
}

double TestBump::value(double x, double t) const {
    return bump_profile((x - x0) / a) * bump_profile((t - t0) / s);
}

double TestBump::dt_partial(double x, double t) const {
    return bump_profile((x - x0) / a) * bump_profile_derivative((t - t0) / s) / s;
}

double TestBump::dx_partial(double x, double t) const {
    return bump_profile_derivative((x - x0) / a) / a * bump_profile((t - t0) / s);
}

BoundReport check_gap(const Trajectory& traj) {
    std::vector<SeriesPoint> series;
    const std::size_t N = traj.initial.intervals();
    for (const auto& snap : traj.snapshots)
        series.push_back({snap.time, gap_bound(traj.model, N, snap.time), snap.min_gap()});
    return make_report("gap", series, /*lower_bound=*/true, 0.9, 0.0);
}

BoundReport check_smoothing(const Trajectory& traj) {
    std::vector<SeriesPoint> series;
    for (const auto& snap : traj.snapshots) {
        if (!(snap.time > 0.0)) continue;
        const double gap = snap.min_gap();
        const double observed = gap > 0.0 ? snap.mesh() / gap : kInf;
        series.push_back({snap.time, discrete_smoothing_bound(traj.model, snap.time), observed});
    }
    return make_report("smoothing", series, /*lower_bound=*/false, 1.01, 0.0);
}

BoundReport check_max_principle(const Trajectory& traj, double initial_sup_density) {
    if (!traj.model.kernel.monotone_positive) {
        BoundReport r;
        r.bound_name = "max_principle";
        r.note = "kernel is not monotone positive";
        return r;
    }
    if (!(initial_sup_density > 0.0) || std::isinf(initial_sup_density)) {
        BoundReport r;
        r.bound_name = "max_principle";
        r.note = "initial datum has no finite sup density";
        return r;
    }
    std::vector<SeriesPoint> series;
    const double bound = traj.initial.mesh() / initial_sup_density;
    for (const auto& snap : traj.snapshots)
        series.push_back({snap.time, bound, snap.min_gap()});
    return make_report("max_principle", series, /*lower_bound=*/true, 0.999, 0.0);
}

BoundReport check_support(const Trajectory& traj) {
    std::vector<SeriesPoint> series;
    const double width0 = traj.initial.span();
    for (const auto& snap : traj.snapshots)
        series.push_back({snap.time, support_bound(traj.model, width0, snap.time), snap.span()});
    return make_report("support", series, /*lower_bound=*/false, 1.0, 1e-9);
}

BoundReport check_stability(const Trajectory& a, const Trajectory& b, double p) {
    if (a.model.name != b.model.name || a.mode != b.mode)
        throw std::invalid_argument("stability check needs matching model and mode");
    if (a.snapshots.size() != b.snapshots.size() ||
        a.initial.intervals() != b.initial.intervals())
        throw std::invalid_argument("stability check needs matching snapshot grids");
    for (std::size_t k = 0; k < a.snapshots.size(); ++k)
        if (std::abs(a.snapshots[k].time - b.snapshots[k].time) > 1e-12)
            throw std::invalid_argument("stability check needs matching snapshot times");

    const double C = stability_constant(p, a.model);
    const double w0 = wasserstein_grids(p, a.initial, b.initial);
    std::vector<SeriesPoint> series;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        const double t = a.snapshots[k].time;
        const double wt = wasserstein_grids(p, a.snapshots[k], b.snapshots[k]);
        series.push_back({t, std::exp(C * t) * w0, wt});
    }
    return make_report("stability", series, /*lower_bound=*/false, 1.01, 0.0);
}

double weak_residual(const Trajectory& traj, const std::vector<TestBump>& bumps,
                     VelocitySource source, int gauss_points) {
    if (traj.snapshots.size() < 2)
        throw std::invalid_argument("weak residual needs at least 2 snapshots");
    if (gauss_points < 2) throw std::invalid_argument("need at least 2 Gauss points");
    const GaussRule rule = gauss_legendre(gauss_points);
    const std::size_t M = traj.initial.intervals();
    const double mesh = traj.initial.mesh();

    double max_residual = 0.0;
    for (const auto& bump : bumps) {
        const double t_first = traj.snapshots.front().time;
        const double t_last = traj.snapshots.back().time;
        if (bump.t0 + bump.s <= t_first || bump.t0 - bump.s >= t_last) continue;

        std::size_t inside = 0;
        for (const auto& snap : traj.snapshots)
            if (std::abs(snap.time - bump.t0) < bump.s) ++inside;
        if (inside < 8)
            throw ResolutionError("bump needs at least 8 snapshots inside its time support");

        std::vector<double> integrand(traj.snapshots.size(), 0.0);
        for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
            const QuantileGrid& snap = traj.snapshots[k];
            const double t = snap.time;
            if (std::abs(t - bump.t0) >= bump.s) continue;

            // per-piece velocities
            std::vector<double> piece_velocity;
            std::vector<double> query;
            if (source == VelocitySource::Particle) {
                piece_velocity = rhs(snap, traj.model, traj.mode);
            } else {
                for (std::size_t i = 0; i < M; ++i) {
                    const double xl = std::max(snap.values[i], bump.x0 - bump.a);
                    const double xr = std::min(snap.values[i + 1], bump.x0 + bump.a);
                    if (xr <= xl) continue;
                    for (int g = 0; g < gauss_points; ++g)
                        query.push_back(0.5 * (xl + xr) + 0.5 * (xr - xl) * rule.nodes[g]);
                }
            }
            std::vector<double> field;
            std::size_t qcursor = 0;
            if (source == VelocitySource::Reconstruction)
                field = velocity_field(snap, traj.model, query).velocities;

            double acc = 0.0;
            for (std::size_t i = 0; i < M; ++i) {
                const double xl = std::max(snap.values[i], bump.x0 - bump.a);
                const double xr = std::min(snap.values[i + 1], bump.x0 + bump.a);
                if (xr <= xl) continue;
                const double gap = snap.values[i + 1] - snap.values[i];
                if (!(gap > 0.0))
                    throw DegenerateGap(i, "weak residual needs positive gaps inside the bump");
                const double rho = mesh / gap;
                const double mid = 0.5 * (xl + xr);
                const double half = 0.5 * (xr - xl);
                double piece = 0.0;
                for (int g = 0; g < gauss_points; ++g) {
                    const double x = mid + half * rule.nodes[g];
                    const double G = source == VelocitySource::Particle
                                         ? piece_velocity[i]
                                         : field[qcursor++];
                    piece += rule.weights[g] *
                             (bump.dt_partial(x, t) + G * bump.dx_partial(x, t));
                }
                acc += rho * piece * half;
            }
            integrand[k] = acc;
        }

        double residual = 0.0;
        for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
            const double dt = traj.snapshots[k + 1].time - traj.snapshots[k].time;
            residual += 0.5 * (integrand[k] + integrand[k + 1]) * dt;
        }
        max_residual = std::max(max_residual, std::abs(residual));
    }
    return max_residual;
}

std::vector<ConvergenceRow> convergence_study(const ModelSpec& model, const Measure1D& initial,
                                              const std::vector<std::size_t>& Ns, double p,
                                              double horizon) {
    if (Ns.empty()) throw std::invalid_argument("need at least one grid size");
    if (!std::is_sorted(Ns.begin(), Ns.end()))
        throw std::invalid_argument("grid sizes must be ascending");

    IntegrateOptions opts;
    opts.horizon = horizon;
    opts.snapshot_times = {horizon};
    auto run = [&](std::size_t N) {
        const Trajectory traj =
            integrate(quantile_of(initial, N), model, RhsMode::ParticleV, opts);
        return traj.snapshots.back();
    };

    const QuantileGrid reference = run(2 * Ns.back());
    std::vector<ConvergenceRow> rows;
    rows.reserve(Ns.size());
    for (const std::size_t N : Ns)
        rows.push_back({N, wasserstein_grids(p, run(N), reference)});
    return rows;
}

}  // namespace nlcl
