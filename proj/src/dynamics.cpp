#include "nlcl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nlcl/errors.hpp"

namespace nlcl {

namespace {

double order_tolerance(const QuantileGrid& state) {
    return 1e-9 * (std::abs(state.span()) + 1.0);
}

void require_ordered(const QuantileGrid& state) {
    const double tol = order_tolerance(state);
    for (std::size_t i = 0; i + 1 < state.values.size(); ++i)
        if (state.values[i + 1] - state.values[i] < -tol)
            throw OrderViolation("decreasing state at index " + std::to_string(i));
}

// The O(M) suffix-count shortcuts are only valid on genuinely ordered states.
bool exactly_ordered(const QuantileGrid& state) {
    for (std::size_t i = 0; i + 1 < state.values.size(); ++i)
        if (state.values[i + 1] < state.values[i]) return false;
    return true;
}

// Sum of V(X_i - X_k) over k > i, k-ascending. Raw: no order check.
std::vector<double> rhs_particle_v_raw(const QuantileGrid& state, const ModelSpec& model) {
    const auto& X = state.values;
    const std::size_t M = state.intervals();
    const double m = state.mesh();
    const auto& v = model.velocity.eval;
    const KernelSpec& K = model.kernel;
    std::vector<double> out(M + 1);
    if (K.indicator && exactly_ordered(state)) {
        for (std::size_t i = 0; i <= M; ++i)
            out[i] = v(m * (K.lambda * static_cast<double>(M - i)));
        return out;
    }
    for (std::size_t i = 0; i <= M; ++i) {
        double acc = 0.0;
        for (std::size_t k = i + 1; k <= M; ++k) acc += K.eval_V(X[i] - X[k]);
        out[i] = v(m * acc);
    }
    return out;
}

// v(m·sum_k U(X_i - X_k) - m·lambda·(i+1)). The sum is split at k = i so the
// tail additions match the ParticleV order bit for bit on ordered states.
std::vector<double> rhs_particle_u(const QuantileGrid& state, const ModelSpec& model) {
    const auto& X = state.values;
    const std::size_t M = state.intervals();
    const double m = state.mesh();
    const auto& v = model.velocity.eval;
    const KernelSpec& K = model.kernel;
    std::vector<double> out(M + 1);
    if (K.indicator) {
        // U is globally constant here, so no ordering is needed
        const double total = K.lambda * static_cast<double>(M + 1);
        for (std::size_t i = 0; i <= M; ++i)
            out[i] = v(m * total - m * K.lambda * static_cast<double>(i + 1));
        return out;
    }
    for (std::size_t i = 0; i <= M; ++i) {
        double head = 0.0;
        for (std::size_t k = 0; k <= i; ++k) head += K.eval_U(X[i] - X[k]);
        double tail = 0.0;
        for (std::size_t k = i + 1; k <= M; ++k) tail += K.eval_U(X[i] - X[k]);
        out[i] = v(m * (head + tail) - m * K.lambda * static_cast<double>(i + 1));
    }
    return out;
}

// v(q_i - lambda·z_i) with q_i the trapezoid collocation of the U integral.
std::vector<double> rhs_quantile_u(const QuantileGrid& state, const ModelSpec& model) {
    const auto& X = state.values;
    const std::size_t M = state.intervals();
    const double m = state.mesh();
    const auto& v = model.velocity.eval;
    const KernelSpec& K = model.kernel;
    std::vector<double> out(M + 1);
    if (K.indicator) {
        const double q = K.lambda;  // weights sum to M, times m
        for (std::size_t i = 0; i <= M; ++i) {
            const double z = static_cast<double>(i) / static_cast<double>(M);
            out[i] = v(q - K.lambda * z);
        }
        return out;
    }
    for (std::size_t i = 0; i <= M; ++i) {
        double acc = 0.5 * K.eval_U(X[i] - X[0]);
        for (std::size_t k = 1; k < M; ++k) acc += K.eval_U(X[i] - X[k]);
        acc += 0.5 * K.eval_U(X[i] - X[M]);
        const double z = static_cast<double>(i) / static_cast<double>(M);
        out[i] = v(m * acc - K.lambda * z);
    }
    return out;
}

void rk4_step(QuantileGrid& state, const ModelSpec& model, RhsMode mode, double h) {
    const std::size_t n = state.values.size();
    const std::vector<double> k1 = rhs(state, model, mode);
    QuantileGrid stage = state;
    for (std::size_t i = 0; i < n; ++i) stage.values[i] = state.values[i] + 0.5 * h * k1[i];
    const std::vector<double> k2 = rhs(stage, model, mode);
    for (std::size_t i = 0; i < n; ++i) stage.values[i] = state.values[i] + 0.5 * h * k2[i];
    const std::vector<double> k3 = rhs(stage, model, mode);
    for (std::size_t i = 0; i < n; ++i) stage.values[i] = state.values[i] + h * k3[i];
    const std::vector<double> k4 = rhs(stage, model, mode);
    for (std::size_t i = 0; i < n; ++i)
        state.values[i] += h * ((k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0);
}

// Cumulative antiderivative of a piecewise-linear U: nodes at the kernel
// kinks plus 0, constant slopes outside.
struct LinearKernelIntegral {
    std::vector<double> nodes;   // kink positions, last one is 0
    std::vector<double> vals;    // U at nodes
    std::vector<double> areas;   // integral of U from nodes[0] to nodes[j]
    double lambda = 0.0;

    explicit LinearKernelIntegral(const KernelSpec& k) : lambda(k.lambda) {
        nodes = k.linear_breaks;
        if (nodes.empty() || nodes.back() != 0.0) nodes.push_back(0.0);
        vals.resize(nodes.size());
        for (std::size_t j = 0; j < nodes.size(); ++j) vals[j] = k.eval_U(nodes[j]);
        areas.assign(nodes.size(), 0.0);
        for (std::size_t j = 1; j < nodes.size(); ++j)
            areas[j] = areas[j - 1] +
                       0.5 * (vals[j] + vals[j - 1]) * (nodes[j] - nodes[j - 1]);
    }

    // integral of U from nodes[0] to u
    double primitive(double u) const {
        if (u <= nodes.front()) return (u - nodes.front()) * vals.front();
        if (u >= nodes.back()) return areas.back() + (u - nodes.back()) * lambda;
        auto it = std::upper_bound(nodes.begin(), nodes.end(), u);
        const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
        const double w = (u - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
        const double uu = vals[j - 1] + (vals[j] - vals[j - 1]) * w;
        return areas[j - 1] + 0.5 * (vals[j - 1] + uu) * (u - nodes[j - 1]);
    }

    double integral(double a, double b) const { return primitive(b) - primitive(a); }
};

}  // namespace

std::string to_string(RhsMode mode) {
    switch (mode) {
        case RhsMode::QuantileU: return "quantile_u";
        case RhsMode::ParticleU: return "particle_u";
        case RhsMode::ParticleV: return "particle_v";
    }
    return "?";
}

RhsMode rhs_mode_from_string(const std::string& name) {
    if (name == "quantile_u") return RhsMode::QuantileU;
    if (name == "particle_u") return RhsMode::ParticleU;
    if (name == "particle_v") return RhsMode::ParticleV;
    throw std::invalid_argument("unknown rhs mode \"" + name + "\"");
}

std::vector<double> rhs(const QuantileGrid& state, const ModelSpec& model, RhsMode mode) {
    if (state.values.size() < 2) throw std::invalid_argument("state needs at least 2 values");
    switch (mode) {
        case RhsMode::ParticleV:
            require_ordered(state);
            return rhs_particle_v_raw(state, model);
        case RhsMode::ParticleU:
            return rhs_particle_u(state, model);
        case RhsMode::QuantileU:
            return rhs_quantile_u(state, model);
    }
    throw std::invalid_argument("bad rhs mode");
}

double auto_dt(const ModelSpec& model, double horizon) {
    const double lv = model.velocity.lip_v;
    const double rate = lv * (model.kernel.lip_V + model.kernel.lambda) +
                        model.velocity.b * model.kernel.lambda;
    return std::min(horizon / 64.0, 0.1 / rate);
}

Trajectory integrate(const QuantileGrid& initial, const ModelSpec& model, RhsMode mode,
                     const IntegrateOptions& opts) {
    if (!(opts.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
    require_ordered(initial);

    std::vector<double> targets = opts.snapshot_times;
    if (targets.empty()) targets.push_back(opts.horizon);
    if (!std::is_sorted(targets.begin(), targets.end()))
        throw std::invalid_argument("snapshot times must be sorted");
    if (std::adjacent_find(targets.begin(), targets.end()) != targets.end())
        throw std::invalid_argument("snapshot times must be distinct");
    if (targets.front() < 0.0 || targets.back() > opts.horizon)
        throw std::invalid_argument("snapshot times must lie in [0, T]");

    const double dt = opts.dt ? *opts.dt : auto_dt(model, opts.horizon);
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");

    Trajectory traj;
    traj.model = model;
    traj.mode = mode;
    traj.initial = initial;
    traj.initial.time = 0.0;
    traj.dt = dt;
    traj.meta["N"] = static_cast<double>(initial.intervals());
    traj.meta["T"] = opts.horizon;
    traj.meta["dt"] = dt;

    QuantileGrid state = traj.initial;
    double t = 0.0;
    for (const double s : targets) {
        if (s == 0.0) {
            traj.snapshots.push_back(state);
            continue;
        }
        const double seg_start = t;
        const double remaining = s - seg_start;
        auto n_full = static_cast<std::size_t>(
            std::max(0.0, std::floor(remaining / dt - 1e-12)));
        auto step = [&](double h) {
            try {
                rk4_step(state, model, mode, h);
            } catch (const OrderViolation&) {
                throw StepRejected(dt, "order violated inside a step; halve dt");
            }
            const double tol = order_tolerance(state);  // 1e-9·(span+1)
            for (std::size_t i = 0; i + 1 < state.values.size(); ++i)
                if (state.values[i + 1] - state.values[i] < -tol)
                    throw StepRejected(dt, "order violated during integration; halve dt");
        };
        for (std::size_t j = 0; j < n_full; ++j) {
            step(dt);
            t = seg_start + static_cast<double>(j + 1) * dt;
        }
        const double h_last = s - t;
        if (h_last > 0.0) step(h_last);
        t = s;
        state.time = s;
        traj.snapshots.push_back(state);
    }
    return traj;
}

VelocityFieldSample velocity_field(const QuantileGrid& state, const ModelSpec& model,
                                   std::vector<double> query) {
    const std::size_t M = state.intervals();
    const double m = state.mesh();
    const auto& X = state.values;
    for (std::size_t i = 0; i < M; ++i)
        if (!(X[i + 1] - X[i] > 0.0))
            throw DegenerateGap(i, "velocity field needs a strictly increasing state");

    const KernelSpec& K = model.kernel;
    std::optional<LinearKernelIntegral> lin;
    if (K.piecewise_linear) lin.emplace(K);

    VelocityFieldSample out;
    out.positions = std::move(query);
    out.velocities.resize(out.positions.size());
    for (std::size_t q = 0; q < out.positions.size(); ++q) {
        const double x = out.positions[q];
        // F from the reconstructed piecewise density
        double F;
        if (x < X[0]) {
            F = 0.0;
        } else if (x >= X[M]) {
            F = 1.0;
        } else {
            const auto it = std::upper_bound(X.begin(), X.end(), x);
            const std::size_t i = static_cast<std::size_t>(it - X.begin()) - 1;
            F = (static_cast<double>(i) + (x - X[i]) / (X[i + 1] - X[i])) * m;
        }
        // convolution of U against the piecewise density
        double conv = 0.0;
        if (lin) {
            for (std::size_t i = 0; i < M; ++i) {
                const double gap = X[i + 1] - X[i];
                conv += (m / gap) * lin->integral(x - X[i + 1], x - X[i]);
            }
        } else {
            for (std::size_t i = 0; i < M; ++i) {
                const double gap = X[i + 1] - X[i];
                const double h = gap / 4.0;
                double acc = 0.0;
                for (int j = 0; j < 4; ++j)
                    acc += K.eval_U(x - (X[i] + (j + 0.5) * h));
                conv += (m / gap) * acc * h;
            }
        }
        out.velocities[q] = model.velocity.eval(conv - K.lambda * F);
    }
    return out;
}

double equivalence_check(const QuantileGrid& state, const ModelSpec& model) {
    const auto u = rhs_particle_u(state, model);
    const auto v = rhs_particle_v_raw(state, model);
    double dev = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dev = std::max(dev, std::abs(u[i] - v[i]));
    return dev;
}

}  // namespace nlcl
