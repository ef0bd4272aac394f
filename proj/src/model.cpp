#include "nlcl/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlcl {

namespace {

constexpr double kDegenerateL = 1e-14;

VelocitySpec linear_velocity() {
    VelocitySpec v;
    v.eval = [](double r) { return 1.0 - r; };
    v.lip_v = 1.0;
    v.b = 1.0;
    return v;
}

// U is V extended by the jump value on the positive half-line.
std::function<double(double)> extend_kernel(std::function<double(double)> V, double lambda) {
    return [V = std::move(V), lambda](double x) { return x > 0.0 ? lambda : V(x); };
}

}  // namespace

ModelSpec builtin_model(const std::string& name) {
    ModelSpec m;
    m.name = name;
    m.velocity = linear_velocity();
    KernelSpec& k = m.kernel;
    if (name == "burgers_indicator") {
        k.eval_V = [](double x) { return x <= 0.0 ? 1.0 : 0.0; };
        k.lambda = 1.0;
        k.lip_V = 0.0;
        k.monotone_positive = true;  // constant 1 on the support
        k.indicator = true;
        k.piecewise_linear = true;   // U is constant
        k.linear_breaks = {};
    } else if (name == "exponential") {
        k.eval_V = [](double x) { return x <= 0.0 ? std::exp(x) : 0.0; };
        k.lambda = 1.0;
        k.lip_V = 1.0;
        k.monotone_positive = true;
        k.indicator = false;
        k.piecewise_linear = false;
    } else if (name == "ramp") {
        k.eval_V = [](double x) { return x <= 0.0 ? std::max(0.0, 1.0 + x) : 0.0; };
        k.lambda = 1.0;
        k.lip_V = 1.0;
        k.monotone_positive = false;  // vanishes below -1
        k.indicator = false;
        k.piecewise_linear = true;
        k.linear_breaks = {-1.0, 0.0};
    } else {
        throw std::invalid_argument("unknown model \"" + name + "\"");
    }
    k.eval_U = extend_kernel(k.eval_V, k.lambda);
    return m;
}

ModelSpec table_model(const KernelTable& table, std::optional<double> lambda_override,
                      std::optional<double> lip_V_override) {
    if (table.x.size() < 2 || table.x.size() != table.y.size())
        throw std::invalid_argument("kernel table needs matching breakpoints/values, >= 2 entries");
    if (!std::is_sorted(table.x.begin(), table.x.end()))
        throw std::invalid_argument("kernel table breakpoints must be sorted");
    if (table.x.back() != 0.0)
        throw std::invalid_argument("kernel table must end at x = 0");

    double max_slope = 0.0;
    for (std::size_t i = 1; i < table.x.size(); ++i) {
        const double dx = table.x[i] - table.x[i - 1];
        if (!(dx > 0.0)) throw std::invalid_argument("kernel table breakpoints must be distinct");
        max_slope = std::max(max_slope, std::abs(table.y[i] - table.y[i - 1]) / dx);
    }

    const double lambda = lambda_override.value_or(table.y.back());
    if (std::abs(lambda - table.y.back()) > 1e-12)
        throw std::invalid_argument("declared lambda disagrees with kernel table value at 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("kernel jump lambda must be > 0");
    const double lip_V = lip_V_override.value_or(max_slope);
    if (lip_V + 1e-12 < max_slope)
        throw std::invalid_argument("declared lip_V is below the table's maximum slope");

    bool monotone_positive = table.y.front() > 0.0;
    for (std::size_t i = 1; i < table.y.size(); ++i)
        if (table.y[i] < table.y[i - 1] || table.y[i] <= 0.0) monotone_positive = false;

    ModelSpec m;
    m.name = "table";
    m.velocity = linear_velocity();
    KernelSpec& k = m.kernel;
    auto xs = table.x;
    auto ys = table.y;
    k.eval_V = [xs, ys](double x) {
        if (x > 0.0) return 0.0;
        if (x <= xs.front()) return ys.front();
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t j = static_cast<std::size_t>(it - xs.begin());
        const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return ys[j - 1] + (ys[j] - ys[j - 1]) * w;
    };
    k.lambda = lambda;
    k.lip_V = lip_V;
    k.monotone_positive = monotone_positive;
    k.indicator = false;
    k.piecewise_linear = true;
    k.linear_breaks = table.x;
    k.eval_U = extend_kernel(k.eval_V, k.lambda);
    check_kernel_spec(k);
    return m;
}

double stability_constant(double p, const ModelSpec& m) {
    if (std::isnan(p) || p < 1.0) throw std::invalid_argument("order must be >= 1");
    const double prod = m.velocity.lip_v * m.kernel.lip_V;
    if (std::isinf(p)) return 2.0 * prod;
    return std::pow(2.0, (p + 1.0) / p) * prod;
}

double smoothing_bound(const ModelSpec& m, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("smoothing bound needs t > 0");
    const double L = m.velocity.lip_v * m.kernel.lip_V;
    const double bl = m.velocity.b * m.kernel.lambda;
    if (L < kDegenerateL) return 1.0 / (bl * t);
    return L / (bl * (-std::expm1(-L * t)));
}

double discrete_smoothing_bound(const ModelSpec& m, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("smoothing bound needs t > 0");
    const double L = m.velocity.lip_v * m.kernel.lip_V;
    const double bl = m.velocity.b * m.kernel.lambda;
    if (L < kDegenerateL) return 1.0 / (bl * t);
    return 2.0 * L / (bl * (-std::expm1(-2.0 * L * t)));
}

double gap_bound(const ModelSpec& m, std::size_t particle_count, double t) {
    if (particle_count < 1) throw std::invalid_argument("particle count must be >= 1");
    if (t < 0.0) throw std::invalid_argument("gap bound needs t >= 0");
    const double L = m.velocity.lip_v * m.kernel.lip_V;
    const double bl = m.velocity.b * m.kernel.lambda;
    const double mesh = 1.0 / static_cast<double>(particle_count);
    if (L < kDegenerateL) return bl * t * mesh;
    return bl * mesh / (2.0 * L) * (-std::expm1(-2.0 * L * t));
}

double support_bound(const ModelSpec& m, double initial_width, double horizon) {
    if (initial_width < 0.0 || horizon < 0.0)
        throw std::invalid_argument("support bound needs non-negative width and horizon");
    return initial_width + m.velocity.lip_v * m.kernel.lambda * horizon;
}

double threshold_density(const ModelSpec& m) {
    return m.velocity.lip_v * m.kernel.lip_V / (m.velocity.b * m.kernel.lambda);
}

void check_velocity_spec(const VelocitySpec& v) {
    if (!v.eval) throw std::invalid_argument("velocity spec has no evaluator");
    if (!(v.b > 0.0)) throw std::invalid_argument("velocity constant b must be > 0");
    if (v.lip_v < 0.0) throw std::invalid_argument("lip_v must be >= 0");
    constexpr int n = 64;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            const double r1 = 3.0 * i / n;
            const double r2 = 3.0 * j / n;
            const double dv = v.eval(r2) - v.eval(r1);
            if (dv > -v.b * (r2 - r1) + 1e-12)
                throw std::invalid_argument("velocity map violates the declared decrease constant");
            if (std::abs(dv) > v.lip_v * (r2 - r1) + 1e-12)
                throw std::invalid_argument("velocity map violates the declared Lipschitz constant");
        }
    }
}

void check_kernel_spec(const KernelSpec& k) {
    if (!k.eval_V || !k.eval_U) throw std::invalid_argument("kernel spec has no evaluator");
    if (!(k.lambda > 0.0)) throw std::invalid_argument("kernel jump lambda must be > 0");
    if (std::abs(k.eval_V(0.0) - k.lambda) > 1e-12)
        throw std::invalid_argument("kernel must evaluate to lambda at 0");
    constexpr int n = 256;
    double prev_x = -8.0, prev_y = k.eval_V(-8.0);
    for (int i = 1; i <= n; ++i) {
        const double x = -8.0 + 8.0 * i / n;
        const double y = k.eval_V(x);
        if (std::abs(y - prev_y) > k.lip_V * (x - prev_x) + 1e-12)
            throw std::invalid_argument("kernel violates the declared Lipschitz constant");
        prev_x = x;
        prev_y = y;
    }
    for (int i = 0; i <= 16; ++i) {
        const double x = 0.5 + i;
        if (k.eval_V(x) != 0.0) throw std::invalid_argument("kernel must vanish on (0, inf)");
        if (k.eval_U(x) != k.lambda)
            throw std::invalid_argument("kernel extension must equal lambda on (0, inf)");
    }
}

}  // namespace nlcl
