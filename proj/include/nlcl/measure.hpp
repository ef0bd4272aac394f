#pragma once

#include <cstddef>
#include <vector>

namespace nlcl {

struct Atom {
    double x = 0.0;
    double mass = 0.0;  // in (0, 1]
};

struct Piece {
    double left = 0.0;
    double right = 0.0;   // left < right
    double density = 0.0; // >= 0, constant on [left, right)
};

/// Probability measure on the line: point masses plus a piecewise-constant
/// absolutely continuous part. Construction sorts atoms, merges coincident
/// ones, validates that pieces are disjoint and that the total mass is 1
/// within 1e-12; violations throw std::invalid_argument.
class Measure1D {
public:
    Measure1D(std::vector<Atom> atoms, std::vector<Piece> pieces);

    static Measure1D dirac(double x);
    static Measure1D uniform(double left, double right);

    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<Piece>& pieces() const { return pieces_; }

    bool absolutely_continuous() const { return atoms_.empty(); }
    /// Largest piece density; only meaningful for absolutely continuous data.
    double sup_density() const;

    double support_min() const;
    double support_max() const;
    double support_width() const { return support_max() - support_min(); }

private:
    std::vector<Atom> atoms_;
    std::vector<Piece> pieces_;
};

/// Samples X(i/M), i = 0..M, of a monotone quantile function on the uniform
/// mass grid. Doubles as the particle state: value i is particle i and each
/// of the M gaps carries mass 1/M.
struct QuantileGrid {
    std::vector<double> values;  // M+1 entries
    double time = 0.0;

    std::size_t intervals() const { return values.size() - 1; }  // M
    double mesh() const { return 1.0 / static_cast<double>(intervals()); }
    double span() const { return values.back() - values.front(); }
    double min_gap() const;
    /// Non-decreasing within slack·max(1, |span|).
    bool non_decreasing(double slack = 1e-10) const;
    bool strictly_increasing() const;
};

/// Right-continuous CDF of a Measure1D. Between consecutive breakpoints the
/// function ramps linearly from values[j] to left_values[j+1]; atoms appear
/// as jumps left_values[j] -> values[j].
struct CdfView {
    std::vector<double> breakpoints;
    std::vector<double> values;       // F(b_j)
    std::vector<double> left_values;  // F(b_j^-)

    double operator()(double x) const;
};

/// Quantile samples X(i/M) using X(z) = inf{x : F(x) >= z}; X(0) is the left
/// edge of the support. Atoms produce repeated values.
QuantileGrid quantile_of(const Measure1D& mu, std::size_t grid_size);

CdfView cdf_of(const Measure1D& mu);

/// Piecewise-constant density with density (1/M)/(X_{i+1}-X_i) on
/// [X_i, X_{i+1}). Requires strictly increasing values; throws DegenerateGap
/// naming the offending index otherwise.
Measure1D reconstruct_density(const QuantileGrid& grid);

/// p-Wasserstein distance via the L^p([0,1]) distance of quantile functions.
/// Exact piecewise evaluation for p in {1, 2, inf}; midpoint quadrature with
/// 2^16 nodes for other finite p. p < 1 throws std::invalid_argument.
double wasserstein(double p, const Measure1D& a, const Measure1D& b);

/// Same metric between the measures represented by two grids, i.e. the ones
/// whose quantile functions are the piecewise-linear interpolants of the
/// samples. For strictly increasing grids this equals the distance between
/// the reconstructed densities.
double wasserstein_grids(double p, const QuantileGrid& a, const QuantileGrid& b);

}  // namespace nlcl
