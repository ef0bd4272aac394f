#include "nlcl/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nlcl/errors.hpp"

namespace nlcl {

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kGapFloor = 1e-300;  // guards true zero gaps only

double total_mass(const std::vector<Atom>& atoms, const std::vector<Piece>& pieces) {
    double m = 0.0;
    for (const auto& a : atoms) m += a.mass;
    for (const auto& p : pieces) m += p.density * (p.right - p.left);
    return m;
}

}  // namespace

Measure1D::Measure1D(std::vector<Atom> atoms, std::vector<Piece> pieces)
    : atoms_(std::move(atoms)), pieces_(std::move(pieces)) {
    for (const auto& a : atoms_) {
        if (!(a.mass > 0.0) || a.mass > 1.0 + kMassTol)
            throw std::invalid_argument("atom mass must lie in (0, 1]");
        if (!std::isfinite(a.x)) throw std::invalid_argument("atom position must be finite");
    }
    std::stable_sort(atoms_.begin(), atoms_.end(),
                     [](const Atom& a, const Atom& b) { return a.x < b.x; });
    // merge coincident atoms
    std::vector<Atom> merged;
    for (const auto& a : atoms_) {
        if (!merged.empty() && merged.back().x == a.x)
            merged.back().mass += a.mass;
        else
            merged.push_back(a);
    }
    atoms_ = std::move(merged);

    for (const auto& p : pieces_) {
        if (!(p.left < p.right)) throw std::invalid_argument("piece must have left < right");
        if (p.density < 0.0) throw std::invalid_argument("piece density must be >= 0");
        if (!std::isfinite(p.left) || !std::isfinite(p.right) || !std::isfinite(p.density))
            throw std::invalid_argument("piece fields must be finite");
    }
    std::stable_sort(pieces_.begin(), pieces_.end(),
                     [](const Piece& a, const Piece& b) { return a.left < b.left; });
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
        if (pieces_[i].left < pieces_[i - 1].right)
            throw std::invalid_argument("pieces must be disjoint");
    }

    const double m = total_mass(atoms_, pieces_);
    if (std::abs(m - 1.0) > kMassTol)
        throw std::invalid_argument("measure mass is " + std::to_string(m) + ", expected 1");
}

Measure1D Measure1D::dirac(double x) { return Measure1D({{x, 1.0}}, {}); }

Measure1D Measure1D::uniform(double left, double right) {
    return Measure1D({}, {{left, right, 1.0 / (right - left)}});
}

double Measure1D::sup_density() const {
    double d = 0.0;
    for (const auto& p : pieces_) d = std::max(d, p.density);
    return d;
}

double Measure1D::support_min() const {
    double lo = std::numeric_limits<double>::infinity();
    if (!atoms_.empty()) lo = atoms_.front().x;
    for (const auto& p : pieces_)
        if (p.density > 0.0) { lo = std::min(lo, p.left); break; }
    return lo;
}

double Measure1D::support_max() const {
    double hi = -std::numeric_limits<double>::infinity();
    if (!atoms_.empty()) hi = atoms_.back().x;
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it)
        if (it->density > 0.0) { hi = std::max(hi, it->right); break; }
    return hi;
}

double QuantileGrid::min_gap() const {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        g = std::min(g, values[i + 1] - values[i]);
    return g;
}

bool QuantileGrid::non_decreasing(double slack) const {
    const double tol = slack * std::max(1.0, std::abs(span()));
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        if (values[i + 1] - values[i] < -tol) return false;
    return true;
}

bool QuantileGrid::strictly_increasing() const { return min_gap() > 0.0; }

double CdfView::operator()(double x) const {
    if (breakpoints.empty()) return 0.0;
    if (x < breakpoints.front()) return 0.0;
    if (x >= breakpoints.back()) return values.back();
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
    if (x == breakpoints[j]) return values[j];
    const double h = breakpoints[j + 1] - breakpoints[j];
    const double w = (x - breakpoints[j]) / h;
    return values[j] + (left_values[j + 1] - values[j]) * w;
}

// ---------------------------------------------------------------------------
// Quantile segment representation.
//
// A measure's quantile function is a union of segments on the mass axis:
// X linear from x0 at z0 to x1 at z1. Atoms give flat segments, density
// pieces give ramps, and support gaps show up as jumps between consecutive
// segments. Segments tile [0,1] contiguously in z.
// ---------------------------------------------------------------------------

namespace {

struct QSeg {
    double z0, z1, x0, x1;
};

std::vector<QSeg> segments_of(const Measure1D& mu) {
    std::vector<double> breaks;
    for (const auto& a : mu.atoms()) breaks.push_back(a.x);
    for (const auto& p : mu.pieces()) {
        breaks.push_back(p.left);
        breaks.push_back(p.right);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::vector<QSeg> segs;
    double c = 0.0;
    std::size_t ai = 0, pi = 0;
    const auto& atoms = mu.atoms();
    const auto& pieces = mu.pieces();
    for (std::size_t j = 0; j < breaks.size(); ++j) {
        const double p = breaks[j];
        while (ai < atoms.size() && atoms[ai].x < p) ++ai;
        if (ai < atoms.size() && atoms[ai].x == p) {
            segs.push_back({c, c + atoms[ai].mass, p, p});
            c += atoms[ai].mass;
            ++ai;
        }
        if (j + 1 == breaks.size()) break;
        const double q = breaks[j + 1];
        while (pi < pieces.size() && pieces[pi].right <= p) ++pi;
        if (pi < pieces.size() && pieces[pi].left <= p && pieces[pi].right >= q &&
            pieces[pi].density > 0.0) {
            const double w = pieces[pi].density * (q - p);
            segs.push_back({c, c + w, p, q});
            c += w;
        }
    }
    if (segs.empty()) throw std::invalid_argument("measure has no mass");
    segs.front().z0 = 0.0;
    segs.back().z1 = 1.0;
    return segs;
}

std::vector<QSeg> segments_of(const QuantileGrid& g) {
    const std::size_t M = g.intervals();
    std::vector<QSeg> segs;
    segs.reserve(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double z0 = static_cast<double>(i) / static_cast<double>(M);
        const double z1 = static_cast<double>(i + 1) / static_cast<double>(M);
        segs.push_back({z0, z1, g.values[i], g.values[i + 1]});
    }
    return segs;
}

double seg_eval(const QSeg& s, double z) {
    if (z >= s.z1) return s.x1;
    if (z <= s.z0) return s.x0;
    const double w = (z - s.z0) / (s.z1 - s.z0);
    return s.x0 + (s.x1 - s.x0) * w;
}

// Cursor over a segment list for monotone z sweeps.
struct SegCursor {
    const std::vector<QSeg>* segs;
    std::size_t k = 0;
    // segment covering [zl, zr]; advances monotonically
    const QSeg& at(double zl) {
        while (k + 1 < segs->size() && (*segs)[k].z1 <= zl) ++k;
        return (*segs)[k];
    }
};

double lp_from_segments(double p, const std::vector<QSeg>& A, const std::vector<QSeg>& B) {
    const bool inf_order = std::isinf(p);
    const bool exact = inf_order || p == 1.0 || p == 2.0;

    if (!exact) {
        // midpoint quadrature with 2^16 nodes
        constexpr std::size_t n = 1u << 16;
        SegCursor ca{&A}, cb{&B};
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double z = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
            const double d = std::abs(seg_eval(ca.at(z), z) - seg_eval(cb.at(z), z));
            acc += std::pow(d, p) / static_cast<double>(n);
        }
        return std::pow(acc, 1.0 / p);
    }

    std::vector<double> zs;
    zs.reserve(A.size() + B.size() + 2);
    for (const auto& s : A) { zs.push_back(s.z0); zs.push_back(s.z1); }
    for (const auto& s : B) { zs.push_back(s.z0); zs.push_back(s.z1); }
    std::sort(zs.begin(), zs.end());
    zs.erase(std::unique(zs.begin(), zs.end()), zs.end());

    SegCursor ca{&A}, cb{&B};
    double acc = 0.0;
    double sup = 0.0;
    for (std::size_t j = 0; j + 1 < zs.size(); ++j) {
        const double zl = zs[j], zr = zs[j + 1];
        const double h = zr - zl;
        if (!(h > 0.0)) continue;
        const QSeg& sa = ca.at(zl);
        const QSeg& sb = cb.at(zl);
        const double d0 = seg_eval(sa, zl) - seg_eval(sb, zl);
        const double d1 = seg_eval(sa, zr) - seg_eval(sb, zr);
        if (inf_order) {
            sup = std::max({sup, std::abs(d0), std::abs(d1), std::abs(0.5 * (d0 + d1))});
        } else if (p == 1.0) {
            if (d0 * d1 >= 0.0) {
                acc += h * 0.5 * (std::abs(d0) + std::abs(d1));
            } else {
                const double tau = d0 / (d0 - d1);  // sign-change fraction
                acc += h * 0.5 * (tau * std::abs(d0) + (1.0 - tau) * std::abs(d1));
            }
        } else {  // p == 2
            acc += h * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
        }
    }
    if (inf_order) return sup;
    return p == 1.0 ? acc : std::sqrt(acc);
}

double check_order(double p) {
    if (std::isnan(p) || p < 1.0) throw std::invalid_argument("Wasserstein order must be >= 1");
    return p;
}

}  // namespace

QuantileGrid quantile_of(const Measure1D& mu, std::size_t grid_size) {
    if (grid_size < 1) throw std::invalid_argument("grid size must be >= 1");
    const auto segs = segments_of(mu);
    const std::size_t M = grid_size;
    QuantileGrid g;
    g.values.resize(M + 1);
    g.time = 0.0;
    std::size_t k = 0;
    g.values[0] = segs.front().x0;
    for (std::size_t i = 1; i <= M; ++i) {
        const double z = static_cast<double>(i) / static_cast<double>(M);
        // inf{x : F(x) >= z}: the segment whose mass range reaches z first
        while (k + 1 < segs.size() && segs[k].z1 < z) ++k;
        g.values[i] = seg_eval(segs[k], z);
    }
    return g;
}

CdfView cdf_of(const Measure1D& mu) {
    std::vector<double> breaks;
    for (const auto& a : mu.atoms()) breaks.push_back(a.x);
    for (const auto& p : mu.pieces()) {
        breaks.push_back(p.left);
        breaks.push_back(p.right);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    CdfView cdf;
    cdf.breakpoints = breaks;
    cdf.values.resize(breaks.size());
    cdf.left_values.resize(breaks.size());

    double c = 0.0;
    std::size_t ai = 0, pi = 0;
    const auto& atoms = mu.atoms();
    const auto& pieces = mu.pieces();
    for (std::size_t j = 0; j < breaks.size(); ++j) {
        cdf.left_values[j] = c;
        if (ai < atoms.size() && atoms[ai].x == breaks[j]) {
            c += atoms[ai].mass;
            ++ai;
        }
        cdf.values[j] = c;
        if (j + 1 < breaks.size()) {
            while (pi < pieces.size() && pieces[pi].right <= breaks[j]) ++pi;
            if (pi < pieces.size() && pieces[pi].left <= breaks[j] &&
                pieces[pi].right >= breaks[j + 1])
                c += pieces[pi].density * (breaks[j + 1] - breaks[j]);
        }
    }
    cdf.values.back() = 1.0;
    return cdf;
}

Measure1D reconstruct_density(const QuantileGrid& grid) {
    const std::size_t M = grid.intervals();
    const double m = grid.mesh();
    std::vector<Piece> pieces;
    pieces.reserve(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double gap = grid.values[i + 1] - grid.values[i];
        if (!(gap > kGapFloor))
            throw DegenerateGap(i, "degenerate gap at index " + std::to_string(i));
        pieces.push_back({grid.values[i], grid.values[i + 1], m / gap});
    }
    return Measure1D({}, std::move(pieces));
}

double wasserstein(double p, const Measure1D& a, const Measure1D& b) {
    check_order(p);
    return lp_from_segments(p, segments_of(a), segments_of(b));
}

double wasserstein_grids(double p, const QuantileGrid& a, const QuantileGrid& b) {
    check_order(p);
    return lp_from_segments(p, segments_of(a), segments_of(b));
}

}  // namespace nlcl
