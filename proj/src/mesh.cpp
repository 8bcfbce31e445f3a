#include "bmllab/mesh.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bmllab {

Region::Region(std::vector<Interval> sides) : sides_(std::move(sides)) {
    if (sides_.empty() || sides_.size() > 2) throw std::invalid_argument("Region: dimension must be 1 or 2");
    for (const auto& s : sides_)
        if (!(s.lo < s.hi)) throw std::invalid_argument("Region: empty side " + s.lo.str() + ".." + s.hi.str());
}

Region Region::cube(const std::vector<Rational>& corner, const Rational& side) {
    std::vector<Interval> s;
    for (const auto& c : corner) s.push_back({c, c + side});
    return Region(std::move(s));
}

Region Region::of(const DyadicCube& c) {
    const auto g = cube_geometry(c);
    return cube(g.corner, g.side);
}

Region Region::of(const ShiftedCube& c) {
    const Rational side = Rational::pow2(-c.k);
    std::vector<Rational> corner;
    for (int d = 0; d < c.dim(); ++d) {
        const auto i = static_cast<std::size_t>(d);
        corner.push_back(side * (Rational(c.m[i]) + Rational(c.a[i], 3)));
    }
    return cube(corner, side);
}

Rational Region::measure() const {
    Rational v(1);
    for (const auto& s : sides_) v *= (s.hi - s.lo);
    return v;
}

bool Region::is_cube() const {
    for (const auto& s : sides_)
        if (s.hi - s.lo != sides_[0].hi - sides_[0].lo) return false;
    return true;
}

bool Region::contains(const Region& o) const {
    if (o.dim() != dim()) return false;
    for (int d = 0; d < dim(); ++d)
        if (o.side(d).lo < side(d).lo || side(d).hi < o.side(d).hi) return false;
    return true;
}

std::string Region::str() const {
    std::ostringstream os;
    for (int d = 0; d < dim(); ++d) {
        if (d) os << " x ";
        os << "[" << side(d).lo << "," << side(d).hi << ")";
    }
    return os.str();
}

Rational overlap(const Region& a, const Region& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("overlap: dimension mismatch");
    Rational v(1);
    for (int d = 0; d < a.dim(); ++d) {
        const Rational lo = max(a.side(d).lo, b.side(d).lo);
        const Rational hi = min(a.side(d).hi, b.side(d).hi);
        if (!(lo < hi)) return Rational(0);
        v *= (hi - lo);
    }
    return v;
}

CubeGeometry cube_geometry(const DyadicCube& c) {
    CubeGeometry g;
    g.side = Rational::pow2(-c.j);
    for (auto mi : c.m) g.corner.push_back(g.side * Rational(mi));
    g.volume = Rational(1);
    for (int d = 0; d < c.dim(); ++d) g.volume *= g.side;
    return g;
}

Nesting nesting(const DyadicCube& a, const DyadicCube& b) {
    // Compare at the coarser scale: the finer cube's ancestor must equal the coarser cube.
    const bool a_finer = a.j >= b.j;
    const DyadicCube& fine = a_finer ? a : b;
    const DyadicCube& coarse = a_finer ? b : a;
    const int shift = fine.j - coarse.j;
    for (std::size_t d = 0; d < fine.m.size(); ++d)
        if ((fine.m[d] >> shift) != coarse.m[d]) return Nesting::disjoint;  // arithmetic shift floors
    return a_finer ? Nesting::first_in_second : Nesting::second_in_first;
}

CubeCover cover_cube(const Region& q) {
    if (!q.is_cube()) throw std::invalid_argument("cover_cube: region is not a cube");
    const Rational ell = q.side(0).hi - q.side(0).lo;
    // 2^{-k} in (2 ell, 4 ell]
    int k = 0;
    while (!(Rational::pow2(-k) > Rational(2) * ell)) --k;
    while (Rational::pow2(-k - 1) > Rational(2) * ell) ++k;
    const Rational side = Rational::pow2(-k);
    CubeCover out;
    out.cube.k = k;
    for (int d = 0; d < q.dim(); ++d) {
        bool found = false;
        for (int a = 0; a < 3 && !found; ++a) {
            const Rational shift(a, 3);
            const std::int64_t m = (q.side(d).lo / side - shift).floor();
            const Rational hi = side * (Rational(m) + shift + Rational(1));
            if (q.side(d).hi <= hi) {
                out.a.push_back(a);
                out.cube.m.push_back(m);
                found = true;
            }
        }
        if (!found) throw std::logic_error("cover_cube: no covering offset found");
    }
    out.cube.a = out.a;
    return out;
}

// ---------------------------------------------------------------------------

namespace {
void check_mesh(int n, int L, int J) {
    if (n != 1 && n != 2) throw std::invalid_argument("MeshFunction: n must be 1 or 2");
    if (J < -L) throw std::invalid_argument("MeshFunction: need J >= -L");
    const int bits = (L + J + 1) * n;
    if (bits > 26) throw std::invalid_argument("MeshFunction: mesh too large (" + std::to_string(bits) + " bits)");
    if (J > 40 || L > 40) throw std::invalid_argument("MeshFunction: exponent out of range");
}
}  // namespace

MeshFunction::MeshFunction(int n, int L, int J) : n_(n), L_(L), J_(J) {
    check_mesh(n, L, J);
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(side_cells());
    values_.assign(total, 0.0);
}

MeshFunction::MeshFunction(int n, int L, int J, std::vector<double> values) : MeshFunction(n, L, J) {
    if (values.size() != values_.size())
        throw std::invalid_argument("MeshFunction: expected " + std::to_string(values_.size()) + " values, got " +
                                    std::to_string(values.size()));
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("MeshFunction: non-finite value");
    values_ = std::move(values);
}

double MeshFunction::cell_volume() const { return std::ldexp(1.0, -J_ * n_); }

Rational MeshFunction::edge(std::int64_t i) const {
    return Rational(i - origin_cell()) * cell_side();
}

double MeshFunction::center(std::int64_t i) const {
    return std::ldexp(static_cast<double>(i - origin_cell()) + 0.5, -J_);
}

Region MeshFunction::cell_region(std::size_t idx) const {
    const auto c = coords(idx);
    std::vector<Interval> s;
    for (int d = 0; d < n_; ++d) s.push_back({edge(c[static_cast<std::size_t>(d)]), edge(c[static_cast<std::size_t>(d)] + 1)});
    return Region(std::move(s));
}

Region MeshFunction::domain() const {
    std::vector<Interval> s(static_cast<std::size_t>(n_), Interval{-Rational::pow2(L_), Rational::pow2(L_)});
    return Region(std::move(s));
}

double MeshFunction::l1() const {
    double s = 0.0;
    for (double v : values_) s += std::abs(v);
    return s * cell_volume();
}

double MeshFunction::sup() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
}

bool MeshFunction::is_zero() const {
    for (double v : values_)
        if (v != 0.0) return false;
    return true;
}

std::vector<std::size_t> MeshFunction::support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] != 0.0) s.push_back(i);
    return s;
}

MeshFunction& MeshFunction::operator+=(const MeshFunction& o) {
    if (!same_mesh(o)) throw std::invalid_argument("MeshFunction: mesh mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

MeshFunction& MeshFunction::operator-=(const MeshFunction& o) {
    if (!same_mesh(o)) throw std::invalid_argument("MeshFunction: mesh mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

MeshFunction& MeshFunction::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

MeshFunction MeshFunction::abs() const {
    MeshFunction r = *this;
    for (double& v : r.values_) v = std::abs(v);
    return r;
}

MeshFunction MeshFunction::pow_abs(double s) const {
    MeshFunction r = *this;
    for (double& v : r.values_) v = v == 0.0 ? 0.0 : std::pow(std::abs(v), s);
    return r;
}

MeshFunction MeshFunction::times(const MeshFunction& o) const {
    if (!same_mesh(o)) throw std::invalid_argument("MeshFunction: mesh mismatch");
    MeshFunction r = *this;
    for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] *= o.values_[i];
    return r;
}

Rational overlap_measure(const Region& R, const MeshFunction& f, std::size_t cell) {
    return overlap(R, f.cell_region(cell));
}

// ---------------------------------------------------------------------------

double unit_draw(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

namespace {

// Fills cells whose box of indices lies in [lo, hi) per axis.
struct CellRange {
    std::array<std::int64_t, 2> lo{0, 0};
    std::array<std::int64_t, 2> hi{1, 1};
};

CellRange cells_meeting(const MeshFunction& f, const Region& r) {
    CellRange c;
    const Rational h = f.cell_side();
    for (int d = 0; d < f.dim(); ++d) {
        const auto i = static_cast<std::size_t>(d);
        const Rational lo = (r.side(d).lo + Rational::pow2(f.L())) / h;
        const Rational hi = (r.side(d).hi + Rational::pow2(f.L())) / h;
        c.lo[i] = std::max<std::int64_t>(0, lo.floor());
        std::int64_t top = hi.floor();
        if (Rational(top) < hi) ++top;
        c.hi[i] = std::min<std::int64_t>(f.side_cells(), top);
    }
    return c;
}

template <class Fn>
void for_cells(const MeshFunction& f, const CellRange& c, Fn&& fn) {
    for (std::int64_t i0 = c.lo[0]; i0 < c.hi[0]; ++i0)
        for (std::int64_t i1 = c.lo[1]; i1 < c.hi[1]; ++i1) fn(f.index(i0, i1));
}

void require_inside(const MeshFunction& f, const Region& r) {
    if (!f.domain().contains(r)) throw std::invalid_argument("synthesize: region " + r.str() + " outside domain");
}

double profile_value(gen::Profile p, double s) {
    switch (p) {
        case gen::Profile::gaussian: return std::exp(-0.5 * s * s);
        case gen::Profile::gaussian_derivative: return -s * std::exp(-0.5 * s * s);
        case gen::Profile::bump: return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
        case gen::Profile::tent: return std::max(0.0, 1.0 - std::abs(s));
    }
    return 0.0;
}

struct Synth {
    int n, L, J;

    MeshFunction operator()(const gen::Indicator& g) const {
        MeshFunction f(n, L, J);
        if (g.region.dim() != n) throw std::invalid_argument("synthesize: dimension mismatch");
        require_inside(f, g.region);
        const Rational cell = Rational::pow2(-J * n);
        for_cells(f, cells_meeting(f, g.region), [&](std::size_t idx) {
            f[idx] = (overlap_measure(g.region, f, idx) / cell).to_double();
        });
        return f;
    }

    MeshFunction operator()(const gen::DyadicIndicator& g) const {
        if (g.cube.j > J) throw std::invalid_argument("synthesize: dyadic cube finer than the mesh");
        return (*this)(gen::Indicator{Region::of(g.cube)});
    }

    MeshFunction operator()(const gen::RandomStep& g) const {
        if (!std::isfinite(g.lo) || !std::isfinite(g.hi) || !(g.lo <= g.hi))
            throw std::invalid_argument("synthesize: bad value range");
        MeshFunction f(n, L, J);
        std::mt19937_64 rng(g.seed);
        const std::int64_t N = f.side_cells();
        const int b = std::max(0, std::min(g.block_log2, L + J + 1));
        const std::int64_t nb = N >> b;
        std::vector<double> block(static_cast<std::size_t>(n == 1 ? nb : nb * nb));
        for (auto& v : block) {
            const double z = unit_draw(rng());
            const double u = unit_draw(rng());
            v = z < g.zero_fraction ? 0.0 : g.lo + (g.hi - g.lo) * u;
        }
        CellRange c;
        c.hi = {N, n == 2 ? N : 1};
        if (g.support) {
            require_inside(f, *g.support);
            c = cells_meeting(f, *g.support);
        }
        for_cells(f, c, [&](std::size_t idx) {
            const auto xy = f.coords(idx);
            const std::size_t bi = n == 1 ? static_cast<std::size_t>(xy[0] >> b)
                                          : static_cast<std::size_t>((xy[0] >> b) * nb + (xy[1] >> b));
            f[idx] = block[bi];
        });
        if (g.support) {
            // Cells cut by the support boundary keep only the covered fraction.
            const Rational cell = Rational::pow2(-J * n);
            for_cells(f, c, [&](std::size_t idx) {
                const Rational w = overlap_measure(*g.support, f, idx) / cell;
                if (w != Rational(1)) f[idx] *= w.to_double();
            });
        }
        return f;
    }

    MeshFunction operator()(const gen::Sampled& g) const {
        if (static_cast<int>(g.center.size()) != n) throw std::invalid_argument("synthesize: center dimension");
        if (!(g.width > 0) || !std::isfinite(g.amplitude)) throw std::invalid_argument("synthesize: bad profile");
        MeshFunction f(n, L, J);
        for (std::size_t idx = 0; idx < f.size(); ++idx) {
            const auto xy = f.coords(idx);
            double v = g.amplitude;
            for (int d = 0; d < n; ++d) {
                const auto i = static_cast<std::size_t>(d);
                v *= profile_value(g.shape, (f.center(xy[i]) - g.center[i]) / g.width);
            }
            f[idx] = v;
        }
        return f;
    }

    MeshFunction operator()(const gen::ShiftedIndicators& g) const {
        if (g.offsets.size() != g.coefficients.size()) throw std::invalid_argument("synthesize: offsets/coefficients size");
        MeshFunction f(n, L, J);
        for (std::size_t k = 0; k < g.offsets.size(); ++k) {
            if (!std::isfinite(g.coefficients[k])) throw std::invalid_argument("synthesize: non-finite coefficient");
            const MeshFunction e = (*this)(gen::DyadicIndicator{DyadicCube{0, g.offsets[k]}});
            for (std::size_t i = 0; i < f.size(); ++i) f[i] += g.coefficients[k] * e[i];
        }
        return f;
    }

    MeshFunction operator()(const gen::Closure& g) const {
        MeshFunction f(n, L, J);
        for (std::size_t idx = 0; idx < f.size(); ++idx) {
            const auto xy = f.coords(idx);
            std::array<double, 2> x{f.center(xy[0]), n == 2 ? f.center(xy[1]) : 0.0};
            const double v = g.fn(x);
            if (!std::isfinite(v)) throw std::invalid_argument("synthesize: closure returned non-finite value");
            f[idx] = v;
        }
        return f;
    }
};

}  // namespace

MeshFunction synthesize(const Generator& g, int n, int L, int J) { return std::visit(Synth{n, L, J}, g); }

MeshFunction enlarge(const MeshFunction& f, int L_new) {
    if (L_new < f.L()) throw std::invalid_argument("enlarge: cannot shrink the domain");
    MeshFunction g(f.dim(), L_new, f.J());
    const std::int64_t shift = g.origin_cell() - f.origin_cell();
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        if (f[idx] == 0.0) continue;
        const auto xy = f.coords(idx);
        g[g.index(xy[0] + shift, f.dim() == 2 ? xy[1] + shift : 0)] = f[idx];
    }
    return g;
}

MeshFunction refine(const MeshFunction& f, int J_new) {
    if (J_new < f.J()) throw std::invalid_argument("refine: cannot coarsen");
    MeshFunction g(f.dim(), f.L(), J_new);
    const int s = J_new - f.J();
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const auto xy = g.coords(idx);
        g[idx] = f[f.index(xy[0] >> s, xy[1] >> s)];
    }
    return g;
}

}  // namespace bmllab
