#include "bmllab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bmllab::lattice {

namespace {
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
}  // namespace

Grid::Grid(const MeshFunction& f, const std::vector<int>& offset) : Grid(f.dim(), f.L(), f.J(), {0, 0}) {
    if (!offset.empty() && static_cast<int>(offset.size()) != n)
        throw std::invalid_argument("grid offset dimension mismatch");
    for (std::size_t d = 0; d < offset.size(); ++d) {
        if (offset[d] < 0 || offset[d] > 2) throw std::invalid_argument("grid offsets must be in {0,1,2}");
        a[d] = offset[d];
    }
}

Grid::Grid(int n_, int L_, int J_, std::array<int, 2> a_) : n(n_), L(L_), J(J_), a(a_) {
    N = std::int64_t{1} << (L + J + 1);
}

std::int64_t Grid::lo3(int k, std::int64_t m, int d) const {
    if (k > J) throw std::logic_error("lo3: scale finer than the mesh");
    if (J - k > 58) throw std::overflow_error("lo3: scale too coarse for 64-bit coordinates");
    return unit(k) * (3 * m + a[static_cast<std::size_t>(d)]) + 3 * (N / 2);
}

std::int64_t Grid::box_of(int k, std::int64_t x3, int d) const {
    const std::int64_t S = unit(k);
    return floor_div(x3 - 3 * (N / 2) - S * a[static_cast<std::size_t>(d)], 3 * S);
}

double Grid::box_units(int k) const { return std::pow(3.0 * std::ldexp(1.0, J - k), n); }

double Grid::unit_volume() const { return std::pow(3.0, -n) * std::ldexp(1.0, -J * n); }

AxisCover axis_cover(const Grid& g, int k, std::int64_t m, int d) {
    const std::int64_t lo = g.lo3(k, m, d);
    const std::int64_t hi = lo + g.side3(k);
    AxisCover c;
    const std::int64_t first = std::max<std::int64_t>(0, floor_div(lo, 3));
    const std::int64_t last = std::min<std::int64_t>(g.N - 1, floor_div(hi - 1, 3));
    c.first = first;
    for (std::int64_t i = first; i <= last; ++i) {
        const std::int64_t w = std::min(hi, 3 * i + 3) - std::max(lo, 3 * i);
        c.w.push_back(static_cast<int>(w));
    }
    return c;
}

std::vector<Key> support_boxes(const Grid& g, const MeshFunction& f, int k) {
    std::vector<Key> keys;
    // A cell meets at most two cubes per axis: those containing its first and last third.
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        if (f[idx] == 0.0) continue;
        const auto xy = f.coords(idx);
        std::array<std::array<std::int64_t, 2>, 2> cand{};
        std::array<int, 2> cnt{1, 1};
        for (int d = 0; d < g.n; ++d) {
            const auto i = static_cast<std::size_t>(d);
            const std::int64_t b0 = g.box_of(k, 3 * xy[i], d);
            const std::int64_t b1 = g.box_of(k, 3 * xy[i] + 2, d);
            cand[i] = {b0, b1};
            cnt[i] = b0 == b1 ? 1 : 2;
        }
        for (int u = 0; u < cnt[0]; ++u)
            for (int v = 0; v < cnt[1]; ++v)
                keys.push_back({cand[0][static_cast<std::size_t>(u)], g.n == 2 ? cand[1][static_cast<std::size_t>(v)] : 0});
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

std::vector<Key> domain_boxes(const Grid& g, int k) {
    std::array<std::int64_t, 2> lo{0, 0}, hi{0, 0};
    for (int d = 0; d < g.n; ++d) {
        const auto i = static_cast<std::size_t>(d);
        lo[i] = g.box_of(k, 0, d);
        hi[i] = g.box_of(k, 3 * g.N - 1, d);
    }
    std::vector<Key> keys;
    for (std::int64_t u = lo[0]; u <= hi[0]; ++u)
        for (std::int64_t v = lo[1]; v <= hi[1]; ++v) keys.push_back({u, v});
    return keys;
}

void box_masses(const Grid& g, const MeshFunction& f, int k, const Key& m, std::vector<detail::Mass>& out) {
    out.clear();
    for_box_cells(g, f, k, m, [&](std::size_t idx, int w) {
        const double v = f[idx];
        if (v != 0.0) out.push_back({v, w});
    });
}

namespace {

Segment interior(std::int64_t i) { return Segment{i, {3, 0}, 1, true}; }
// Straddle across the boundary between cells b-1 and b.
Segment straddle(std::int64_t b, int a) { return Segment{b - 1, {3 - a, a}, 2, false}; }

bool pattern_less(const Pattern& x, const Pattern& y) {
    for (std::size_t d = 0; d < 2; ++d) {
        if (x.seg[d].interior != y.seg[d].interior) return x.seg[d].interior < y.seg[d].interior;
        if (x.seg[d].first != y.seg[d].first) return x.seg[d].first < y.seg[d].first;
    }
    return false;
}
bool pattern_eq(const Pattern& x, const Pattern& y) { return !pattern_less(x, y) && !pattern_less(y, x); }

}  // namespace

std::vector<Pattern> fine_patterns(const Grid& g, const MeshFunction& f) {
    std::vector<Pattern> out;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        if (f[idx] == 0.0) continue;
        const auto xy = f.coords(idx);
        std::array<std::vector<Segment>, 2> segs;
        for (int d = 0; d < 2; ++d) {
            const auto i = static_cast<std::size_t>(d);
            if (d >= g.n) {
                segs[i].push_back(interior(0));
                continue;
            }
            segs[i].push_back(interior(xy[i]));
            if (g.a[i] != 0) {
                segs[i].push_back(straddle(xy[i], g.a[i]));
                segs[i].push_back(straddle(xy[i] + 1, g.a[i]));
            }
        }
        for (const auto& s0 : segs[0])
            for (const auto& s1 : segs[1]) out.push_back(Pattern{{s0, s1}});
    }
    std::sort(out.begin(), out.end(), pattern_less);
    out.erase(std::unique(out.begin(), out.end(), pattern_eq), out.end());
    return out;
}

void pattern_masses(const Grid& g, const MeshFunction& f, const Pattern& p, std::vector<detail::Mass>& out) {
    out.clear();
    for_pattern_cells(g, f, p, [&](std::size_t idx, int w) {
        const double v = f[idx];
        if (v != 0.0) out.push_back({v, w});
    });
}

std::array<double, 3> pattern_multiplicity(const Grid& g, const Pattern& p) {
    // Interior: X - [a != 0] cubes per cell; straddle: exactly one cube per boundary.
    std::array<double, 3> poly{1.0, 0.0, 0.0};
    for (int d = 0; d < g.n; ++d) {
        const auto i = static_cast<std::size_t>(d);
        std::array<double, 2> seg{1.0, 0.0};
        if (p.seg[i].interior) seg = {g.a[i] != 0 ? -1.0 : 0.0, 1.0};
        std::array<double, 3> next{0.0, 0.0, 0.0};
        for (std::size_t u = 0; u < 3; ++u)
            for (std::size_t v = 0; v < 2; ++v)
                if (u + v < 3) next[u + v] += poly[u] * seg[v];
        poly = next;
    }
    return poly;
}

}  // namespace bmllab::lattice
