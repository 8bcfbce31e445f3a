#pragma once

// Enumeration of the cubes of a shifted dyadic grid that meet a mesh function.
//
// Coordinates are measured in thirds of a mesh cell: cell i along an axis is
// [3i, 3i + 3). At scale k <= J a grid cube has side 3 * 2^{J-k} in these units,
// so every overlap with a cell is an integer between 0 and 3 per axis and all
// measures are integer multiples of 3^{-n} 2^{-Jn}.
//
// Scales finer than the mesh (k > J) are handled through "patterns": all the
// cubes at such a scale fall into a handful of shapes relative to the cells
// (inside one cell, or straddling a cell boundary with thirds (3-a, a)), and
// each shape occurs with a multiplicity polynomial in X = 2^{k-J}.

#include <array>
#include <cstdint>
#include <vector>

#include "bmllab/lorentz.hpp"
#include "bmllab/mesh.hpp"

namespace bmllab::lattice {

using Key = std::array<std::int64_t, 2>;

struct Grid {
    int n = 1;
    int L = 0;
    int J = 0;
    std::int64_t N = 1;  // cells per side
    std::array<int, 2> a{0, 0};

    Grid(const MeshFunction& f, const std::vector<int>& offset);
    Grid(int n_, int L_, int J_, std::array<int, 2> a_);

    /// Scale below which every cube meeting the domain is a stabilised piece.
    int coarse_scale() const { return -L - 2; }
    std::int64_t unit(int k) const { return std::int64_t{1} << (J - k); }
    std::int64_t side3(int k) const { return 3 * unit(k); }
    std::int64_t lo3(int k, std::int64_t m, int d) const;
    /// Index of the cube at scale k containing the point x3 along axis d.
    std::int64_t box_of(int k, std::int64_t x3, int d) const;
    /// Number of mass units (3^{-n} 2^{-Jn}) in a full cube at scale k.
    double box_units(int k) const;
    /// Volume of the mass unit.
    double unit_volume() const;
};

/// Cells [first, first + w.size()) covered by a cube along one axis, with the
/// covered length in thirds.
struct AxisCover {
    std::int64_t first = 0;
    std::vector<int> w;
};
AxisCover axis_cover(const Grid& g, int k, std::int64_t m, int d);

/// Cubes at scale k (k <= J) meeting the support of f, sorted.
std::vector<Key> support_boxes(const Grid& g, const MeshFunction& f, int k);
/// Cubes at scale k meeting the domain.
std::vector<Key> domain_boxes(const Grid& g, int k);

/// Nonzero values of f inside a cube with their weights in mass units.
void box_masses(const Grid& g, const MeshFunction& f, int k, const Key& m, std::vector<detail::Mass>& out);

template <class Fn>
void for_box_cells(const Grid& g, const MeshFunction& f, int k, const Key& m, Fn&& fn) {
    const AxisCover c0 = axis_cover(g, k, m[0], 0);
    if (g.n == 1) {
        for (std::size_t i = 0; i < c0.w.size(); ++i)
            fn(f.index(c0.first + static_cast<std::int64_t>(i)), c0.w[i]);
        return;
    }
    const AxisCover c1 = axis_cover(g, k, m[1], 1);
    for (std::size_t i = 0; i < c0.w.size(); ++i)
        for (std::size_t j = 0; j < c1.w.size(); ++j)
            fn(f.index(c0.first + static_cast<std::int64_t>(i), c1.first + static_cast<std::int64_t>(j)),
               c0.w[i] * c1.w[j]);
}

/// Shape of sub-mesh cubes along one axis.
struct Segment {
    std::int64_t first = 0;  // first cell (may be -1 or N for straddles at the edge)
    std::array<int, 2> w{3, 0};
    int len = 1;
    bool interior = true;
};
struct Pattern {
    std::array<Segment, 2> seg;
};

/// Patterns carrying some nonzero value of f.
std::vector<Pattern> fine_patterns(const Grid& g, const MeshFunction& f);
/// Values in the pattern with weights in units of 3^{-n} of the cube volume.
void pattern_masses(const Grid& g, const MeshFunction& f, const Pattern& p, std::vector<detail::Mass>& out);
/// Coefficients c_0..c_2 of the multiplicity polynomial in X = 2^{k-J}.
std::array<double, 3> pattern_multiplicity(const Grid& g, const Pattern& p);

template <class Fn>
void for_pattern_cells(const Grid& g, const MeshFunction& f, const Pattern& p, Fn&& fn) {
    const Segment& s0 = p.seg[0];
    const Segment& s1 = p.seg[1];
    for (int i = 0; i < s0.len; ++i) {
        const std::int64_t c0 = s0.first + i;
        if (c0 < 0 || c0 >= g.N) continue;
        if (g.n == 1) {
            fn(f.index(c0), s0.w[static_cast<std::size_t>(i)]);
            continue;
        }
        for (int j = 0; j < s1.len; ++j) {
            const std::int64_t c1 = s1.first + j;
            if (c1 < 0 || c1 >= g.N) continue;
            fn(f.index(c0, c1), s0.w[static_cast<std::size_t>(i)] * s1.w[static_cast<std::size_t>(j)]);
        }
    }
}

}  // namespace bmllab::lattice
