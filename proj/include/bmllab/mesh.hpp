#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bmllab/rational.hpp"

namespace bmllab {

/// Cube of side 2^{-j} with lower corner 2^{-j} m.
struct DyadicCube {
    int j = 0;
    std::vector<std::int64_t> m;
    int dim() const { return static_cast<int>(m.size()); }
};

/// Cube of the grid shifted by a/3 at scale k: edges 2^{-k}[m + a/3, m + a/3 + 1).
struct ShiftedCube {
    int k = 0;
    std::vector<std::int64_t> m;
    std::vector<int> a;
    int dim() const { return static_cast<int>(m.size()); }
};

struct Interval {
    Rational lo;
    Rational hi;
};

/// Half-open axis-aligned box with exact rational edges.
class Region {
public:
    Region() = default;
    explicit Region(std::vector<Interval> sides);
    static Region cube(const std::vector<Rational>& corner, const Rational& side);
    static Region of(const DyadicCube& c);
    static Region of(const ShiftedCube& c);

    int dim() const { return static_cast<int>(sides_.size()); }
    const Interval& side(int d) const { return sides_[static_cast<std::size_t>(d)]; }
    const std::vector<Interval>& sides() const { return sides_; }
    Rational measure() const;
    bool is_cube() const;
    bool contains(const Region& other) const;
    std::string str() const;

private:
    std::vector<Interval> sides_;
};

/// Exact measure of the intersection of two boxes of equal dimension.
Rational overlap(const Region& a, const Region& b);

struct CubeGeometry {
    std::vector<Rational> corner;
    Rational side;
    Rational volume;
};
CubeGeometry cube_geometry(const DyadicCube& c);

enum class Nesting { disjoint, first_in_second, second_in_first };
/// Dyadic cubes are disjoint or nested; equal cubes report first_in_second.
Nesting nesting(const DyadicCube& a, const DyadicCube& b);

struct CubeCover {
    std::vector<int> a;
    ShiftedCube cube;
};
/// A shifted-grid cube containing q with volume at most 6^n |q|.
CubeCover cover_cube(const Region& q);

/// Piecewise-constant function on the uniform mesh of side 2^{-J} over
/// [-2^L, 2^L)^n. Cell (i0, i1) is stored at i0 * N + i1 where N is the
/// number of cells per side, so the first coordinate varies slowest.
class MeshFunction {
public:
    MeshFunction() = default;
    MeshFunction(int n, int L, int J);
    MeshFunction(int n, int L, int J, std::vector<double> values);

    int dim() const { return n_; }
    int L() const { return L_; }
    int J() const { return J_; }
    std::int64_t side_cells() const { return std::int64_t{1} << (L_ + J_ + 1); }
    std::size_t size() const { return values_.size(); }
    /// Cell index of the point 0 along one axis.
    std::int64_t origin_cell() const { return std::int64_t{1} << (L_ + J_); }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    std::size_t index(std::int64_t i0, std::int64_t i1 = 0) const {
        return n_ == 1 ? static_cast<std::size_t>(i0)
                       : static_cast<std::size_t>(i0 * side_cells() + i1);
    }
    std::array<std::int64_t, 2> coords(std::size_t idx) const {
        if (n_ == 1) return {static_cast<std::int64_t>(idx), 0};
        const auto N = side_cells();
        return {static_cast<std::int64_t>(idx) / N, static_cast<std::int64_t>(idx) % N};
    }

    Rational cell_side() const { return Rational::pow2(-J_); }
    double cell_volume() const;
    Region cell_region(std::size_t idx) const;
    Region domain() const;
    /// Real coordinate of the lower edge of cell i along an axis.
    Rational edge(std::int64_t i) const;
    double center(std::int64_t i) const;

    bool same_mesh(const MeshFunction& o) const { return n_ == o.n_ && L_ == o.L_ && J_ == o.J_; }
    double l1() const;
    double sup() const;
    bool is_zero() const;
    /// Indices of nonzero cells in increasing order.
    std::vector<std::size_t> support() const;

    MeshFunction& operator+=(const MeshFunction& o);
    MeshFunction& operator-=(const MeshFunction& o);
    MeshFunction& operator*=(double s);
    friend MeshFunction operator+(MeshFunction a, const MeshFunction& b) { return a += b; }
    friend MeshFunction operator-(MeshFunction a, const MeshFunction& b) { return a -= b; }
    friend MeshFunction operator*(double s, MeshFunction a) { return a *= s; }
    MeshFunction abs() const;
    MeshFunction pow_abs(double s) const;
    MeshFunction times(const MeshFunction& o) const;

private:
    int n_ = 1;
    int L_ = 0;
    int J_ = 0;
    std::vector<double> values_;
};

Rational overlap_measure(const Region& R, const MeshFunction& f, std::size_t cell);

namespace gen {
/// Cell averages of the indicator of a box.
struct Indicator {
    Region region;
};
struct DyadicIndicator {
    DyadicCube cube;
};
/// Values drawn uniformly in [lo, hi) on blocks of 2^block_log2 cells per side,
/// restricted to `support` when given. A block is zeroed with probability zero_fraction.
struct RandomStep {
    std::uint64_t seed = 0;
    double lo = -1.0;
    double hi = 1.0;
    std::optional<Region> support;
    int block_log2 = 0;
    double zero_fraction = 0.0;
};
enum class Profile { gaussian, gaussian_derivative, bump, tent };
/// Profile sampled at cell centers: amplitude * shape((x - center) / width).
struct Sampled {
    Profile shape = Profile::gaussian;
    std::vector<double> center;
    double width = 1.0;
    double amplitude = 1.0;
};
/// Sum of coefficient_i times the indicator of the unit cube with corner offsets_i.
struct ShiftedIndicators {
    std::vector<std::vector<std::int64_t>> offsets;
    std::vector<double> coefficients;
};
struct Closure {
    std::function<double(const std::array<double, 2>&)> fn;
};
}  // namespace gen

using Generator = std::variant<gen::Indicator, gen::DyadicIndicator, gen::RandomStep, gen::Sampled,
                               gen::ShiftedIndicators, gen::Closure>;

MeshFunction synthesize(const Generator& g, int n, int L, int J);

/// Deterministic uniform draw in [0,1) from a 64-bit engine, independent of the
/// standard library's distribution implementation.
double unit_draw(std::uint64_t bits);

/// Same function on the larger domain [-2^{L'}, 2^{L'})^n.
MeshFunction enlarge(const MeshFunction& f, int L_new);
/// Same function on the finer mesh 2^{-J'}.
MeshFunction refine(const MeshFunction& f, int J_new);

}  // namespace bmllab
