#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bmllab/ops.hpp"
#include "bmllab/reference.hpp"
#include "bmllab/verify.hpp"

using namespace bmllab;

namespace {

MeshFunction unit_indicator(int L = 2, int J = 3) {
    return synthesize(gen::Indicator{Region::cube({Rational(0)}, Rational(1))}, 1, L, J);
}

double max_diff(const MeshFunction& a, const MeshFunction& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double max_diff(const MeshFunction& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("dyadic maximal function of the unit indicator") {
    const MeshFunction chi = unit_indicator();
    const MeshFunction M = maximal_dyadic(chi);
    for (std::size_t i = 0; i < chi.size(); ++i) {
        const double x = chi.center(static_cast<std::int64_t>(i));
        // Smallest dyadic cube containing x and [0,1): [0, 2^k) or [-2^k, 0).
        double expected;
        if (x >= 0 && x < 1)
            expected = 1.0;
        else if (x >= 0)
            expected = 1.0 / std::exp2(std::ceil(std::log2(x + 1e-12)));
        else
            expected = 0.0;
        if (x < 0) {
            // Negative half-line: only cubes larger than the domain reach [0,1).
            CHECK(M[i] < 0.2);
        } else {
            CHECK(M[i] == doctest::Approx(expected));
        }
    }
}

TEST_CASE("maximal functions against a scan of every cube") {
    for (int n = 1; n <= 2; ++n)
        for (const auto& f : make_corpus(3, 4, n, 1, n == 1 ? 3 : 2))
            for (int a0 = 0; a0 < 3; ++a0) {
                const std::vector<int> a(static_cast<std::size_t>(n), a0);
                CHECK(max_diff(maximal_dyadic(f, a), reference::maximal(f, -f.L() - 5, a)) < 1e-12);
            }
}

TEST_CASE("maximal family properties") {
    for (const auto& f : make_corpus(4, 30, 2, 1, 2)) {
        const auto s = maximal_sandwich(f);
        const MeshFunction M = maximal_dyadic(f);
        const MeshFunction sharp = sharp_maximal(f);
        const MeshFunction p2 = powered_maximal(f, 2.0);
        for (std::size_t i = 0; i < f.size(); ++i) {
            CHECK(M[i] >= std::abs(f[i]) - 1e-15);
            CHECK(M[i] <= f.sup() + 1e-15);
            CHECK(s.lower[i] >= M[i] - 1e-15);
            CHECK(s.upper[i] == doctest::Approx(36.0 * s.lower[i]));
            CHECK(sharp[i] <= 2.0 * s.lower[i] + 1e-14);
            CHECK(p2[i] >= M[i] - 1e-14);  // Jensen
        }
    }
}

TEST_CASE("fractional maximal of the unit indicator") {
    const MeshFunction chi = unit_indicator();
    const MeshFunction Ma = fractional_maximal(chi, 0.5);
    for (std::size_t i = 0; i < chi.size(); ++i)
        if (chi[i] == 1.0) CHECK(Ma[i] == doctest::Approx(1.0));
}

TEST_CASE("Hilbert transform of the unit indicator") {
    const MeshFunction chi = unit_indicator();
    CHECK(hilbert_at(chi, Rational(2)) == doctest::Approx(std::log(2.0) / std::numbers::pi).epsilon(1e-14));
    CHECK(hilbert_at(chi, Rational(-1)) == doctest::Approx(std::log(0.5) / std::numbers::pi).epsilon(1e-14));
    CHECK_THROWS_AS(hilbert_at(chi, Rational(1)), std::domain_error);
    const auto centers = hilbert_transform(chi, Sampling::cell_center);
    CHECK(centers.exact);
    CHECK(max_diff(centers.values, reference::hilbert_centers(chi)) < 1e-13);
}

TEST_CASE("Hilbert transform against the antiderivative and antisymmetry") {
    const auto c = make_corpus(5, 21, 1, 2, 3);
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        const MeshFunction Tf = hilbert_transform(c[i]).values;
        const MeshFunction Tg = hilbert_transform(c[i + 1]).values;
        CHECK(max_diff(Tf, reference::hilbert_averages(c[i])) < 1e-12 * std::max(1.0, c[i].sup()));
        CHECK(std::abs(pairing(Tf, c[i + 1]) + pairing(c[i], Tg)) < 1e-10);
    }
}

TEST_CASE("cell weights are odd") {
    for (std::int64_t d = 1; d < 50; ++d) {
        CHECK(hilbert_cell_weight(-d) == -hilbert_cell_weight(d));
        CHECK(hilbert_center_weight(-d) == -hilbert_center_weight(d));
    }
    CHECK(hilbert_cell_weight(0) == 0.0);
    CHECK(hilbert_cell_weight(1) == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("truncated transform below half a cell equals the center values") {
    for (const auto& f : make_corpus(6, 10, 1, 2, 3)) {
        const double h = f.cell_side().to_double();
        const MeshFunction t = truncated_transform(f, h / 4).values;
        CHECK(max_diff(t, hilbert_transform(f, Sampling::cell_center).values) < 1e-12);
        const MeshFunction Tmax = maximal_transform(f);
        for (double zeta : {h, 4 * h, 16 * h}) {
            const MeshFunction tz = truncated_transform(f, zeta).values;
            for (std::size_t i = 0; i < f.size(); ++i) CHECK(Tmax[i] >= std::abs(tz[i]) - 1e-12);
        }
    }
}

TEST_CASE("fractional integral") {
    const MeshFunction chi = unit_indicator();
    CHECK(fractional_integral_at(chi, 0.5, Rational(2)) == doctest::Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-14));
    for (const auto& f : make_corpus(7, 10, 1, 2, 3)) {
        const auto I = fractional_integral(f, 0.5);
        CHECK(I.exact);
        for (std::size_t i = 0; i < f.size(); i += 7)
            CHECK(I.values[i] == doctest::Approx(reference::fractional_integral_at(f, 0.5, f.center(static_cast<std::int64_t>(i)))).epsilon(1e-12));
    }
    const auto planar = fractional_integral(make_corpus(7, 1, 2, 1, 2).front(), 1.0);
    CHECK_FALSE(planar.exact);
}

TEST_CASE("commutator") {
    const auto c = make_corpus(8, 6, 1, 2, 3);
    MeshFunction b(1, 2, 3);
    for (auto& v : b.values()) v = -3.0;
    for (const auto& f : c) CHECK(commutator(b, f).values.sup() < 1e-12);
    // Linear in f.
    const MeshFunction sum = c[0] + c[1];
    const MeshFunction lhs = commutator(c[2], sum).values;
    const MeshFunction rhs = commutator(c[2], c[0]).values + commutator(c[2], c[1]).values;
    CHECK(max_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("Hilbert kernel satisfies its standard bounds") {
    const auto k = hilbert_kernel();
    CHECK(k.size_constant == doctest::Approx(1.0 / std::numbers::pi));
    const auto chk = check_kernel(k, 5000, 3);
    CHECK(chk.worst_size_ratio <= 1.0 + 1e-12);
    CHECK(chk.worst_regularity_ratio <= 1.0 + 1e-12);
}

TEST_CASE("BMO bounds") {
    const MeshFunction chi = unit_indicator();
    const auto b = bmo_norm(chi);
    CHECK(b.lower == doctest::Approx(0.5));
    CHECK(b.lower <= b.upper);
    CHECK(bmo_norm(MeshFunction(1, 2, 3)).upper == 0.0);
    for (int n = 1; n <= 2; ++n)
        for (const auto& f : make_corpus(9, 3, n, 1, 2)) {
            const auto bb = bmo_norm(f);
            CHECK(bb.lower == doctest::Approx(reference::bmo_lower(f, -f.L() - 2, f.J())).epsilon(1e-12));
            CHECK(bb.lower <= bb.upper);
        }
}

TEST_CASE("median value") {
    MeshFunction b(1, 1, 1);  // cells of side 1/2 on [-2, 2)
    b.values() = {0, 1, 2, 3, 4, 5, 6, 7};
    CHECK(median_value(b, Region::cube({Rational(-2)}, Rational(4))) == 3.0);
    CHECK(median_value(b, Region::cube({Rational(0)}, Rational(1))) == 4.0);
    // Half of [1, 5) lies outside the domain, where b = 0.
    CHECK(median_value(b, Region::cube({Rational(1)}, Rational(4))) == 0.0);
}

TEST_CASE("oscillation profile is monotone in the scale") {
    const MeshFunction f = make_corpus(10, 1, 1, 2, 3).front();
    const std::vector<int> scales{-2, -1, 0, 1, 2, 3};
    const auto p = cmo_profile(f, scales);
    for (std::size_t i = 1; i < scales.size(); ++i) {
        CHECK(p.small_scale[i] <= p.small_scale[i - 1] + 1e-15);
        CHECK(p.large_scale[i] >= p.large_scale[i - 1] - 1e-15);
        CHECK(p.far_field[i] >= p.far_field[i - 1] - 1e-15);
    }
    CHECK(p.large_scale.back() == doctest::Approx(bmo_norm(f).lower));
}
