#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bmllab/bml.hpp"
#include "bmllab/reference.hpp"
#include "bmllab/verify.hpp"

using namespace bmllab;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

MeshFunction cube_indicator(int n, int L, int J, int j, std::int64_t m = 0) {
    return synthesize(gen::DyadicIndicator{DyadicCube{j, std::vector<std::int64_t>(static_cast<std::size_t>(n), m)}}, n,
                      L, J);
}

// Independent oracle: sum the cube series level by level until the terms are
// negligible. Ancestors of Q_{j,0} contribute one cube per level, descendants
// 2^{n(k-j)} equal cubes.
double indicator_series(int n, int j, const BMLExponents& e) {
    const double C = std::isinf(e.q) ? 1.0 : std::pow(e.p / e.q, 1.0 / e.q);
    const double mass = std::exp2(-j * n / e.p);  // C |Q_j|^{1/p} is the Lorentz norm on any cube containing Q_j
    double acc = 0.0;
    for (int k = j; k >= j - 400; --k) {
        const double term = std::exp2(-k * n * (1.0 / e.t - 1.0 / e.p)) * C * mass;
        acc = std::isinf(e.r) ? std::max(acc, term) : acc + std::pow(term, e.r);
    }
    for (int k = j + 1; k <= j + 400; ++k) {
        const double term = std::exp2(-k * n / e.t) * C;
        const double count = std::exp2(n * (k - j));
        acc = std::isinf(e.r) ? std::max(acc, term) : acc + count * std::pow(term, e.r);
        if (!std::isinf(e.r) && count * std::pow(term, e.r) < 1e-30 * acc) break;
    }
    return std::isinf(e.r) ? acc : std::pow(acc, 1.0 / e.r);
}

const std::vector<BMLExponents> kExps{{2, 2, 3, 4}, {1.5, 2, 3, 6}, {2, kInf, 4, kInf}, {2, 1, 2, kInf}, {1.2, 3, 5, 5.5}};

}  // namespace

TEST_CASE("unit indicator with (2,2,3,4)") {
    const double v = bml_norm(cube_indicator(1, 2, 3, 0), {2, 2, 3, 4}).total;
    CHECK(v == doctest::Approx(1.599764137657075).epsilon(1e-13));
    CHECK(rel(v, indicator_series(1, 0, {2, 2, 3, 4})) < 1e-12);
}

TEST_CASE("dyadic indicators match the cube series") {
    for (int n = 1; n <= 2; ++n)
        for (int j = -1; j <= 2; ++j)
            for (const auto& e : kExps) {
                const double v = bml_norm(cube_indicator(n, 1, 2, j), e).total;
                CHECK(rel(v, indicator_series(n, j, e)) < 1e-10);
            }
}

TEST_CASE("dyadic dilation scales the norm by 2^{-mn/t}") {
    for (const auto& f : make_corpus(5, 15, 1, 2, 2))
        for (int m : {-1, 1, 2})
            for (const auto& e : kExps)
                CHECK(rel(bml_norm(dilate_dyadic(f, m), e).total, std::exp2(-m / e.t) * bml_norm(f, e).total) < 1e-12);
}

TEST_CASE("window sums agree with a direct cube enumeration") {
    for (int n = 1; n <= 2; ++n) {
        const auto corpus = make_corpus(21, 3, n, 1, n == 1 ? 3 : 2);
        for (const auto& f : corpus)
            for (const auto& e : kExps)
                for (const std::vector<int>& a : {std::vector<int>{}, std::vector<int>(static_cast<std::size_t>(n), 2)}) {
                    const int lo = -f.L() - 3, hi = f.J() + 2;
                    CHECK(rel(bml_norm_truncated(f, e, lo, hi, a).value, reference::bml_window(f, e, lo, hi, a)) < 1e-10);
                }
    }
}

TEST_CASE("truncated sums are within their tail bound") {
    for (const auto& f : make_corpus(17, 30, 1, 2, 3))
        for (const auto& e : kExps)
            for (int lo : {-4, -1, 1})
                for (int hi : {lo, 2, 6}) {
                    if (hi < lo) continue;
                    const auto tr = bml_norm_truncated(f, e, lo, hi);
                    const double exact = bml_norm(f, e).total;
                    CHECK(tr.value <= exact * (1 + 1e-12));
                    if (std::isinf(e.r)) {
                        CHECK(std::max(tr.value, tr.tail_bound) == doctest::Approx(exact).epsilon(1e-12));
                    } else {
                        CHECK(std::pow(exact - tr.value, e.r) <= tr.tail_bound + 1e-12 * std::pow(exact, e.r));
                        CHECK(std::pow(tr.value, e.r) + tr.tail_bound == doctest::Approx(std::pow(exact, e.r)).epsilon(1e-11));
                    }
                }
}

TEST_CASE("nontriviality classification") {
    CHECK(nontrivial({2, 2, 3, 4}));
    CHECK_FALSE(nontrivial({2, 2, 3, 3}));
    CHECK(nontrivial({2, 2, 2, kInf}));
    CHECK_FALSE(nontrivial({2, 2, 2, 4}));
    CHECK_FALSE(nontrivial({3, 2, 2, kInf}));
    CHECK_FALSE(nontrivial({2, 2, 3, 2}));
}

TEST_CASE("divergence is reported symbolically") {
    const MeshFunction chi = cube_indicator(1, 2, 3, 0);
    for (const BMLExponents e : {BMLExponents{2, 2, 3, 3}, BMLExponents{2, 2, 3, 2.999999}, BMLExponents{3, 2, 2, kInf},
                                 BMLExponents{2, 2, 2, 50}}) {
        const auto b = bml_norm(chi, e);
        CHECK(b.divergent);
        CHECK(std::isinf(b.total));
    }
    // Barely nontrivial: large but finite.
    const auto near = bml_norm(chi, {2, 2, 3, 3.000001});
    CHECK_FALSE(near.divergent);
    CHECK(std::isfinite(near.total));
    CHECK(bml_norm(MeshFunction(1, 2, 3), {2, 2, 3, 3}).total == 0.0);
}

TEST_CASE("lattice property and monotone families") {
    for (const auto& f : make_corpus(23, 20, 2, 1, 2)) {
        MeshFunction g = f.abs();
        for (auto& v : g.values()) v *= 1.25;
        for (const auto& e : kExps) CHECK(bml_norm(f, e).total <= bml_norm(g, e).total * (1 + 1e-13));
    }
    // Growing truncations of a fixed function give increasing norms.
    const MeshFunction f = make_corpus(3, 1, 1, 2, 3).front().abs();
    double prev = 0.0;
    for (int k = 1; k <= 4; ++k) {
        const Rational R = Rational::pow2(k - 2);
        MeshFunction g = f;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Rational x = g.edge(static_cast<std::int64_t>(i));
            if (x < -R || !(x < R)) g[i] = 0.0;
        }
        const double v = bml_norm(g, {2, 2, 3, 4}).total;
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(prev == doctest::Approx(bml_norm(f, {2, 2, 3, 4}).total).epsilon(1e-14));
}

TEST_CASE("norm decreases as r grows") {
    for (const auto& f : make_corpus(29, 30, 1, 2, 3)) {
        const double a = bml_norm(f, {2, 2, 3, 4}).total, b = bml_norm(f, {2, 2, 3, 8}).total,
                     c = bml_norm(f, {2, 2, 3, kInf}).total;
        CHECK(b <= a * (1 + 1e-13));
        CHECK(c <= b * (1 + 1e-13));
    }
}

TEST_CASE("shifted grids are equivalent with the explicit constant") {
    for (int n = 1; n <= 2; ++n)
        for (const auto& f : make_corpus(31, 12, n, 1, 2))
            for (const auto& e : kExps) {
                const double C = std::pow(6.0, n * (1.0 / e.p - 1.0 / e.t));
                const double base = bml_norm(f, e).total;
                for (int a0 = 0; a0 < 3; ++a0)
                    for (int a1 = 0; a1 < (n == 2 ? 3 : 1); ++a1) {
                        const std::vector<int> a = n == 2 ? std::vector<int>{a0, a1} : std::vector<int>{a0};
                        CHECK(base <= C * bml_norm_on_grid(f, e, a).total * (1 + 1e-12));
                    }
            }
}

TEST_CASE("translation, tail and modulus") {
    const MeshFunction chi = cube_indicator(1, 2, 3, 0);
    CHECK(translate(chi, {0}).values() == chi.values());
    const MeshFunction moved = translate(chi, {8});
    CHECK(moved.values() == cube_indicator(1, 2, 3, 0, 1).values());
    const BMLExponents e{2, 2, 3, 4};
    const double ratio = bml_norm(moved, e).total / bml_norm(chi, e).total;
    CHECK(std::isfinite(ratio));
    CHECK(tail_norm(chi, e, Rational(2)) == 0.0);
    CHECK(tail_norm(chi, e, Rational(1, 2)) == doctest::Approx(bml_norm(cube_indicator(1, 2, 3, 1, 1), e).total).epsilon(1e-13));
    CHECK(translation_modulus(chi, e, Rational(0)) == 0.0);
    CHECK(translation_modulus(chi, e, Rational(1, 8)) > 0.0);
}

TEST_CASE("convolution with an averaging kernel has a finite measured constant") {
    const MeshFunction g = synthesize(gen::Indicator{Region::cube({Rational(0)}, Rational(1, 2))}, 1, 2, 3);
    double worst = 0.0;
    for (const auto& f : make_corpus(37, 10, 1, 2, 3)) {
        const MeshFunction c = convolve(f, g);
        worst = std::max(worst, bml_norm(c, {2, 2, 3, 4}).total / (g.l1() * bml_norm(f, {2, 2, 3, 4}).total));
    }
    CHECK(std::isfinite(worst));
    CHECK(worst > 0.0);
}

TEST_CASE("separation and the l^r embedding") {
    const BMLExponents e{2, 2, 3, 4};
    const MeshFunction chi = cube_indicator(1, 10, 0, 0);
    const Separation s = separation_offset(chi, chi, e, 0.1);
    CHECK(s.shift_cells > 0);
    CHECK(s.lhs <= s.rhs);
    const Separation zero = separation_offset(chi, MeshFunction(1, 10, 0), e, 0.1);
    CHECK(zero.shift_cells == 0);

    CHECK_THROWS_AS(ell_r_positions(e, 8, 0.1, 8), DomainTooSmall);
    const auto pos = ell_r_positions(e, 8, 0.1, 12);
    REQUIRE(pos.size() == 8);
    CHECK(std::is_sorted(pos.begin(), pos.end()));
    const std::vector<double> a{1, -0.5, 0.25, 2, 0.1, -1, 0.7, 0.3};
    double ar = 0.0;
    for (double x : a) ar += std::pow(std::abs(x), e.r);
    const double ratio = bml_norm(ell_r_embedding(pos, a, 12), e).total / std::pow(ar, 1.0 / e.r);
    CHECK(ratio > 1.0);
    CHECK(ratio < 2.0);
}

TEST_CASE("parallel and serial sums agree") {
    for (const auto& f : make_corpus(41, 10, 2, 1, 3))
        for (const auto& e : kExps) CHECK(rel(bml_norm(f, e, Exec::parallel).total, bml_norm(f, e, Exec::serial).total) < 1e-13);
}
