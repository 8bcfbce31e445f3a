#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bmllab/hardy.hpp"
#include "bmllab/json_io.hpp"
#include "bmllab/ops.hpp"
#include "bmllab/verify.hpp"

using namespace bmllab;

namespace {

const Region kUnit({Interval{Rational(0), Rational(1)}});

MeshFunction haar(int L, int J) {
    return synthesize(gen::Closure{[](const std::array<double, 2>& x) {
                          if (x[0] >= 0 && x[0] < 0.5) return 1.0;
                          return x[0] >= 0.5 && x[0] < 1 ? -1.0 : 0.0;
                      }},
                      1, L, J);
}

Atom haar_atom(int L = 6, int J = 8) { return Atom::from_mesh(kUnit, haar(L, J)); }

}  // namespace

TEST_CASE("patches round trip through the mesh") {
    const MeshFunction f = haar(3, 4);
    const Patch p = to_patch(f);
    CHECK(p.lo == Rational(0));
    CHECK(p.hi() == Rational(1));
    CHECK(p.cell == Rational(1, 16));
    CHECK(p.integral() == doctest::Approx(0.0));
    CHECK(p.l1() == doctest::Approx(1.0));
    CHECK(to_mesh(p, 3, 4).values() == f.values());
    CHECK(to_mesh(p, 3, 6).l1() == doctest::Approx(1.0));
    CHECK_THROWS_AS(to_mesh(Patch{Rational(100), Rational(1), {1.0}}, 3, 4), DomainTooSmall);
}

TEST_CASE("patch Hilbert transform matches the mesh transform") {
    for (const auto& f : make_corpus(4, 6, 1, 2, 3)) {
        const MeshFunction T = hilbert_transform(f).values;
        Patch dst{f.edge(0), f.cell_side(), std::vector<double>(f.size(), 0.0)};
        const auto v = hilbert_on(to_patch(f), dst);
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(v[i] == doctest::Approx(T[i]).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("atom conditions") {
    CHECK(validate_atom(haar_atom()).ok);
    MeshFunction f = haar(3, 4);
    f[f.origin_cell()] += 0.5;
    const auto c = validate_atom(Atom::from_mesh(kUnit, f));
    CHECK_FALSE(c.ok);
    CHECK(c.mean_defect > 0.0);
    MeshFunction tall = haar(3, 4);
    tall *= 1.5;
    CHECK_FALSE(validate_atom(Atom::from_mesh(kUnit, tall)).ok);
    CHECK(h1_upper({{2.0, haar_atom()}, {-0.5, haar_atom()}}) == doctest::Approx(2.5));
}

TEST_CASE("homogeneity constant") {
    const MeshFunction omega = synthesize(gen::Indicator{kUnit}, 1, 6, 8);
    const auto h = homogeneity_constant(kUnit, omega, 16);
    CHECK(h.constant == doctest::Approx(16.0 / std::numbers::pi * std::log(8.5 / 7.5)).epsilon(1e-12));
    CHECK(h.sign_constant);
    for (int M : {16, 64})
        for (std::uint64_t s = 1; s <= 10; ++s) {
            const auto r = synthesize(gen::RandomStep{s, 0, 1, kUnit, 4, 0.5}, 1, 6, 8);
            MeshFunction ind(1, 6, 8);
            for (std::size_t k = 0; k < r.size(); ++k) ind[k] = r[k] > 0 ? 1.0 : 0.0;
            if (ind.is_zero()) continue;
            CHECK(homogeneity_constant(kUnit, ind, M).constant >= 0.2);
        }
    CHECK_THROWS(homogeneity_constant(kUnit, omega, 8));
}

TEST_CASE("one factorization step") {
    const Atom a = haar_atom();
    const auto s = factorization_step(a, 64);
    CHECK(s.Tg_center == doctest::Approx(-(2.0 / std::numbers::pi) * std::atanh(1.0 / 64)).epsilon(1e-12));
    CHECK(s.cert.certified);
    CHECK(s.cert.M == doctest::Approx(64.0));
    CHECK(s.residual_atoms.size() <= 3);
    for (const auto& w : s.residual_atoms) CHECK(validate_atom(w.atom).ok);
    CHECK(std::isfinite(s.product_cost));
    CHECK(s.reatomization_defect < 1e-9);
    // F_near = a + h T g on Q: the residual is small compared with the atom.
    CHECK(s.F_near.l1() < 0.5);
    CHECK_THROWS_WITH_AS(factorization_step(a, 8), doctest::Contains("M must exceed 10"), std::invalid_argument);
    CHECK_THROWS(factorization_step(a, 33));
}

TEST_CASE("envelope constant decays like 1/M") {
    const Atom a = haar_atom();
    std::vector<double> x, y;
    for (int M : {16, 64, 256}) {
        const auto s = factorization_step(a, M, {2, 2, 3, 4}, false);
        x.push_back(std::log(M));
        y.push_back(std::log(s.cert.envelope_constant));
    }
    const double slope = (y.back() - y.front()) / (x.back() - x.front());
    CHECK(slope >= -1.3);
    CHECK(slope <= -0.7);
}

TEST_CASE("factorization rounds") {
    const Atom a = haar_atom();
    const auto empty = factorize({{1.0, a}}, 256, 0, 6);
    CHECK(empty.rounds.empty());
    CHECK(empty.initial_bound == doctest::Approx(1.0));
    const auto st = factorize({{1.0, a}}, 256, 3, 6);
    REQUIRE(st.rounds.size() == 3);
    double prev = st.initial_bound;
    for (const auto& r : st.rounds) {
        CHECK(r.reconstruction_defect < 1e-9);
        CHECK(r.certified_bound < prev);
        CHECK(r.ratio <= 0.75);
        prev = r.certified_bound;
    }
    const json trace = to_json(st);
    CHECK(trace.at("rounds").size() == 3);
    CHECK(trace.at("rounds")[0].contains("certificates"));
    CHECK_THROWS_WITH(factorize({{1.0, a}}, 10, 1), doctest::Contains("M must exceed 10"));
}

TEST_CASE("M search finds a contracting separation") {
    const auto s = search_M({{1.0, haar_atom()}}, 3, 0.75, 6);
    CHECK(s.M >= 16);
    CHECK(s.M <= 1024);
    for (const auto& r : s.state.rounds) CHECK(r.ratio <= 0.75);
}

TEST_CASE("commutator pairing identity") {
    // int [b,T](g) h = -int b (g T*h - h T g) with T* = -T.
    const auto c = make_corpus(11, 21, 1, 2, 3);
    const MeshFunction& b = c[0];
    for (std::size_t i = 1; i + 1 < c.size(); i += 2) {
        const MeshFunction& g = c[i];
        const MeshFunction& h = c[i + 1];
        const double lhs = pairing(commutator(b, g).values, h);
        const MeshFunction Tg = hilbert_transform(g).values, Th = hilbert_transform(h).values;
        MeshFunction inner(1, 2, 3);
        for (std::size_t k = 0; k < g.size(); ++k) inner[k] = -g[k] * Th[k] - h[k] * Tg[k];
        CHECK(lhs == doctest::Approx(-pairing(b, inner)).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("commutator diagnostic and indicator block bound") {
    const MeshFunction b = synthesize(gen::DyadicIndicator{DyadicCube{1, {0}}}, 1, 8, 4);
    const double d = commutator_lower_diagnostic(b, {Atom::from_mesh(kUnit, haar(8, 4))}, 16);
    CHECK(d > 0.0);
    CHECK(std::isfinite(d));
    CHECK(commutator_lower_diagnostic(MeshFunction(1, 8, 4), {Atom::from_mesh(kUnit, haar(8, 4))}, 16) == 0.0);
    CHECK(indicator_block_upper(Rational(0), Rational(1), {2, 2, 3, 4}) == doctest::Approx(1.0));
}
