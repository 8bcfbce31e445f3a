#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "bmllab/json_io.hpp"
#include "bmllab/mesh.hpp"
#include "bmllab/verify.hpp"

using namespace bmllab;

namespace {

Region box1(Rational lo, Rational hi) { return Region({Interval{lo, hi}}); }

double integral(const MeshFunction& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.cell_volume();
}

}  // namespace

TEST_CASE("rational arithmetic stays exact") {
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(-7, 2).floor() == -4);
    CHECK(Rational(7, 2).floor() == 3);
    CHECK(Rational(2, -4) == Rational(-1, 2));
    CHECK(Rational::pow2(-3) == Rational(1, 8));
    CHECK_THROWS_AS(Rational(1) / Rational(0), std::domain_error);
    const Rational big(std::int64_t{1} << 62);
    CHECK_THROWS(big * big);
}

TEST_CASE("region measure and overlap in thirds") {
    const Region unit = Region::cube({Rational(0), Rational(0)}, Rational(1));
    const Region shifted = Region::cube({Rational(1, 3), Rational(1, 3)}, Rational(1));
    CHECK(unit.measure() == Rational(1));
    CHECK(overlap(unit, shifted) == Rational(4, 9));
    CHECK(overlap(unit, Region::cube({Rational(1), Rational(0)}, Rational(1))) == Rational(0));
    CHECK(unit.contains(Region::cube({Rational(1, 3), Rational(0)}, Rational(1, 3))));
}

TEST_CASE("dyadic cubes are nested or disjoint, matching their overlap") {
    std::mt19937_64 rng(3);
    for (int it = 0; it < 300; ++it) {
        const int ja = static_cast<int>(rng() % 7) - 3, jb = static_cast<int>(rng() % 7) - 3;
        const DyadicCube a{ja, {static_cast<std::int64_t>(rng() % 9) - 4}};
        const DyadicCube b{jb, {static_cast<std::int64_t>(rng() % 9) - 4}};
        const Rational ov = overlap(Region::of(a), Region::of(b));
        const Nesting nst = nesting(a, b);
        if (nst == Nesting::disjoint) {
            CHECK(ov == Rational(0));
        } else {
            const Rational inner = nst == Nesting::first_in_second ? Region::of(a).measure() : Region::of(b).measure();
            CHECK(ov == inner);
        }
    }
}

TEST_CASE("cover_cube contains the cube with volume at most 6^n times larger") {
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 2; ++n)
        for (int it = 0; it < 200; ++it) {
            const Rational side(1 + static_cast<std::int64_t>(rng() % 40), 3 * (1 + static_cast<std::int64_t>(rng() % 16)));
            std::vector<Rational> corner;
            for (int d = 0; d < n; ++d) corner.push_back(Rational(static_cast<std::int64_t>(rng() % 61) - 30, 12));
            const Region q = Region::cube(corner, side);
            const CubeCover c = cover_cube(q);
            const Region big = Region::of(c.cube);
            CHECK(big.contains(q));
            CHECK(big.measure() <= Rational(n == 1 ? 6 : 36) * q.measure());
        }
}

TEST_CASE("indicator synthesis integrates to the region measure") {
    std::mt19937_64 rng(5);
    for (int it = 0; it < 100; ++it) {
        const Rational lo(static_cast<std::int64_t>(rng() % 36) - 24, 6);
        const Rational hi = lo + Rational(1 + static_cast<std::int64_t>(rng() % 12), 6);
        const MeshFunction f = synthesize(gen::Indicator{box1(lo, hi)}, 1, 2, 2);
        const double expected = (hi - lo).to_double();
        CHECK(integral(f) == doctest::Approx(expected).epsilon(1e-14));
        CHECK(f.sup() <= 1.0);
    }
    CHECK_THROWS_AS(synthesize(gen::Indicator{box1(Rational(3), Rational(5))}, 1, 2, 2), std::invalid_argument);
}

TEST_CASE("refinement and enlargement keep the function") {
    const auto corpus = make_corpus(9, 20, 2, 1, 2);
    for (const auto& f : corpus) {
        const MeshFunction r = refine(f, f.J() + 2);
        CHECK(integral(r) == doctest::Approx(integral(f)).epsilon(1e-13));
        CHECK(r.sup() == f.sup());
        const MeshFunction e = enlarge(f, f.L() + 1);
        CHECK(integral(e) == doctest::Approx(integral(f)).epsilon(1e-13));
        CHECK(e.l1() == doctest::Approx(f.l1()).epsilon(1e-13));
    }
}

TEST_CASE("corpus steps do not depend on the mesh resolution") {
    const auto coarse = make_corpus(4, 25, 1, 2, 3);
    const auto fine = make_corpus(4, 25, 1, 2, 5);
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        if (i % 5 == 2) continue;  // sampled profiles are resampled on purpose
        const MeshFunction r = refine(coarse[i], 5);
        CHECK(r.values() == fine[i].values());
    }
}

TEST_CASE("seeded random steps are reproducible") {
    const gen::RandomStep g{42, -1, 1, std::nullopt, 1, 0.2};
    CHECK(synthesize(g, 2, 1, 2).values() == synthesize(g, 2, 1, 2).values());
    gen::RandomStep h = g;
    h.seed = 43;
    CHECK(synthesize(g, 2, 1, 2).values() != synthesize(h, 2, 1, 2).values());
}

TEST_CASE("mesh JSON round trip and length check") {
    const MeshFunction f = make_corpus(2, 1, 2, 1, 1).front();
    const MeshFunction g = mesh_from_json(to_json(f));
    CHECK(g.same_mesh(f));
    CHECK(g.values() == f.values());
    json bad = to_json(f);
    bad["values"].erase(0);
    CHECK_THROWS_AS(mesh_from_json(bad), std::invalid_argument);
    json missing = to_json(f);
    missing.erase("J");
    CHECK_THROWS_AS(mesh_from_json(missing), std::invalid_argument);
}

TEST_CASE("cell geometry") {
    const MeshFunction f(1, 2, 3);
    CHECK(f.side_cells() == 64);
    CHECK(f.edge(f.origin_cell()) == Rational(0));
    CHECK(f.cell_region(0).side(0).lo == Rational(-4));
    CHECK(f.center(f.origin_cell()) == doctest::Approx(1.0 / 16));
}
