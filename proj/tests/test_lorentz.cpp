#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bmllab/lorentz.hpp"
#include "bmllab/reference.hpp"
#include "bmllab/verify.hpp"

using namespace bmllab;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// (int |f|^p)^{1/p} straight from the cell values.
double lp_norm(const MeshFunction& f, double p) {
    double s = 0.0;
    for (double v : f.values()) s += std::pow(std::abs(v), p);
    return std::pow(s * f.cell_volume(), 1.0 / p);
}

const std::vector<LorentzExponents> kExps{{2, 2}, {1.5, 3}, {3, 1}, {2, kInf}, {4, 0.5}, {kInf, kInf}};

}  // namespace

TEST_CASE("indicator of a unit set has norm (p/q)^{1/q}") {
    const MeshFunction chi = synthesize(gen::DyadicIndicator{DyadicCube{0, {0}}}, 1, 2, 3);
    CHECK(lorentz_norm(chi, {2, 2}) == doctest::Approx(1.0));
    CHECK(lorentz_norm(chi, {3, 1}) == doctest::Approx(3.0));
    CHECK(lorentz_norm(chi, {2, kInf}) == doctest::Approx(1.0));
    // |E|^{1/p} scaling for an indicator of measure 1/4.
    const MeshFunction small = synthesize(gen::DyadicIndicator{DyadicCube{2, {1}}}, 1, 2, 3);
    CHECK(lorentz_norm(small, {2, 4}) == doctest::Approx(std::pow(0.5, 0.25) * 0.5).epsilon(1e-14));
}

TEST_CASE("L^{p,p} is L^p") {
    for (const auto& f : make_corpus(3, 30, 2, 1, 2))
        for (double p : {1.0, 1.5, 2.0, 3.0}) CHECK(rel(lorentz_norm(f, {p, p}), lp_norm(f, p)) < 1e-13);
}

TEST_CASE("distribution function counts cells") {
    for (const auto& f : make_corpus(8, 20, 1, 2, 3))
        for (double alpha : {0.0, 0.25, 1.0}) {
            double m = 0.0;
            for (double v : f.values())
                if (std::abs(v) > alpha) m += f.cell_volume();
            CHECK(distribution(f, alpha).to_double() == doctest::Approx(m).epsilon(1e-15));
        }
}

TEST_CASE("three formulas for the norm agree") {
    for (const auto& f : make_corpus(1, 60, 1, 2, 3))
        for (const auto& e : kExps) {
            const double a = lorentz_norm(f, e);
            CHECK(rel(a, lorentz_norm_via_distribution(f, e)) < 1e-12);
            CHECK(rel(a, reference::lorentz_norm(f, e)) < 1e-12);
        }
}

TEST_CASE("power identity") {
    for (const auto& f : make_corpus(2, 40, 2, 1, 2))
        for (double s : {0.5, 2.0, 3.0}) {
            const auto [lhs, rhs] = power_identity_check(f, s, 2.0, 1.5);
            CHECK(rel(lhs, rhs) < 1e-12);
        }
}

TEST_CASE("norm is homogeneous and rearrangement invariant") {
    for (const auto& f : make_corpus(6, 20, 1, 2, 3)) {
        MeshFunction g = f;
        g *= -2.5;
        MeshFunction h = f;
        std::reverse(h.values().begin(), h.values().end());
        for (const auto& e : kExps) {
            CHECK(rel(lorentz_norm(g, e), 2.5 * lorentz_norm(f, e)) < 1e-13);
            CHECK(rel(lorentz_norm(h, e), lorentz_norm(f, e)) < 1e-13);
        }
    }
}

TEST_CASE("restriction to a region is monotone and exact on the support") {
    const Region dom = Region::cube({Rational(-4)}, Rational(8));
    const Region half = Region::cube({Rational(0)}, Rational(4));
    const Region third = Region::cube({Rational(1, 3)}, Rational(1, 3));
    for (const auto& f : make_corpus(7, 20, 1, 2, 3))
        for (const auto& e : kExps) {
            CHECK(rel(lorentz_norm(f, e, dom), lorentz_norm(f, e)) < 1e-14);
            CHECK(lorentz_norm(f, e, half) <= lorentz_norm(f, e) * (1 + 1e-14));
            CHECK(lorentz_norm(f, e, third) <= lorentz_norm(f, e, half) * (1 + 1e-14));
        }
}

TEST_CASE("Hoelder inequality") {
    const auto c = make_corpus(12, 80, 1, 2, 3);
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        for (const auto& e : {LorentzExponents{2, 2}, LorentzExponents{1.5, 1}, LorentzExponents{3, kInf}}) {
            const auto h = holder_pair(c[i], c[i + 1], e.p, e.q);
            CHECK(h.lhs <= h.rhs * (1 + 1e-12));
        }
}

TEST_CASE("conjugate exponents") {
    CHECK(conjugate(2.0) == 2.0);
    CHECK(conjugate(1.0) == kInf);
    CHECK(conjugate(kInf) == 1.0);
    CHECK(conjugate(3.0) == doctest::Approx(1.5));
    CHECK_THROWS(conjugate(0.5));
}

TEST_CASE("embedding in q is bounded") {
    double worst = 0.0;
    for (const auto& f : make_corpus(13, 50, 1, 2, 3)) worst = std::max(worst, lorentz_norm(f, {2, 4}) / lorentz_norm(f, {2, 1}));
    CHECK(std::isfinite(worst));
    CHECK(worst <= 1.0);  // (q1/p)^{1/q1 - 1/q2} <= 1 for q1 = 1, p = 2
}
