#include "bmllab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bmllab/blocks.hpp"
#include "bmllab/hardy.hpp"
#include "bmllab/lorentz.hpp"
#include "bmllab/ops.hpp"
#include "bmllab/reference.hpp"

namespace bmllab {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::vector<MeshFunction> make_corpus(std::uint64_t seed, int count, int n, int L, int J) {
    std::vector<MeshFunction> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    auto corner = [n](std::int64_t c) { return std::vector<Rational>(static_cast<std::size_t>(n), Rational(c)); };
    for (int i = 0; i < count; ++i) {
        const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(i));
        const double u = unit_draw(mix_seed(s, 1));
        const double v = unit_draw(mix_seed(s, 2));
        // Step entries live on a fixed block scale, so they do not change with J.
        const int fine = std::min(J, 3);
        switch (i % 5) {
            case 0:
                out.push_back(synthesize(gen::RandomStep{s, -1.0, 2.0, Region::cube(corner(-1), Rational(2)),
                                                         J - std::min(J, 1), 0.25},
                                         n, L, J));
                break;
            case 1:
                out.push_back(synthesize(gen::RandomStep{s, 0.0, 3.0, std::nullopt, J - std::min(J, 0), 0.7}, n, L, J));
                break;
            case 2: {
                gen::Sampled g;
                g.shape = v < 0.5 ? gen::Profile::gaussian : gen::Profile::bump;
                g.center.assign(static_cast<std::size_t>(n), 2.0 * u - 1.0);
                g.width = 0.3 + 0.7 * v;
                g.amplitude = 1.0 + u;
                out.push_back(synthesize(g, n, L, J));
                break;
            }
            case 3: {
                const int lo = std::max(-L, -1), hi = std::min(J, 2);
                const int j = lo + static_cast<int>(u * (hi - lo + 1)) % (hi - lo + 1);
                // Cube index within [-2^L, 2^L) at scale j.
                const std::int64_t span = std::int64_t{1} << (L + j);
                std::vector<std::int64_t> m(static_cast<std::size_t>(n));
                for (int d = 0; d < n; ++d)
                    m[static_cast<std::size_t>(d)] =
                        static_cast<std::int64_t>(unit_draw(mix_seed(s, 3 + static_cast<std::uint64_t>(d))) * 2.0 * span) - span;
                MeshFunction f = synthesize(gen::DyadicIndicator{DyadicCube{j, m}}, n, L, J);
                f *= 0.5 + 2.0 * v;
                out.push_back(std::move(f));
                break;
            }
            default:
                out.push_back(synthesize(gen::RandomStep{s, -1.0, 1.0, Region::cube(corner(0), Rational(1)), J - fine, 0.1},
                                         n, L, J));
                break;
        }
        if (out.back().is_zero()) out.back() = synthesize(gen::DyadicIndicator{DyadicCube{0, std::vector<std::int64_t>(static_cast<std::size_t>(n), 0)}}, n, L, J);
    }
    return out;
}

bool Report::certified_ok() const {
    return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass || !r.certified; });
}

namespace {

json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string config_string(const VerifyConfig& c) {
    std::ostringstream s;
    s << "seed=" << c.seed << ";corpus=" << c.corpus << ";mesh=" << c.n << "," << c.L << "," << c.J << ";exps=";
    for (const auto& e : c.exponents) s << e.str() << "|";
    s << ";M=";
    for (int m : c.M) s << m << ",";
    return s.str();
}

}  // namespace

json Report::to_json() const {
    json recs = json::array();
    for (const auto& r : records)
        recs.push_back({{"name", r.name},
                        {"anchor", r.anchor},
                        {"inputs", r.inputs},
                        {"measured", num(r.measured)},
                        {"bound", num(r.bound)},
                        {"kind", r.certified ? "certified" : "empirical"},
                        {"pass", r.pass}});
    json exps = json::array();
    for (const auto& e : config.exponents) exps.push_back(e.str());
    return {{"suite", suite},
            {"config",
             {{"seed", config.seed},
              {"corpus", config.corpus},
              {"mesh", {config.n, config.L, config.J}},
              {"exponents", exps},
              {"M", config.M}}},
            {"records", recs},
            {"certified_ok", certified_ok()}};
}

std::string Report::to_csv() const {
    std::ostringstream s;
    s << "suite,name,anchor,inputs,measured,bound,kind,pass\n";
    for (const auto& r : records)
        s << suite << "," << r.name << ",\"" << r.anchor << "\"," << r.inputs << "," << fmt(r.measured) << ","
          << fmt(r.bound) << "," << (r.certified ? "certified" : "empirical") << "," << (r.pass ? "pass" : "fail")
          << "\n";
    return s.str();
}

namespace {

class Suite {
public:
    Suite(Report& report, const VerifyConfig& c) : report_(report), base_(config_string(c)) {}
    void section(const std::string& name) { section_ = name; }

    // measured <= bound
    void at_most(const std::string& name, const std::string& anchor, double measured, double bound) {
        push(name, anchor, measured, bound, true, measured <= bound);
    }
    void empirical(const std::string& name, const std::string& anchor, double measured, double bound, bool pass) {
        push(name, anchor, measured, bound, false, pass);
    }

private:
    void push(const std::string& name, const std::string& anchor, double measured, double bound, bool certified,
              bool pass) {
        report_.records.push_back(
            {section_ + "." + name, anchor, digest(base_ + "#" + section_ + "." + name), measured, bound, certified, pass});
    }

    Report& report_;
    std::string base_;
    std::string section_;
};

double rel(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

double max_diff(const MeshFunction& a, const MeshFunction& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

MeshFunction indicator(int n, int L, int J, int j) {
    return synthesize(gen::DyadicIndicator{DyadicCube{j, std::vector<std::int64_t>(static_cast<std::size_t>(n), 0)}},
                      n, L, J);
}

// Geometric series for the norm of the indicator of Q_{j,0}: ancestors form one
// series, the 2^{mn} subcubes at depth m another.
double indicator_closed_form(int n, int j, const BMLExponents& e) {
    const double C = lorentz_constant(e.lorentz());
    const double base = C * std::exp2(-j * n / e.t);
    if (std::isinf(e.r)) return base;
    const double up = std::exp2(-n * e.r * (1.0 / e.p - 1.0 / e.t));
    const double down = std::exp2(n * (1.0 - e.r / e.t));
    return base * std::pow(1.0 / (1.0 - up) + down / (1.0 - down), 1.0 / e.r);
}

std::vector<std::vector<int>> offsets(int n) {
    std::vector<std::vector<int>> out;
    for (int a0 = 0; a0 < 3; ++a0)
        for (int a1 = 0; a1 < (n == 2 ? 3 : 1); ++a1)
            out.push_back(n == 2 ? std::vector<int>{a0, a1} : std::vector<int>{a0});
    return out;
}

// ---------------------------------------------------------------------------

void lorentz_suite(Suite& s, const VerifyConfig& c) {
    const auto corpus = make_corpus(c.seed, c.corpus, c.n, c.L, c.J);
    const std::vector<LorentzExponents> pq{{2, 2}, {1.5, 3}, {3, 1}, {2, kInf}, {4, 2}};

    double d1 = 0.0, d2 = 0.0;
    for (const auto& f : corpus)
        for (const auto& e : pq) {
            const double a = lorentz_norm(f, e);
            d1 = std::max(d1, rel(a, lorentz_norm_via_distribution(f, e)));
            d2 = std::max(d2, rel(a, reference::lorentz_norm(f, e)));
        }
    s.at_most("rearrangement_vs_distribution", "two formulas for the Lorentz norm agree", d1, 1e-12);
    s.at_most("rearrangement_vs_direct_integral", "Lorentz norm as an integral of the rearrangement", d2, 1e-12);

    double d3 = 0.0;
    for (const auto& f : corpus)
        for (double sp : {0.5, 2.0})
            for (const auto& e : pq) {
                if (std::isinf(e.q)) continue;
                const auto [lhs, rhs] = power_identity_check(f, sp, e.p, e.q);
                d3 = std::max(d3, rel(lhs, rhs));
            }
    s.at_most("power_identity", "|| |f|^s ||_{p,q} = ||f||_{ps,qs}^s", d3, 1e-12);

    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < corpus.size(); ++i)
        for (const auto& e : pq) {
            if (e.p == 1.0) continue;
            const auto h = holder_pair(corpus[i], corpus[i + 1], e.p, e.q);
            if (h.rhs > 0) worst = std::max(worst, h.lhs / h.rhs);
        }
    s.at_most("holder_pairing", "Hoelder inequality in Lorentz spaces", worst, 1.0 + 1e-12);

    double d4 = 0.0;
    const MeshFunction chi = indicator(c.n, c.L, c.J, 0);
    for (const auto& e : pq) d4 = std::max(d4, rel(lorentz_norm(chi, e), lorentz_constant(e)));
    s.at_most("indicator_constant", "norm of a unit-measure indicator is (p/q)^{1/q}", d4, 1e-13);

    double emb = 0.0;
    for (const auto& f : corpus) {
        const double a = lorentz_norm(f, {2, 1});
        if (a > 0) emb = std::max(emb, lorentz_norm(f, {2, 4}) / a);
    }
    s.empirical("embedding_constant_q1_lt_q2", "L^{p,q1} embeds in L^{p,q2} for q1 < q2 (p=2, q 1 -> 4)", emb,
                kInf, std::isfinite(emb));
}

void bml_suite(Suite& s, const VerifyConfig& c) {
    const auto corpus = make_corpus(c.seed, c.corpus, c.n, c.L, c.J);
    const int n = c.n;

    double d_closed = 0.0, d_ratio = 0.0;
    for (const auto& e : c.exponents) {
        if (!nontrivial(e)) continue;
        for (int j = -1; j <= std::min(1, c.J); ++j) {
            const double v = bml_norm(indicator(n, c.L, c.J, j), e).total;
            d_closed = std::max(d_closed, rel(v, indicator_closed_form(n, j, e)));
            if (j < std::min(1, c.J)) {
                const double w = bml_norm(indicator(n, c.L, c.J, j + 1), e).total;
                d_ratio = std::max(d_ratio, rel(w / v, std::exp2(-n / e.t)));
            }
        }
    }
    s.at_most("indicator_closed_form", "indicator of a dyadic cube: two geometric series", d_closed, 1e-10);
    s.at_most("dilation_ratio", "norm(j+1)/norm(j) = 2^{-n/t}", d_ratio, 1e-12);

    double d_window = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(corpus.size(), 3); ++i)
        for (const auto& e : c.exponents) {
            if (!nontrivial(e)) continue;
            const int lo = -c.L - 3, hi = c.J + 2;
            d_window = std::max(d_window, rel(bml_norm_truncated(corpus[i], e, lo, hi).value,
                                              reference::bml_window(corpus[i], e, lo, hi)));
        }
    s.at_most("window_vs_cube_by_cube", "level sums against a direct cube enumeration", d_window, 1e-10);

    double excess = 0.0;
    for (const auto& f : corpus)
        for (const auto& e : c.exponents) {
            if (!nontrivial(e)) continue;
            const double exact = bml_norm(f, e).total;
            const auto tr = bml_norm_truncated(f, e, -1, std::max(-1, c.J - 1));
            const double gap = std::abs(tr.value - exact);
            const double lhs = std::isinf(e.r) ? gap : std::pow(gap, e.r);
            const double scale = std::isinf(e.r) ? exact : std::pow(exact, e.r);
            excess = std::max(excess, (lhs - tr.tail_bound) / scale);
        }
    s.at_most("truncation_soundness", "|truncated - exact|^r <= tail bound (relative excess)", excess, 1e-12);

    double grid = 0.0, reverse = 0.0;
    for (const auto& e : c.exponents) {
        if (!nontrivial(e)) continue;
        const double C = std::pow(6.0, n * (1.0 / e.p - 1.0 / e.t));
        for (const auto& f : corpus) {
            const double base = bml_norm(f, e).total;
            for (const auto& a : offsets(n)) {
                const double shifted = bml_norm_on_grid(f, e, a).total;
                grid = std::max(grid, base / (C * shifted));
                reverse = std::max(reverse, shifted / base);
            }
        }
    }
    s.at_most("grid_equivalence", "||f||_D <= 6^{n(1/p-1/t)} ||f||_{D_a} (ratio to the bound)", grid, 1.0 + 1e-12);
    s.empirical("grid_equivalence_reverse", "||f||_{D_a} <= C ||f||_D, constant measured", reverse, kInf,
                std::isfinite(reverse));

    // Nontriviality classification over p vs t crossed with r vs t.
    struct Case {
        BMLExponents e;
        bool expected;
    };
    const std::vector<Case> cases{{{2, 2, 3, 2.5}, false},  {{2, 2, 3, 4}, true},  {{2, 2, 3, kInf}, true},
                                  {{3, 2, 3, 2.5}, false},  {{3, 2, 3, 4}, false}, {{3, 2, 3, kInf}, true},
                                  {{4, 2, 3, 2.5}, false},  {{4, 2, 3, 4}, false}, {{4, 2, 3, kInf}, false}};
    int wrong = 0;
    const MeshFunction chi = indicator(n, c.L, c.J, 0);
    for (const auto& cs : cases) {
        const auto b = bml_norm(chi, cs.e);
        if (nontrivial(cs.e) != cs.expected || b.divergent == cs.expected) ++wrong;
    }
    s.at_most("nontriviality_gate", "space is nontrivial iff p < t < r < inf or p <= t, r = inf (misclassified)",
              wrong, 0);

    double mono = 0.0;
    for (const auto& f : corpus) {
        const double a = bml_norm(f, {2, 2, 3, 4}).total;
        const double b = bml_norm(f, {2, 2, 3, 6}).total;
        const double d = bml_norm(f, {2, 2, 3, kInf}).total;
        mono = std::max({mono, b / a, d / b});
    }
    s.at_most("r_monotonicity", "norm decreases as r grows (max ratio)", mono, 1.0 + 1e-12);

    double trans = 0.0;
    for (const auto& f : corpus) {
        const BMLExponents e = c.exponents.front();
        if (!nontrivial(e)) break;
        std::vector<std::int64_t> shift(static_cast<std::size_t>(n), 0);
        shift[0] = 1;
        const MeshFunction g = translate(enlarge(f, c.L + 1), shift);
        trans = std::max(trans, bml_norm(g, e).total / bml_norm(f, e).total);
    }
    s.empirical("translation_constant", "norm of a translate is comparable (one cell, constant measured)", trans,
                kInf, std::isfinite(trans));

    const BMLExponents e = c.exponents.front();
    if (nontrivial(e) && !std::isinf(e.r)) {
        const int L = 12;
        const auto pos = ell_r_positions(e, 8, 0.1, L);
        double lo = kInf, hi = 0.0;
        for (int d = 0; d < 20; ++d) {
            std::vector<double> a(8);
            double s_r = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) {
                a[k] = 2.0 * unit_draw(mix_seed(c.seed, 1000 + 8 * d + k)) - 1.0;
                s_r += std::pow(std::abs(a[k]), e.r);
            }
            const double ratio = bml_norm(ell_r_embedding(pos, a, L), e).total / std::pow(s_r, 1.0 / e.r);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        s.empirical("ell_r_embedding_spread", "separated indicators span l^r (c2/c1 over 20 draws)", hi / lo, 4.0,
                    hi / lo <= 4.0);
    }
}

void operators_suite(Suite& s, const VerifyConfig& c) {
    const MeshFunction chi = synthesize(gen::Indicator{Region({Interval{Rational(0), Rational(1)}})}, 1, 2, 2);
    s.at_most("hilbert_indicator_value", "T chi_[0,1)(2) = ln 2 / pi", std::abs(hilbert_at(chi, Rational(2)) - std::log(2.0) / std::numbers::pi),
              1e-12);
    s.at_most("fractional_indicator_value", "I_{1/2} chi_[0,1)(2) = 2(sqrt 2 - 1)",
              std::abs(fractional_integral_at(chi, 0.5, Rational(2)) - 2.0 * (std::sqrt(2.0) - 1.0)), 1e-12);

    const auto line = make_corpus(c.seed, c.corpus, 1, c.L, c.J);
    double anti = 0.0, comm = 0.0, href = 0.0, iso = 0.0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const auto& f = line[i];
        const auto& g = line[i + 1];
        const MeshFunction Tf = hilbert_transform(f).values;
        const MeshFunction Tg = hilbert_transform(g).values;
        anti = std::max(anti, std::abs(pairing(Tf, g) + pairing(f, Tg)));
        MeshFunction b(1, c.L, c.J);
        for (auto& v : b.values()) v = 1.75;
        comm = std::max(comm, commutator(b, f).values.sup());
        const auto ref = reference::hilbert_averages(f);
        for (std::size_t k = 0; k < f.size(); ++k) href = std::max(href, std::abs(Tf[k] - ref[k]) / std::max(1.0, f.sup()));
        const double nf = lorentz_norm(f, {2, 2});
        iso = std::max(iso, lorentz_norm(Tf, {2, 2}) / nf);
    }
    s.at_most("pairing_antisymmetry", "int (Tf) g + int f (Tg) = 0", anti, 1e-10);
    s.at_most("constant_symbol_commutator", "[b, T] vanishes for constant b", comm, 1e-12);
    s.at_most("hilbert_vs_antiderivative", "cell averages against x ln|x| - x", href, 1e-12);
    s.at_most("hilbert_l2_contraction", "||Tf||_2 <= (1 + 0.05) ||f||_2 on the corpus", iso, 1.05);

    double smooth = 0.0;
    for (double w : {0.25, 0.5}) {
        gen::Sampled g{gen::Profile::gaussian_derivative, {0.0}, w, 1.0};
        const MeshFunction f = synthesize(g, 1, 5, 5);
        const double r = lorentz_norm(hilbert_transform(f).values, {2, 2}) / lorentz_norm(f, {2, 2});
        smooth = std::max(smooth, std::abs(r - 1.0));
    }
    s.at_most("hilbert_l2_isometry_smooth", "|ratio - 1| <= 0.05 on smooth mean-zero profiles", smooth, 0.05);

    const auto corpus = make_corpus(c.seed, c.corpus, c.n, c.L, c.J);
    double sharp = 0.0, mref = 0.0, par = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& f = corpus[i];
        const auto sand = maximal_sandwich(f);
        const MeshFunction sh = sharp_maximal(f);
        for (std::size_t k = 0; k < f.size(); ++k)
            if (sand.lower[k] > 0) sharp = std::max(sharp, sh[k] / (2.0 * sand.lower[k]));
        par = std::max(par, max_diff(sand.lower, maximal_sandwich(f, Exec::serial).lower));
        par = std::max(par, max_diff(sh, sharp_maximal(f, Exec::serial)));
    }
    // The cube scan is quadratic in the cell count; keep its mesh small.
    for (const auto& f : make_corpus(c.seed, 3, c.n, std::min(c.L, 1), std::min(c.J, c.n == 1 ? 3 : 2))) {
        std::vector<int> a(static_cast<std::size_t>(c.n), 1);
        mref = std::max(mref, max_diff(maximal_dyadic(f, a), reference::maximal(f, -f.L() - 5, a)));
    }
    s.at_most("sharp_le_twice_maximal", "M#f <= 2 Mf cell-wise (max ratio)", sharp, 1.0 + 1e-12);
    s.at_most("maximal_vs_cube_scan", "dyadic maximal against a scan of every cube", mref, 1e-12);
    s.at_most("parallel_matches_serial", "plumbing", par, 0.0);

    // Empirical operator constants and their refinement stability.
    const BMLExponents e = c.exponents.front();
    if (nontrivial(e)) {
        auto constants = [&](int J) {
            const auto fs = make_corpus(c.seed, c.corpus, c.n, c.L, J);
            double m = 0.0, sh2 = 0.0;
            for (const auto& f : fs) {
                const double nf = bml_norm(f, e).total;
                m = std::max(m, bml_norm(maximal_dyadic(f), e).total / nf);
                sh2 = std::max(sh2, nf / bml_norm(sharp_maximal(f), e).total);
            }
            return std::pair{m, sh2};
        };
        const auto [m0, s0] = constants(c.J);
        const auto [m1, s1] = constants(c.J + 2);
        s.empirical("maximal_bml_constant", "M_D bounded on the BML space (sup ratio at J)", m0, kInf, std::isfinite(m0));
        s.empirical("maximal_bml_refinement_drift", "same sup at J+2, relative change", rel(m0, m1), 0.1,
                    rel(m0, m1) < 0.1);
        s.empirical("sharp_reverse_constant", "||f|| <= C ||M# f|| (sup ratio at J)", s0, kInf, std::isfinite(s0));
        s.empirical("sharp_reverse_refinement_drift", "same sup at J+2, relative change", rel(s0, s1), 0.1,
                    rel(s0, s1) < 0.1);
    }

    auto cotlar = [&](int J) {
        double C = 0.0;
        for (const auto& f : make_corpus(c.seed, c.corpus, 1, c.L, J)) {
            const MeshFunction Tmax = maximal_transform(f);
            const MeshFunction Tf = hilbert_transform(f, Sampling::cell_center).values;
            const MeshFunction M2 = powered_maximal(Tf, 2.0);
            const MeshFunction Mf = maximal_dyadic(f);
            for (std::size_t k = 0; k < f.size(); ++k) {
                const double rhs = M2[k] + Mf[k];
                if (rhs > 0) C = std::max(C, Tmax[k] / rhs);
            }
        }
        return C;
    };
    const double c0 = cotlar(c.J), c1 = cotlar(c.J + 2);
    s.empirical("cotlar_constant", "maximal truncations <= C (M_2(Tf) + Mf)", c0, kInf, std::isfinite(c0));
    s.empirical("cotlar_refinement_drift", "same constant at J+2, relative change", rel(c0, c1), 0.1, rel(c0, c1) < 0.1);

    const auto kc = check_kernel(hilbert_kernel(), 2000, c.seed);
    s.at_most("kernel_size_bound", "|K(x,y)| <= A |x-y|^{-1}", kc.worst_size_ratio, 1.0 + 1e-12);
    s.at_most("kernel_regularity_bound", "Hoelder regularity with delta = 1", kc.worst_regularity_ratio, 1.0 + 1e-12);

    double sandwich = 0.0, bref = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto b = bmo_norm(corpus[i]);
        sandwich = std::max(sandwich, b.lower - b.upper);
        if (i < 3) bref = std::max(bref, rel(b.lower, reference::bmo_lower(corpus[i], -c.L - 2, c.J)));
    }
    s.at_most("bmo_sandwich", "BMO lower <= upper (max of lower - upper)", sandwich, 0.0);
    s.at_most("bmo_vs_cube_scan", "BMO lower against a scan of every cube", bref, 1e-12);

    // Pointwise bound for the fractional integral through the Morrey norm.
    const double alpha = 0.5, t = 1.5;
    const BMLExponents m11{1, 1, t, kInf};
    double Cfrac = 0.0;
    for (const auto& f0 : line) {
        const MeshFunction f = f0.abs();
        const MeshFunction If = fractional_integral(f, alpha).values;
        const MeshFunction Mf = maximal_sandwich(f).lower;
        const double nm = bml_norm(f, m11).total;
        const double th = t * alpha;
        for (std::size_t k = 0; k < f.size(); ++k)
            if (Mf[k] > 0) Cfrac = std::max(Cfrac, If[k] / (std::pow(nm, th) * std::pow(Mf[k], 1.0 - th)));
    }
    s.empirical("fractional_pointwise_constant", "I_a f <= C ||f||^{ta} (Mf)^{1-ta} with t=1.5, a=1/2", Cfrac, kInf,
                std::isfinite(Cfrac));
}

void blocks_suite(Suite& s, const VerifyConfig& c) {
    const int L = std::max(c.L, 3), J = c.J;
    int invalid = 0;
    double dM = 0.0, dT = 0.0, recM = 0.0, recT = 0.0;
    for (const auto& e : c.exponents) {
        if (!nontrivial(e) || e.p <= 1.0 || std::isinf(e.p)) continue;
        for (int i = 0; i < 3; ++i) {
            const auto g = synthesize(
                gen::RandomStep{mix_seed(c.seed, 50 + static_cast<std::uint64_t>(i)), -1, 1, Region::of(DyadicCube{0, {1}}), 0, 0}, 1, L, J);
            const auto canon = canonical_decomposition(g, e, 0);
            const Block b = canon.terms.front().block;
            const auto m = decompose_maximal_of_block(b, e);
            for (const auto& t : m.terms) invalid += !validate_block(t.block, e).ok;
            dM = std::max(dM, rel(m.cost, m.closed_form_cost));
            recM = std::max(recM, max_diff(reconstruct(m, g), maximal_dyadic(b.payload)));
            const auto tdec = decompose_T_of_block(b, e);
            for (const auto& t : tdec.terms) invalid += !validate_block(t.block, e).ok;
            dT = std::max(dT, rel(tdec.cost, tdec.closed_form_cost));
            recT = std::max(recT, max_diff(reconstruct(tdec, g), hilbert_transform(b.payload).values));
        }
    }
    s.at_most("operator_blocks_valid", "every block of the M_D and T decompositions is a block (invalid count)",
              invalid, 0);
    s.at_most("maximal_decomposition_closed_form", "decomposition cost of M_D b against its geometric sum", dM, 1e-10);
    s.at_most("T_decomposition_closed_form", "decomposition cost of T b against its geometric sum", dT, 1e-10);
    s.at_most("maximal_decomposition_reconstruction", "sum of weighted blocks reproduces M_D b", recM, 1e-12);
    s.at_most("T_decomposition_reconstruction", "sum of weighted blocks reproduces T b", recT, 1e-12);

    const auto corpus = make_corpus(c.seed, std::min(c.corpus, 20), c.n, c.L, c.J);
    double gap = 0.0, duality = 0.0;
    std::vector<double> ratios;
    for (const auto& e : c.exponents) {
        if (!nontrivial(e) || e.p <= 1.0) continue;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const auto& g = corpus[i];
            const double up = block_norm_upper(g, e).value;
            const double lo = block_norm_lower(g, e, default_test_family(g, e, c.seed, 10));
            gap = std::max(gap, (lo - up) / up);
            if (lo > 0) ratios.push_back(up / lo);
            const auto& f = corpus[(i + 1) % corpus.size()];
            duality = std::max(duality, std::abs(pairing(f, g)) / (bml_norm(f, e).total * up));
        }
    }
    s.at_most("lower_le_upper", "block norm lower bound <= upper bound (relative excess)", gap, 1e-12);
    s.at_most("duality_pairing", "|int f g| <= ||f||_M ||g||_H upper (max ratio)", duality, 1.0 + 1e-12);
    std::sort(ratios.begin(), ratios.end());
    const double med = ratios.empty() ? 1.0 : ratios[ratios.size() / 2];
    s.empirical("koethe_gap_median", "block space is the Koethe dual: median upper/lower", med, kInf, std::isfinite(med));
}

void hardy_suite(Suite& s, const VerifyConfig& c) {
    const Region Q({Interval{Rational(0), Rational(1)}});
    const int L = 6, J = 8;
    const MeshFunction omega = synthesize(gen::Indicator{Q}, 1, L, J);
    const auto spot = homogeneity_constant(Q, omega, 16);
    s.at_most("homogeneity_spot_value", "c(Q, M=16) = (16/pi) ln(8.5/7.5)",
              std::abs(spot.constant - 16.0 / std::numbers::pi * std::log(8.5 / 7.5)), 1e-10);

    double hmin = kInf;
    for (int M : {16, 64})
        for (int i = 0; i < 20; ++i) {
            const auto om = synthesize(gen::RandomStep{mix_seed(c.seed, 200 + static_cast<std::uint64_t>(i)), 0, 1, Q, J - 4, 0.5}, 1, L, J);
            MeshFunction ind(1, L, J);
            for (std::size_t k = 0; k < om.size(); ++k) ind[k] = om[k] > 0 ? 1.0 : 0.0;
            if (ind.is_zero()) continue;
            hmin = std::min(hmin, homogeneity_constant(Q, ind, M).constant);
        }
    s.empirical("homogeneity_random_sets", "Hilbert transform is homogeneous: min c over random sets", hmin, 0.2,
                hmin >= 0.2);

    const MeshFunction af = synthesize(gen::Closure{[](const std::array<double, 2>& x) {
                                           return x[0] >= 0 && x[0] < 0.5 ? 1.0 : (x[0] >= 0.5 && x[0] < 1 ? -1.0 : 0.0);
                                       }},
                                       1, L, J);
    const Atom a = Atom::from_mesh(Q, af);
    s.at_most("atom_valid", "Haar function is an L^inf atom (failures)", validate_atom(a).ok ? 0 : 1, 0);

    std::vector<double> lm, le;
    for (int M : c.M) {
        const auto st = factorization_step(a, M, c.exponents.front(), false);
        lm.push_back(std::log(static_cast<double>(M)));
        le.push_back(std::log(st.cert.envelope_constant));
    }
    double slope = 0.0;
    if (lm.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lm.size(); ++i) {
            mx += lm[i];
            my += le[i];
        }
        mx /= lm.size();
        my /= lm.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lm.size(); ++i) {
            sxy += (lm[i] - mx) * (le[i] - my);
            sxx += (lm[i] - mx) * (lm[i] - mx);
        }
        slope = sxy / sxx;
    }
    s.empirical("envelope_slope", "envelope constant decays like 1/M (log-log slope in [-1.3, -0.7])", slope, -0.7,
                slope >= -1.3 && slope <= -0.7);

    const auto search = search_M({{1.0, a}}, 3, 0.75, L, c.exponents.front());
    double rec = 0.0, worst_ratio = 0.0;
    bool decreasing = search.M != 0;
    double prev = search.state.initial_bound;
    for (const auto& r : search.state.rounds) {
        rec = std::max(rec, r.reconstruction_defect);
        worst_ratio = std::max(worst_ratio, r.ratio);
        decreasing = decreasing && r.certified_bound < prev;
        prev = r.certified_bound;
    }
    s.at_most("factorization_reconstruction", "initial atoms = factor terms + residual, every round", rec, 1e-9);
    s.empirical("factorization_searched_M", "smallest M with every round ratio <= 0.75", search.M, 1024,
                search.M != 0);
    s.empirical("factorization_contraction", "worst per-round ratio at the searched M", worst_ratio, 0.75,
                decreasing && worst_ratio <= 0.75);

    // int [b,T](g) h = -int b (g T*h - h T g), with T* = -T.
    const auto line = make_corpus(c.seed, 2 * std::min(c.corpus, 20) + 1, 1, c.L, c.J);
    double ident = 0.0;
    const MeshFunction& b = line.front();
    for (std::size_t i = 1; i + 1 < line.size(); i += 2) {
        MeshFunction g = line[i], h = line[i + 1];
        for (std::size_t k = 0; k < g.size(); ++k) (g.edge(static_cast<std::int64_t>(k)) < Rational(0) ? h : g)[k] = 0.0;
        const MeshFunction lhs = commutator(b, g).values;
        const MeshFunction Tg = hilbert_transform(g).values;
        const MeshFunction Th = hilbert_transform(h).values;
        const double l = pairing(lhs, h);
        MeshFunction inner(1, c.L, c.J);
        for (std::size_t k = 0; k < g.size(); ++k) inner[k] = g[k] * (-Th[k]) - h[k] * Tg[k];
        const double r = -pairing(b, inner);
        ident = std::max(ident, std::abs(l - r));
    }
    s.at_most("commutator_kernel_identity", "int [b,T](g) h = -int b (g T*h - h Tg)", ident, 1e-10);

    // Symbol meeting the atom cube, so the pairing sees it.
    const MeshFunction bb = synthesize(gen::DyadicIndicator{DyadicCube{1, {0}}}, 1, 8, 4);
    const MeshFunction fa = synthesize(gen::Closure{[](const std::array<double, 2>& x) {
                                           return x[0] >= 0 && x[0] < 0.5 ? 1.0 : (x[0] >= 0.5 && x[0] < 1 ? -1.0 : 0.0);
                                       }},
                                       1, 8, 4);
    const double diag = commutator_lower_diagnostic(bb, {Atom::from_mesh(Q, fa)}, 16, c.exponents.front());
    const double bmo = bmo_norm(bb).lower;
    s.empirical("commutator_lower_diagnostic", "BMO lower / commutator pairing diagnostic", bmo / diag, kInf,
                diag > 0 && std::isfinite(bmo / diag));
}

}  // namespace

Report run_suite(const std::string& suite, const VerifyConfig& config) {
    if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
        throw std::invalid_argument("unknown suite '" + suite + "'");
    if (config.n != 1 && config.n != 2) throw std::invalid_argument("verify: n must be 1 or 2");
    if (config.corpus < 2) throw std::invalid_argument("verify: corpus must be at least 2");
    if (config.exponents.empty()) throw std::invalid_argument("verify: no exponents");
    Report report;
    report.suite = suite;
    report.config = config;
    Suite s(report, config);
    const bool all = suite == "all";
    if (all || suite == "lorentz") {
        s.section("lorentz");
        lorentz_suite(s, config);
    }
    if (all || suite == "bml") {
        s.section("bml");
        bml_suite(s, config);
    }
    if (all || suite == "operators") {
        s.section("operators");
        operators_suite(s, config);
    }
    if (all || suite == "blocks") {
        s.section("blocks");
        blocks_suite(s, config);
    }
    if (all || suite == "hardy") {
        s.section("hardy");
        hardy_suite(s, config);
    }
    return report;
}

}  // namespace bmllab
