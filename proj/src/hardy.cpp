#include "bmllab/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <numbers>
#include <set>
#include <stdexcept>

#include "bmllab/lorentz.hpp"
#include "bmllab/ops.hpp"
#include "bmllab/parallel.hpp"

namespace bmllab {

namespace {

constexpr double kMeanTol = 1e-10;
constexpr double kSupTol = 1e-12;

std::int64_t whole_cells(const Rational& x, const Rational& cell, const char* what) {
    const Rational q = x / cell;
    if (q.den() != 1) throw std::invalid_argument(std::string(what) + ": not a whole number of cells");
    return q.num();
}

// log2 of a power of two, or nullopt.
std::optional<int> log2_exact(const Rational& x) {
    auto pow2 = [](std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; };
    if (x.num() == 1 && pow2(x.den())) return -static_cast<int>(std::log2(static_cast<double>(x.den())) + 0.5);
    if (x.den() == 1 && pow2(x.num())) return static_cast<int>(std::log2(static_cast<double>(x.num())) + 0.5);
    return std::nullopt;
}

// Piecewise-constant sum of weighted patches on the common refinement of their cells.
struct Piece {
    Rational lo, hi;
    double v;
};

std::vector<Piece> superpose(const std::vector<std::pair<double, const Patch*>>& parts) {
    std::set<Rational> edges;
    for (const auto& [w, p] : parts) {
        if (p->values.empty() || w == 0.0) continue;
        for (std::size_t i = 0; i <= p->values.size(); ++i)
            edges.insert(p->lo + p->cell * Rational(static_cast<std::int64_t>(i)));
    }
    std::vector<Rational> e(edges.begin(), edges.end());
    std::vector<Piece> out;
    if (e.size() < 2) return out;
    out.reserve(e.size() - 1);
    for (std::size_t k = 0; k + 1 < e.size(); ++k) out.push_back({e[k], e[k + 1], 0.0});
    std::vector<KahanSum> acc(out.size());
    for (const auto& [w, p] : parts) {
        if (p->values.empty() || w == 0.0) continue;
        const auto first = static_cast<std::size_t>(std::lower_bound(e.begin(), e.end(), p->lo) - e.begin());
        const Rational top = p->hi();
        for (std::size_t k = first; k + 1 < e.size() && e[k] < top; ++k) {
            const std::int64_t idx = ((e[k] - p->lo) / p->cell).floor();
            acc[k].add(w * p->values[static_cast<std::size_t>(idx)]);
        }
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k].v = acc[k].value();
    return out;
}

double pieces_l1(const std::vector<Piece>& ps) {
    KahanSum s;
    for (const auto& p : ps) s.add(std::abs(p.v) * (p.hi - p.lo).to_double());
    return s.value();
}

double pieces_sup(const std::vector<Piece>& ps) {
    double m = 0.0;
    for (const auto& p : ps) m = std::max(m, std::abs(p.v));
    return m;
}

EnvelopeCertificate envelope_of(const std::vector<const Patch*>& parts, const Rational& x0, const Rational& y0,
                                const Rational& R) {
    if (!(R > Rational(0))) throw std::invalid_argument("envelope_certificate: R must be positive");
    EnvelopeCertificate c;
    c.x0 = x0;
    c.y0 = y0;
    c.R = R;
    const Rational dist = x0 < y0 ? y0 - x0 : x0 - y0;
    c.M = (dist / R).to_double();
    if (!(c.M > 10.0)) throw std::invalid_argument("envelope_certificate: M must exceed 10");
    KahanSum mean, mass;
    const double r = R.to_double();
    for (const Patch* p : parts) {
        const double w = p->cell.to_double();
        for (std::size_t i = 0; i < p->values.size(); ++i) {
            const double v = p->values[i];
            if (v == 0.0) continue;
            mean.add(v * w);
            mass.add(std::abs(v) * w);
            const Rational a = p->lo + p->cell * Rational(static_cast<std::int64_t>(i));
            const Rational b = a + p->cell;
            const bool in0 = !(a < x0 - R) && !(x0 + R < b);
            const bool in1 = !(a < y0 - R) && !(y0 + R < b);
            if (!in0 && !in1) {
                c.envelope_constant = kInf;
                continue;
            }
            c.envelope_constant = std::max(c.envelope_constant, std::abs(v) * r);
        }
    }
    c.mean_zero_defect = std::abs(mean.value());
    c.certified = std::isfinite(c.envelope_constant) && c.mean_zero_defect <= kMeanTol * std::max(mass.value(), 1e-300);
    if (mass.value() == 0.0) c.certified = true;
    c.h1_bound_unit = c.certified ? c.envelope_constant * std::log(c.M) : kInf;
    return c;
}

// Payload of an atom laid out exactly over its cube.
Patch fit_to_cube(const Atom& a) {
    const Rational lo = a.cube.side(0).lo, hi = a.cube.side(0).hi;
    Patch p;
    p.lo = lo;
    p.cell = a.payload.cell;
    const std::int64_t len = whole_cells(hi - lo, p.cell, "atom cube");
    p.values.assign(static_cast<std::size_t>(len), 0.0);
    if (a.payload.values.empty()) return p;
    const std::int64_t off = whole_cells(a.payload.lo - lo, p.cell, "atom payload");
    for (std::size_t i = 0; i < a.payload.values.size(); ++i) {
        const double v = a.payload.values[i];
        const std::int64_t k = off + static_cast<std::int64_t>(i);
        if (k < 0 || k >= len) {
            if (v != 0.0) throw std::invalid_argument("atom payload leaves its cube");
            continue;
        }
        p.values[static_cast<std::size_t>(k)] = v;
    }
    return p;
}

int required_L(const std::vector<const Patch*>& parts) {
    int L = 0;
    for (const Patch* p : parts) {
        if (p->values.empty()) continue;
        const double ext = std::max(std::abs(p->lo.to_double()), std::abs(p->hi().to_double()));
        while (std::ldexp(1.0, L) < ext) ++L;
    }
    return L;
}

}  // namespace

double Patch::integral() const {
    KahanSum s;
    for (double v : values) s.add(v);
    return s.value() * cell.to_double();
}

double Patch::l1() const {
    KahanSum s;
    for (double v : values) s.add(std::abs(v));
    return s.value() * cell.to_double();
}

double Patch::sup() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

Patch to_patch(const MeshFunction& f) {
    if (f.dim() != 1) throw std::invalid_argument("to_patch: only n = 1 is supported");
    Patch p;
    p.cell = f.cell_side();
    const auto supp = f.support();
    if (supp.empty()) return p;
    p.lo = f.edge(static_cast<std::int64_t>(supp.front()));
    p.values.assign(f.values().begin() + static_cast<std::ptrdiff_t>(supp.front()),
                    f.values().begin() + static_cast<std::ptrdiff_t>(supp.back() + 1));
    return p;
}

MeshFunction to_mesh(const Patch& p, int L, int J) {
    MeshFunction f(1, L, J);
    if (p.values.empty()) return f;
    const Rational side = f.cell_side();
    const std::int64_t ratio = whole_cells(p.cell, side, "to_mesh cell");
    const std::int64_t first = whole_cells(p.lo - f.edge(0), side, "to_mesh origin");
    if (first < 0 || first + ratio * static_cast<std::int64_t>(p.values.size()) > f.side_cells())
        throw DomainTooSmall("to_mesh: patch leaves the domain", required_L({&p}));
    for (std::size_t i = 0; i < p.values.size(); ++i)
        for (std::int64_t k = 0; k < ratio; ++k)
            f[static_cast<std::size_t>(first + ratio * static_cast<std::int64_t>(i) + k)] = p.values[i];
    return f;
}

std::vector<double> hilbert_on(const Patch& src, const Patch& dst) {
    if (src.cell != dst.cell) throw std::invalid_argument("hilbert_on: cell lengths differ");
    const std::int64_t off = whole_cells(dst.lo - src.lo, src.cell, "hilbert_on offset");
    std::vector<double> out(dst.values.size(), 0.0);
    parallel_for(out.size(), Exec::parallel, [&](std::size_t i) {
        KahanSum s;
        for (std::size_t j = 0; j < src.values.size(); ++j)
            if (src.values[j] != 0.0)
                s.add(src.values[j] *
                      hilbert_cell_weight(off + static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j)));
        out[i] = s.value() / std::numbers::pi;
    });
    return out;
}

Atom Atom::from_mesh(const Region& cube, const MeshFunction& f) { return {cube, to_patch(f)}; }

AtomCheck validate_atom(const Atom& a) {
    AtomCheck c;
    if (a.cube.dim() != 1) return c;
    const Rational lo = a.cube.side(0).lo, hi = a.cube.side(0).hi;
    c.supported = true;
    for (std::size_t i = 0; i < a.payload.values.size(); ++i) {
        if (a.payload.values[i] == 0.0) continue;
        const Rational x = a.payload.lo + a.payload.cell * Rational(static_cast<std::int64_t>(i));
        if (x < lo || hi < x + a.payload.cell) c.supported = false;
    }
    const double vol = a.cube.measure().to_double();
    c.mean_defect = std::abs(a.payload.integral());
    c.sup_slack = 1.0 / vol - a.payload.sup();
    const double scale = std::max(a.payload.l1(), 1e-300);
    c.ok = c.supported && c.mean_defect <= kMeanTol * scale && c.sup_slack >= -kSupTol / vol;
    return c;
}

double h1_upper(const std::vector<WeightedAtom>& d) {
    KahanSum s;
    for (const auto& w : d) {
        if (!validate_atom(w.atom).ok) throw std::invalid_argument("h1_upper: invalid atom");
        s.add(std::abs(w.lambda));
    }
    return s.value();
}

EnvelopeCertificate envelope_certificate(const Patch& F, const Rational& x0, const Rational& y0, const Rational& R) {
    return envelope_of({&F}, x0, y0, R);
}

EnvelopeCertificate envelope_certificate(const MeshFunction& F, const Rational& x0, const Rational& y0,
                                         const Rational& R) {
    const Patch p = to_patch(F);
    return envelope_of({&p}, x0, y0, R);
}

Homogeneity homogeneity_constant(const Region& Q, const MeshFunction& omega, int M) {
    if (omega.dim() != 1 || Q.dim() != 1) throw std::invalid_argument("homogeneity_constant: only n = 1");
    if (M <= 10) throw std::invalid_argument("homogeneity_constant: M must exceed 10");
    const double mass = omega.l1();
    if (mass == 0.0) throw std::invalid_argument("homogeneity_constant: empty subset");
    const Rational len = Q.side(0).hi - Q.side(0).lo;
    const Rational mid = (Q.side(0).lo + Q.side(0).hi) / Rational(2);
    const Rational reach = Rational(M) * len / Rational(2);
    Homogeneity out;
    out.constant = kInf;
    out.sign_constant = true;
    for (const Rational x : {mid + reach, mid - reach}) {
        const double v = hilbert_at(omega, x);
        out.constant = std::min(out.constant, std::abs(v) * M * len.to_double() / mass);
        for (int k = 0; k <= 16; ++k) {
            const double w = hilbert_at(omega, x + len * Rational(k - 8, 16));
            if ((w > 0) != (v > 0) || w == 0.0) out.sign_constant = false;
        }
    }
    return out;
}

double indicator_block_upper(const Rational& lo, const Rational& hi, const BMLExponents& e) {
    check_bml(e);
    const BMLExponents d = dual(e);
    const LorentzExponents le{d.p, d.q};
    const double cq = lorentz_constant(le);
    const double len = (hi - lo).to_double();
    if (!(len > 0)) return 0.0;
    const int j_fine = static_cast<int>(std::ceil(-std::log2(len))) + 4;
    double best = kInf;
    for (int j = j_fine; j >= j_fine - 64; --j) {
        const Rational side = Rational::pow2(-j);
        const std::int64_t m0 = (lo / side).floor();
        const std::int64_t m1 = -((Rational(0) - hi) / side).floor();  // ceil(hi / side)
        if (m1 - m0 > 4096) continue;
        KahanSum s;
        double mx = 0.0;
        for (std::int64_t m = m0; m < m1; ++m) {
            const Rational a = max(lo, Rational(m) * side), b = min(hi, Rational(m + 1) * side);
            if (!(a < b)) continue;
            const double lam = std::pow(side.to_double(), 1.0 / e.p - 1.0 / e.t) * cq *
                               std::pow((b - a).to_double(), 1.0 / d.p);
            s.add(std::pow(lam, d.r));
            mx = std::max(mx, lam);
        }
        const double cost = std::isinf(d.r) ? mx : std::pow(s.value(), 1.0 / d.r);
        best = std::min(best, cost);
        if (m1 - m0 <= 2 && side.to_double() > 4.0 * std::max(std::abs(lo.to_double()), std::abs(hi.to_double())))
            break;  // coarser cubes only grow the cost
    }
    return best;
}

StepResult factorization_step(const Atom& a, int M, const BMLExponents& e, bool measure_cost) {
    if (M <= 10) throw std::invalid_argument("factorization_step: M must exceed 10");
    if (M % 2 != 0) throw std::invalid_argument("factorization_step: M must be even");
    if (a.cube.dim() != 1) throw std::invalid_argument("factorization_step: only n = 1 is supported");
    if (!validate_atom(a).ok) throw std::invalid_argument("factorization_step: invalid atom");
    const Patch A = fit_to_cube(a);
    const Rational len = a.cube.side(0).hi - a.cube.side(0).lo;
    const std::size_t cells = A.values.size();

    StepResult s;
    s.g.lo = A.lo + Rational(M) * len / Rational(2);
    s.g.cell = A.cell;
    s.g.values.assign(cells, 1.0);
    // T(chi of the far cube) at the center of Q, in closed form.
    s.Tg_center = -2.0 / std::numbers::pi * std::atanh(1.0 / M);
    s.h = A;
    for (double& v : s.h.values) v = -v / s.Tg_center;

    const std::vector<double> Tg = hilbert_on(s.g, A);
    const std::vector<double> Th = hilbert_on(s.h, s.g);
    s.h_Tg = A;
    s.F_near = A;
    for (std::size_t i = 0; i < cells; ++i) {
        s.h_Tg.values[i] = s.h.values[i] * Tg[i];
        s.F_near.values[i] = A.values[i] + s.h_Tg.values[i];
    }
    s.g_Th = s.g;
    s.g_Th.values = Th;
    s.F_far = s.g_Th;

    const Rational R = len / Rational(2);
    s.cert = envelope_of({&s.F_near, &s.F_far}, A.lo + R, s.g.lo + R, R);

    s.product_cost = std::numeric_limits<double>::quiet_NaN();
    if (measure_cost) {
        const auto lg = log2_exact(A.cell);
        if (lg) {
            const int J = -*lg;
            const int L = std::max(required_L({&s.h}), 1 - J);
            if (L + J + 1 <= 22) {
                const double hn = bml_norm(to_mesh(s.h, L, J), e).total;
                s.product_cost = indicator_block_upper(s.g.lo, s.g.hi(), e) * hn;
            }
        }
    }

    // Re-atomisation: mean-free parts on Q and on the far cube plus one dipole
    // atom on the hull carrying the mean exchanged between them.
    const double vol = len.to_double();
    const double mu = s.F_near.integral();
    const double mu_far = s.F_far.integral();
    const double mass = A.l1() + s.h_Tg.l1() + s.g_Th.l1();
    s.reatomization_defect = mass > 0 ? std::abs(mu + mu_far) / mass : 0.0;
    if (s.reatomization_defect > 1e-9)
        throw std::runtime_error("factorization_step: re-atomization failure, residual mean is not zero");
    auto push_local = [&](Patch p, double shift, const Region& cube) {
        for (double& v : p.values) v += shift;
        // Whatever mean survives rounding is set aside so the atom is mean-free.
        const double m = p.integral() / vol;
        if (m != 0.0) {
            for (double& v : p.values) v -= m;
            Patch rest = p;
            std::fill(rest.values.begin(), rest.values.end(), m);
            s.unatomized.push_back(std::move(rest));
        }
        const double lam = p.sup() * vol;
        if (lam == 0.0) return;
        for (double& v : p.values) v /= lam;
        s.residual_atoms.push_back({lam, {cube, std::move(p)}});
    };
    const Region Qr = a.cube;
    const Region Q0({Interval{s.g.lo, s.g.hi()}});
    push_local(s.F_near, -mu / vol, Qr);
    push_local(s.F_far, mu / vol, Q0);
    if (mu != 0.0) {
        Patch dip;
        dip.lo = A.lo;
        dip.cell = len;
        dip.values.assign(static_cast<std::size_t>(M / 2 + 1), 0.0);
        const double hull = vol * (M / 2 + 1);
        const double lam = std::abs(mu) / vol * hull;
        dip.values.front() = mu / vol / lam;
        dip.values.back() = -mu / vol / lam;
        s.residual_atoms.push_back({lam, {Region({Interval{A.lo, s.g.hi()}}), std::move(dip)}});
    }
    return s;
}

FactorizationState factorize(const std::vector<WeightedAtom>& d, int M, int rounds, int L, const BMLExponents& e) {
    if (M <= 10) throw std::invalid_argument("factorize: M must exceed 10");
    if (rounds < 0) throw std::invalid_argument("factorize: rounds must be nonnegative");
    FactorizationState st;
    st.M = M;
    st.initial_bound = h1_upper(d);
    std::vector<WeightedAtom> current;
    for (const auto& w : d)
        if (w.lambda != 0.0 && !w.atom.payload.values.empty()) current.push_back(w);
    if (current.empty()) return st;

    // Signed parts whose sum must vanish: f - sum of terms - residual.
    const std::vector<WeightedAtom> initial = current;
    std::vector<std::pair<double, const Patch*>> ledger;
    for (const auto& w : initial) ledger.push_back({w.lambda, &w.atom.payload});
    std::vector<std::unique_ptr<FactorRound>> kept;
    std::vector<const Patch*> set_aside;  // unatomized leftovers of earlier rounds
    double prev = st.initial_bound;
    for (int r = 0; r < rounds; ++r) {
        std::vector<StepResult> steps(current.size());
        std::vector<std::exception_ptr> errs(current.size());
        parallel_for(current.size(), Exec::parallel, [&](std::size_t i) {
            try {
                steps[i] = factorization_step(current[i].atom, M, e, false);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        });
        for (auto& ep : errs)
            if (ep) std::rethrow_exception(ep);
        FactorRound round;
        std::vector<WeightedAtom> next;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const double lam = current[i].lambda;
            FactorTerm t;
            t.lambda = lam;
            t.g = steps[i].g;
            t.h = steps[i].h;
            // g T*(h) - h T(g) = -(g T(h) + h T(g)) since T* = -T.
            t.product_on_h = steps[i].h_Tg;
            for (double& v : t.product_on_h.values) v *= -lam;
            t.product_on_g = steps[i].g_Th;
            for (double& v : t.product_on_g.values) v *= -lam;
            round.terms.push_back(std::move(t));
            round.certificates.push_back(steps[i].cert);
            for (auto& w : steps[i].residual_atoms) next.push_back({lam * w.lambda, std::move(w.atom)});
            for (auto& p : steps[i].unatomized) {
                for (double& v : p.values) v *= lam;
                round.unatomized.push_back(std::move(p));
            }
        }
        round.residual = std::move(next);
        round.certified_bound = h1_upper(round.residual);
        round.ratio = prev > 0 ? round.certified_bound / prev : 0.0;
        prev = round.certified_bound;

        std::vector<std::pair<double, const Patch*>> res;
        for (const auto& w : round.residual) res.push_back({w.lambda, &w.atom.payload});
        for (const auto& p : round.unatomized) res.push_back({1.0, &p});
        for (const auto& p : set_aside) res.push_back({1.0, p});
        round.residual_l1 = pieces_l1(superpose(res));
        for (const auto& p : round.unatomized) round.unatomized_l1 += p.l1();
        kept.push_back(std::make_unique<FactorRound>(std::move(round)));
        FactorRound& rr = *kept.back();
        for (const auto& t : rr.terms) {
            ledger.push_back({-1.0, &t.product_on_h});
            ledger.push_back({-1.0, &t.product_on_g});
        }
        for (const auto& p : rr.unatomized) {
            ledger.push_back({-1.0, &p});
            set_aside.push_back(&p);
        }
        auto check = ledger;
        for (const auto& w : rr.residual) check.push_back({-w.lambda, &w.atom.payload});
        rr.reconstruction_defect = pieces_sup(superpose(check));
        std::vector<const Patch*> all;
        for (const auto& p : check) all.push_back(p.second);
        rr.required_L = required_L(all);
        if (rr.required_L > L)
            st.warnings.push_back("round " + std::to_string(r + 1) + ": domain enlarged to L = " +
                                  std::to_string(rr.required_L));
        current = rr.residual;
    }
    for (auto& p : kept) st.rounds.push_back(std::move(*p));
    return st;
}

MSearch search_M(const std::vector<WeightedAtom>& d, int rounds, double target, int L, const BMLExponents& e) {
    MSearch out;
    for (int M = 16; M <= 1024; M *= 2) {
        FactorizationState st = factorize(d, M, rounds, L, e);
        double worst = 0.0;
        bool decreasing = true;
        double prev = st.initial_bound;
        for (const auto& r : st.rounds) {
            worst = std::max(worst, r.ratio);
            if (!(r.certified_bound < prev)) decreasing = false;
            prev = r.certified_bound;
        }
        out.worst_ratio.push_back({M, worst});
        if (worst <= target && decreasing) {
            out.M = M;
            out.state = std::move(st);
            return out;
        }
        out.state = std::move(st);
    }
    return out;
}

double commutator_lower_diagnostic(const MeshFunction& b, const std::vector<Atom>& atoms, int M,
                                   const BMLExponents& e) {
    if (b.dim() != 1) throw std::invalid_argument("commutator_lower_diagnostic: only n = 1 is supported");
    double best = 0.0;
    for (const Atom& a : atoms) {
        const StepResult s = factorization_step(a, M, e, false);
        // int b (g T*(h) - h T(g)) = -int b g T(h) - int b h T(g).
        const MeshFunction gTh = to_mesh(s.g_Th, b.L(), b.J());
        const MeshFunction hTg = to_mesh(s.h_Tg, b.L(), b.J());
        const double num = std::abs(pairing(b, gTh) + pairing(b, hTg));
        const double den = indicator_block_upper(s.g.lo, s.g.hi(), e) * bml_norm(to_mesh(s.h, b.L(), b.J()), e).total;
        if (den > 0) best = std::max(best, num / den);
    }
    return best;
}

}  // namespace bmllab
