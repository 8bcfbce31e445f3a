#include "bmllab/bml.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bmllab/lattice.hpp"

namespace bmllab {

std::string BMLExponents::str() const {
    auto s = [](double x) {
        if (std::isinf(x)) return std::string("inf");
        std::ostringstream os;
        os << x;
        return os.str();
    };
    return s(p) + "," + s(q) + "," + s(t) + "," + s(r);
}

void check_bml(const BMLExponents& e) {
    if (!(e.p > 0) || std::isinf(e.p)) throw std::invalid_argument("BML: p must be finite and positive");
    if (!(e.t > 0) || std::isinf(e.t)) throw std::invalid_argument("BML: t must be finite and positive");
    if (!(e.q > 0)) throw std::invalid_argument("BML: q must be positive");
    if (!(e.r > 0)) throw std::invalid_argument("BML: r must be positive");
}

bool nontrivial(const BMLExponents& e) {
    if (std::isinf(e.r)) return e.p <= e.t;
    return e.p < e.t && e.t < e.r;
}

BMLExponents dual(const BMLExponents& e) {
    return {conjugate(e.p), conjugate(e.q), conjugate(e.t), conjugate(e.r)};
}

namespace detail {

std::vector<std::vector<double>> level_terms(const MeshFunction& f, const BMLExponents& e, const std::vector<int>& a,
                                             int k_lo, int k_hi, Exec exec) {
    const lattice::Grid g(f, a);
    struct Item {
        int level;
        lattice::Key key;
    };
    std::vector<Item> items;
    std::vector<std::size_t> level_size;
    for (int k = k_lo; k <= k_hi; ++k) {
        const auto keys = lattice::support_boxes(g, f, k);
        level_size.push_back(keys.size());
        for (const auto& key : keys) items.push_back({k, key});
    }
    std::vector<double> term(items.size());
    const double unit = g.unit_volume();
    const LorentzExponents le = e.lorentz();
    const double power = f.dim() * (1.0 / e.t - 1.0 / e.p);
    parallel_for(items.size(), exec, [&](std::size_t i) {
        std::vector<Mass> m;
        lattice::box_masses(g, f, items[i].level, items[i].key, m);
        term[i] = std::exp2(-items[i].level * power) * lorentz_of_masses(m, unit, le);
    });
    std::vector<std::vector<double>> out;
    std::size_t pos = 0;
    for (std::size_t s : level_size) {
        out.emplace_back(term.begin() + static_cast<std::ptrdiff_t>(pos), term.begin() + static_cast<std::ptrdiff_t>(pos + s));
        pos += s;
    }
    return out;
}

std::vector<FineTerm> fine_terms(const MeshFunction& f, const BMLExponents& e, const std::vector<int>& a, Exec exec) {
    const lattice::Grid g(f, a);
    const auto pats = lattice::fine_patterns(g, f);
    std::vector<FineTerm> out(pats.size());
    const double unit = std::pow(3.0, -f.dim());
    const LorentzExponents le = e.lorentz();
    parallel_for(pats.size(), exec, [&](std::size_t i) {
        std::vector<Mass> m;
        lattice::pattern_masses(g, f, pats[i], m);
        out[i] = {lorentz_of_masses(m, unit, le), lattice::pattern_multiplicity(g, pats[i])};
    });
    return out;
}

}  // namespace detail

namespace {

double sum_pow(const std::vector<double>& v, double r) {
    KahanSum s;
    for (double x : v) s.add(std::pow(x, r));
    return s.value();
}

double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

// sum_{d >= 1} 2^{-d s} = 1 / (2^s - 1), s > 0
double geometric(double s) { return 1.0 / std::expm1(s * std::log(2.0)); }

}  // namespace

NormBreakdown bml_norm_on_grid(const MeshFunction& f, const BMLExponents& e, const std::vector<int>& a, Exec exec) {
    check_bml(e);
    NormBreakdown out;
    out.r_infinite = std::isinf(e.r);
    if (f.is_zero()) return out;
    if (!nontrivial(e)) {
        out.divergent = true;
        out.total = kInf;
        return out;
    }
    const int n = f.dim();
    const int J = f.J();
    const int kc = -f.L() - 2;
    const auto levels = detail::level_terms(f, e, a, kc, J, exec);
    const auto fine = detail::fine_terms(f, e, a, exec);

    if (out.r_infinite) {
        double mid = 0.0;
        for (const auto& lv : levels) mid = std::max(mid, max_of(lv));
        out.middle = mid;
        out.coarse_tail = max_of(levels.front()) * std::exp2(-n * (1.0 / e.p - 1.0 / e.t));
        double fmax = 0.0;
        for (const auto& ft : fine) fmax = std::max(fmax, ft.phi);
        out.fine_tail = fmax * std::exp2(-(J + 1) * n / e.t);
        out.total = std::max({out.coarse_tail, out.middle, out.fine_tail});
        return out;
    }

    const double r = e.r;
    KahanSum mid;
    for (const auto& lv : levels) mid.add(sum_pow(lv, r));
    out.middle = mid.value();
    // Coarser than the domain every cube is a stabilised piece whose r-th power
    // shrinks by 2^{-s} per level.
    const double s_coarse = n * r * (1.0 / e.p - 1.0 / e.t);
    out.coarse_tail = sum_pow(levels.front(), r) * geometric(s_coarse);
    // Finer than the mesh: sum_{d>=1} P(2^d) 2^{-(J+d) n r / t}.
    std::array<double, 3> G{};
    for (int m = 0; m <= n; ++m) G[static_cast<std::size_t>(m)] = geometric(n * r / e.t - m);
    KahanSum fs;
    const double scale = std::exp2(-J * n * r / e.t);
    for (const auto& ft : fine) {
        double mult = 0.0;
        for (int m = 0; m <= n; ++m) mult += ft.poly[static_cast<std::size_t>(m)] * G[static_cast<std::size_t>(m)];
        fs.add(std::pow(ft.phi, r) * mult * scale);
    }
    out.fine_tail = fs.value();
    out.total = std::pow(out.coarse_tail + out.middle + out.fine_tail, 1.0 / r);
    return out;
}

NormBreakdown bml_norm(const MeshFunction& f, const BMLExponents& e, Exec exec) {
    return bml_norm_on_grid(f, e, {}, exec);
}

TruncatedNorm bml_norm_truncated(const MeshFunction& f, const BMLExponents& e, int j_min, int j_max,
                                 const std::vector<int>& a) {
    check_bml(e);
    if (j_min > j_max) throw std::invalid_argument("bml_norm_truncated: need j_min <= j_max");
    if (f.J() - j_min > 56) throw std::invalid_argument("bml_norm_truncated: window too coarse");
    TruncatedNorm out;
    if (f.is_zero()) return out;
    if (!nontrivial(e)) {
        out.divergent = true;
        out.value = kInf;
        out.tail_bound = kInf;
        return out;
    }
    const int n = f.dim();
    const int J = f.J();
    const int kc = -f.L() - 2;
    const bool rinf = std::isinf(e.r);
    const double r = e.r;
    const int K0 = std::min(j_min, kc);
    const int K1 = std::max(j_max, J);
    // Explicit cube levels [K0, J] and pattern levels (J, K1].
    const auto explicit_levels = detail::level_terms(f, e, a, K0, J, Exec::parallel);
    const auto fine = detail::fine_terms(f, e, a, Exec::parallel);

    auto level_value = [&](int k) -> double {
        if (k <= J) {
            const auto& lv = explicit_levels[static_cast<std::size_t>(k - K0)];
            return rinf ? max_of(lv) : sum_pow(lv, r);
        }
        const double X = std::exp2(k - J);
        double acc = 0.0;
        for (const auto& ft : fine) {
            const double mult = ft.poly[0] + ft.poly[1] * X + ft.poly[2] * X * X;
            if (mult <= 0.0) continue;
            const double term = std::exp2(-k * n / e.t) * ft.phi;
            acc = rinf ? std::max(acc, term) : acc + mult * std::pow(term, r);
        }
        return acc;
    };

    KahanSum in, out_sum;
    double in_max = 0.0, out_max = 0.0;
    for (int k = K0; k <= K1; ++k) {
        const double v = level_value(k);
        const bool inside = k >= j_min && k <= j_max;
        if (rinf) {
            (inside ? in_max : out_max) = std::max(inside ? in_max : out_max, v);
        } else {
            (inside ? in : out_sum).add(v);
        }
    }
    // Closed-form remainders below K0 (stabilised pieces of level kc) and above K1.
    const double kc_level = rinf ? max_of(explicit_levels[static_cast<std::size_t>(kc - K0)])
                                 : sum_pow(explicit_levels[static_cast<std::size_t>(kc - K0)], r);
    if (rinf) {
        out_max = std::max(out_max, kc_level * std::exp2(-(kc - K0 + 1) * n * (1.0 / e.p - 1.0 / e.t)));
        double fmax = 0.0;
        for (const auto& ft : fine) fmax = std::max(fmax, ft.phi);
        out_max = std::max(out_max, fmax * std::exp2(-(K1 + 1) * n / e.t));
        out.value = in_max;
        out.tail_bound = out_max;
        return out;
    }
    const double s_coarse = n * r * (1.0 / e.p - 1.0 / e.t);
    out_sum.add(kc_level * std::exp2(-(kc - K0) * s_coarse) * geometric(s_coarse));
    const int D = K1 - J;
    const double scale = std::exp2(-J * n * r / e.t);
    for (const auto& ft : fine) {
        double mult = 0.0;
        for (int m = 0; m <= n; ++m) {
            const double rate = n * r / e.t - m;
            mult += ft.poly[static_cast<std::size_t>(m)] * std::exp2(-D * rate) * geometric(rate);
        }
        out_sum.add(std::pow(ft.phi, r) * mult * scale);
    }
    const double value_r = in.value();
    out.value = std::pow(value_r, 1.0 / r);
    // Allowance for the rounding of the two evaluation orders.
    out.tail_bound = out_sum.value() + 1e-12 * (value_r + out_sum.value());
    return out;
}

// ---------------------------------------------------------------------------

MeshFunction translate(const MeshFunction& f, const std::vector<std::int64_t>& cells) {
    if (static_cast<int>(cells.size()) != f.dim()) throw std::invalid_argument("translate: offset dimension");
    MeshFunction out(f.dim(), f.L(), f.J());
    const std::int64_t N = f.side_cells();
    std::int64_t reach = 0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        if (f[idx] == 0.0) continue;
        const auto xy = f.coords(idx);
        std::array<std::int64_t, 2> to{xy[0] + cells[0], f.dim() == 2 ? xy[1] + cells[1] : 0};
        bool inside = true;
        for (int d = 0; d < f.dim(); ++d) {
            const auto i = static_cast<std::size_t>(d);
            if (to[i] < 0 || to[i] >= N) {
                inside = false;
                reach = std::max(reach, to[i] < 0 ? -to[i] : to[i] - N + 1);
            }
        }
        if (inside) out[out.index(to[0], to[1])] = f[idx];
    }
    if (reach > 0) {
        int L = f.L();
        while ((std::int64_t{1} << (L + f.J())) - f.origin_cell() < reach) ++L;
        throw DomainTooSmall("translate: support leaves the domain", L);
    }
    return out;
}

MeshFunction dilate_dyadic(const MeshFunction& f, int m) {
    return MeshFunction(f.dim(), f.L() - m, f.J() + m, f.values());
}

MeshFunction convolve(const MeshFunction& f, const MeshFunction& g, Exec exec) {
    if (f.dim() != 1) throw std::invalid_argument("convolve: only n = 1 is supported");
    if (!f.same_mesh(g)) throw std::invalid_argument("convolve: mesh mismatch");
    const auto N = static_cast<std::size_t>(f.side_cells());
    // The convolution of two cell indicators is a tent over two cells with
    // average h/2 on each.
    std::vector<double> c(2 * N, 0.0);
    parallel_for(2 * N - 1, exec, [&](std::size_t s) {
        const std::size_t lo = s >= N ? s - N + 1 : 0;
        const std::size_t hi = std::min(s, N - 1);
        double acc = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) acc += g[i] * f[s - i];
        c[s] = acc;
    });
    MeshFunction out(1, f.L() + 1, f.J());
    const double half = 0.5 * std::ldexp(1.0, -f.J());
    for (std::size_t s = 0; s < 2 * N; ++s) out[s] = half * (c[s] + (s > 0 ? c[s - 1] : 0.0));
    return out;
}

double tail_norm(const MeshFunction& f, const BMLExponents& e, const Rational& R) {
    const Rational cells = R / f.cell_side();
    if (cells.den() != 1 || cells.num() < 0) throw std::invalid_argument("tail_norm: R must be a nonnegative multiple of the cell side");
    MeshFunction g = f;
    const std::int64_t o = f.origin_cell();
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const auto xy = g.coords(idx);
        bool inside = true;
        for (int d = 0; d < g.dim(); ++d) {
            const std::int64_t c = xy[static_cast<std::size_t>(d)] - o;
            if (c < -cells.num() || c >= cells.num()) inside = false;
        }
        if (inside) g[idx] = 0.0;
    }
    return bml_norm(g, e).total;
}

double translation_modulus(const MeshFunction& f, const BMLExponents& e, const Rational& b) {
    const Rational steps = b / f.cell_side();
    if (steps.den() != 1 || steps.num() < 0) throw std::invalid_argument("translation_modulus: b must be a nonnegative multiple of the cell side");
    const std::int64_t s = steps.num();
    if (s == 0 || f.is_zero()) return 0.0;
    int L = f.L();
    while (Rational::pow2(L) < Rational::pow2(f.L()) + b) ++L;
    const MeshFunction F = enlarge(f, L);
    double best = 0.0;
    const std::int64_t s1 = f.dim() == 2 ? s : 0;
    for (std::int64_t y0 = -s; y0 <= s; ++y0)
        for (std::int64_t y1 = -s1; y1 <= s1; ++y1) {
            if (y0 == 0 && y1 == 0) continue;
            std::vector<std::int64_t> y{y0};
            if (f.dim() == 2) y.push_back(y1);
            best = std::max(best, bml_norm(F - translate(F, y), e).total);
        }
    return best;
}

namespace {

// Scale of the smallest dyadic cube containing every nonzero cell of f and g.
int common_cube_scale(const MeshFunction& f, const MeshFunction& g, std::array<std::int64_t, 2>& corner_cell) {
    std::array<std::int64_t, 2> lo{INT64_MAX, INT64_MAX}, hi{INT64_MIN, INT64_MIN};
    const std::int64_t o = f.origin_cell();
    for (const MeshFunction* h : {&f, &g})
        for (std::size_t idx = 0; idx < h->size(); ++idx) {
            if ((*h)[idx] == 0.0) continue;
            const auto xy = h->coords(idx);
            for (int d = 0; d < f.dim(); ++d) {
                const auto i = static_cast<std::size_t>(d);
                lo[i] = std::min(lo[i], xy[i] - o);
                hi[i] = std::max(hi[i], xy[i] - o);
            }
        }
    for (int j = f.J(); j >= -f.L(); --j) {
        const int sh = f.J() - j;
        bool same = true;
        for (int d = 0; d < f.dim(); ++d) {
            const auto i = static_cast<std::size_t>(d);
            if ((lo[i] >> sh) != (hi[i] >> sh)) same = false;
        }
        if (same) {
            for (int d = 0; d < f.dim(); ++d) {
                const auto i = static_cast<std::size_t>(d);
                corner_cell[i] = ((lo[i] >> sh) << sh) + o;
            }
            return j;
        }
    }
    throw std::invalid_argument("separation_offset: supports do not lie in one dyadic cube");
}

double combine(double a, double b, double r) {
    return std::isinf(r) ? std::max(a, b) : std::pow(std::pow(a, r) + std::pow(b, r), 1.0 / r);
}

}  // namespace

Separation separation_offset(const MeshFunction& f, const MeshFunction& g, const BMLExponents& e, double eps) {
    check_bml(e);
    if (!nontrivial(e)) throw std::invalid_argument("separation_offset: trivial exponents");
    if (!(eps > 0)) throw std::invalid_argument("separation_offset: eps must be positive");
    if (!f.same_mesh(g)) throw std::invalid_argument("separation_offset: mesh mismatch");
    const double nf = bml_norm(f, e).total;
    const double ng = bml_norm(g, e).total;
    const double rhs = (1.0 + eps) * combine(nf, ng, e.r);
    Separation sep;
    sep.rhs = rhs;
    if (f.is_zero() || g.is_zero()) {
        sep.lhs = bml_norm(f + g, e).total;
        return sep;
    }
    std::array<std::int64_t, 2> corner{0, 0};
    const int j = common_cube_scale(f, g, corner);
    const std::int64_t side = std::int64_t{1} << (f.J() - j);
    constexpr int kMaxExtraL = 16;
    for (int i = 0; i < 62; ++i) {
        const std::int64_t y = side << i;
        // Smallest domain holding y + Q.
        int L = f.L();
        while ((std::int64_t{1} << (L + f.J())) + (corner[0] - f.origin_cell()) + y + side >
               (std::int64_t{1} << (L + f.J() + 1)))
            ++L;
        if (L > f.L() + kMaxExtraL) break;
        const MeshFunction F = enlarge(f, L), G = enlarge(g, L);
        std::vector<std::int64_t> shift(static_cast<std::size_t>(f.dim()), 0);
        shift[0] = y;
        const double lhs = bml_norm(translate(F, shift) + G, e).total;
        if (lhs <= rhs) {
            if (L > f.L()) throw DomainTooSmall("separation_offset: separation needs a larger domain", L);
            sep.shift_cells = y;
            sep.lhs = lhs;
            return sep;
        }
    }
    throw DomainTooSmall("separation_offset: no admissible offset within the search range", f.L() + kMaxExtraL);
}

std::vector<std::int64_t> ell_r_positions(const BMLExponents& e, int count, double eps, int L) {
    std::vector<std::int64_t> pos{0};
    const MeshFunction unit = synthesize(gen::ShiftedIndicators{{{0}}, {1.0}}, 1, L, 0);
    MeshFunction acc = unit;
    for (int i = 1; i < count; ++i) {
        const Separation s = separation_offset(unit, acc, e, eps * std::ldexp(1.0, -i));
        pos.push_back(s.shift_cells);
        acc += translate(unit, {s.shift_cells});
    }
    return pos;
}

MeshFunction ell_r_embedding(const std::vector<std::int64_t>& positions, const std::vector<double>& a, int L) {
    gen::ShiftedIndicators s;
    for (auto x : positions) s.offsets.push_back({x});
    s.coefficients = a;
    return synthesize(s, 1, L, 0);
}

}  // namespace bmllab
