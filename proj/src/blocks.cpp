#include "bmllab/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "bmllab/lorentz.hpp"
#include "bmllab/ops.hpp"

namespace bmllab {

namespace {

constexpr double kRelTol = 1e-12;

struct DualExps {
    LorentzExponents lorentz;  // (p', q')
    double t = 0.0;            // t'
    double r = 0.0;            // r'
};

DualExps dual_of(const BMLExponents& e) {
    check_bml(e);
    if (!(e.p > 1.0) || !(e.q >= 1.0) || !(e.r > 1.0))
        throw std::invalid_argument("blocks: need p > 1, q >= 1 and r > 1 for the dual exponents");
    const BMLExponents d = dual(e);
    return {{d.p, d.q}, d.t, d.r};
}

// 1/t' - 1/p' = 1/p - 1/t.
double coefficient_power(const BMLExponents& e) { return 1.0 / e.p - 1.0 / e.t; }

// Half-open cell range of a mesh-aligned box along each axis; throws when the box
// is not aligned or leaves the domain.
std::array<std::array<std::int64_t, 2>, 2> cell_box(const MeshFunction& f, const Region& R) {
    std::array<std::array<std::int64_t, 2>, 2> out{{{0, 1}, {0, 1}}};
    const Rational scale = Rational::pow2(f.J());
    for (int d = 0; d < f.dim(); ++d) {
        const Rational lo = R.side(d).lo * scale + Rational(f.origin_cell());
        const Rational hi = R.side(d).hi * scale + Rational(f.origin_cell());
        if (lo.den() != 1 || hi.den() != 1) throw std::invalid_argument("blocks: cube not aligned with the mesh");
        if (lo.num() < 0 || hi.num() > f.side_cells())
            throw DomainTooSmall("blocks: cube leaves the domain", f.L() + 1);
        out[static_cast<std::size_t>(d)] = {lo.num(), hi.num()};
    }
    return out;
}


double lorentz_on_cells(const MeshFunction& f, const std::vector<std::size_t>& cells, const LorentzExponents& le) {
    std::vector<detail::Mass> m;
    m.reserve(cells.size());
    for (std::size_t i : cells)
        if (f[i] != 0.0) m.push_back({f[i], 1});
    if (m.empty()) return 0.0;
    return detail::lorentz_of_masses(m, f.cell_volume(), le);
}

struct CanonicalCube {
    std::array<std::int64_t, 2> key;
    std::vector<std::size_t> cells;
    double lambda;
};

std::vector<CanonicalCube> canonical_cubes(const MeshFunction& g, const BMLExponents& e, int j) {
    if (j < -g.L() || j > g.J()) throw std::invalid_argument("canonical_decomposition: scale outside [-L, J]");
    const DualExps de = dual_of(e);
    const int shift = g.J() - j;
    std::map<std::array<std::int64_t, 2>, std::vector<std::size_t>> groups;
    for (std::size_t i : g.support()) {
        auto c = g.coords(i);
        std::array<std::int64_t, 2> key{0, 0};
        for (int d = 0; d < g.dim(); ++d)
            key[static_cast<std::size_t>(d)] = (c[static_cast<std::size_t>(d)] - g.origin_cell()) >> shift;
        groups[key].push_back(i);
    }
    const double vol = std::ldexp(1.0, -j * g.dim());
    const double power = std::pow(vol, coefficient_power(e));
    std::vector<CanonicalCube> out;
    for (auto& [key, cells] : groups) {
        const double norm = lorentz_on_cells(g, cells, de.lorentz);
        if (norm > 0.0) out.push_back({key, std::move(cells), power * norm});
    }
    return out;
}

double lp_sum(const std::vector<double>& x, double r) {
    if (std::isinf(r)) {
        double m = 0.0;
        for (double v : x) m = std::max(m, std::abs(v));
        return m;
    }
    KahanSum s;
    for (double v : x) s.add(std::pow(std::abs(v), r));
    return s.value();
}

void require_valid(const Block& b, const BMLExponents& e, const char* what) {
    const BlockCheck c = validate_block(b, e);
    if (!c.ok) throw std::invalid_argument(std::string(what) + ": input is not a valid block");
}

}  // namespace

std::optional<DyadicCube> as_dyadic(const Region& R) {
    if (!R.is_cube()) return std::nullopt;
    const Rational side = R.side(0).hi - R.side(0).lo;
    int j = 0;
    // side = 2^{-j}
    if (side.num() == 1) {
        std::int64_t d = side.den();
        while (d > 1 && d % 2 == 0) d /= 2, ++j;
        if (d != 1) return std::nullopt;
    } else if (side.den() == 1) {
        std::int64_t v = side.num();
        while (v > 1 && v % 2 == 0) v /= 2, --j;
        if (v != 1) return std::nullopt;
    } else {
        return std::nullopt;
    }
    DyadicCube c{j, {}};
    for (int d = 0; d < R.dim(); ++d) {
        const Rational m = R.side(d).lo / side;
        if (m.den() != 1) return std::nullopt;
        c.m.push_back(m.num());
    }
    return c;
}

BlockCheck validate_block(const Block& b, const BMLExponents& e) {
    const DualExps de = dual_of(e);
    BlockCheck c;
    c.block_exponent = 1.0 / de.lorentz.p - 1.0 / de.t;
    c.coefficient_exponent = -c.block_exponent;
    if (b.cube.dim() != b.payload.dim() || !b.cube.is_cube()) return c;
    c.supported = true;
    for (std::size_t i : b.payload.support())
        if (overlap_measure(b.cube, b.payload, i) != b.payload.cell_region(i).measure()) {
            c.supported = false;
            break;
        }
    c.norm = lorentz_norm(b.payload, de.lorentz);
    c.bound = std::pow(b.cube.measure().to_double(), c.block_exponent);
    c.slack = c.bound - c.norm;
    c.ok = c.supported && c.norm <= c.bound * (1.0 + kRelTol);
    return c;
}

double decomposition_cost(const std::vector<BlockTerm>& terms, double analytic_tail, double r_dual) {
    std::vector<double> l;
    l.reserve(terms.size());
    for (const auto& t : terms) l.push_back(t.lambda);
    if (std::isinf(r_dual)) return std::max(lp_sum(l, r_dual), analytic_tail);
    return std::pow(lp_sum(l, r_dual) + analytic_tail, 1.0 / r_dual);
}

MeshFunction reconstruct(const BlockDecomposition& d, const MeshFunction& like) {
    MeshFunction out(like.dim(), like.L(), like.J());
    for (const auto& t : d.terms) {
        if (!t.block.payload.same_mesh(out)) throw std::invalid_argument("reconstruct: mesh mismatch");
        for (std::size_t i : t.block.payload.support()) out[i] += t.lambda * t.block.payload[i];
    }
    return out;
}

BlockDecomposition canonical_decomposition(const MeshFunction& g, const BMLExponents& e, int j) {
    const DualExps de = dual_of(e);
    BlockDecomposition d;
    d.r_dual = de.r;
    const Rational side = Rational::pow2(-j);
    for (auto& c : canonical_cubes(g, e, j)) {
        std::vector<Rational> corner;
        for (int k = 0; k < g.dim(); ++k) corner.push_back(Rational(c.key[static_cast<std::size_t>(k)]) * side);
        BlockTerm t;
        t.lambda = c.lambda;
        t.level = j;
        t.block.cube = Region::cube(corner, side);
        t.block.payload = MeshFunction(g.dim(), g.L(), g.J());
        for (std::size_t i : c.cells) t.block.payload[i] = g[i] / c.lambda;
        d.terms.push_back(std::move(t));
    }
    d.cost = decomposition_cost(d.terms, 0.0, d.r_dual);
    return d;
}

BlockUpper block_norm_upper(const MeshFunction& g, const BMLExponents& e, Exec exec) {
    const DualExps de = dual_of(e);
    BlockUpper best{0.0, g.J()};
    if (g.is_zero()) return best;
    const int count = g.J() + g.L() + 1;
    std::vector<double> cost(static_cast<std::size_t>(count));
    parallel_for(cost.size(), exec, [&](std::size_t s) {
        const int j = -g.L() + static_cast<int>(s);
        std::vector<double> l;
        for (const auto& c : canonical_cubes(g, e, j)) l.push_back(c.lambda);
        cost[s] = std::isinf(de.r) ? lp_sum(l, de.r) : std::pow(lp_sum(l, de.r), 1.0 / de.r);
    });
    best.value = kInf;
    for (std::size_t s = 0; s < cost.size(); ++s)
        if (cost[s] < best.value) best = {cost[s], -g.L() + static_cast<int>(s)};
    return best;
}

std::vector<MeshFunction> default_test_family(const MeshFunction& g, const BMLExponents& e, std::uint64_t seed,
                                              int random_count) {
    const DualExps de = dual_of(e);
    std::vector<MeshFunction> fam;
    if (g.is_zero()) return fam;
    for (int j = -g.L(); j <= g.J(); ++j) {
        for (const auto& c : canonical_cubes(g, e, j)) {
            std::vector<std::int64_t> m(c.key.begin(), c.key.begin() + g.dim());
            fam.push_back(synthesize(gen::DyadicIndicator{DyadicCube{j, m}}, g.dim(), g.L(), g.J()));
        }
    }
    std::mt19937_64 rng(seed);
    for (int i = 0; i < random_count; ++i) {
        gen::RandomStep rs;
        rs.seed = rng();
        rs.block_log2 = static_cast<int>(rng() % 3);
        rs.zero_fraction = 0.3;
        fam.push_back(synthesize(rs, g.dim(), g.L(), g.J()));
    }
    MeshFunction ext(g.dim(), g.L(), g.J());
    for (std::size_t i : g.support())
        ext[i] = (g[i] > 0 ? 1.0 : -1.0) * std::pow(std::abs(g[i]), de.lorentz.p - 1.0);
    fam.push_back(std::move(ext));
    return fam;
}

double block_norm_lower(const MeshFunction& g, const BMLExponents& e, const std::vector<MeshFunction>& family,
                        Exec exec) {
    if (family.empty()) throw std::invalid_argument("block_norm_lower: empty test family");
    if (!nontrivial(e)) throw std::invalid_argument("block_norm_lower: trivial exponents");
    std::vector<double> ratio(family.size(), 0.0);
    parallel_for(family.size(), exec, [&](std::size_t i) {
        const double pair = std::abs(pairing(family[i], g));
        if (pair == 0.0) return;
        const NormBreakdown nb = bml_norm(family[i], e, Exec::serial);
        if (nb.total > 0.0) ratio[i] = pair / nb.total;
    });
    return *std::max_element(ratio.begin(), ratio.end());
}

BlockDecomposition decompose_maximal_of_block(const Block& b, const BMLExponents& e) {
    require_valid(b, e, "decompose_maximal_of_block");
    const auto Q = as_dyadic(b.cube);
    if (!Q) throw std::invalid_argument("decompose_maximal_of_block: block cube must be dyadic");
    const DualExps de = dual_of(e);
    const MeshFunction& f = b.payload;
    const int n = f.dim();
    const MeshFunction Mb = maximal_dyadic(f);
    const double mass = f.l1();

    BlockDecomposition d;
    d.r_dual = de.r;
    const double qvol = b.cube.measure().to_double();
    // Ancestors Q_k of side 2^k l(Q) stay inside the domain while side <= 2^L.
    const int k_max = f.L() + Q->j;
    auto ancestor = [&](int k) {
        DyadicCube a{Q->j - k, {}};
        for (auto m : Q->m) a.m.push_back(m >> k);
        return Region::of(a);
    };
    std::vector<double> raw;  // measured lambda_k
    std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(k_max + 1));
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (Mb[i] == 0.0) continue;
        const Region cell = f.cell_region(i);
        for (int k = 0; k <= k_max; ++k)
            if (ancestor(k).contains(cell)) {
                cells[static_cast<std::size_t>(k)].push_back(i);
                break;
            }
    }
    for (int k = 0; k <= k_max; ++k) {
        const double vol = qvol * std::ldexp(1.0, k * n);
        raw.push_back(std::pow(vol, coefficient_power(e)) * lorentz_on_cells(Mb, cells[static_cast<std::size_t>(k)], de.lorentz));
    }
    // On the annulus k >= 1, M_D b = ||b||_1 / |Q_k|, which gives lambda_k = K 2^{-kn/t}.
    const double K = mass * lorentz_constant(de.lorentz) * std::pow(1.0 - std::ldexp(1.0, -n), 1.0 / de.lorentz.p) *
                     std::pow(qvol, -1.0 / e.t);
    double c = raw[0];
    for (int k = 1; k <= k_max; ++k) {
        const double scaled = raw[static_cast<std::size_t>(k)] * std::exp2(k * n / e.t);
        c = std::max(c, scaled);
        if (K > 0) d.geometric_defect = std::max(d.geometric_defect, std::abs(scaled - K) / K);
    }
    c = std::max(c, K);
    if (c == 0.0) return d;
    for (int k = 0; k <= k_max; ++k) {
        const auto& cs = cells[static_cast<std::size_t>(k)];
        if (cs.empty()) continue;
        const double ck = c * std::exp2(-k * n / e.t);
        BlockTerm t;
        t.lambda = ck;
        t.level = k;
        t.block.cube = ancestor(k);
        t.block.payload = MeshFunction(n, f.L(), f.J());
        for (std::size_t i : cs) t.block.payload[i] = Mb[i] / ck;
        d.terms.push_back(std::move(t));
    }
    const double ratio = std::exp2(-n * de.r / e.t);
    // Annuli beyond the domain: k > k_max.
    d.analytic_tail = std::pow(c, de.r) * std::pow(ratio, k_max + 1) / (1.0 - ratio);
    d.cost = decomposition_cost(d.terms, d.analytic_tail, d.r_dual);
    d.closed_form_cost = c / std::pow(1.0 - ratio, 1.0 / de.r);
    d.near_constant = raw[0] / std::pow(qvol, 1.0 / de.lorentz.p - 1.0 / de.t);
    d.envelope_constant = 0.0;
    for (int k = 1; k <= k_max; ++k)
        for (std::size_t i : cells[static_cast<std::size_t>(k)])
            d.envelope_constant = std::max(d.envelope_constant, Mb[i] * std::ldexp(1.0, k * n) * qvol / mass);
    return d;
}

BlockDecomposition decompose_T_of_block(const Block& b, const BMLExponents& e) {
    require_valid(b, e, "decompose_T_of_block");
    const MeshFunction& f = b.payload;
    if (f.dim() != 1) throw std::invalid_argument("decompose_T_of_block: only n = 1 is supported");
    const DualExps de = dual_of(e);
    const Rational lo = b.cube.side(0).lo, hi = b.cube.side(0).hi;
    const Rational len = hi - lo;
    const Rational mid = (lo + hi) / Rational(2);
    auto dilate = [&](int k) {  // 2^k Q about its center
        const Rational half = len * Rational::pow2(k - 1);
        return Region({Interval{mid - half, mid + half}});
    };
    const Region twoQ = dilate(1);
    cell_box(f, twoQ);  // aligned and inside the domain, or throws

    const MeshFunction Tb = hilbert_transform(f).values;
    const double qlen = len.to_double();
    const double mass = f.l1();
    const double cq = lorentz_constant(de.lorentz);
    const double pw = coefficient_power(e);

    // Partition of the domain cells: level 0 is 2Q, level k >= 1 is 2^{k+1}Q \ 2^k Q.
    const Rational dom_lo = f.edge(0), dom_hi = f.edge(f.side_cells());
    int k_in = 0;  // last level whose outer cube lies inside the domain
    while (true) {
        const Region R = dilate(k_in + 2);
        if (R.side(0).lo < dom_lo || R.side(0).hi > dom_hi) break;
        ++k_in;
    }
    int k_last = k_in;  // last level meeting the domain
    while (dilate(k_last + 1).side(0).lo > dom_lo || dilate(k_last + 1).side(0).hi < dom_hi) ++k_last;
    std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(k_last + 1));
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Region cell = f.cell_region(i);
        for (int k = 0; k <= k_last; ++k)
            if (dilate(k + 1).contains(cell)) {
                cells[static_cast<std::size_t>(k)].push_back(i);
                break;
            }
    }
    // Envelope of a whole annulus from |Tb(x)| <= ||b||_1 / (pi dist(x, Q)).
    auto envelope = [&](int k) {
        const double outer = qlen * std::ldexp(1.0, k + 1);
        const double ann = qlen * std::ldexp(1.0, k);
        const double dist = qlen * (std::ldexp(1.0, k - 1) - 0.5);
        return std::pow(outer, pw) * cq * std::pow(ann, 1.0 / de.lorentz.p) * mass / (std::numbers::pi * dist);
    };
    std::vector<double> lam(static_cast<std::size_t>(k_last + 1));
    for (int k = 0; k <= k_last; ++k) {
        const double outer = qlen * std::ldexp(1.0, k + 1);
        lam[static_cast<std::size_t>(k)] =
            k <= k_in ? std::pow(outer, pw) * lorentz_on_cells(Tb, cells[static_cast<std::size_t>(k)], de.lorentz)
                      : envelope(k);
    }
    double K = 0.0;
    for (int k = 1; k <= k_in; ++k) K = std::max(K, lam[static_cast<std::size_t>(k)] * std::exp2(k / e.t));
    for (int k = k_in + 1; k <= k_in + 64; ++k) K = std::max(K, envelope(k) * std::exp2(k / e.t));
    double defect = 0.0;
    for (int k = 1; k <= k_in; ++k)
        if (K > 0) defect = std::max(defect, 1.0 - lam[static_cast<std::size_t>(k)] * std::exp2(k / e.t) / K);

    BlockDecomposition d;
    d.r_dual = de.r;
    d.geometric_defect = defect;
    const double lambda0 = lam[0];
    for (int k = 0; k <= k_last; ++k) {
        const auto& cs = cells[static_cast<std::size_t>(k)];
        const double ck = k == 0 ? lambda0 : K * std::exp2(-k / e.t);
        if (ck == 0.0) continue;
        BlockTerm t;
        t.lambda = ck;
        t.level = k;
        t.block.cube = dilate(k + 1);
        t.block.payload = MeshFunction(1, f.L(), f.J());
        for (std::size_t i : cs) t.block.payload[i] = Tb[i] / ck;
        if (t.block.payload.is_zero()) continue;
        d.terms.push_back(std::move(t));
    }
    const double ratio = std::exp2(-de.r / e.t);
    d.analytic_tail = std::pow(K, de.r) * std::pow(ratio, k_last + 1) / (1.0 - ratio);
    d.cost = decomposition_cost(d.terms, d.analytic_tail, d.r_dual);
    d.closed_form_cost = std::pow(std::pow(lambda0, de.r) + std::pow(K, de.r) * ratio / (1.0 - ratio), 1.0 / de.r);
    d.near_constant = lorentz_on_cells(Tb, cells[0], de.lorentz) /
                      std::pow(2.0 * qlen, 1.0 / de.lorentz.p - 1.0 / de.t);
    // Pointwise annulus bound |Tb| <= C 2^{-k} |Q|^{-1} |Q|^{1/t}.
    for (int k = 1; k <= k_in; ++k)
        for (std::size_t i : cells[static_cast<std::size_t>(k)])
            d.envelope_constant =
                std::max(d.envelope_constant, std::abs(Tb[i]) * std::ldexp(1.0, k) * std::pow(qlen, 1.0 - 1.0 / e.t));
    return d;
}

Truncation truncate_decomposition(const BlockDecomposition& d, std::size_t N, const MeshFunction& like) {
    std::vector<std::size_t> order(d.terms.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(d.terms[a].lambda) > std::abs(d.terms[b].lambda); });
    Truncation out;
    BlockDecomposition kept;
    kept.r_dual = d.r_dual;
    out.remainder.r_dual = d.r_dual;
    out.remainder.analytic_tail = d.analytic_tail;
    for (std::size_t r = 0; r < order.size(); ++r)
        (r < N ? kept : out.remainder).terms.push_back(d.terms[order[r]]);
    out.partial = reconstruct(kept, like);
    out.remainder.cost = decomposition_cost(out.remainder.terms, out.remainder.analytic_tail, d.r_dual);
    out.tail = out.remainder.cost;
    return out;
}

}  // namespace bmllab
