#include "bmllab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "bmllab/lattice.hpp"
#include "bmllab/lorentz.hpp"

namespace bmllab {

namespace {

using lattice::Grid;
using lattice::Key;
using detail::Mass;

enum class Stat { average, fractional, oscillation };

struct StatSpec {
    Stat kind = Stat::average;
    double alpha = 0.0;
};

// Statistic of a cube whose nonzero content is `m`, with B mass units of volume u each.
double stat_value(const StatSpec& s, const std::vector<Mass>& m, double B, double u, int n) {
    if (m.empty()) return 0.0;
    switch (s.kind) {
        case Stat::average: {
            double a = 0.0;
            for (const auto& x : m) a += static_cast<double>(x.w) * std::abs(x.v);
            return a / B;
        }
        case Stat::fractional: {
            double a = 0.0;
            for (const auto& x : m) a += static_cast<double>(x.w) * std::abs(x.v);
            return std::pow(B * u, s.alpha / n - 1.0) * a * u;
        }
        case Stat::oscillation: {
            double sum = 0.0, covered = 0.0;
            for (const auto& x : m) {
                sum += static_cast<double>(x.w) * x.v;
                covered += static_cast<double>(x.w);
            }
            const double mean = sum / B;
            double dev = 0.0;
            for (const auto& x : m) dev += static_cast<double>(x.w) * std::abs(x.v - mean);
            return (dev + (B - covered) * std::abs(mean)) / B;
        }
    }
    return 0.0;
}

struct Record {
    int k;
    Key key;
    double value;
};

struct GridScan {
    int k_lo = 0;
    std::vector<std::vector<Record>> levels;  // levels[k - k_lo]
    std::vector<lattice::Pattern> patterns;
    std::vector<double> pattern_values;
};

// Statistic of every support cube of the grid at scales [k_lo, k_hi]. With
// `coarse`, the level k_lo = coarse scale absorbs the sup over all coarser
// cubes (exact: those contain the same stabilised piece). With `fine`, the
// sub-mesh patterns are evaluated at scale J + 1 (their values do not depend
// on the scale except through the fractional factor, which is largest there).
GridScan scan_grid(const MeshFunction& f, const Grid& g, const StatSpec& spec, int k_lo, int k_hi, bool coarse,
                   bool fine, Exec exec) {
    GridScan out;
    out.k_lo = k_lo;
    std::vector<Record> items;
    std::vector<std::size_t> sizes;
    for (int k = k_lo; k <= k_hi; ++k) {
        const auto keys = lattice::support_boxes(g, f, k);
        sizes.push_back(keys.size());
        for (const auto& key : keys) items.push_back({k, key, 0.0});
    }
    const double u = g.unit_volume();
    const int n = g.n;
    const bool extend = coarse && k_lo == g.coarse_scale() && spec.kind == Stat::oscillation;
    parallel_for(items.size(), exec, [&](std::size_t i) {
        std::vector<Mass> m;
        lattice::box_masses(g, f, items[i].k, items[i].key, m);
        double B = g.box_units(items[i].k);
        double v = stat_value(spec, m, B, u, n);
        if (extend && items[i].k == k_lo) {
            double mass = 0.0;
            for (const auto& x : m) mass += static_cast<double>(x.w) * std::abs(x.v);
            // Beyond the domain the oscillation is at most 2 * mass / B.
            for (int d = 1; d < 4000; ++d) {
                B *= std::exp2(n);
                if (2.0 * mass / B <= v) break;
                v = std::max(v, stat_value(spec, m, B, u, n));
            }
        }
        items[i].value = v;
    });
    std::size_t pos = 0;
    for (std::size_t s : sizes) {
        out.levels.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(pos),
                                items.begin() + static_cast<std::ptrdiff_t>(pos + s));
        pos += s;
    }
    if (fine) {
        out.patterns = lattice::fine_patterns(g, f);
        out.pattern_values.resize(out.patterns.size());
        const double pu = std::pow(3.0, -n) * std::ldexp(1.0, -(g.J + 1) * n);
        parallel_for(out.patterns.size(), exec, [&](std::size_t i) {
            std::vector<Mass> m;
            lattice::pattern_masses(g, f, out.patterns[i], m);
            out.pattern_values[i] = stat_value(spec, m, std::pow(3.0, n), pu, n);
        });
    }
    return out;
}

// out[cell] = max(out[cell], value) over every scanned cube meeting the cell.
void apply_to_cells(const MeshFunction& f, const Grid& g, const GridScan& scan, MeshFunction& out, Exec exec) {
    for (const auto& level : scan.levels) {
        // Cubes whose indices share parity on every axis never touch the same cell.
        for (int parity = 0; parity < (1 << g.n); ++parity) {
            std::vector<const Record*> batch;
            for (const auto& r : level) {
                const int p0 = static_cast<int>(r.key[0] & 1);
                const int p1 = g.n == 2 ? static_cast<int>(r.key[1] & 1) : 0;
                if ((p0 | (p1 << 1)) == parity && r.value > 0.0) batch.push_back(&r);
            }
            parallel_for(batch.size(), exec, [&](std::size_t i) {
                const Record& r = *batch[i];
                lattice::for_box_cells(g, f, r.k, r.key, [&](std::size_t idx, int) {
                    if (out[idx] < r.value) out[idx] = r.value;
                });
            });
        }
    }
    for (std::size_t i = 0; i < scan.patterns.size(); ++i) {
        const double v = scan.pattern_values[i];
        lattice::for_pattern_cells(g, f, scan.patterns[i], [&](std::size_t idx, int w) {
            if (w > 0 && out[idx] < v) out[idx] = v;
        });
    }
}

MeshFunction cube_sup(const MeshFunction& f, const std::vector<int>& a, const StatSpec& spec, Exec exec) {
    const Grid g(f, a);
    MeshFunction out(f.dim(), f.L(), f.J());
    if (f.is_zero()) return out;
    const auto scan = scan_grid(f, g, spec, g.coarse_scale(), f.J(), true, true, exec);
    apply_to_cells(f, g, scan, out, exec);
    return out;
}

std::vector<std::vector<int>> all_offsets(int n) {
    std::vector<std::vector<int>> out;
    for (int a = 0; a < 3; ++a) {
        if (n == 1) {
            out.push_back({a});
            continue;
        }
        for (int b = 0; b < 3; ++b) out.push_back({a, b});
    }
    return out;
}

void max_into(MeshFunction& acc, const MeshFunction& x) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = std::max(acc[i], x[i]);
}

void require_line(const MeshFunction& f, const char* what) {
    if (f.dim() != 1) throw std::invalid_argument(std::string(what) + ": only n = 1 is supported");
}

}  // namespace

MeshFunction maximal_dyadic(const MeshFunction& f, const std::vector<int>& a, Exec exec) {
    return cube_sup(f, a, {Stat::average, 0.0}, exec);
}

MaximalSandwich maximal_sandwich(const MeshFunction& f, Exec exec) {
    MeshFunction lower(f.dim(), f.L(), f.J());
    for (const auto& a : all_offsets(f.dim())) max_into(lower, maximal_dyadic(f, a, exec));
    MeshFunction upper = lower;
    upper *= std::pow(6.0, f.dim());
    return {lower, upper};
}

MeshFunction powered_maximal(const MeshFunction& f, double eta, const std::vector<int>& a) {
    if (!(eta > 0)) throw std::invalid_argument("powered_maximal: eta must be positive");
    if (eta == 1.0) return maximal_dyadic(f, a);
    return maximal_dyadic(f.pow_abs(eta), a).pow_abs(1.0 / eta);
}

MeshFunction fractional_maximal(const MeshFunction& f, double alpha, const std::vector<int>& a) {
    if (!(alpha > 0) || !(alpha < f.dim())) throw std::invalid_argument("fractional_maximal: need 0 < alpha < n");
    return cube_sup(f, a, {Stat::fractional, alpha}, Exec::parallel);
}

MeshFunction sharp_maximal(const MeshFunction& f, Exec exec) {
    MeshFunction out(f.dim(), f.L(), f.J());
    for (const auto& a : all_offsets(f.dim())) max_into(out, cube_sup(f, a, {Stat::oscillation, 0.0}, exec));
    return out;
}

// ---------------------------------------------------------------------------
// Fractional integral

namespace {

// int over u in (d - 1/2, d + 1/2] of |u|^{alpha - 1} du (cell of unit width).
double fractional_cell_weight(std::int64_t d, double alpha) {
    const double ad = static_cast<double>(d < 0 ? -d : d);
    if (d == 0) return 2.0 * std::pow(0.5, alpha) / alpha;
    const double lo = ad - 0.5;
    return std::pow(lo, alpha) * std::expm1(alpha * std::log1p(1.0 / lo)) / alpha;
}

}  // namespace

OperatorSample fractional_integral(const MeshFunction& f, double alpha) {
    OperatorSample out;
    out.values = MeshFunction(f.dim(), f.L(), f.J());
    out.sampling = Sampling::cell_center;
    const auto supp = f.support();
    if (f.dim() == 1) {
        if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("fractional_integral: need 0 < alpha < 1");
        const double scale = std::ldexp(1.0, 0) * std::pow(std::ldexp(1.0, -f.J()), alpha);
        const auto N = static_cast<std::size_t>(f.side_cells());
        parallel_for(N, Exec::parallel, [&](std::size_t i) {
            double acc = 0.0;
            for (std::size_t j : supp)
                acc += f[j] * fractional_cell_weight(static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j), alpha);
            out.values[i] = scale * acc;
        });
        out.exact = true;
        return out;
    }
    if (!(alpha > 0 && alpha < 2)) throw std::invalid_argument("fractional_integral: need 0 < alpha < 2");
    // Midpoint rule on an 8 x 8 subdivision of each source cell; the target
    // center never coincides with a sub-midpoint.
    constexpr int S = 8;
    const double h = std::ldexp(1.0, -f.J());
    const double w = (h / S) * (h / S);
    parallel_for(f.size(), Exec::parallel, [&](std::size_t i) {
        const auto xi = f.coords(i);
        const double x0 = f.center(xi[0]), x1 = f.center(xi[1]);
        double acc = 0.0;
        for (std::size_t j : supp) {
            const auto yj = f.coords(j);
            const double lo0 = f.edge(yj[0]).to_double(), lo1 = f.edge(yj[1]).to_double();
            double cell = 0.0;
            for (int u = 0; u < S; ++u)
                for (int v = 0; v < S; ++v) {
                    const double d0 = x0 - (lo0 + (u + 0.5) * h / S);
                    const double d1 = x1 - (lo1 + (v + 0.5) * h / S);
                    cell += std::pow(d0 * d0 + d1 * d1, 0.5 * (alpha - 2.0));
                }
            acc += f[j] * cell * w;
        }
        out.values[i] = acc;
    });
    out.exact = false;
    return out;
}

double fractional_integral_at(const MeshFunction& f, double alpha, const Rational& x) {
    require_line(f, "fractional_integral_at");
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("fractional_integral_at: need 0 < alpha < 1");
    // I f(x) = -sum_c jump(c) G(c) with G(y) = sgn(y - x) |y - x|^alpha / alpha.
    double acc = 0.0;
    const std::int64_t N = f.side_cells();
    for (std::int64_t c = 0; c <= N; ++c) {
        const double left = c > 0 ? f[static_cast<std::size_t>(c - 1)] : 0.0;
        const double right = c < N ? f[static_cast<std::size_t>(c)] : 0.0;
        const double jump = right - left;
        if (jump == 0.0) continue;
        const double d = (f.edge(c) - x).to_double();
        const double G = (d > 0 ? 1.0 : -1.0) * std::pow(std::abs(d), alpha) / alpha;
        acc -= jump * G;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Hilbert transform

double hilbert_cell_weight(std::int64_t d) {
    if (d == 0) return 0.0;
    const double s = d < 0 ? -1.0 : 1.0;
    const double a = static_cast<double>(d < 0 ? -d : d);
    if (a == 1.0) return s * 2.0 * std::numbers::ln2;
    // (a+1)ln(a+1) - 2a ln a + (a-1)ln(a-1), rearranged to avoid cancellation.
    return s * (a * std::log1p(-1.0 / (a * a)) + 2.0 * std::atanh(1.0 / a));
}

double hilbert_center_weight(std::int64_t d) {
    if (d == 0) return 0.0;
    return 2.0 * std::atanh(0.5 / static_cast<double>(d));
}

double hilbert_at(const MeshFunction& f, const Rational& x) {
    require_line(f, "hilbert_at");
    // T f(x) = (1/pi) sum over cell edges c of jump(c) * ln|x - c|.
    double acc = 0.0;
    const std::int64_t N = f.side_cells();
    for (std::int64_t c = 0; c <= N; ++c) {
        const double left = c > 0 ? f[static_cast<std::size_t>(c - 1)] : 0.0;
        const double right = c < N ? f[static_cast<std::size_t>(c)] : 0.0;
        const double jump = right - left;
        if (jump == 0.0) continue;
        const Rational d = x - f.edge(c);
        if (d == Rational(0)) throw std::domain_error("hilbert_at: evaluation at a jump point");
        acc += jump * std::log(std::abs(d.to_double()));
    }
    return acc / std::numbers::pi;
}

OperatorSample hilbert_transform(const MeshFunction& f, Sampling s, Exec exec) {
    require_line(f, "hilbert_transform");
    OperatorSample out;
    out.values = MeshFunction(1, f.L(), f.J());
    out.sampling = s;
    out.exact = true;
    const auto N = static_cast<std::size_t>(f.side_cells());
    std::vector<double> w(N);
    for (std::size_t d = 0; d < N; ++d)
        w[d] = s == Sampling::cell_average ? hilbert_cell_weight(static_cast<std::int64_t>(d))
                                           : hilbert_center_weight(static_cast<std::int64_t>(d));
    const auto supp = f.support();
    parallel_for(N, exec, [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t j : supp) acc += f[j] * (i >= j ? w[i - j] : -w[j - i]);
        out.values[i] = acc / std::numbers::pi;
    });
    return out;
}

OperatorSample truncated_transform(const MeshFunction& f, double zeta, Exec exec) {
    require_line(f, "truncated_transform");
    if (!(zeta > 0)) throw std::invalid_argument("truncated_transform: zeta must be positive");
    OperatorSample out;
    out.values = MeshFunction(1, f.L(), f.J());
    out.sampling = Sampling::cell_center;
    const auto N = static_cast<std::size_t>(f.side_cells());
    const double z = zeta * std::ldexp(1.0, f.J());  // radius in cell widths
    // Center of cell i against cell j = i - d: u = (x - y)/h ranges over (d - 1/2, d + 1/2].
    auto weight = [z](std::int64_t d) {
        if (d == 0) return 0.0;
        const double a = static_cast<double>(d < 0 ? -d : d);
        const double hi = a + 0.5;
        if (hi <= z) return 0.0;
        const double lo = std::max(a - 0.5, z);
        const double v = std::log(hi / lo);
        return d < 0 ? -v : v;
    };
    std::vector<double> w(N);
    for (std::size_t d = 0; d < N; ++d) w[d] = weight(static_cast<std::int64_t>(d));
    const auto supp = f.support();
    parallel_for(N, exec, [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t j : supp) acc += f[j] * (i >= j ? w[i - j] : -w[j - i]);
        out.values[i] = acc / std::numbers::pi;
    });
    return out;
}

MeshFunction maximal_transform(const MeshFunction& f, Exec exec) {
    require_line(f, "maximal_transform");
    MeshFunction out(1, f.L(), f.J());
    for (int k = f.J(); k >= -(f.L() + 1); --k) {
        const auto t = truncated_transform(f, std::ldexp(1.0, -k), exec);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], std::abs(t.values[i]));
    }
    return out;
}

OperatorSample commutator(const MeshFunction& b, const MeshFunction& f, Sampling s) {
    require_line(f, "commutator");
    const auto Tf = hilbert_transform(f, s);
    const auto Tbf = hilbert_transform(b.times(f), s);
    OperatorSample out;
    out.values = b.times(Tf.values) - Tbf.values;
    out.sampling = s;
    out.exact = true;
    return out;
}

// ---------------------------------------------------------------------------

double KernelDescriptor::kernel(double x, double y) const { return 1.0 / (std::numbers::pi * (x - y)); }

KernelDescriptor hilbert_kernel() {
    KernelDescriptor k;
    k.kind = "hilbert";
    k.delta = 1.0;
    k.size_constant = 1.0 / std::numbers::pi;
    // sup of (a + b)^2 / (a b) over b/a in [1/2, 2] is 9/2.
    k.regularity_constant = 4.5 / std::numbers::pi;
    return k;
}

KernelCheck check_kernel(const KernelDescriptor& k, std::size_t triples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto draw = [&](double lo, double hi) { return lo + (hi - lo) * unit_draw(rng()); };
    KernelCheck c;
    c.triples = triples;
    for (std::size_t i = 0; i < triples; ++i) {
        const double x = draw(-10, 10);
        const double y = x + (draw(0, 1) < 0.5 ? -1 : 1) * std::exp(draw(-6, 4));
        c.worst_size_ratio = std::max(c.worst_size_ratio, std::abs(k.kernel(x, y)) * std::abs(x - y) / k.size_constant);
        // x' with |x - x'| <= max(|x-y|, |x'-y|)/2: draw within half the distance.
        const double dx = (2 * draw(0, 1) - 1) * 0.5 * std::abs(x - y);
        const double xp = x + dx;
        if (xp != y && std::abs(dx) > 0) {
            const double lhs = std::abs(k.kernel(x, y) - k.kernel(xp, y));
            const double rhs = k.regularity_constant * std::pow(std::abs(dx), k.delta) /
                               std::pow(std::abs(x - y) + std::abs(xp - y), 1.0 + k.delta);
            c.worst_regularity_ratio = std::max(c.worst_regularity_ratio, lhs / rhs);
        }
        const double dy = (2 * draw(0, 1) - 1) * 0.25 * std::abs(x - y);
        const double yp = y + dy;
        if (yp != x && std::abs(dy) > 0) {
            const double lhs = std::abs(k.kernel(x, y) - k.kernel(x, yp));
            const double rhs = k.regularity_constant * std::pow(std::abs(dy), k.delta) /
                               std::pow(std::abs(x - y) + std::abs(x - yp), 1.0 + k.delta);
            c.worst_regularity_ratio = std::max(c.worst_regularity_ratio, lhs / rhs);
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// BMO and CMO diagnostics

BMOBounds bmo_norm(const MeshFunction& b, Exec exec) {
    BMOBounds out;
    if (b.is_zero()) return out;
    const int n = b.dim();
    double fine_sup = 0.0;
    for (const auto& a : all_offsets(n)) {
        const Grid g(b, a);
        const auto scan = scan_grid(b, g, {Stat::oscillation, 0.0}, g.coarse_scale(), b.J(), false, true, exec);
        for (const auto& lv : scan.levels)
            for (const auto& r : lv) out.lower = std::max(out.lower, r.value);
        for (double v : scan.pattern_values) fine_sup = std::max(fine_sup, v);
    }
    // Any cube Q of side < 2^{L+1} sits in a grid cube R of the scanned family (or
    // a sub-mesh pattern) with |R| <= 6^n |Q|, and osc_Q <= 2 (|R|/|Q|) osc_R.
    // Larger cubes have osc_Q <= 2 ||b||_1 / |Q|.
    out.upper = std::max(2.0 * std::pow(6.0, n) * std::max(out.lower, fine_sup),
                         2.0 * b.l1() / std::pow(std::ldexp(1.0, b.L() + 1), n));
    return out;
}

double median_value(const MeshFunction& b, const Region& R) {
    if (R.dim() != b.dim()) throw std::invalid_argument("median_value: dimension mismatch");
    std::vector<std::pair<double, Rational>> vals;
    Rational inside(0);
    for (std::size_t i = 0; i < b.size(); ++i) {
        const Rational w = overlap_measure(R, b, i);
        if (w == Rational(0)) continue;
        vals.push_back({b[i], w});
        inside += w;
    }
    const Rational total = R.measure();
    if (inside < total) vals.push_back({0.0, total - inside});
    if (vals.empty()) throw std::invalid_argument("median_value: empty region");
    std::sort(vals.begin(), vals.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    Rational run(0);
    for (const auto& [v, w] : vals) {
        run += w;
        if (Rational(2) * run >= total) return v;
    }
    return vals.back().first;
}

CMOProfile cmo_profile(const MeshFunction& b, const std::vector<int>& scales) {
    CMOProfile out;
    out.scales = scales;
    const std::size_t S = scales.size();
    out.small_scale.assign(S, 0.0);
    out.large_scale.assign(S, 0.0);
    out.far_field.assign(S, 0.0);
    if (b.is_zero()) return out;
    const int n = b.dim();
    for (const auto& a : all_offsets(n)) {
        const Grid g(b, a);
        const auto scan = scan_grid(b, g, {Stat::oscillation, 0.0}, g.coarse_scale(), b.J(), true, true, Exec::parallel);
        for (const auto& lv : scan.levels)
            for (const auto& r : lv) {
                for (std::size_t i = 0; i < S; ++i) {
                    if (r.k >= scales[i]) out.small_scale[i] = std::max(out.small_scale[i], r.value);
                    if (r.k <= scales[i]) out.large_scale[i] = std::max(out.large_scale[i], r.value);
                    // Disjoint from [-R, R)^n on some axis (third-cell units, origin at 3N/2).
                    const std::int64_t R3 = 3 * (std::int64_t{1} << (b.J() - scales[i])) ;
                    bool disjoint = false;
                    for (int d = 0; d < n; ++d) {
                        if (r.k > b.J()) continue;
                        const std::int64_t lo = g.lo3(r.k, r.key[static_cast<std::size_t>(d)], d) - 3 * (g.N / 2);
                        const std::int64_t hi = lo + g.side3(r.k);
                        if (hi <= -R3 || lo >= R3) disjoint = true;
                    }
                    if (disjoint) out.far_field[i] = std::max(out.far_field[i], r.value);
                }
            }
        for (double v : scan.pattern_values)
            for (std::size_t i = 0; i < S; ++i) out.small_scale[i] = std::max(out.small_scale[i], v);
        // Sub-mesh patterns far from the origin also count toward the far field.
        for (std::size_t p = 0; p < scan.patterns.size(); ++p)
            for (std::size_t i = 0; i < S; ++i) {
                const std::int64_t Rc = std::int64_t{1} << (b.J() - scales[i]);  // R in cells
                bool disjoint = false;
                for (int d = 0; d < n; ++d) {
                    const auto& sg = scan.patterns[p].seg[static_cast<std::size_t>(d)];
                    const std::int64_t lo = sg.first - b.origin_cell();
                    const std::int64_t hi = lo + sg.len;
                    if (hi <= -Rc || lo >= Rc) disjoint = true;
                }
                if (disjoint) out.far_field[i] = std::max(out.far_field[i], scan.pattern_values[p]);
            }
    }
    return out;
}

}  // namespace bmllab
