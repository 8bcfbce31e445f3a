#include "bmllab/reference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace bmllab::reference {

namespace {

// ||.||_{p,q} of the step function with value v on a set of measure w, for
// each (v, w); values are merged and sorted here.
double lorentz_of(const std::vector<std::pair<double, double>>& vw, const LorentzExponents& e) {
    std::map<double, double, std::greater<>> levels;
    for (const auto& [v, w] : vw)
        if (v != 0.0 && w > 0.0) levels[std::abs(v)] += w;
    if (levels.empty()) return 0.0;
    if (std::isinf(e.p)) return levels.begin()->first;
    double t = 0.0;
    if (std::isinf(e.q)) {
        double best = 0.0;
        for (const auto& [v, w] : levels) {
            t += w;
            best = std::max(best, v * std::pow(t, 1.0 / e.p));
        }
        return best;
    }
    // int_{t0}^{t1} s^{q/p - 1} ds = (p/q)(t1^{q/p} - t0^{q/p})
    double acc = 0.0;
    for (const auto& [v, w] : levels) {
        const double t1 = t + w;
        acc += std::pow(v, e.q) * (e.p / e.q) * (std::pow(t1, e.q / e.p) - std::pow(t, e.q / e.p));
        t = t1;
    }
    return std::pow(acc, 1.0 / e.q);
}

struct Range {
    std::int64_t lo[2] = {0, 0};
    std::int64_t hi[2] = {1, 1};
};

// Cell indices whose cells may meet the box (clipped to the mesh).
Range cells_near(const MeshFunction& f, const Region& box) {
    Range r;
    const double h = f.cell_side().to_double();
    const double origin = std::ldexp(1.0, f.L());
    for (int d = 0; d < f.dim(); ++d) {
        const double lo = (box.side(d).lo.to_double() + origin) / h;
        const double hi = (box.side(d).hi.to_double() + origin) / h;
        r.lo[d] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(lo)) - 1, 0, f.side_cells());
        r.hi[d] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(hi)) + 1, 0, f.side_cells());
    }
    return r;
}

template <class Fn>
void for_cells(const MeshFunction& f, const Region& box, Fn&& fn) {
    const Range r = cells_near(f, box);
    for (std::int64_t i0 = r.lo[0]; i0 < r.hi[0]; ++i0)
        for (std::int64_t i1 = r.lo[1]; i1 < r.hi[1]; ++i1) {
            const std::size_t idx = f.index(i0, i1);
            const Rational w = overlap(box, f.cell_region(idx));
            if (w > Rational(0)) fn(idx, w.to_double());
        }
}

std::vector<Region> cubes_meeting(const Region& box, int k, const std::vector<int>& a_in) {
    const int n = box.dim();
    std::vector<int> a = a_in.empty() ? std::vector<int>(static_cast<std::size_t>(n), 0) : a_in;
    const double scale = std::ldexp(1.0, k);
    std::int64_t lo[2] = {0, 0}, hi[2] = {0, 0};
    for (int d = 0; d < n; ++d) {
        const double shift = a[static_cast<std::size_t>(d)] / 3.0;
        lo[d] = static_cast<std::int64_t>(std::floor(box.side(d).lo.to_double() * scale - shift)) - 1;
        hi[d] = static_cast<std::int64_t>(std::ceil(box.side(d).hi.to_double() * scale - shift)) + 1;
    }
    std::vector<Region> out;
    for (std::int64_t m0 = lo[0]; m0 <= hi[0]; ++m0)
        for (std::int64_t m1 = (n == 2 ? lo[1] : 0); m1 <= (n == 2 ? hi[1] : 0); ++m1) {
            ShiftedCube c{k, n == 2 ? std::vector<std::int64_t>{m0, m1} : std::vector<std::int64_t>{m0}, a};
            Region q = Region::of(c);
            if (overlap(q, box) > Rational(0)) out.push_back(std::move(q));
        }
    return out;
}

}  // namespace

double lorentz_norm(const MeshFunction& f, const LorentzExponents& e) {
    std::vector<std::pair<double, double>> vw;
    for (std::size_t i = 0; i < f.size(); ++i) vw.emplace_back(f[i], f.cell_volume());
    return lorentz_of(vw, e);
}

std::vector<Region> cubes_meeting_domain(const MeshFunction& f, int k, const std::vector<int>& a) {
    return cubes_meeting(f.domain(), k, a);
}

double bml_level(const MeshFunction& f, const BMLExponents& e, int k, const std::vector<int>& a) {
    double acc = 0.0;
    for (const Region& q : cubes_meeting_domain(f, k, a)) {
        std::vector<std::pair<double, double>> vw;
        for_cells(f, q, [&](std::size_t idx, double w) { vw.emplace_back(f[idx], w); });
        const double norm = lorentz_of(vw, e.lorentz());
        if (norm == 0.0) continue;
        const double term = std::pow(q.measure().to_double(), 1.0 / e.t - 1.0 / e.p) * norm;
        acc = std::isinf(e.r) ? std::max(acc, term) : acc + std::pow(term, e.r);
    }
    return acc;
}

double bml_window(const MeshFunction& f, const BMLExponents& e, int k_lo, int k_hi, const std::vector<int>& a) {
    double acc = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) {
        const double v = bml_level(f, e, k, a);
        acc = std::isinf(e.r) ? std::max(acc, v) : acc + v;
    }
    return std::isinf(e.r) ? acc : std::pow(acc, 1.0 / e.r);
}

MeshFunction maximal(const MeshFunction& f, int k_lo, const std::vector<int>& a) {
    MeshFunction out(f.dim(), f.L(), f.J());
    for (std::size_t c = 0; c < f.size(); ++c) {
        const Region cell = f.cell_region(c);
        double best = 0.0;
        for (int k = k_lo; k <= f.J() + 2; ++k)
            for (const Region& q : cubes_meeting(cell, k, a)) {
                double mass = 0.0;
                for_cells(f, q, [&](std::size_t idx, double w) { mass += std::abs(f[idx]) * w; });
                best = std::max(best, mass / q.measure().to_double());
            }
        out[c] = best;
    }
    return out;
}

namespace {

double Phi(double u) { return u == 0.0 ? 0.0 : u * std::log(std::abs(u)) - u; }

void require_line(const MeshFunction& f) {
    if (f.dim() != 1) throw std::invalid_argument("reference: n = 1 only");
}

}  // namespace

std::vector<double> hilbert_centers(const MeshFunction& f) {
    require_line(f);
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = f.center(static_cast<std::int64_t>(i));
        double acc = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) {
            if (f[j] == 0.0) continue;
            const double a = f.edge(static_cast<std::int64_t>(j)).to_double();
            const double b = f.edge(static_cast<std::int64_t>(j) + 1).to_double();
            acc += f[j] * std::log(std::abs((x - a) / (x - b)));
        }
        out[i] = acc / std::numbers::pi;
    }
    return out;
}

std::vector<double> hilbert_averages(const MeshFunction& f) {
    require_line(f);
    const double h = f.cell_side().to_double();
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double xa = f.edge(static_cast<std::int64_t>(i)).to_double();
        const double xb = f.edge(static_cast<std::int64_t>(i) + 1).to_double();
        double acc = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) {
            if (f[j] == 0.0) continue;
            const double a = f.edge(static_cast<std::int64_t>(j)).to_double();
            const double b = f.edge(static_cast<std::int64_t>(j) + 1).to_double();
            // int_{xa}^{xb} ln|(x-a)/(x-b)| dx
            acc += f[j] * ((Phi(xb - a) - Phi(xb - b)) - (Phi(xa - a) - Phi(xa - b)));
        }
        out[i] = acc / (std::numbers::pi * h);
    }
    return out;
}

double fractional_integral_at(const MeshFunction& f, double alpha, double x) {
    require_line(f);
    auto G = [&](double y) {
        const double u = x - y;
        return -(u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0)) * std::pow(std::abs(u), alpha) / alpha;
    };
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        if (f[j] == 0.0) continue;
        const double a = f.edge(static_cast<std::int64_t>(j)).to_double();
        const double b = f.edge(static_cast<std::int64_t>(j) + 1).to_double();
        acc += f[j] * (G(b) - G(a));
    }
    return acc;
}

double bmo_lower(const MeshFunction& b, int k_lo, int k_hi) {
    const int n = b.dim();
    std::vector<std::vector<int>> offsets;
    for (int a0 = 0; a0 < 3; ++a0)
        for (int a1 = 0; a1 < (n == 2 ? 3 : 1); ++a1) offsets.push_back(n == 2 ? std::vector<int>{a0, a1} : std::vector<int>{a0});
    double best = 0.0;
    for (const auto& a : offsets)
        for (int k = k_lo; k <= k_hi; ++k)
            for (const Region& q : cubes_meeting_domain(b, k, a)) {
                const double vol = q.measure().to_double();
                std::vector<std::pair<double, double>> vw;
                double inside = 0.0, mass = 0.0;
                for_cells(b, q, [&](std::size_t idx, double w) {
                    vw.emplace_back(b[idx], w);
                    inside += w;
                    mass += b[idx] * w;
                });
                const double mean = mass / vol;
                double osc = std::abs(mean) * (vol - inside);  // zero outside the domain
                for (const auto& [v, w] : vw) osc += std::abs(v - mean) * w;
                best = std::max(best, osc / vol);
            }
    return best;
}

}  // namespace bmllab::reference
