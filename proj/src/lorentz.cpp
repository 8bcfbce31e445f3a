#include "bmllab/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace bmllab {

double conjugate(double p) {
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    if (!(p > 1.0)) throw std::invalid_argument("conjugate: exponent must be >= 1");
    return p / (p - 1.0);
}

void check_lorentz(const LorentzExponents& e) {
    if (!(e.p > 0) || !(e.q > 0)) throw std::invalid_argument("Lorentz exponents must be positive");
    if (std::isinf(e.p) && !std::isinf(e.q)) throw std::invalid_argument("p = inf requires q = inf");
}

double lorentz_constant(const LorentzExponents& e) {
    if (std::isinf(e.q)) return 1.0;
    return std::pow(e.p / e.q, 1.0 / e.q);
}

namespace {

// Shared closed form. For level k the caller supplies
//   rel[k] = c_k / c_K           (cumulative measure relative to the total)
//   growth[k] = (c_k - c_{k-1}) / c_{k-1}  (inf for k = 0)
// and total = measure of the support. Powers of ratios near 1 go through
// expm1/log1p so adjacent levels do not cancel.
double closed_form(const std::vector<double>& v, const std::vector<double>& rel, const std::vector<double>& growth,
                   double total, const LorentzExponents& e) {
    const std::size_t K = v.size();
    if (K == 0 || total == 0.0) return 0.0;
    if (std::isinf(e.p)) return v[0];
    const double vmax = v[0];
    if (std::isinf(e.q)) {
        double best = 0.0;
        for (std::size_t k = 0; k < K; ++k) best = std::max(best, (v[k] / vmax) * std::pow(rel[k], 1.0 / e.p));
        return vmax * std::pow(total, 1.0 / e.p) * best;
    }
    const double a = e.q / e.p;
    double s = 0.0, c = 0.0;  // Neumaier
    for (std::size_t k = 0; k < K; ++k) {
        double diff;
        if (k == 0) {
            diff = std::pow(rel[0], a);
        } else {
            diff = std::pow(rel[k - 1], a) * std::expm1(a * std::log1p(growth[k]));
        }
        const double term = std::pow(v[k] / vmax, e.q) * diff;
        const double t = s + term;
        c += std::abs(s) >= std::abs(term) ? (s - t) + term : (term - t) + s;
        s = t;
    }
    return vmax * std::pow(total, 1.0 / e.p) * std::pow((e.p / e.q) * (s + c), 1.0 / e.q);
}

std::vector<std::pair<double, Rational>> level_masses(const MeshFunction& f, const std::optional<Region>& R) {
    std::map<double, Rational, std::greater<>> acc;
    const Rational cell = Rational::pow2(-f.J() * f.dim());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = std::abs(f[i]);
        if (v == 0.0) continue;
        const Rational w = R ? overlap_measure(*R, f, i) : cell;
        if (w == Rational(0)) continue;
        acc[v] += w;
    }
    return {acc.begin(), acc.end()};
}

}  // namespace

Rational distribution(const MeshFunction& f, double alpha, const std::optional<Region>& R) {
    if (!(alpha >= 0)) throw std::invalid_argument("distribution: alpha must be >= 0");
    Rational m(0);
    const Rational cell = Rational::pow2(-f.J() * f.dim());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(std::abs(f[i]) > alpha)) continue;
        m += R ? overlap_measure(*R, f, i) : cell;
    }
    return m;
}

StepProfile rearrangement(const MeshFunction& f, const std::optional<Region>& R) {
    StepProfile p;
    Rational t(0);
    for (const auto& [v, w] : level_masses(f, R)) {
        t += w;
        p.points.push_back({v, t});
    }
    return p;
}

double lorentz_norm(const StepProfile& prof, const LorentzExponents& e) {
    check_lorentz(e);
    const std::size_t K = prof.points.size();
    if (K == 0) return 0.0;
    std::vector<double> v(K), rel(K), growth(K);
    const Rational tK = prof.points.back().t;
    for (std::size_t k = 0; k < K; ++k) {
        const auto& b = prof.points[k];
        if (k > 0 && !(b.v < prof.points[k - 1].v && prof.points[k - 1].t < b.t))
            throw std::invalid_argument("StepProfile: breakpoints not strictly monotone");
        v[k] = b.v;
        rel[k] = (b.t / tK).to_double();
        growth[k] = k == 0 ? kInf : ((b.t - prof.points[k - 1].t) / prof.points[k - 1].t).to_double();
    }
    return closed_form(v, rel, growth, tK.to_double(), e);
}

double lorentz_norm(const MeshFunction& f, const LorentzExponents& e, const std::optional<Region>& R) {
    return lorentz_norm(rearrangement(f, R), e);
}

double lorentz_norm_via_distribution(const MeshFunction& f, const LorentzExponents& e,
                                     const std::optional<Region>& R) {
    check_lorentz(e);
    if (std::isinf(e.p)) return f.sup();
    // Distinct positive levels, decreasing.
    std::vector<double> levels;
    for (double x : f.values())
        if (x != 0.0) levels.push_back(std::abs(x));
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    // d(s) is constant on [v_{k+1}, v_k) with value d(v_{k+1}).
    std::vector<double> lv;
    std::vector<Rational> d;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double below = k + 1 < levels.size() ? levels[k + 1] : 0.0;
        const Rational m = distribution(f, below, R);
        if (m == Rational(0)) continue;
        if (!d.empty() && d.back() == m) {
            continue;  // level invisible inside R: keep the higher one
        }
        lv.push_back(levels[k]);
        d.push_back(m);
    }
    if (d.empty()) return 0.0;
    const Rational total = d.back();
    const double tot = total.to_double();
    const double vmax = lv[0];
    if (std::isinf(e.q)) {
        double best = 0.0;
        for (std::size_t k = 0; k < d.size(); ++k)
            best = std::max(best, (lv[k] / vmax) * std::pow((d[k] / total).to_double(), 1.0 / e.p));
        return vmax * std::pow(tot, 1.0 / e.p) * best;
    }
    // p/q * sum_k d_k^{q/p} (v_k^q - v_{k+1}^q), summation by parts of the profile form.
    const double a = e.q / e.p;
    double s = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double dk = std::pow((d[k] / total).to_double(), a);
        const double hi = lv[k] / vmax;
        double gap;
        if (k + 1 < d.size()) {
            const double lo = lv[k + 1] / vmax;
            gap = -std::pow(hi, e.q) * std::expm1(e.q * std::log(lo / hi));
        } else {
            gap = std::pow(hi, e.q);
        }
        s += dk * gap;
    }
    return vmax * std::pow(tot, 1.0 / e.p) * std::pow((e.p / e.q) * s, 1.0 / e.q);
}

std::pair<double, double> power_identity_check(const MeshFunction& f, double s, double p, double q) {
    if (!(s > 0) || !(p > 0) || !(q > 0) || std::isinf(s) || std::isinf(p) || std::isinf(q))
        throw std::invalid_argument("power_identity_check: s, p, q must be finite and positive");
    const double lhs = lorentz_norm(f.pow_abs(s), {p, q});
    const double rhs = std::pow(lorentz_norm(f, {p * s, q * s}), s);
    return {lhs, rhs};
}

double pairing(const MeshFunction& f, const MeshFunction& g) {
    if (!f.same_mesh(g)) throw std::invalid_argument("pairing: mesh mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return s * f.cell_volume();
}

HolderPair holder_pair(const MeshFunction& f, const MeshFunction& g, double p, double q) {
    if (!(p >= 1) || !(q >= 1)) throw std::invalid_argument("holder_pair: need 1 <= p, q <= inf");
    const LorentzExponents e{p, q}, d{conjugate(p), conjugate(q)};
    check_lorentz(e);
    check_lorentz(d);
    if (!f.same_mesh(g)) throw std::invalid_argument("holder_pair: mesh mismatch");
    double lhs = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) lhs += std::abs(f[i] * g[i]);
    lhs *= f.cell_volume();
    return {lhs, lorentz_norm(f, e) * lorentz_norm(g, d)};
}

namespace detail {

double lorentz_of_profile(const double* v, const std::int64_t* count, std::size_t K, double unit,
                          const LorentzExponents& e) {
    if (K == 0) return 0.0;
    std::vector<double> vv(v, v + K), rel(K), growth(K);
    const double cK = static_cast<double>(count[K - 1]);
    for (std::size_t k = 0; k < K; ++k) {
        rel[k] = static_cast<double>(count[k]) / cK;
        growth[k] = k == 0 ? kInf
                           : static_cast<double>(count[k] - count[k - 1]) / static_cast<double>(count[k - 1]);
    }
    return closed_form(vv, rel, growth, unit * cK, e);
}

double lorentz_of_masses(std::vector<Mass>& masses, double unit, const LorentzExponents& e) {
    std::vector<double> v;
    std::vector<std::int64_t> c;
    std::sort(masses.begin(), masses.end(), [](const Mass& a, const Mass& b) { return std::abs(a.v) > std::abs(b.v); });
    std::int64_t run = 0;
    for (const auto& m : masses) {
        const double a = std::abs(m.v);
        if (a == 0.0 || m.w == 0) continue;
        run += m.w;
        if (!v.empty() && v.back() == a) {
            c.back() = run;
        } else {
            v.push_back(a);
            c.push_back(run);
        }
    }
    return lorentz_of_profile(v.data(), c.data(), v.size(), unit, e);
}

}  // namespace detail

}  // namespace bmllab
