#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmllab/lorentz.hpp"
#include "bmllab/mesh.hpp"
#include "bmllab/parallel.hpp"

namespace bmllab {

/// Exponents of the Bourgain-Morrey-Lorentz space M^{t,r}_{p,q}.
struct BMLExponents {
    double p = 2.0;
    double q = 2.0;
    double t = 3.0;
    double r = 4.0;
    LorentzExponents lorentz() const { return {p, q}; }
    std::string str() const;
};

/// Validates ranges. p > t is accepted so that the regime test can classify it.
void check_bml(const BMLExponents& e);

/// True exactly when the space contains nonzero functions:
/// p < t < r < inf, or p <= t with r = inf.
bool nontrivial(const BMLExponents& e);

/// Dual exponents (p', q', t', r') of the block space.
BMLExponents dual(const BMLExponents& e);

/// Parts of the cube sum. For r < inf the parts are r-th powers and
/// total^r = coarse_tail + middle + fine_tail; for r = inf they are suprema.
struct NormBreakdown {
    double coarse_tail = 0.0;
    double middle = 0.0;
    double fine_tail = 0.0;
    double total = 0.0;
    bool divergent = false;
    bool r_infinite = false;
};

NormBreakdown bml_norm(const MeshFunction& f, const BMLExponents& e, Exec exec = Exec::parallel);
/// Same sum over the grid shifted by a/3 (a in {0,1,2}^n).
NormBreakdown bml_norm_on_grid(const MeshFunction& f, const BMLExponents& e, const std::vector<int>& a,
                               Exec exec = Exec::parallel);

struct TruncatedNorm {
    double value = 0.0;       // over scales in [j_min, j_max]
    double tail_bound = 0.0;  // r-th power (or sup for r = inf) of everything outside the window
    bool divergent = false;
};
/// Level-by-level sum over a window of scales; an oracle for bml_norm.
TruncatedNorm bml_norm_truncated(const MeshFunction& f, const BMLExponents& e, int j_min, int j_max,
                                 const std::vector<int>& a = {});

/// Thrown when a construction needs a larger domain than the mesh provides.
struct DomainTooSmall : std::runtime_error {
    int required_L;
    DomainTooSmall(const std::string& what, int L) : std::runtime_error(what), required_L(L) {}
};

/// Shift by a whole number of cells per axis.
MeshFunction translate(const MeshFunction& f, const std::vector<std::int64_t>& cells);
/// f(2^m x): the same values on the mesh with L - m and J + m.
MeshFunction dilate_dyadic(const MeshFunction& f, int m);
/// Cell averages of g * f for n = 1, on the domain with L + 1.
MeshFunction convolve(const MeshFunction& f, const MeshFunction& g, Exec exec = Exec::parallel);

/// Norm of f outside the sup-norm ball [-R, R)^n; R must be a multiple of the cell side.
double tail_norm(const MeshFunction& f, const BMLExponents& e, const Rational& R);
/// max over mesh-aligned |y|_inf <= b of ||f - f(. - y)||.
double translation_modulus(const MeshFunction& f, const BMLExponents& e, const Rational& b);

struct Separation {
    std::int64_t shift_cells = 0;  // along the first axis
    double lhs = 0.0;              // ||tau_y f + g||
    double rhs = 0.0;              // (1 + eps) (||f||^r + ||g||^r)^{1/r}
};
/// Doubles y = l(Q) 2^i e_1 until the separated sum obeys the almost-additivity bound.
Separation separation_offset(const MeshFunction& f, const MeshFunction& g, const BMLExponents& e, double eps);

/// Unit-cube corners of a far-separated family built greedily with separation_offset
/// on the line (n = 1, J = 0); eps_i = eps * 2^{-i}.
std::vector<std::int64_t> ell_r_positions(const BMLExponents& e, int count, double eps, int L);
/// sum_i a_i chi_{[x_i, x_i + 1)} on the mesh n = 1, J = 0.
MeshFunction ell_r_embedding(const std::vector<std::int64_t>& positions, const std::vector<double>& a, int L);

namespace detail {
/// Per-level cube terms |R|^{1/t-1/p} ||f||_{L^{p,q}(R)} for k in [k_lo, k_hi], k <= J.
std::vector<std::vector<double>> level_terms(const MeshFunction& f, const BMLExponents& e, const std::vector<int>& a,
                                             int k_lo, int k_hi, Exec exec);
/// Unit-scale Lorentz norm of each fine pattern with its multiplicity polynomial.
struct FineTerm {
    double phi;
    std::array<double, 3> poly;
};
std::vector<FineTerm> fine_terms(const MeshFunction& f, const BMLExponents& e, const std::vector<int>& a, Exec exec);
}  // namespace detail

}  // namespace bmllab
