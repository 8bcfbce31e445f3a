#pragma once

// H^1 atoms and the constructive weak factorisation driven by the Hilbert
// transform (n = 1).
//
// Factorisation rounds quickly produce cubes far apart at very different
// sizes, so functions here are stored as patches: a run of equal cells
// [lo + i*cell, lo + (i+1)*cell) with their own cell length. Two patches with
// the same cell length whose origins differ by whole cells interact through
// the exact cell-average Hilbert weights.

#include <cstdint>
#include <string>
#include <vector>

#include "bmllab/bml.hpp"
#include "bmllab/mesh.hpp"

namespace bmllab {

struct Patch {
    Rational lo;
    Rational cell{1};
    std::vector<double> values;

    Rational hi() const { return lo + cell * Rational(static_cast<std::int64_t>(values.size())); }
    double integral() const;
    double l1() const;
    double sup() const;
};

/// Smallest patch covering the support of a one-dimensional mesh function.
Patch to_patch(const MeshFunction& f);
/// Same function on the mesh (n = 1, L, J); throws when it is not representable there.
MeshFunction to_mesh(const Patch& p, int L, int J);
/// Exact cell-average Hilbert transform of `src`, on the cells of `dst`.
std::vector<double> hilbert_on(const Patch& src, const Patch& dst);

struct Atom {
    Region cube;
    Patch payload;
    static Atom from_mesh(const Region& cube, const MeshFunction& f);
};

struct AtomCheck {
    bool ok = false;
    bool supported = false;
    double mean_defect = 0.0;  // |int a|
    double sup_slack = 0.0;    // |Q|^{-1} - ||a||_inf
};
/// Relative tolerance 1e-12 on the mean and on the sup bound.
AtomCheck validate_atom(const Atom& a);

struct WeightedAtom {
    double lambda = 0.0;
    Atom atom;
};
/// sum |lambda|; throws on an invalid atom.
double h1_upper(const std::vector<WeightedAtom>& d);

struct EnvelopeCertificate {
    Rational x0, y0, R;
    double M = 0.0;                   // |x0 - y0| / R
    double mean_zero_defect = 0.0;    // |int F|
    double envelope_constant = 0.0;   // smallest C with |F| <= C R^{-1} (chi_B(x0,R) + chi_B(y0,R))
    bool certified = false;           // finite constant and mean defect within tolerance
    double h1_bound_unit = 0.0;       // envelope_constant * log M, in units of the lemma's constant
};
EnvelopeCertificate envelope_certificate(const Patch& F, const Rational& x0, const Rational& y0, const Rational& R);
EnvelopeCertificate envelope_certificate(const MeshFunction& F, const Rational& x0, const Rational& y0,
                                         const Rational& R);

struct Homogeneity {
    double constant = 0.0;   // min over x = c_Q +- M l(Q)/2 of |T chi_Omega(x)| M |Q| / |Omega|
    bool sign_constant = false;  // T chi_Omega keeps one sign near each of the two points
};
/// omega: indicator of a subset of Q on the mesh.
Homogeneity homogeneity_constant(const Region& Q, const MeshFunction& omega, int M);

struct StepResult {
    Patch g;          // indicator of the far cube
    Patch h;          // -a / T(g)(c_Q)
    Patch F_near;     // a - (g T*(h) - h T(g)) on Q
    Patch F_far;      // the same on the far cube
    Patch h_Tg;       // h T(g) on Q
    Patch g_Th;       // g T(h) on the far cube
    EnvelopeCertificate cert;
    double Tg_center = 0.0;
    double product_cost = 0.0;  // ||g||_H upper * ||h||_M (NaN when h is not mesh-representable)
    std::vector<WeightedAtom> residual_atoms;  // <= 3 atoms; with `unatomized` they sum to F
    /// Constant mean defects left by floating-point rounding, kept out of the atoms.
    std::vector<Patch> unatomized;
    double reatomization_defect = 0.0;  // |int F| relative to the mass of the terms forming F
};
/// One step for a single atom. M even, M > 10. The product cost needs a BML
/// norm on a mesh and is skipped (NaN) when `measure_cost` is false.
StepResult factorization_step(const Atom& a, int M, const BMLExponents& e = {2, 2, 3, 4},
                              bool measure_cost = true);

struct FactorTerm {
    double lambda = 0.0;
    Patch g;
    Patch h;
    // lambda (g T*(h) - h T(g)) restricted to the cube of h and to the cube of g.
    Patch product_on_h;
    Patch product_on_g;
};

struct FactorRound {
    std::vector<FactorTerm> terms;
    std::vector<WeightedAtom> residual;
    std::vector<Patch> unatomized;  // rounding leftovers, already weighted
    double unatomized_l1 = 0.0;
    std::vector<EnvelopeCertificate> certificates;
    double residual_l1 = 0.0;
    double certified_bound = 0.0;  // h1_upper of the residual atoms
    double ratio = 0.0;            // certified_bound / previous bound
    double reconstruction_defect = 0.0;
    int required_L = 0;
};

struct FactorizationState {
    int M = 0;
    double initial_bound = 0.0;
    std::vector<FactorRound> rounds;
    std::vector<std::string> warnings;
};

FactorizationState factorize(const std::vector<WeightedAtom>& d, int M, int rounds, int L = 0,
                             const BMLExponents& e = {2, 2, 3, 4});

struct MSearch {
    int M = 0;  // smallest M whose rounds all have ratio <= target (0 when none)
    std::vector<std::pair<int, double>> worst_ratio;  // per tried M
    FactorizationState state;
};
MSearch search_M(const std::vector<WeightedAtom>& d, int rounds, double target = 0.75, int L = 0,
                 const BMLExponents& e = {2, 2, 3, 4});

/// Max over the test atoms of |int b (g T*(h) - h T(g))| / (||g||_H upper * ||h||_M).
double commutator_lower_diagnostic(const MeshFunction& b, const std::vector<Atom>& atoms, int M,
                                   const BMLExponents& e = {2, 2, 3, 4});

/// ||chi_[lo,hi)||_H upper bound from the cheapest dyadic partition.
double indicator_block_upper(const Rational& lo, const Rational& hi, const BMLExponents& e);

}  // namespace bmllab
