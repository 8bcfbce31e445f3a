#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmllab/mesh.hpp"
#include "bmllab/parallel.hpp"

namespace bmllab {

// Maximal operators are evaluated at cell resolution: the value on a cell is
// the essential supremum of the operator over that cell, i.e. the sup over
// every grid cube meeting the cell in positive measure. Coarse scales beyond
// the domain and sub-mesh scales are folded in exactly.

/// Dyadic maximal function of |f| over the grid shifted by a/3.
MeshFunction maximal_dyadic(const MeshFunction& f, const std::vector<int>& a = {}, Exec exec = Exec::parallel);

struct MaximalSandwich {
    MeshFunction lower;  // max over the 3^n shifted grids
    MeshFunction upper;  // 6^n * lower
};
MaximalSandwich maximal_sandwich(const MeshFunction& f, Exec exec = Exec::parallel);

/// M(|f|^eta)^{1/eta} on one grid.
MeshFunction powered_maximal(const MeshFunction& f, double eta, const std::vector<int>& a = {});
/// sup over grid cubes of |Q|^{alpha/n - 1} int_Q |f|.
MeshFunction fractional_maximal(const MeshFunction& f, double alpha, const std::vector<int>& a = {});
/// sup over cubes of all 3^n shifted grids of the mean oscillation.
MeshFunction sharp_maximal(const MeshFunction& f, Exec exec = Exec::parallel);

enum class Sampling { cell_average, cell_center };

/// Operator output on the mesh. `exact` marks values given by closed-form
/// quadrature; `sampling` tells whether they are cell averages or center values.
struct OperatorSample {
    MeshFunction values;
    bool exact = true;
    Sampling sampling = Sampling::cell_center;
};

/// I_alpha f(x) = int f(y) |x - y|^{alpha - n} dy. Exact at cell centers for n = 1;
/// midpoint quadrature (exact = false) for n = 2.
OperatorSample fractional_integral(const MeshFunction& f, double alpha);
double fractional_integral_at(const MeshFunction& f, double alpha, const Rational& x);

/// Hilbert transform (1/pi) p.v. int f(y) / (x - y) dy, n = 1.
double hilbert_at(const MeshFunction& f, const Rational& x);
OperatorSample hilbert_transform(const MeshFunction& f, Sampling s = Sampling::cell_average,
                                 Exec exec = Exec::parallel);
/// Integral restricted to |x - y| > zeta, at cell centers.
OperatorSample truncated_transform(const MeshFunction& f, double zeta, Exec exec = Exec::parallel);
/// max over zeta in {2^{-J}, ..., 2^{L+1}} of |T_zeta f| at cell centers.
MeshFunction maximal_transform(const MeshFunction& f, Exec exec = Exec::parallel);
/// [b, T] f = b T f - T(b f).
OperatorSample commutator(const MeshFunction& b, const MeshFunction& f, Sampling s = Sampling::cell_average);

/// Galerkin weight: average over cell i of T applied to the indicator of cell j, d = i - j.
double hilbert_cell_weight(std::int64_t d);
/// Center value at cell i of T applied to the indicator of cell j, d = i - j.
double hilbert_center_weight(std::int64_t d);

struct KernelDescriptor {
    std::string kind = "hilbert";
    double delta = 1.0;
    double size_constant = 0.0;        // |K(x,y)| <= A / |x-y|^n
    double regularity_constant = 0.0;  // smoothness bounds with exponent delta
    double kernel(double x, double y) const;
};
KernelDescriptor hilbert_kernel();

struct KernelCheck {
    std::size_t triples = 0;
    double worst_size_ratio = 0.0;        // max |K| |x-y|^n / A_size
    double worst_regularity_ratio = 0.0;  // max of lhs / rhs over both regularity bounds
};
KernelCheck check_kernel(const KernelDescriptor& k, std::size_t triples, std::uint64_t seed);

struct BMOBounds {
    double lower = 0.0;
    double upper = 0.0;
};
BMOBounds bmo_norm(const MeshFunction& b, Exec exec = Exec::parallel);

/// Smallest value v with |{x in R : b(x) <= v}| >= |R| / 2; points of R outside the domain count as 0.
double median_value(const MeshFunction& b, const Region& R);

/// Oscillation curves indexed by cube side 2^{-k}, k from `scales`:
/// small_scale[i] = sup over cubes with side <= 2^{-k_i};
/// large_scale[i] = sup over cubes with side >= 2^{-k_i};
/// far_field[i]   = sup over cubes disjoint from [-2^{-k_i}, 2^{-k_i})^n.
struct CMOProfile {
    std::vector<int> scales;
    std::vector<double> small_scale;
    std::vector<double> large_scale;
    std::vector<double> far_field;
};
CMOProfile cmo_profile(const MeshFunction& b, const std::vector<int>& scales);

}  // namespace bmllab
