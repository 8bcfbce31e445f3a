#pragma once

// Slow, direct oracles. Each one evaluates a definition cube by cube or cell by
// cell with no closed forms, so it can check the fast kernels on small meshes.

#include <cstdint>
#include <vector>

#include "bmllab/bml.hpp"
#include "bmllab/lorentz.hpp"
#include "bmllab/mesh.hpp"

namespace bmllab::reference {

/// Lorentz norm from the step rearrangement by integrating t^{q/p-1} piece by piece.
double lorentz_norm(const MeshFunction& f, const LorentzExponents& e);

/// Sum over cubes of level k in the grid shifted by a/3 of
/// (|Q|^{1/t-1/p} ||f||_{L^{p,q}(Q)})^r, or the max when r = inf.
double bml_level(const MeshFunction& f, const BMLExponents& e, int k, const std::vector<int>& a = {});
/// Level sums over [k_lo, k_hi] combined into a norm.
double bml_window(const MeshFunction& f, const BMLExponents& e, int k_lo, int k_hi, const std::vector<int>& a = {});

/// Dyadic maximal function of |f| with the cell's essential supremum, scanning
/// every cube of scale k_lo..J+2 that meets each cell.
MeshFunction maximal(const MeshFunction& f, int k_lo, const std::vector<int>& a = {});

/// (1/pi) p.v. int f(y)/(x-y) dy at cell centers, n = 1.
std::vector<double> hilbert_centers(const MeshFunction& f);
/// Cell averages of the same transform, n = 1.
std::vector<double> hilbert_averages(const MeshFunction& f);

/// int f(y) |x - y|^{alpha-1} dy for n = 1 at a point off the cell edges.
double fractional_integral_at(const MeshFunction& f, double alpha, double x);

/// sup of the mean oscillation over shifted-grid cubes with levels in [k_lo, k_hi].
double bmo_lower(const MeshFunction& b, int k_lo, int k_hi);

/// Cubes of level k in the grid a/3 meeting the domain of f.
std::vector<Region> cubes_meeting_domain(const MeshFunction& f, int k, const std::vector<int>& a);

}  // namespace bmllab::reference
