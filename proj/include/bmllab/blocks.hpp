#pragma once

// Blocks and the block space that is the predual of the BML space.
//
// Every routine takes the primal exponents (p, q, t, r); blocks are measured
// with the dual ones (p', q', t', r'). Constants that the analysis leaves
// implicit are absorbed into the coefficients, so every stored block is
// valid on the nose.

#include <cstdint>
#include <optional>
#include <vector>

#include "bmllab/bml.hpp"
#include "bmllab/mesh.hpp"
#include "bmllab/parallel.hpp"

namespace bmllab {

struct Block {
    Region cube;
    MeshFunction payload;
};

struct BlockCheck {
    bool ok = false;
    bool supported = false;  // payload vanishes off the cube
    double norm = 0.0;       // ||payload||_{L^{p',q'}}
    double bound = 0.0;      // |cube|^{1/p' - 1/t'}
    double slack = 0.0;      // bound - norm
    // The normalising power as written for blocks and its reciprocal used for
    // the coefficients of canonical decompositions.
    double block_exponent = 0.0;        // 1/p' - 1/t'
    double coefficient_exponent = 0.0;  // 1/t' - 1/p'
};

/// Exact check of the block conditions with a relative tolerance of 1e-12 on the norm bound.
BlockCheck validate_block(const Block& b, const BMLExponents& e);

struct BlockTerm {
    double lambda = 0.0;
    Block block;
    int level = 0;  // scale for canonical terms, annulus index for operator decompositions
};

struct BlockDecomposition {
    std::vector<BlockTerm> terms;
    double r_dual = 1.0;
    /// Sum of |c|^{r'} (sup for r' = inf) over coefficients of pieces that lie
    /// outside the mesh domain and are accounted for analytically.
    double analytic_tail = 0.0;
    /// l^{r'} norm of all coefficients, including the analytic tail.
    double cost = 0.0;
    /// Closed-form geometric sum for operator decompositions (NaN otherwise).
    double closed_form_cost = std::numeric_limits<double>::quiet_NaN();
    /// Worst relative deviation of measured annulus coefficients from the geometric envelope.
    double geometric_defect = 0.0;
    /// Measured constant in the pointwise annulus bound.
    double envelope_constant = 0.0;
    /// Measured constant of the near part relative to the block bound.
    double near_constant = 0.0;
};

/// Sum of lambda * payload.
MeshFunction reconstruct(const BlockDecomposition& d, const MeshFunction& like);
/// (sum |lambda|^{r'} + analytic_tail)^{1/r'}, or the max form for r' = inf.
double decomposition_cost(const std::vector<BlockTerm>& terms, double analytic_tail, double r_dual);

/// Partition of supp g by dyadic cubes of scale j (-L <= j <= J).
BlockDecomposition canonical_decomposition(const MeshFunction& g, const BMLExponents& e, int j);

struct BlockUpper {
    double value = 0.0;
    int scale = 0;
};
/// Cheapest canonical decomposition over the dyadic scales of the mesh.
BlockUpper block_norm_upper(const MeshFunction& g, const BMLExponents& e, Exec exec = Exec::parallel);

/// Dyadic indicators meeting supp g, `random_count` seeded step functions and
/// the Hoelder extremiser sign(g)|g|^{p'-1}.
std::vector<MeshFunction> default_test_family(const MeshFunction& g, const BMLExponents& e, std::uint64_t seed = 1,
                                              int random_count = 50);
/// max over the family of |int f g| / ||f||_M.
double block_norm_lower(const MeshFunction& g, const BMLExponents& e, const std::vector<MeshFunction>& family,
                        Exec exec = Exec::parallel);

/// M_D(b) split over the dyadic ancestors Q_k of the block cube:
/// m_0 lives on Q, m_k on Q_k \ Q_{k-1}; coefficients c 2^{-kn/t}.
BlockDecomposition decompose_maximal_of_block(const Block& b, const BMLExponents& e);

/// T(b) for the Hilbert transform (n = 1): near part on 2Q and dyadic dilation
/// annuli 2^{k+1}Q \ 2^k Q with coefficients K 2^{-kn/t}.
BlockDecomposition decompose_T_of_block(const Block& b, const BMLExponents& e);

struct Truncation {
    MeshFunction partial;            // sum over the N largest |lambda|
    double tail = 0.0;               // l^{r'} norm of everything dropped
    BlockDecomposition remainder;    // the dropped terms, a decomposition of g - partial
};
Truncation truncate_decomposition(const BlockDecomposition& d, std::size_t N, const MeshFunction& like);

/// The dyadic cube equal to R, if any.
std::optional<DyadicCube> as_dyadic(const Region& R);

}  // namespace bmllab
