#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "bmllab/mesh.hpp"

namespace bmllab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Conjugate exponent with 1' = inf and inf' = 1.
double conjugate(double p);

struct LorentzExponents {
    double p = 2.0;
    double q = 2.0;
};
void check_lorentz(const LorentzExponents& e);

/// (p/q)^{1/q}, the Lorentz norm of the indicator of a unit-measure set.
double lorentz_constant(const LorentzExponents& e);

/// Decreasing rearrangement: f* = v_k on [t_{k-1}, t_k).
struct StepProfile {
    struct Breakpoint {
        double v;
        Rational t;
    };
    std::vector<Breakpoint> points;
    bool empty() const { return points.empty(); }
};

Rational distribution(const MeshFunction& f, double alpha, const std::optional<Region>& R = std::nullopt);
StepProfile rearrangement(const MeshFunction& f, const std::optional<Region>& R = std::nullopt);

double lorentz_norm(const StepProfile& prof, const LorentzExponents& e);
double lorentz_norm(const MeshFunction& f, const LorentzExponents& e, const std::optional<Region>& R = std::nullopt);
/// Same quantity computed from level sets via the distribution function.
double lorentz_norm_via_distribution(const MeshFunction& f, const LorentzExponents& e,
                                     const std::optional<Region>& R = std::nullopt);

/// (|| |f|^s ||_{p,q}, ||f||_{ps,qs}^s)
std::pair<double, double> power_identity_check(const MeshFunction& f, double s, double p, double q);

struct HolderPair {
    double lhs;
    double rhs;
};
HolderPair holder_pair(const MeshFunction& f, const MeshFunction& g, double p, double q);

/// Integral of f g over the mesh.
double pairing(const MeshFunction& f, const MeshFunction& g);

namespace detail {

/// Value/measure pair where the measure is an integer count of a fixed unit.
struct Mass {
    double v;
    std::int64_t w;
};

/// Lorentz norm of the step function whose level masses are given, in units of
/// `unit`. The input is reordered in place (sorted by decreasing |v|).
double lorentz_of_masses(std::vector<Mass>& masses, double unit, const LorentzExponents& e);

/// Closed form on an already merged profile: v strictly decreasing and
/// positive, counts strictly increasing.
double lorentz_of_profile(const double* v, const std::int64_t* count, std::size_t K, double unit,
                          const LorentzExponents& e);

}  // namespace detail

}  // namespace bmllab
