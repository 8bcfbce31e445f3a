#pragma once

// Verification suites behind `bmllab verify`. A suite runs the module's
// invariants at configurable scale and returns a deterministic report: same
// config and seed give a byte-identical body.

#include <cstdint>
#include <string>
#include <vector>

#include "bmllab/bml.hpp"
#include "bmllab/json_io.hpp"
#include "bmllab/mesh.hpp"

namespace bmllab {

struct VerifyConfig {
    std::uint64_t seed = 1;
    int corpus = 40;
    int n = 1;
    int L = 2;
    int J = 3;
    std::vector<BMLExponents> exponents{{2, 2, 3, 4}, {1.5, 2, 3, 6}, {2, kInf, 4, kInf}};
    std::vector<int> M{16, 64, 256};
};

/// One check. `certified` marks checks of exact statements (a failure is a bug);
/// the others measure a constant the theory leaves implicit.
struct CheckRecord {
    std::string name;
    std::string anchor;  // statement being exercised, or "plumbing"
    std::string inputs;  // digest of the inputs
    double measured = 0.0;
    double bound = 0.0;
    bool certified = true;
    bool pass = false;
};

struct Report {
    std::string suite;
    VerifyConfig config;
    std::vector<CheckRecord> records;
    /// True when every certified record passes.
    bool certified_ok() const;
    json to_json() const;
    std::string to_csv() const;
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"lorentz", "bml", "operators", "blocks", "hardy", "all"};
    return names;
}

/// Throws std::invalid_argument for an unknown suite.
Report run_suite(const std::string& suite, const VerifyConfig& config);

/// Seeded mix of random steps, sparse steps, smooth profiles and indicators on
/// the mesh (n, L, J). Entry i depends only on (seed, i) and is the same
/// continuum function for every J at least as fine as its construction scale.
std::vector<MeshFunction> make_corpus(std::uint64_t seed, int count, int n, int L, int J);

/// splitmix64 step, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace bmllab
