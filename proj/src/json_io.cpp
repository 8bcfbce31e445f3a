#include "bmllab/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bmllab {

namespace {

// JSON has no infinity; non-finite numbers are written as strings.
json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

}  // namespace

json to_json(const MeshFunction& f) {
    return {{"n", f.dim()}, {"L", f.L()}, {"J", f.J()}, {"values", f.values()}};
}

MeshFunction mesh_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("mesh: expected an object");
    for (const char* key : {"n", "L", "J", "values"})
        if (!j.contains(key)) throw std::invalid_argument(std::string("mesh: missing field ") + key);
    const int n = j.at("n").get<int>();
    const int L = j.at("L").get<int>();
    const int J = j.at("J").get<int>();
    if (n != 1 && n != 2) throw std::invalid_argument("mesh: n must be 1 or 2");
    if (L + J + 1 < 0 || (L + J + 1) * n > 26) throw std::invalid_argument("mesh: unsupported L, J");
    auto values = j.at("values").get<std::vector<double>>();
    const std::size_t expected = std::size_t{1} << ((L + J + 1) * n);
    if (values.size() != expected)
        throw std::invalid_argument("mesh: values has length " + std::to_string(values.size()) + ", expected " +
                                    std::to_string(expected));
    return MeshFunction(n, L, J, std::move(values));
}

MeshFunction load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return mesh_from_json(j);
}

void save_mesh(const std::string& path, const MeshFunction& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json(f).dump() << "\n";
}

json to_json(const Rational& r) { return {{"num", r.num()}, {"den", r.den()}}; }

json to_json(const StepProfile& p) {
    json a = json::array();
    for (const auto& b : p.points) a.push_back({b.v, b.t.num(), b.t.den()});
    return a;
}

json to_json(const NormBreakdown& b) {
    return {{"coarse_tail", num(b.coarse_tail)}, {"middle", num(b.middle)}, {"fine_tail", num(b.fine_tail)},
            {"total", num(b.total)},             {"divergent", b.divergent}, {"r_infinite", b.r_infinite}};
}

json to_json(const OperatorSample& s) {
    json j = to_json(s.values);
    j["exact"] = s.exact;
    j["sampling"] = s.sampling == Sampling::cell_average ? "cell_average" : "cell_center";
    return j;
}

json to_json(const BlockDecomposition& d, const BMLExponents& e) {
    json terms = json::array();
    for (const auto& t : d.terms) {
        json cube = json::array();
        for (const auto& s : t.block.cube.sides()) cube.push_back({to_json(s.lo), to_json(s.hi)});
        json jt = {{"lambda", num(t.lambda)}, {"level", t.level}, {"cube", cube}, {"payload", to_json(t.block.payload)}};
        if (const auto dc = as_dyadic(t.block.cube)) jt["dyadic"] = {{"j", dc->j}, {"m", dc->m}};
        const BlockCheck c = validate_block(t.block, e);
        jt["validation"] = {{"ok", c.ok},
                            {"norm", num(c.norm)},
                            {"bound", num(c.bound)},
                            {"slack", num(c.slack)},
                            {"block_exponent", c.block_exponent},
                            {"coefficient_exponent", c.coefficient_exponent}};
        terms.push_back(std::move(jt));
    }
    return {{"terms", terms},
            {"r_dual", num(d.r_dual)},
            {"cost", num(d.cost)},
            {"analytic_tail", num(d.analytic_tail)},
            {"closed_form_cost", num(d.closed_form_cost)},
            {"geometric_defect", num(d.geometric_defect)},
            {"envelope_constant", num(d.envelope_constant)},
            {"near_constant", num(d.near_constant)}};
}

json to_json(const Patch& p) { return {{"lo", to_json(p.lo)}, {"cell", to_json(p.cell)}, {"values", p.values}}; }

json to_json(const EnvelopeCertificate& c) {
    return {{"x0", c.x0.to_double()},
            {"y0", c.y0.to_double()},
            {"R", c.R.to_double()},
            {"M", c.M},
            {"mean_zero_defect", num(c.mean_zero_defect)},
            {"envelope_constant", num(c.envelope_constant)},
            {"certified", c.certified},
            {"h1_bound_unit", num(c.h1_bound_unit)}};
}

json to_json(const FactorizationState& s) {
    json rounds = json::array();
    for (std::size_t i = 0; i < s.rounds.size(); ++i) {
        const auto& r = s.rounds[i];
        json certs = json::array();
        double worst_env = 0.0;
        for (const auto& c : r.certificates) {
            certs.push_back(to_json(c));
            worst_env = std::max(worst_env, c.envelope_constant);
        }
        rounds.push_back({{"round", i + 1},
                          {"terms", r.terms.size()},
                          {"residual_atoms", r.residual.size()},
                          {"residual_l1", num(r.residual_l1)},
                          {"certified_bound", num(r.certified_bound)},
                          {"ratio", num(r.ratio)},
                          {"reconstruction_defect", num(r.reconstruction_defect)},
                          {"unatomized_l1", num(r.unatomized_l1)},
                          {"required_L", r.required_L},
                          {"worst_envelope_constant", num(worst_env)},
                          {"certificates", certs}});
    }
    return {{"M", s.M}, {"initial_bound", num(s.initial_bound)}, {"rounds", rounds}, {"warnings", s.warnings}};
}

std::string digest(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace bmllab
