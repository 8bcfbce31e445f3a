// bmllab: norms, operators, verification suites and factorization runs.
//
// Exit codes: 0 ok, 1 usage or input error, 2 divergent norm (trivial
// exponents), 3 a certified check failed.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bmllab/blocks.hpp"
#include "bmllab/bml.hpp"
#include "bmllab/hardy.hpp"
#include "bmllab/json_io.hpp"
#include "bmllab/lorentz.hpp"
#include "bmllab/mesh.hpp"
#include "bmllab/ops.hpp"
#include "bmllab/verify.hpp"

using namespace bmllab;

namespace {

constexpr int kUsage = 1;
constexpr int kDivergent = 2;
constexpr int kCertifiedFailure = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double parse_number(const std::string& s) {
    if (s == "inf" || s == "infinity") return kInf;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (...) {
        throw UsageError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw UsageError("not a number: '" + s + "'");
    return v;
}

std::vector<double> parse_list(const std::string& s, std::size_t count, const char* what) {
    const auto parts = split(s, ',');
    if (parts.size() != count)
        throw UsageError(std::string(what) + " expects " + std::to_string(count) + " comma-separated values");
    std::vector<double> v;
    for (const auto& p : parts) v.push_back(parse_number(p));
    return v;
}

BMLExponents parse_exps(const std::string& s) {
    const auto v = parse_list(s, 4, "--exps");
    BMLExponents e{v[0], v[1], v[2], v[3]};
    try {
        check_bml(e);
    } catch (const std::exception& ex) {
        throw UsageError(ex.what());
    }
    return e;
}

struct MeshSpec {
    int n = 1, L = 2, J = 3;
};

MeshSpec parse_mesh(const std::string& s) {
    const auto v = parse_list(s, 3, "--mesh");
    MeshSpec m{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
    if (m.n != 1 && m.n != 2) throw UsageError("--mesh: n must be 1 or 2");
    if (m.L + m.J + 1 < 0 || (m.L + m.J + 1) * m.n > 26) throw UsageError("--mesh: unsupported L, J");
    return m;
}

Rational parse_rational(const std::string& s) {
    const auto parts = split(s, '/');
    try {
        if (parts.size() == 1) return Rational(std::stoll(parts[0]));
        if (parts.size() == 2) return Rational(std::stoll(parts[0]), std::stoll(parts[1]));
    } catch (const std::logic_error&) {
    }
    throw UsageError("not a rational: '" + s + "'");
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write " + path);
    out << text;
}

// Function input shared by `norm` and `op`.
struct FunctionSource {
    std::string file;
    std::string indicator;  // "j=0" or "j=0,m=1"; m is used on every axis
    std::optional<std::uint64_t> random;
    std::string mesh = "1,2,3";

    void attach(CLI::App* app) {
        app->add_option("--file", file, "MeshFunction JSON file");
        app->add_option("--indicator", indicator, "indicator of a dyadic cube: j=J[,m=M]");
        app->add_option("--random", random, "seeded random step function");
        app->add_option("--mesh", mesh, "n,L,J for generated functions")->capture_default_str();
    }

    MeshFunction load() const {
        const int given = !file.empty() + !indicator.empty() + random.has_value();
        if (given != 1) throw UsageError("give exactly one of --file, --indicator, --random");
        if (!file.empty()) {
            try {
                return load_mesh(file);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        }
        const MeshSpec m = parse_mesh(mesh);
        if (random) return make_corpus(*random, 1, m.n, m.L, m.J).front();
        int j = 0;
        std::int64_t idx = 0;
        for (const auto& kv : split(indicator, ',')) {
            const auto p = split(kv, '=');
            if (p.size() != 2) throw UsageError("--indicator: expected key=value");
            if (p[0] == "j")
                j = static_cast<int>(parse_number(p[1]));
            else if (p[0] == "m")
                idx = static_cast<std::int64_t>(parse_number(p[1]));
            else
                throw UsageError("--indicator: unknown key '" + p[0] + "'");
        }
        if (j > m.J) throw UsageError("--indicator: cube finer than the mesh");
        const Region cube = Region::of(DyadicCube{j, std::vector<std::int64_t>(static_cast<std::size_t>(m.n), idx)});
        if (!MeshFunction(m.n, m.L, m.J).domain().contains(cube)) throw UsageError("--indicator: cube outside the domain");
        return synthesize(gen::Indicator{cube}, m.n, m.L, m.J);
    }
};

json lorentz_json(const MeshFunction& f, const LorentzExponents& e) {
    return {{"p", e.p}, {"q", e.q}, {"norm", lorentz_norm(f, e)}};
}

// ---------------------------------------------------------------------------

int cmd_norm(const FunctionSource& src, const std::string& exps, const std::string& lorentz) {
    const MeshFunction f = src.load();
    json out = {{"mesh", {f.dim(), f.L(), f.J()}}};
    if (!lorentz.empty()) {
        const auto v = parse_list(lorentz, 2, "--lorentz");
        const LorentzExponents le{v[0], v[1]};
        try {
            check_lorentz(le);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
        out["lorentz"] = lorentz_json(f, le);
        std::cout << out.dump(2) << "\n";
        return 0;
    }
    const BMLExponents e = parse_exps(exps);
    const NormBreakdown b = bml_norm(f, e);
    out["exponents"] = e.str();
    out["breakdown"] = to_json(b);
    out["lorentz"] = lorentz_json(f, e.lorentz());
    std::cout << out.dump(2) << "\n";
    if (b.divergent) {
        std::cerr << "divergent by nontriviality theorem (" << e.str() << ")\n";
        return kDivergent;
    }
    return 0;
}

struct OpArgs {
    std::string op = "hilbert";
    double alpha = 0.5;
    double zeta = 0.0;
    double eta = 2.0;
    std::string symbol;
    std::string sampling = "average";
    std::string out;
};

int cmd_op(const FunctionSource& src, const OpArgs& a) {
    const MeshFunction f = src.load();
    const Sampling s = a.sampling == "center" ? Sampling::cell_center : Sampling::cell_average;
    OperatorSample r;
    auto exact_values = [](MeshFunction m) {
        OperatorSample o;
        o.values = std::move(m);
        return o;
    };
    if (a.op == "hilbert") {
        r = hilbert_transform(f, s);
    } else if (a.op == "truncated") {
        if (!(a.zeta > 0)) throw UsageError("--zeta must be positive");
        r = truncated_transform(f, a.zeta);
    } else if (a.op == "maximal-transform") {
        r = exact_values(maximal_transform(f));
    } else if (a.op == "fractional") {
        r = fractional_integral(f, a.alpha);
    } else if (a.op == "maximal") {
        r = exact_values(maximal_dyadic(f));
    } else if (a.op == "maximal-sandwich") {
        r = exact_values(maximal_sandwich(f).lower);
    } else if (a.op == "powered-maximal") {
        r = exact_values(powered_maximal(f, a.eta));
    } else if (a.op == "fractional-maximal") {
        r = exact_values(fractional_maximal(f, a.alpha));
    } else if (a.op == "sharp") {
        r = exact_values(sharp_maximal(f));
    } else if (a.op == "commutator") {
        if (a.symbol.empty()) throw UsageError("commutator needs --symbol");
        MeshFunction b;
        try {
            b = load_mesh(a.symbol);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (!b.same_mesh(f)) throw UsageError("--symbol must live on the same mesh");
        r = commutator(b, f, s);
    } else {
        throw UsageError("unknown operator '" + a.op + "'");
    }
    json j = to_json(r);
    j["operator"] = a.op;
    write_text(a.out, j.dump() + "\n");
    return 0;
}

struct VerifyArgs {
    std::string suite;
    std::uint64_t seed = 1;
    int corpus = 40;
    std::string mesh = "1,2,3";
    std::vector<std::string> exps;
    std::string format = "json";
    std::string out;
};

int cmd_verify(const VerifyArgs& a) {
    VerifyConfig c;
    c.seed = a.seed;
    c.corpus = a.corpus;
    const MeshSpec m = parse_mesh(a.mesh);
    c.n = m.n;
    c.L = m.L;
    c.J = m.J;
    if (!a.exps.empty()) {
        c.exponents.clear();
        for (const auto& s : a.exps) c.exponents.push_back(parse_exps(s));
    }
    Report r;
    try {
        r = run_suite(a.suite, c);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    write_text(a.out, a.format == "csv" ? r.to_csv() : r.to_json().dump(2) + "\n");
    std::size_t failed = 0, empirical_failed = 0;
    for (const auto& rec : r.records) {
        if (!rec.pass && rec.certified) ++failed;
        if (!rec.pass && !rec.certified) ++empirical_failed;
    }
    std::cerr << r.suite << ": " << r.records.size() << " checks, " << failed << " certified failures, "
              << empirical_failed << " empirical misses\n";
    return r.certified_ok() ? 0 : kCertifiedFailure;
}

struct FactorArgs {
    int M = 256;
    int rounds = 3;
    std::string mesh = "1,6,8";
    bool search = false;
    std::string sweep;
    std::string atom = "haar";
    std::string file;
    std::string cube = "0,1";
    std::string exps = "2,2,3,4";
    std::string format = "text";
    std::string out;
};

Atom make_atom(const FactorArgs& a, const MeshSpec& m) {
    if (a.atom == "haar") {
        if (m.n != 1) throw UsageError("factorization is one-dimensional");
        const MeshFunction f = synthesize(gen::Closure{[](const std::array<double, 2>& x) {
                                              if (x[0] >= 0 && x[0] < 0.5) return 1.0;
                                              return x[0] >= 0.5 && x[0] < 1 ? -1.0 : 0.0;
                                          }},
                                          1, m.L, m.J);
        return Atom::from_mesh(Region({Interval{Rational(0), Rational(1)}}), f);
    }
    if (a.atom == "file") {
        if (a.file.empty()) throw UsageError("--atom file needs --file");
        const auto ends = split(a.cube, ',');
        if (ends.size() != 2) throw UsageError("--cube expects lo,hi");
        MeshFunction f;
        try {
            f = load_mesh(a.file);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        const Atom at = Atom::from_mesh(Region({Interval{parse_rational(ends[0]), parse_rational(ends[1])}}), f);
        const auto chk = validate_atom(at);
        if (!chk.ok) throw UsageError("not an atom: mean defect " + std::to_string(chk.mean_defect));
        return at;
    }
    throw UsageError("unknown --atom '" + a.atom + "'");
}

std::string round_table(const json& trace, bool csv) {
    std::ostringstream s;
    if (csv) {
        s << "round,terms,residual_atoms,residual_l1,certified_bound,ratio,reconstruction_defect,unatomized_l1,required_L,"
             "worst_envelope_constant\n";
    } else {
        s << "M = " << trace.at("M") << ", initial bound " << trace.at("initial_bound") << "\n";
        s << "round  terms  atoms  residual_l1   certified_bound  ratio      reconstruction  required_L\n";
    }
    for (const auto& r : trace.at("rounds")) {
        auto d = [&](const char* k) {
            const auto& v = r.at(k);
            return v.is_number() ? v.get<double>() : kInf;
        };
        char line[256];
        if (csv)
            std::snprintf(line, sizeof line, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", r.at("round").get<int>(),
                          r.at("terms").get<int>(), r.at("residual_atoms").get<int>(), d("residual_l1"),
                          d("certified_bound"), d("ratio"), d("reconstruction_defect"), d("unatomized_l1"),
                          r.at("required_L").get<int>(), d("worst_envelope_constant"));
        else
            std::snprintf(line, sizeof line, "%5d  %5d  %5d  %.6e  %.6e     %.6f   %.3e       %d\n",
                          r.at("round").get<int>(), r.at("terms").get<int>(), r.at("residual_atoms").get<int>(),
                          d("residual_l1"), d("certified_bound"), d("ratio"), d("reconstruction_defect"),
                          r.at("required_L").get<int>());
        s << line;
    }
    if (!csv)
        for (const auto& w : trace.at("warnings")) s << "warning: " << w.get<std::string>() << "\n";
    return s.str();
}

int cmd_factorize(const FactorArgs& a) {
    if (a.M <= 10) throw UsageError("M must exceed 10");
    if (a.M % 2 != 0) throw UsageError("M must be even");
    if (a.rounds < 0) throw UsageError("rounds must be nonnegative");
    const MeshSpec m = parse_mesh(a.mesh);
    const BMLExponents e = parse_exps(a.exps);
    const Atom atom = make_atom(a, m);

    if (!a.sweep.empty()) {
        // Envelope constant against M, for external plotting.
        std::ostringstream s;
        s << "M,envelope_constant,mean_zero_defect,certified,h1_bound_unit\n";
        for (const auto& t : split(a.sweep, ',')) {
            const int M = static_cast<int>(parse_number(t));
            if (M <= 10) throw UsageError("M must exceed 10");
            const auto st = factorization_step(atom, M, e, false);
            char line[160];
            std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%d,%.17g\n", M, st.cert.envelope_constant,
                          st.cert.mean_zero_defect, st.cert.certified ? 1 : 0, st.cert.h1_bound_unit);
            s << line;
        }
        write_text(a.out, s.str());
        return 0;
    }

    FactorizationState st;
    json extra = json::object();
    if (a.search) {
        const MSearch ms = search_M({{1.0, atom}}, a.rounds, 0.75, m.L, e);
        st = ms.state;
        json tried = json::array();
        for (const auto& [M, w] : ms.worst_ratio) tried.push_back({{"M", M}, {"worst_ratio", w}});
        extra = {{"searched_M", ms.M}, {"tried", tried}};
    } else {
        st = factorize({{1.0, atom}}, a.M, a.rounds, m.L, e);
    }
    json trace = to_json(st);
    trace["exponents"] = e.str();
    trace["mesh"] = {m.n, m.L, m.J};
    if (!extra.empty()) trace["search"] = extra;
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw UsageError("cannot write " + a.out);
        out << trace.dump(2) << "\n";
    }
    if (a.format == "json" && a.out.empty())
        std::cout << trace.dump(2) << "\n";
    else
        std::cout << round_table(trace, a.format == "csv");
    return 0;
}

int cmd_report(const std::string& path, const std::string& format) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    json trace;
    try {
        in >> trace;
        std::cout << round_table(trace, format == "csv");
    } catch (const json::exception& e) {
        throw UsageError(path + ": not a factorization trace (" + e.what() + ")");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bmllab: Bourgain-Morrey-Lorentz numerical laboratory"};
    app.require_subcommand(1);

    FunctionSource norm_src;
    std::string norm_exps = "2,2,3,4", norm_lorentz;
    auto* norm = app.add_subcommand("norm", "BML and Lorentz norms of a mesh function");
    norm_src.attach(norm);
    norm->add_option("--exps", norm_exps, "p,q,t,r")->capture_default_str();
    norm->add_option("--lorentz", norm_lorentz, "p,q: print only the Lorentz norm");

    FunctionSource op_src;
    OpArgs op_args;
    auto* op = app.add_subcommand("op", "apply an operator; prints a MeshFunction with an exact flag");
    op_src.attach(op);
    op->add_option("operator", op_args.op,
                   "hilbert | truncated | maximal-transform | fractional | maximal | maximal-sandwich | "
                   "powered-maximal | fractional-maximal | sharp | commutator")
        ->required();
    op->add_option("--alpha", op_args.alpha, "fractional order")->capture_default_str();
    op->add_option("--zeta", op_args.zeta, "truncation radius");
    op->add_option("--eta", op_args.eta, "power for the powered maximal function")->capture_default_str();
    op->add_option("--symbol", op_args.symbol, "commutator symbol (MeshFunction JSON)");
    op->add_option("--sampling", op_args.sampling, "average | center")
        ->check(CLI::IsMember({"average", "center"}))
        ->capture_default_str();
    op->add_option("--out", op_args.out, "output path (default stdout)");

    VerifyArgs v;
    auto* verify = app.add_subcommand("verify", "run verification suites");
    verify->add_option("suite", v.suite, "lorentz | bml | operators | blocks | hardy | all")->required();
    verify->add_option("--seed", v.seed)->capture_default_str();
    verify->add_option("--corpus", v.corpus, "corpus size")->capture_default_str();
    verify->add_option("--mesh", v.mesh, "n,L,J")->capture_default_str();
    verify->add_option("--exps", v.exps, "p,q,t,r (repeatable)");
    verify->add_option("--format", v.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    verify->add_option("--out", v.out, "output path (default stdout)");

    FactorArgs fa;
    auto* factor = app.add_subcommand("factorize", "weak factorization of an H^1 atom");
    factor->add_option("--M", fa.M, "separation parameter (even, > 10)")->capture_default_str();
    factor->add_option("--rounds", fa.rounds)->capture_default_str();
    factor->add_option("--mesh", fa.mesh, "n,L,J of the atom mesh")->capture_default_str();
    factor->add_flag("--search", fa.search, "search M in 16..1024 for per-round ratio <= 0.75");
    factor->add_option("--sweep", fa.sweep, "comma list of M: CSV of envelope constant against M");
    factor->add_option("--atom", fa.atom, "haar | file")->capture_default_str();
    factor->add_option("--file", fa.file, "atom payload (MeshFunction JSON)");
    factor->add_option("--cube", fa.cube, "atom cube lo,hi (rationals)")->capture_default_str();
    factor->add_option("--exps", fa.exps, "exponents used for product costs")->capture_default_str();
    factor->add_option("--format", fa.format)->check(CLI::IsMember({"text", "json", "csv"}))->capture_default_str();
    factor->add_option("--out", fa.out, "trace file");

    std::string report_path, report_format = "text";
    auto* report = app.add_subcommand("report", "summarize a factorization trace");
    report->add_option("trace", report_path, "trace JSON written by factorize --out")->required();
    report->add_option("--format", report_format)->check(CLI::IsMember({"text", "csv"}))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*norm) return cmd_norm(norm_src, norm_exps, norm_lorentz);
        if (*op) return cmd_op(op_src, op_args);
        if (*verify) return cmd_verify(v);
        if (*factor) return cmd_factorize(fa);
        if (*report) return cmd_report(report_path, report_format);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainTooSmall& e) {
        std::cerr << "error: " << e.what() << " (required L = " << e.required_L << ")\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return 0;
}
