// wpl: command-line driver for the wave-packet laboratory

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>

#include "wpl/experiments.hpp"
#include "wpl/exponents.hpp"
#include "wpl/norms.hpp"
#include "wpl/packets.hpp"
#include "wpl/parallel.hpp"
#include "wpl/propagator.hpp"
#include "wpl/report.hpp"
#include "wpl/sphere.hpp"

using namespace wpl;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFail = 1, kUsage = 2, kNumeric = 3 };

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

json load_config(const std::string& path, const std::vector<std::string>& sets) {
    json j = json::object();
    if (!path.empty()) {
        std::string text = slurp(path);
        try {
            j = text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError("config '" + path + "': " + e.what());
        }
    }
    for (auto& s : sets) apply_override(j, s);
    return j;
}

Field load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read '" + path + "'");
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        json j;
        try {
            j = json::parse(is);
        } catch (const json::parse_error& e) {
            throw ConfigError("field '" + path + "': " + e.what());
        }
        return field_from_json(j);
    }
    return read_binary(is);
}

void save_field(const Field& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    write_binary(f, os);
}

// --------------------------------------------------------------- subcommands

int cmd_exponents(int n, const std::vector<std::string>& ps, bool as_json) {
    json rows = json::array();
    std::vector<ExponentTriple> es;
    for (auto& s : ps) {
        Rational p = Rational::parse(s);
        if (p < Rational(2)) throw ConfigError("exponents: p must be >= 2, got " + s);
        es.push_back(exponents(n, p));
        rows.push_back(to_json(es.back()));
    }
    if (as_json) {
        std::cout << rows.dump(2) << "\n";
        return kOk;
    }
    std::printf("%-8s %-10s %-10s %-10s %-10s %-10s %-10s %-10s %-10s\n", "p", "s", "s~", "sigma", "sigma~", "d", "d~",
                "d-s", "(d-s)~");
    for (auto& e : es)
        std::printf("%-8s %-10s %-10.6f %-10s %-10.6f %-10s %-10.6f %-10s %-10.6f\n", e.p.str().c_str(), e.s.str().c_str(),
                    e.s.value(), e.sigma.str().c_str(), e.sigma.value(), e.d.str().c_str(), e.d.value(),
                    e.gap.str().c_str(), e.gap.value());
    return kOk;
}

int cmd_partition(int n, int k, const std::string& out) {
    auto d = build_direction_set(n, k);
    SectorPartition part(d);
    auto probes = probe_mesh(n, d.delta / 16);
    json j = to_json(d);
    j["summary"] = {{"count", d.size()},
                    {"delta", d.delta},
                    {"min_separation", d.min_separation()},
                    {"cover_radius", d.cover_radius(probes)},
                    {"support_factor", part.support_factor()},
                    {"min_denominator", part.min_denominator(probes)}};
    if (out.empty()) {
        std::cout << j["summary"].dump(2) << "\n";
    } else {
        std::ofstream os(out);
        if (!os) throw ConfigError("cannot write '" + out + "'");
        os << j.dump(2) << "\n";
        std::cout << "wrote " << out << " (" << d.size() << " directions)\n";
    }
    return kOk;
}

struct NormArgs {
    std::string input, kind = "discrete";
    int random_k = -1, N = 256;
    unsigned seed = 1;
    int k = -1;
    double p = 4, s = 0, gamma = 2;
};

int cmd_norm(const NormArgs& a) {
    Field f;
    int k = a.k;
    if (!a.input.empty()) {
        f = load_field(a.input);
    } else if (a.random_k >= 1) {
        k = a.random_k;
        GridSpec g{2, a.N, 2 * kPi};
        g.validate();
        g.require_resolves(std::ldexp(1.0, k + 1));
        f = random_annulus(k, SectorPartition(build_direction_set(2, k)), g, a.seed).field;
    } else {
        throw ConfigError("norm: give --input FILE or --random K");
    }
    json out{{"kind", a.kind}, {"p", a.p}, {"s", a.s}};
    if (a.kind == "lp") {
        out["value"] = lp_norm(f, a.p, static_cast<int>(a.gamma));
    } else if (a.kind == "sobolev") {
        out["value"] = sobolev_norm(f, a.s, a.p, static_cast<int>(a.gamma));
    } else {
        if (k < 1) throw ConfigError("norm: --k is required for sector norms of an input file");
        SectorPartition part(build_direction_set(f.grid.n, k));
        NormResult r;
        if (a.kind == "discrete") r = hfio_discrete_norm(f, a.s, a.p, part, EvalPath::cropped, a.gamma);
        else if (a.kind == "square") r = square_function_norm(f, a.p, part, a.gamma);
        else if (a.kind == "continuous") {
            WavePacketSystem sys(f.grid.n);
            r = hfio_continuous_norm(f, a.s, a.p, sys, default_sphere_rule(f.grid.n, k), a.gamma);
        } else {
            throw ConfigError("norm: unknown kind '" + a.kind + "' (discrete, continuous, square, sobolev, lp)");
        }
        out["value"] = r.value;
        out["diagnostics"] = r.diag.to_json();
        out["k"] = k;
    }
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int cmd_propagate(const std::string& in, const std::string& out, double t, const std::string& phase) {
    Field f = load_field(in);
    Field g = propagate(f, t, phase_by_name(phase, f.grid.n));
    save_field(g, out);
    std::cout << json{{"t", t}, {"phase", phase}, {"l2_before", lp_norm(f, 2)}, {"l2_after", lp_norm(g, 2)}}.dump(2) << "\n";
    return kOk;
}

int cmd_experiment(const std::string& config, const std::vector<std::string>& sets, const std::string& outdir,
                   bool dry) {
    ExperimentConfig cfg = ExperimentConfig::from_json(load_config(config, sets));
    if (cfg.experiment == "equivalence") throw ConfigError("config field 'experiment': use the suite subcommand");
    if (dry) {
        std::cout << "config ok\n" << cfg.to_json().dump(2) << "\n";
        return kOk;
    }
    ExperimentResult r = run_experiment(cfg);
    auto rendered = render_experiment(r);
    auto paths = write_experiment(rendered, outdir, cfg.experiment);
    for (auto& f : r.fits)
        std::printf("p = %g: slope %.4f (predicted %.4f), residual %.3g over k = %d..%d\n", f.p, f.fit.slope,
                    f.reference_slope, f.fit.max_residual, f.fit.k_min, f.fit.k_max);
    for (auto& c : r.checks)
        std::printf("%s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str());
    for (auto& p : paths) std::cout << "wrote " << p.string() << "\n";
    std::cout << "hash " << rendered.hash << "\n";
    return r.passed() ? kOk : kFail;
}

int cmd_suite(const std::string& config, const std::vector<std::string>& sets, const std::string& outdir, int drop,
              bool dry) {
    json j = load_config(config, sets);
    // suite defaults differ from the experiment defaults
    json base = {{"experiment", "equivalence"}, {"p", {2, 4}}, {"k", {{"min", 3}, {"max", 6}}}, {"grid", {{"N", 512}}},
                 {"input", {{"type", "random"}}}};
    base.merge_patch(j);
    if (drop >= 0) base["mutation"]["drop_sector"] = drop;
    ExperimentConfig cfg = ExperimentConfig::from_json(base);
    if (dry) {
        std::cout << "config ok\n" << cfg.to_json().dump(2) << "\n";
        return kOk;
    }
    SuiteReport rep = run_equivalence_suite(cfg);
    std::string text = render_suite(rep);
    std::filesystem::create_directories(outdir);
    auto path = std::filesystem::path(outdir) / "suite.json";
    std::ofstream(path, std::ios::binary) << text;
    for (auto& t : rep.tests) std::printf("%s %s\n", t.skipped ? "SKIP" : (t.pass ? "PASS" : "FAIL"), t.name.c_str());
    std::cout << "wrote " << path.string() << "\n";
    return rep.passed() ? kOk : kFail;
}

int cmd_report(const std::string& in, const std::string& outdir, bool reference) {
    if (reference) {
        std::cout << "# Configuration reference\n\n" << config_reference();
        return kOk;
    }
    if (in.empty()) throw ConfigError("report: give --in FILE.jsonl or --config-reference");
    auto pr = parse_jsonl(slurp(in));
    if (!pr.hash_ok) {
        std::cerr << "report: body hash mismatch in " << in << "\n";
        return kFail;
    }
    auto r = rerender(pr);
    std::string stem = std::filesystem::path(in).stem().string();
    auto paths = write_experiment(r, outdir.empty() ? std::filesystem::path(in).parent_path() : std::filesystem::path(outdir), stem);
    for (auto& p : paths) std::cout << "wrote " << p.string() << "\n";
    std::cout << "hash " << r.hash << " ok\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wave-packet laboratory: FIO Hardy norms, half-wave propagators, scaling experiments"};
    app.require_subcommand(1);
    int threads = -1;
    bool serial = false;
    app.add_option("--threads", threads, "worker threads (default: WPL_THREADS or hardware)");
    app.add_flag("--serial", serial, "single-threaded, deterministic schedule");

    int n = 2;
    std::vector<std::string> ps;
    bool as_json = false;
    auto* ex = app.add_subcommand("exponents", "table of s(p), sigma(p), d(p), d(p) - s(p)");
    ex->add_option("--n", n, "dimension")->check(CLI::Range(2, 64));
    ex->add_option("--p", ps, "exponent(s), rational allowed (7/2)")->required();
    ex->add_flag("--json", as_json, "JSON output");

    int pk = 4;
    std::string pout;
    auto* pa = app.add_subcommand("partition", "direction set and sector partition summary");
    pa->add_option("--n", n, "dimension")->check(CLI::Range(2, 3));
    pa->add_option("--k", pk, "scale")->required()->check(CLI::Range(0, 12));
    pa->add_option("--out", pout, "write the direction set JSON here");

    NormArgs na;
    auto* no = app.add_subcommand("norm", "norms of a field");
    no->add_option("--input", na.input, "field file (.bin or .json)");
    no->add_option("--random", na.random_k, "use a random annulus field at this k");
    no->add_option("--N", na.N, "grid size for --random");
    no->add_option("--seed", na.seed, "seed for --random");
    no->add_option("--k", na.k, "scale of the sector partition");
    no->add_option("--kind", na.kind, "discrete | continuous | square | sobolev | lp");
    no->add_option("--p", na.p, "exponent")->check(CLI::Range(1.0, 1e9));
    no->add_option("--s", na.s, "Sobolev order");
    no->add_option("--gamma", na.gamma, "oversampling");

    std::string pin, pfile;
    double t = 0;
    std::string phase = "euclidean";
    auto* pr = app.add_subcommand("propagate", "apply exp(i t phi(D)) to a field");
    pr->add_option("--input", pin, "field file")->required();
    pr->add_option("--out", pfile, "output field file")->required();
    pr->add_option("--t", t, "time")->required();
    pr->add_option("--phase", phase, "euclidean | linear | degenerate");

    std::string config, outdir = "out";
    std::vector<std::string> sets;
    bool dry = false;
    auto* xp = app.add_subcommand("experiment", "run a scaling experiment from a config");
    xp->add_option("config", config, "JSON config file")->required();
    xp->add_option("--set", sets, "override key=value (dotted keys)");
    xp->add_option("--out", outdir, "output directory");
    xp->add_flag("--dry-run", dry, "validate only, write nothing");

    int drop = -1;
    auto* su = app.add_subcommand("suite", "equivalence suite and core checks");
    su->add_option("--config", config, "JSON config file (empty means defaults)");
    su->add_option("--set", sets, "override key=value");
    su->add_option("--out", outdir, "output directory");
    su->add_option("--mutate-drop", drop, "drop this sector from the partition (sensitivity check)");
    su->add_flag("--dry-run", dry, "validate only, write nothing");

    std::string rin;
    bool reference = false;
    std::string rout;
    auto* re = app.add_subcommand("report", "verify a record file and rebuild its CSV and SVG");
    re->add_option("--in", rin, "JSONL record file");
    re->add_option("--out", rout, "output directory (default: next to the input)");
    re->add_flag("--config-reference", reference, "print the configuration reference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    if (serial) set_thread_count(1);
    else if (threads > 0) set_thread_count(threads);

    try {
        if (*ex) return cmd_exponents(n, ps, as_json);
        if (*pa) return cmd_partition(n, pk, pout);
        if (*no) return cmd_norm(na);
        if (*pr) return cmd_propagate(pin, pfile, t, phase);
        if (*xp) return cmd_experiment(config, sets, outdir, dry);
        if (*su) return cmd_suite(config, sets, outdir, drop, dry);
        if (*re) return cmd_report(rin, rout, reference);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const UnsupportedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}
