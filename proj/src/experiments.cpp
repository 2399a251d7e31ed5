#include "wpl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "wpl/exponents.hpp"
#include "wpl/norms.hpp"
#include "wpl/packets.hpp"

namespace wpl {

using nlohmann::json;

// ---------------------------------------------------------------- config

namespace {

const std::set<std::string> kExperiments{"sharpness", "squarefunction", "decoupling", "localsmoothing", "equivalence"};
const std::set<std::string> kInputs{"full", "unit", "random", "zero"};

struct KeyDoc {
    const char* key;
    const char* meaning;
};
// order matches default_config_json
const KeyDoc kDocs[] = {
    {"experiment", "sharpness | squarefunction | decoupling | localsmoothing | equivalence"},
    {"n", "dimension; sweeps support n = 2"},
    {"p", "exponent or list of exponents, each >= 2"},
    {"phase", "euclidean (|xi|) | linear (e1 . xi) | degenerate (|xi_1|)"},
    {"k.min", "first dyadic scale"},
    {"k.max", "last dyadic scale; at least k.min + 2"},
    {"grid.N", "points per axis (full/random families, suite)"},
    {"grid.L", "torus side; 0 picks the family default (auto-scaled, 24 for unit, 2 pi for the suite)"},
    {"grid.gamma", "oversampling of the norm patches"},
    {"time.intervals", "trapezoid intervals on [0, 1]; 0 gives max(64, 8 * 2^k)"},
    {"input.type", "full | unit | random | zero"},
    {"input.c", "Fourier support radius of the bump; 0 is automatic"},
    {"input.seed", "seed of the random family and of the Rademacher signs"},
    {"s", "Sobolev offset added to the right-hand side order"},
    {"khintchine.trials", "Rademacher draws per k in the square-function side check; 0 disables"},
    {"khintchine.intervals", "time intervals used by that side check"},
    {"mutation.drop_sector", "index of a chi_nu forced to 0; -1 for none"},
};

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ConfigError("config field '" + path + "': " + what);
}

const json& need(const json& j, const std::string& path) {
    const json* cur = &j;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) cur = &cur->at(part);
    return *cur;
}

double get_num(const json& j, const std::string& path) {
    const json& v = need(j, path);
    if (!v.is_number()) bad(path, "expected a number, got " + v.dump());
    return v.get<double>();
}

int get_int(const json& j, const std::string& path) {
    const json& v = need(j, path);
    if (!v.is_number_integer()) bad(path, "expected an integer, got " + v.dump());
    return v.get<int>();
}

std::string get_str(const json& j, const std::string& path) {
    const json& v = need(j, path);
    if (!v.is_string()) bad(path, "expected a string, got " + v.dump());
    return v.get<std::string>();
}

// rejects keys that the defaults do not have
void check_keys(const json& given, const json& dflt, const std::string& prefix) {
    if (!given.is_object()) return;
    for (auto it = given.begin(); it != given.end(); ++it) {
        std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!dflt.contains(it.key())) bad(path, "unknown key");
        if (dflt[it.key()].is_object()) {
            if (!it.value().is_object()) bad(path, "expected a section, got " + it.value().dump());
            check_keys(it.value(), dflt[it.key()], path);
        }
    }
}

}  // namespace

json default_config_json() { return ExperimentConfig{}.to_json(); }

json ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["n"] = n;
    j["p"] = p;
    j["phase"] = phase;
    j["k"] = {{"min", k_min}, {"max", k_max}};
    j["grid"] = {{"N", N}, {"L", L}, {"gamma", gamma}};
    j["time"] = {{"intervals", time_intervals}};
    j["input"] = {{"type", input}, {"c", c}, {"seed", seed}};
    j["s"] = s;
    j["khintchine"] = {{"trials", khintchine_trials}, {"intervals", khintchine_intervals}};
    j["mutation"] = {{"drop_sector", drop_sector}};
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& given) {
    if (!given.is_null() && !given.is_object()) throw ConfigError("config: top level must be an object");
    json j = default_config_json();
    if (given.is_object()) {
        check_keys(given, j, "");
        j.merge_patch(given);
    }
    ExperimentConfig c;
    c.experiment = get_str(j, "experiment");
    c.n = get_int(j, "n");
    const json& p = j["p"];
    c.p.clear();
    if (p.is_number()) {
        c.p.push_back(p.get<double>());
    } else if (p.is_array()) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!p[i].is_number()) bad("p[" + std::to_string(i) + "]", "expected a number, got " + p[i].dump());
            c.p.push_back(p[i].get<double>());
        }
    } else {
        bad("p", "expected a number or a list, got " + p.dump());
    }
    c.phase = get_str(j, "phase");
    c.k_min = get_int(j, "k.min");
    c.k_max = get_int(j, "k.max");
    c.N = get_int(j, "grid.N");
    c.L = get_num(j, "grid.L");
    c.gamma = get_num(j, "grid.gamma");
    c.time_intervals = get_int(j, "time.intervals");
    c.input = get_str(j, "input.type");
    c.c = get_num(j, "input.c");
    int seed = get_int(j, "input.seed");
    if (seed < 0) bad("input.seed", "must be >= 0");
    c.seed = static_cast<unsigned>(seed);
    c.s = get_num(j, "s");
    c.khintchine_trials = get_int(j, "khintchine.trials");
    c.khintchine_intervals = get_int(j, "khintchine.intervals");
    c.drop_sector = get_int(j, "mutation.drop_sector");
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    if (!kExperiments.count(experiment)) bad("experiment", "unknown experiment '" + experiment + "'");
    if (n != 2) bad("n", "sweeps support n = 2 only");
    if (p.empty()) bad("p", "needs at least one exponent");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!(p[i] >= 2) || !std::isfinite(p[i])) bad("p[" + std::to_string(i) + "]", "must be finite and >= 2");
    try {
        phase_by_name(phase, n);
    } catch (const ParameterError& e) {
        bad("phase", e.what());
    }
    if (k_min < 1) bad("k.min", "must be >= 1");
    if (k_max < k_min + 2) bad("k.max", "a fit needs three scales: k.max >= k.min + 2");
    if (N < 16 || (N & (N - 1))) bad("grid.N", "must be a power of two >= 16");
    if (!(L >= 0) || !std::isfinite(L)) bad("grid.L", "must be >= 0");
    if (!(gamma >= 1)) bad("grid.gamma", "must be >= 1");
    if (time_intervals < 0) bad("time.intervals", "must be >= 0");
    if (!kInputs.count(input)) bad("input.type", "unknown input '" + input + "'");
    if (!(c >= 0 && c <= 1)) bad("input.c", "must lie in [0, 1]");
    if (khintchine_trials < 0) bad("khintchine.trials", "must be >= 0");
    if (khintchine_intervals < 1) bad("khintchine.intervals", "must be >= 1");
    if (experiment == "sharpness" && input != "full") bad("input.type", "the sharpness experiment uses the full family");
    if (experiment == "squarefunction" && input != "unit")
        bad("input.type", "the square-function experiment uses the unit family");
    if (experiment == "equivalence" && input != "random" && input != "zero")
        bad("input.type", "the equivalence suite takes random or zero input");
    if (experiment != "equivalence" && input == "zero") bad("input.type", "zero input is for the equivalence suite");
    for (int k = k_min; k <= k_max; ++k) grid_for(k);
    if (drop_sector >= 0) {
        auto d = build_direction_set(n, k_min);
        if (static_cast<std::size_t>(drop_sector) >= d.size())
            bad("mutation.drop_sector", "index beyond |Theta_k| = " + std::to_string(d.size()) + " at k = " +
                                            std::to_string(k_min));
    }
}

GridSpec ExperimentConfig::grid_for(int k) const {
    double edge = std::ldexp(1.0, k + 1);
    auto nyq = [&](const GridSpec& g) {
        if (!(g.nyquist() > edge)) {
            std::ostringstream os;
            os << "k.max = " << k_max << " is not resolved: Nyquist radius pi N / L = " << g.nyquist()
               << " (N = " << g.N << ", L = " << g.L << ") must exceed 2^{k+1} = " << edge << " at k = " << k;
            bad("k.max", os.str());
        }
    };
    GridSpec g;
    g.n = n;
    if (experiment == "equivalence") {
        g.N = N;
        g.L = L > 0 ? L : 2 * kPi;
        nyq(g);
        return g;
    }
    if (input == "unit") {
        g.L = L > 0 ? L : 24.0;
        g.N = 2;
        while (!(g.nyquist() > edge) && g.N < kMaxUnitN) g.N *= 2;
        nyq(g);
        return g;
    }
    g.N = N;
    if (L > 0) {
        g.L = L;
        nyq(g);
        return g;
    }
    g = full_family_grid(k, N);
    if (g.L < kMinTorusSide) {
        std::ostringstream os;
        os << "k.max = " << k_max << " is too large for N = " << N << ": keeping the Nyquist radius pi N / L at "
           << kNyquistMargin << " * 2^{k+1} = " << kNyquistMargin * edge << " shrinks the torus to L = " << g.L
           << " < " << kMinTorusSide << " at k = " << k << " (largest k for this N: "
           << static_cast<int>(std::floor(std::log2(kPi * N / (kNyquistMargin * kMinTorusSide)))) - 1 << ")";
        bad("k.max", os.str());
    }
    return g;
}

void apply_override(json& j, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "': expected key=value");
    std::string key = assignment.substr(0, eq), val = assignment.substr(eq + 1);
    json v;
    try {
        v = json::parse(val);
    } catch (const json::parse_error&) {
        v = val;
    }
    json* cur = &j;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!cur->is_object()) throw ConfigError("override '" + key + "': '" + parts[i] + "' is not a section");
        cur = &(*cur)[parts[i]];
    }
    if (!cur->is_object() && !cur->is_null()) throw ConfigError("override '" + key + "': parent is not a section");
    (*cur)[parts.back()] = v;
}

std::string config_reference() {
    json d = default_config_json();
    std::ostringstream os;
    os << "| key | default | meaning |\n|---|---|---|\n";
    for (auto& kd : kDocs) {
        std::string m;
        for (char ch : std::string(kd.meaning)) m += ch == '|' ? std::string("\\|") : std::string(1, ch);
        os << "| `" << kd.key << "` | `" << need(d, kd.key).dump() << "` | " << m << " |\n";
    }
    return os.str();
}

// ---------------------------------------------------------------- records and fits

double ScalingRecord::log2_ratio() const { return std::log2(lhs / rhs); }

json ScalingRecord::to_json() const {
    return json{{"type", "record"}, {"k", k},     {"p", p}, {"lhs", lhs}, {"rhs", rhs},
                {"log2_ratio", log2_ratio()}, {"diagnostics", diagnostics}};
}

FitResult fit_line(const std::vector<double>& ks, const std::vector<double>& y) {
    std::set<double> distinct(ks.begin(), ks.end());
    if (ks.size() != y.size() || distinct.size() < 3) throw ParameterError("fit: needs at least 3 distinct k");
    for (double v : y)
        if (!std::isfinite(v)) throw NumericalError("fit: non-finite log-ratio");
    auto ls = [](const std::vector<double>& x, const std::vector<double>& v, std::size_t a, std::size_t b) {
        double mx = 0, my = 0, m = static_cast<double>(b - a);
        for (std::size_t i = a; i < b; ++i) mx += x[i], my += v[i];
        mx /= m, my /= m;
        double sxy = 0, sxx = 0;
        for (std::size_t i = a; i < b; ++i) sxy += (x[i] - mx) * (v[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
        double slope = sxy / sxx;
        return std::pair{slope, my - slope * mx};
    };
    FitResult f;
    auto [sl, ic] = ls(ks, y, 0, ks.size());
    f.slope = sl;
    f.intercept = ic;
    for (std::size_t i = 0; i < ks.size(); ++i) f.max_residual = std::max(f.max_residual, std::abs(y[i] - (sl * ks[i] + ic)));
    f.k_min = static_cast<int>(*distinct.begin());
    f.k_max = static_cast<int>(*distinct.rbegin());
    f.points = ks.size();
    // sorted copy for the sliding windows
    std::vector<std::size_t> ord(ks.size());
    for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [&](auto a, auto b) { return ks[a] < ks[b]; });
    std::vector<double> xs, ys;
    for (auto i : ord) xs.push_back(ks[i]), ys.push_back(y[i]);
    for (std::size_t a = 0; a + 3 <= xs.size(); ++a) {
        if (xs[a] == xs[a + 2]) continue;
        f.subrange_spread = std::max(f.subrange_spread, std::abs(ls(xs, ys, a, a + 3).first - sl));
    }
    return f;
}

FitResult fit_power_law(const std::vector<ScalingRecord>& records) {
    std::vector<double> ks, y;
    for (auto& r : records) {
        if (!(r.lhs > 0) || !(r.rhs > 0)) throw NumericalError("fit: record at k = " + std::to_string(r.k) + " is not positive");
        ks.push_back(r.k);
        y.push_back(r.log2_ratio());
    }
    return fit_line(ks, y);
}

json FitResult::to_json() const {
    return json{{"slope", slope},   {"intercept", intercept}, {"max_residual", max_residual},
                {"k_min", k_min},   {"k_max", k_max},         {"points", points},
                {"subrange_spread", subrange_spread}};
}

json Check::to_json() const {
    json j{{"name", name}, {"pass", pass}, {"skipped", skipped}};
    if (!skipped) j.update(json{{"value", value}, {"bound", bound}, {"relation", relation}});
    if (!detail.is_null()) j["detail"] = detail;
    return j;
}

bool ExperimentResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

bool SuiteReport::passed() const {
    return std::all_of(tests.begin(), tests.end(), [](const Check& c) { return c.pass; });
}

json SuiteReport::to_json() const {
    json t = json::array();
    std::vector<std::string> failing;
    for (auto& c : tests) {
        t.push_back(c.to_json());
        if (!c.pass) failing.push_back(c.name);
    }
    return json{{"config", config.to_json()}, {"passed", passed()}, {"failing", failing}, {"tests", t}};
}

// ---------------------------------------------------------------- helpers

namespace {

Check make_check(std::string name, double value, const std::string& rel, double bound, json detail = nullptr) {
    Check c;
    c.name = std::move(name);
    c.value = value;
    c.relation = rel;
    c.bound = bound;
    c.detail = std::move(detail);
    if (rel == ">=") c.pass = value >= bound;
    else if (rel == "<=") c.pass = value <= bound;
    else if (rel == "|.|<=") c.pass = std::abs(value) <= bound;
    else throw ContractError("check: unknown relation " + rel);
    if (std::isnan(value)) c.pass = false;
    return c;
}

Check skipped_check(std::string name, json detail) {
    Check c;
    c.name = std::move(name);
    c.pass = true;
    c.skipped = true;
    c.detail = std::move(detail);
    return c;
}

std::string pname(double p) {
    std::ostringstream os;
    os << p;
    return os.str();
}

SectorPartition make_partition(const ExperimentConfig& cfg, int k) {
    SectorPartition part(build_direction_set(cfg.n, k));
    if (cfg.drop_sector >= 0) part = part.with_dropped(cfg.drop_sector);
    return part;
}

TimeRule time_rule(const ExperimentConfig& cfg, int k) {
    return cfg.time_intervals > 0 ? trapezoid_rule(0, 1, cfg.time_intervals) : default_time_rule(k);
}

struct CacheEntry {
    std::map<double, double> values;
    double spacing = 0;
    bool coarse = false;
};
std::mutex g_cache_mu;
std::map<std::string, CacheEntry> g_cache;

// space-time norms for ps, computed together with the common exponents and cached by input/phase/rule
SpacetimeResult cached_spacetime(const std::string& kind, const Extremizer& e, const ExperimentConfig& cfg,
                                 const PhaseSymbol& ph, const TimeRule& rule, const std::vector<double>& ps,
                                 const SectorPartition* part) {
    json key{{"kind", kind},           {"input", e.spec()},      {"phase", ph.name},
             {"rule", rule.to_json()}, {"gamma", cfg.gamma},     {"drop", kind == "sq" ? cfg.drop_sector : -1}};
    std::string ks = key.dump();
    {
        std::lock_guard lk(g_cache_mu);
        auto it = g_cache.find(ks);
        if (it != g_cache.end() &&
            std::all_of(ps.begin(), ps.end(), [&](double p) { return it->second.values.count(p); })) {
            SpacetimeResult r;
            for (double p : ps) r.values.push_back(it->second.values.at(p));
            r.spacing = it->second.spacing;
            r.coarse_rule = it->second.coarse;
            r.gamma = cfg.gamma;
            return r;
        }
    }
    std::set<double> all(ps.begin(), ps.end());
    for (double p : {2.0, 4.0, 6.0, 12.0}) all.insert(p);
    std::vector<double> av(all.begin(), all.end());
    SpacetimeResult full = kind == "sq" ? spacetime_square_function(e.field, av, ph, *part, rule, cfg.gamma)
                                        : spacetime_lp_norms(e.field, av, ph, rule, cfg.gamma);
    CacheEntry ce;
    for (std::size_t i = 0; i < av.size(); ++i) ce.values[av[i]] = full.values[i];
    ce.spacing = full.spacing;
    ce.coarse = full.coarse_rule;
    {
        std::lock_guard lk(g_cache_mu);
        g_cache[ks] = ce;
    }
    SpacetimeResult r = full;
    r.values.clear();
    for (double p : ps) r.values.push_back(ce.values.at(p));
    return r;
}

json input_diag(const Extremizer& e) {
    double l1min = INFINITY, l1max = 0, near = INFINITY;
    for (auto& inf : e.info) {
        l1min = std::min(l1min, inf.fourier_l1);
        l1max = std::max(l1max, inf.fourier_l1);
        near = std::min(near, inf.min_near_origin);
    }
    json j = e.spec();
    j["fourier_l1_min"] = e.info.empty() ? 0.0 : l1min;
    j["fourier_l1_max"] = l1max;
    if (e.type != "random") j["min_near_origin"] = near;
    return j;
}

json rule_diag(const SpacetimeResult& st, const TimeRule& rule) {
    return json{{"time_nodes", rule.size()}, {"time_spacing", rule.spacing}, {"coarse_rule", st.coarse_rule}};
}

// one record per p at this k
void push_records(ExperimentResult& res, int k, const std::vector<double>& ps, const std::vector<double>& lhs,
                  const std::vector<double>& rhs, const json& diag) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
        ScalingRecord r;
        r.k = k;
        r.p = ps[i];
        r.lhs = lhs[i];
        r.rhs = rhs[i];
        r.diagnostics = diag;
        if (!(r.lhs > 0) || !(r.rhs > 0) || !std::isfinite(r.lhs) || !std::isfinite(r.rhs))
            throw NumericalError("k = " + std::to_string(k) + ", p = " + pname(ps[i]) + ": non-positive or non-finite norm");
        res.records.push_back(std::move(r));
    }
}

FitResult fit_for(const ExperimentResult& res, double p) {
    std::vector<ScalingRecord> rs;
    for (auto& r : res.records)
        if (r.p == p) rs.push_back(r);
    return fit_power_law(rs);
}

// runs body(k) with the failing k attached to any library error
template <class Body>
void for_each_k(const ExperimentConfig& cfg, Body&& body) {
    // scales run in order; every scale is parallel inside, which keeps the reductions fixed
    for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
        try {
            body(k);
        } catch (const ConfigError&) {
            throw;
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " [k = " + std::to_string(k) + "]");
        } catch (const ConstructionError& e) {
            throw ConstructionError(std::string(e.what()) + " [k = " + std::to_string(k) + "]");
        } catch (const PreconditionError& e) {
            throw PreconditionError(std::string(e.what()) + " [k = " + std::to_string(k) + "]");
        } catch (const EvaluationError& e) {
            throw EvaluationError(std::string(e.what()) + " [k = " + std::to_string(k) + "]");
        } catch (const ParameterError& e) {
            throw ParameterError(std::string(e.what()) + " [k = " + std::to_string(k) + "]");
        }
    }
}

ExperimentResult start(const ExperimentConfig& cfg, const char* name) {
    ExperimentConfig c = cfg;
    c.experiment = name;
    c.validate();
    ExperimentResult res;
    res.config = c;
    res.extras = json::object();
    return res;
}

}  // namespace

void clear_spacetime_cache() {
    std::lock_guard lk(g_cache_mu);
    g_cache.clear();
}

// ---------------------------------------------------------------- inputs

double resolve_c(const ExperimentConfig& cfg) {
    if (cfg.c > 0 || cfg.input == "random" || cfg.input == "zero") return cfg.c;
    // containment gets harder with k, so the c that survives at k_max serves every k
    int k = cfg.k_max;
    SectorPartition part(build_direction_set(cfg.n, k));
    GridSpec g = cfg.grid_for(k);
    return cfg.input == "full" ? extremizer_full(k, part, g).c : extremizer_unit(k, part, g).c;
}

Extremizer make_input(const ExperimentConfig& cfg, int k, const SectorPartition& part) {
    GridSpec g = cfg.grid_for(k);
    if (cfg.input == "full") return extremizer_full(k, part, g, cfg.c);
    if (cfg.input == "unit") return extremizer_unit(k, part, g, cfg.c);
    if (cfg.input == "random") return random_annulus(k, part, g, cfg.seed);
    Extremizer e;
    e.type = "zero";
    e.k = k;
    e.grid = g;
    e.field = Field(g, Domain::frequency);
    return e;
}

// ---------------------------------------------------------------- experiments

ExperimentResult run_sharpness_experiment(const ExperimentConfig& cfg0) {
    ExperimentResult res = start(cfg0, "sharpness");
    ExperimentConfig cfg = res.config;
    cfg.c = resolve_c(cfg);
    PhaseSymbol ph = phase_by_name(cfg.phase, cfg.n);
    for_each_k(cfg, [&](int k) {
        SectorPartition part = make_partition(cfg, k);
        Extremizer e = make_input(cfg, k, part);
        TimeRule rule = time_rule(cfg, k);
        auto st = cached_spacetime("lp", e, cfg, ph, rule, cfg.p, nullptr);
        auto rhs = hfio_discrete_norms(e.field, cfg.s, cfg.p, part, cfg.gamma);
        json d{{"input", input_diag(e)}, {"time", rule_diag(st, rule)}};
        push_records(res, k, cfg.p, st.values, rhs, d);
    });
    for (double p : cfg.p) {
        auto ex = exponents(cfg.n, p);
        double want = ex.gap.value() - cfg.s;
        FitResult f = fit_for(res, p);
        res.fits.push_back({p, f, want});
        json det{{"predicted", want}, {"gap", ex.gap.str()}, {"phase", ph.name}};
        if (ph.curved())
            res.checks.push_back(make_check("sharpness_slope_p" + pname(p), f.slope, ">=", want - 0.05, det));
        else
            res.checks.push_back(skipped_check("sharpness_slope_p" + pname(p),
                                               json{{"slope", f.slope}, {"reason", "rank-0 phase, recorded only"}}));
    }
    return res;
}

ExperimentResult run_squarefunction_experiment(const ExperimentConfig& cfg0) {
    ExperimentResult res = start(cfg0, "squarefunction");
    ExperimentConfig cfg = res.config;
    cfg.c = resolve_c(cfg);
    PhaseSymbol ph = phase_by_name(cfg.phase, cfg.n);
    json khin = json::array();
    for_each_k(cfg, [&](int k) {
        SectorPartition part = make_partition(cfg, k);
        Extremizer e = make_input(cfg, k, part);
        TimeRule rule = time_rule(cfg, k);
        auto st = cached_spacetime("sq", e, cfg, ph, rule, cfg.p, &part);
        auto rhs = hfio_discrete_norms(e.field, cfg.s, cfg.p, part, cfg.gamma);
        json d{{"input", input_diag(e)}, {"time", rule_diag(st, rule)}};
        push_records(res, k, cfg.p, st.values, rhs, d);

        if (cfg.khintchine_trials > 0) {
            TimeRule coarse = trapezoid_rule(0, 1, cfg.khintchine_intervals);
            auto sq = spacetime_square_function(e.field, cfg.p, ph, part, coarse, cfg.gamma).values;
            std::vector<double> acc(cfg.p.size(), 0.0);
            for (int t = 0; t < cfg.khintchine_trials; ++t) {
                Field fe = rademacher_sample(e.grid, e.components, cfg.seed * 1000u + static_cast<unsigned>(t));
                auto v = spacetime_lp_norms(fe, cfg.p, ph, coarse, cfg.gamma).values;
                for (std::size_t i = 0; i < v.size(); ++i) acc[i] += std::pow(v[i], cfg.p[i]);
            }
            for (std::size_t i = 0; i < cfg.p.size(); ++i) {
                double avg = std::pow(acc[i] / cfg.khintchine_trials, 1 / cfg.p[i]);
                double ratio = avg / sq[i];
                khin.push_back(json{{"k", k}, {"p", cfg.p[i]}, {"rademacher", avg}, {"square", sq[i]}, {"ratio", ratio}});
                json det{{"k", k}, {"trials", cfg.khintchine_trials}, {"rademacher", avg}, {"square", sq[i]}};
                res.checks.push_back(make_check("khintchine_k" + std::to_string(k) + "_p" + pname(cfg.p[i]) + "_upper",
                                                ratio, "<=", 4.0, det));
                res.checks.push_back(make_check("khintchine_k" + std::to_string(k) + "_p" + pname(cfg.p[i]) + "_lower",
                                                ratio, ">=", 0.25, det));
            }
        }
    });
    res.extras["khintchine"] = khin;
    for (double p : cfg.p) {
        FitResult f = fit_for(res, p);
        double want = -cfg.s;
        res.fits.push_back({p, f, want});
        json det{{"predicted", want}, {"phase", ph.name}};
        if (p == 2)
            res.checks.push_back(make_check("squarefunction_slope_p2", f.slope - want, "|.|<=", 0.02, det));
        else
            res.checks.push_back(make_check("squarefunction_slope_p" + pname(p), f.slope, ">=", want - 0.05, det));
    }
    return res;
}

ExperimentResult run_decoupling_experiment(const ExperimentConfig& cfg0) {
    ExperimentResult res = start(cfg0, "decoupling");
    ExperimentConfig cfg = res.config;
    cfg.c = resolve_c(cfg);
    PhaseSymbol ph = phase_by_name(cfg.phase, cfg.n);
    PhaseSymbol flat = phase_by_name("linear", cfg.n);
    bool contrast = cfg.input == "full" && ph.curved();
    Window W = build_window();
    TimeRule wr = window_time_rule();
    std::vector<ScalingRecord> flat_records;
    for_each_k(cfg, [&](int k) {
        SectorPartition part = make_partition(cfg, k);
        Extremizer e = make_input(cfg, k, part);
        TimeRule rule = time_rule(cfg, k);
        auto st = cached_spacetime("lp", e, cfg, ph, rule, cfg.p, nullptr);
        auto dec = decoupling_rhs(e.field, cfg.p, ph, W, part, wr, cfg.gamma);
        json d{{"input", input_diag(e)}, {"time", rule_diag(st, rule)}, {"window_tail", dec.tail}, {"terms", dec.terms}};
        push_records(res, k, cfg.p, st.values, dec.values, d);
        if (contrast) {
            auto stf = cached_spacetime("lp", e, cfg, flat, rule, cfg.p, nullptr);
            auto decf = decoupling_rhs(e.field, cfg.p, flat, W, part, wr, cfg.gamma);
            for (std::size_t i = 0; i < cfg.p.size(); ++i) {
                ScalingRecord r;
                r.k = k;
                r.p = cfg.p[i];
                r.lhs = stf.values[i];
                r.rhs = decf.values[i];
                flat_records.push_back(r);
            }
        }
    });
    json cx = json::array();
    for (double p : cfg.p) {
        double want = exponents(cfg.n, p).d.value();
        FitResult f = fit_for(res, p);
        res.fits.push_back({p, f, want});
        json det{{"d", want}, {"margin", 0.1}, {"phase", ph.name}};
        if (ph.curved())
            res.checks.push_back(make_check("decoupling_slope_p" + pname(p), f.slope, "<=", want + 0.1, det));
        else
            res.checks.push_back(skipped_check("decoupling_slope_p" + pname(p),
                                               json{{"slope", f.slope}, {"reason", "rank-0 phase, recorded only"}}));
        if (cfg.input == "full") res.extras["lower_bound_slope_p" + pname(p)] = f.slope;
        if (contrast) {
            std::vector<ScalingRecord> rs;
            for (auto& r : flat_records)
                if (r.p == p) rs.push_back(r);
            FitResult ff = fit_power_law(rs);
            cx.push_back(json{{"p", p}, {"curved", f.slope}, {"flat", ff.slope}});
            // curvature should make the decoupling ratio grow more slowly than for the flat phase
            res.checks.push_back(make_check("contrast_flat_minus_curved_p" + pname(p), ff.slope - f.slope, ">=", 0.0,
                                            json{{"flat_slope", ff.slope}, {"curved_slope", f.slope}}));
        }
    }
    if (contrast) res.extras["contrast"] = cx;
    return res;
}

ExperimentResult run_localsmoothing_experiment(const ExperimentConfig& cfg0) {
    ExperimentResult res = start(cfg0, "localsmoothing");
    ExperimentConfig cfg = res.config;
    cfg.c = resolve_c(cfg);
    PhaseSymbol ph = phase_by_name(cfg.phase, cfg.n);
    for_each_k(cfg, [&](int k) {
        SectorPartition part = make_partition(cfg, k);
        Extremizer e = make_input(cfg, k, part);
        TimeRule rule = time_rule(cfg, k);
        auto st = cached_spacetime("lp", e, cfg, ph, rule, cfg.p, nullptr);
        std::vector<double> rhs;
        for (double p : cfg.p)
            rhs.push_back(hfio_discrete_norm(e.field, exponents(cfg.n, p).gap.value() + cfg.s, p, part,
                                             EvalPath::cropped, cfg.gamma)
                              .value);
        json d{{"input", input_diag(e)}, {"time", rule_diag(st, rule)}};
        push_records(res, k, cfg.p, st.values, rhs, d);
    });
    for (double p : cfg.p) {
        FitResult f = fit_for(res, p);
        double want = -cfg.s;
        res.fits.push_back({p, f, want});
        json det{{"order", exponents(cfg.n, p).gap.str()}, {"margin", 0.1}, {"phase", ph.name}};
        if (ph.curved())
            res.checks.push_back(make_check("localsmoothing_slope_p" + pname(p), f.slope, "<=", want + 0.1, det));
        else
            res.checks.push_back(skipped_check("localsmoothing_slope_p" + pname(p),
                                               json{{"slope", f.slope}, {"reason", "rank-0 phase, recorded only"}}));
    }
    return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.experiment == "sharpness") return run_sharpness_experiment(cfg);
    if (cfg.experiment == "squarefunction") return run_squarefunction_experiment(cfg);
    if (cfg.experiment == "decoupling") return run_decoupling_experiment(cfg);
    if (cfg.experiment == "localsmoothing") return run_localsmoothing_experiment(cfg);
    throw ConfigError("config field 'experiment': '" + cfg.experiment + "' is not a scaling experiment");
}

// ---------------------------------------------------------------- equivalence suite

namespace {

// band test over k: max/min of the ratio and the fitted slope of its log
void band_checks(std::vector<Check>& out, const std::string& name, const std::vector<double>& ks,
                 const std::vector<double>& ratio, double band, double slope_tol) {
    std::vector<double> y;
    for (double r : ratio) y.push_back(std::log2(r));
    double mx = *std::max_element(ratio.begin(), ratio.end()), mn = *std::min_element(ratio.begin(), ratio.end());
    FitResult f = fit_line(ks, y);
    json det{{"k", ks}, {"ratio", ratio}, {"fit", f.to_json()}};
    if (band > 0) out.push_back(make_check(name + "_band", mx / mn, "<=", band, det));
    out.push_back(make_check(name + "_slope", f.slope, "|.|<=", slope_tol, det));
}

}  // namespace

SuiteReport run_equivalence_suite(const ExperimentConfig& cfg0) {
    ExperimentConfig cfg = cfg0;
    cfg.experiment = "equivalence";
    if (cfg.input == "full" || cfg.input == "unit") cfg.input = "random";
    cfg.validate();
    SuiteReport rep;
    rep.config = cfg;
    auto& T = rep.tests;

    if (cfg.input == "zero") {
        GridSpec g = cfg.grid_for(cfg.k_min);
        Field z(g, Domain::frequency);
        SectorPartition part = make_partition(cfg, cfg.k_min);
        double h = hfio_discrete_norm(z, 0, 2, part).value;
        double l = lp_norm(inverse_transform(z), 4);
        json det{{"zero_input", true}, {"hfio_discrete", h}, {"lp", l}};
        bool zeros = h == 0 && l == 0;
        for (const char* n : {"spectral_roundtrip", "linear_translation", "partition_of_unity", "p2_discrete",
                              "p2_decoupling", "p2_spacetime_conservation", "continuous_vs_discrete_p4",
                              "reconstruction_defect", "windowed_time_norm", "sobolev_sandwich", "evolution_hfio_p2"}) {
            Check c = skipped_check(n, det);
            c.pass = zeros;
            T.push_back(c);
        }
        return rep;
    }

    PhaseSymbol eu = euclidean_phase(cfg.n);
    PhaseSymbol lin = phase_by_name("linear", cfg.n);
    Window W = build_window();
    TimeRule wr = window_time_rule();
    static const WavePacketSystem sys(2);

    std::vector<double> ks;
    std::vector<double> r_disc2, r_dec2, r_cont, r_evo;
    std::map<std::string, std::vector<double>> r_win, r_sob_lo, r_sob_hi;
    double cons = 0, pou = 0, evo_t = 0;
    // int |g|^2 over the window rule, the p = 2 decoupling factor
    double win2 = 0;
    for (std::size_t i = 0; i < wr.size(); ++i) win2 += wr.weights[i] * W(wr.nodes[i]) * W(wr.nodes[i]);

    // spectral sanity on the first grid
    {
        int k = cfg.k_min;
        GridSpec g = cfg.grid_for(k);
        SectorPartition part = make_partition(cfg, k);
        Extremizer e = random_annulus(k, part, g, cfg.seed);
        Field f = inverse_transform(e.field);
        double rt = l2_rel_diff(forward_transform(f), e.field);
        double pars = std::abs(lp_norm(f, 2) / frequency_l2(e.field) - 1);
        T.push_back(make_check("spectral_roundtrip", std::max(rt, pars), "<=", 1e-10));
        // linear phase by three cells: exact cyclic shift
        Vec v{};
        v[0] = 1;
        double t = 3 * g.spacing();
        Field moved = inverse_transform(propagate(e.field, t, linear_phase(cfg.n, v)));
        Field shifted(g, Domain::space);
        int N = g.N;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                shifted.values[std::size_t(i) * N + j] = f.values[std::size_t((i + 3) % N) * N + j];
        T.push_back(make_check("linear_translation", l2_rel_diff(moved, shifted), "<=", 1e-10));
    }

    for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
        GridSpec g = cfg.grid_for(k);
        SectorPartition part = make_partition(cfg, k);
        Extremizer e = random_annulus(k, part, g, cfg.seed + static_cast<unsigned>(k));
        const Field& F = e.field;
        double l2 = frequency_l2(F);
        ks.push_back(k);

        // sum chi_nu = 1 on the annulus lattice
        for (std::size_t i = 0; i < F.values.size(); ++i) {
            if (F.values[i] == cplx(0, 0)) continue;
            pou = std::max(pou, std::abs(part.sum(g.frequency(i)) - 1));
        }

        r_disc2.push_back(hfio_discrete_norm(F, 0, 2, part, EvalPath::cropped, cfg.gamma).value / l2);
        auto dec = decoupling_rhs(F, {2.0}, eu, W, part, wr, cfg.gamma);
        r_dec2.push_back(dec.values[0] / (l2 * std::sqrt(win2)));

        TimeRule rule = time_rule(cfg, k);
        double wsum = 0;
        for (double w : rule.weights) wsum += w;
        auto st = spacetime_lp_norms(F, {2.0}, eu, rule, cfg.gamma);
        cons = std::max(cons, std::abs(st.values[0] / (l2 * std::sqrt(wsum)) - 1));

        // continuous norm dominates the cost; p = 4 only
        auto cn = hfio_continuous_norm(F, 0, 4, sys, default_sphere_rule(2, k), cfg.gamma);
        r_cont.push_back(cn.value / hfio_discrete_norm(F, 0, 4, part, EvalPath::cropped, cfg.gamma).value);

        auto disc = hfio_discrete_norms(F, 0, cfg.p, part, cfg.gamma);
        for (const PhaseSymbol* ph : {&eu, &lin}) {
            auto wn = windowed_hfio_time_norm(F, 0, cfg.p, *ph, W, part, wr, cfg.gamma);
            for (std::size_t i = 0; i < cfg.p.size(); ++i)
                r_win[ph->name + "_p" + pname(cfg.p[i])].push_back(wn[i] / disc[i]);
        }
        for (std::size_t i = 0; i < cfg.p.size(); ++i) {
            double p = cfg.p[i];
            double sp = s_exponent(cfg.n, p);
            int gi = static_cast<int>(std::ceil(cfg.gamma));
            r_sob_lo["p" + pname(p)].push_back(sobolev_norm(F, -sp, p, gi) / disc[i]);
            r_sob_hi["p" + pname(p)].push_back(disc[i] / sobolev_norm(F, sp, p, gi));
        }

        // p = 2: the H-norm of the evolution is constant in t
        std::vector<double> hv;
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) hv.push_back(hfio_discrete_norm(propagate(F, t, eu), 0, 2, part).value);
        double mx = *std::max_element(hv.begin(), hv.end()), mn = *std::min_element(hv.begin(), hv.end());
        evo_t = std::max(evo_t, (mx - mn) / mx);
        r_evo.push_back(mx / l2);
    }

    T.push_back(make_check("partition_of_unity", pou, "<=", 1e-8));
    band_checks(T, "p2_discrete", ks, r_disc2, 2.0, 0.05);
    band_checks(T, "p2_decoupling", ks, r_dec2, 2.0, 0.05);
    T.push_back(make_check("p2_spacetime_conservation", cons, "<=", 1e-8));
    band_checks(T, "continuous_vs_discrete_p4", ks, r_cont, 0, 0.07);
    for (auto& [name, r] : r_win) band_checks(T, "windowed_time_norm_" + name, ks, r, 0, 0.07);
    for (auto& [name, r] : r_sob_lo) {
        // ||f||_{W^{-s(p),p}} <~ ||f||_{H^p_FIO} <~ ||f||_{W^{s(p),p}}: neither ratio may grow with k
        std::vector<double> y;
        for (double v : r) y.push_back(std::log2(v));
        FitResult f = fit_line(ks, y);
        T.push_back(make_check("sobolev_lower_" + name, f.slope, "<=", 0.07, json{{"ratio", r}}));
    }
    for (auto& [name, r] : r_sob_hi) {
        std::vector<double> y;
        for (double v : r) y.push_back(std::log2(v));
        FitResult f = fit_line(ks, y);
        T.push_back(make_check("sobolev_upper_" + name, f.slope, "<=", 0.07, json{{"ratio", r}}));
    }
    T.push_back(make_check("evolution_hfio_p2_time_invariance", evo_t, "<=", 1e-10));
    band_checks(T, "evolution_hfio_p2", ks, r_evo, 2.0, 0.05);

    // reconstruction on the 4 |Theta_k| node rule, at the smallest scale >= 4 in range
    {
        int k = std::clamp(4, cfg.k_min, cfg.k_max);
        GridSpec g{cfg.n, std::max(64, 1 << (k + 3)), 2 * kPi};
        SectorPartition part = make_partition(cfg, k);
        Extremizer e = random_annulus(k, part, g, cfg.seed);
        auto rule = uniform_circle_rule(static_cast<int>(4 * build_direction_set(cfg.n, k).size()));
        auto rd = reconstruction_defect(sys, e.field, rule);
        T.push_back(make_check("reconstruction_defect", rd.defect, "<=", 1e-2,
                               json{{"k", k}, {"nodes", rule.size()}, {"N", g.N}}));
    }
    return rep;
}

}  // namespace wpl
