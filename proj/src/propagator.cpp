#include "wpl/propagator.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

#include "wpl/norms.hpp"
#include "wpl/parallel.hpp"
#include "wpl/pieces.hpp"
#include "wpl/profiles.hpp"

namespace wpl {

using boost::math::quadrature::gauss_kronrod;

PhaseSymbol euclidean_phase(int n) {
    PhaseSymbol p;
    p.name = "euclidean";
    p.n = n;
    p.phi = [n](const Vec& xi) { return norm(xi, n); };
    p.grad = [n](const Vec& xi) {
        double r = norm(xi, n);
        Vec g{};
        if (r > 0)
            for (int i = 0; i < n; ++i) g[i] = xi[i] / r;
        return g;
    };
    p.hessian_rank = n - 1;
    return p;
}

PhaseSymbol linear_phase(int n, const Vec& v) {
    PhaseSymbol p;
    p.name = "linear";
    p.n = n;
    p.phi = [n, v](const Vec& xi) { return dot(v, xi, n); };
    p.grad = [v](const Vec&) { return v; };
    p.hessian_rank = 0;
    return p;
}

PhaseSymbol degenerate_phase(int n) {
    PhaseSymbol p;
    p.name = "degenerate";
    p.n = n;
    p.phi = [](const Vec& xi) { return std::abs(xi[0]); };
    p.grad = [](const Vec& xi) {
        Vec g{};
        g[0] = xi[0] > 0 ? 1.0 : (xi[0] < 0 ? -1.0 : 0.0);
        return g;
    };
    p.hessian_rank = 0;
    return p;
}

PhaseSymbol phase_by_name(const std::string& name, int n) {
    if (name == "euclidean") return euclidean_phase(n);
    if (name == "linear") {
        Vec e{};
        e[0] = 1.0;
        return linear_phase(n, e);
    }
    if (name == "degenerate") return degenerate_phase(n);
    throw ParameterError("unknown phase '" + name + "' (euclidean, linear, degenerate)");
}

Field propagate(const Field& f, double t, const PhaseSymbol& ph) {
    if (f.grid.n != ph.n) throw ContractError("propagate: dimension mismatch");
    if (t == 0.0) return f;
    bool space = f.domain == Domain::space;
    Field F = apply_multiplier(to_frequency(f), [&](const Vec& xi) {
        double a = t * ph.phi(xi);
        return cplx(std::cos(a), std::sin(a));
    });
    return space ? inverse_transform(F) : F;
}

// ---------------------------------------------------------------- window

Window build_window() {
    static const Window w = [] {
        Window v;
        auto tab = std::make_shared<Window::Tables>();
        // 128 panels x 20-point Gauss on [0, 1]; b is flat at 1, so panels resolve cos(t tau) up to |t| ~ 1000
        auto gl = boost::math::quadrature::gauss<double, 20>::abscissa();
        auto gw = boost::math::quadrature::gauss<double, 20>::weights();
        const int panels = 128;
        for (int q = 0; q < panels; ++q) {
            double a = double(q) / panels, h = 1.0 / panels, c = a + 0.5 * h;
            for (std::size_t i = 0; i < gl.size(); ++i) {
                for (int sgn : {-1, 1}) {
                    if (gl[i] == 0 && sgn < 0) continue;
                    double x = c + sgn * 0.5 * h * gl[i];
                    tab->tau.push_back(x);
                    tab->wb.push_back(0.5 * h * gw[i] * profile::bump(x));
                }
            }
        }
        v.tab_ = tab;
        // int b(tau) cos(t tau) decreases on [0, 1] (derivative -int tau b sin(t tau) < 0): min at t = 1
        v.A_ = 1.0 / v.raw(1.0);
        tab->h = 1.0 / 256.0;
        int m = static_cast<int>(std::lround(Window::kTableT / tab->h));
        tab->g.resize(m + 1);
        for (int j = 0; j <= m; ++j) tab->g[j] = std::abs(v(j * tab->h));
        return v;
    }();
    return w;
}

double Window::raw(double t) const {
    double s = 0;
    for (std::size_t i = 0; i < tab_->tau.size(); ++i) s += tab_->wb[i] * std::cos(t * tab_->tau[i]);
    return 2.0 * s;
}

double Window::operator()(double t) const { return A_ * raw(t); }

double Window::l2_squared() const {
    double bb = gauss_kronrod<double, 61>::integrate([](double u) { return profile::bump(u) * profile::bump(u); }, -1.0,
                                                     1.0, 10, 1e-13);
    return 2.0 * kPi * A_ * A_ * bb;
}

double Window::tail_fraction(double p, double lo, double hi) const {
    // Simpson on the table; |g| ~ exp(-sqrt(2|t|)) is below 1e-7 of g(0) past kTableT
    const auto& g = tab_->g;
    const double h = tab_->h;
    auto at = [&](long j) { return std::pow(g[static_cast<std::size_t>(std::labs(j))], p); };
    auto simpson = [&](long a, long b) {  // node range, b - a even
        if (b <= a) return 0.0;
        double s = at(a) + at(b);
        for (long j = a + 1; j < b; ++j) s += (j - a) % 2 ? 4 * at(j) : 2 * at(j);
        return s * h / 3;
    };
    long M = static_cast<long>(g.size()) - 1;
    if (M % 2) --M;
    long a = std::lround(lo / h), b = std::lround(hi / h);
    if (std::abs(a * h - lo) > 1e-12 || std::abs(b * h - hi) > 1e-12 || (b - a) % 2 || (a + M) % 2)
        throw ParameterError("window tail: interval ends must sit on the 1/128 grid");
    a = std::clamp(a, -M, M);
    b = std::clamp(b, -M, M);
    double inside = simpson(a, b), outside = simpson(-M, a) + simpson(b, M);
    return outside / (inside + outside);
}

// ---------------------------------------------------------------- time rules

nlohmann::json TimeRule::to_json() const { return {{"lo", lo}, {"hi", hi}, {"nodes", size()}, {"spacing", spacing}}; }

TimeRule trapezoid_rule(double lo, double hi, int m) {
    if (m < 1 || !(hi > lo)) throw ParameterError("time rule: need m >= 1 intervals on a nonempty interval");
    TimeRule r;
    r.lo = lo;
    r.hi = hi;
    r.spacing = (hi - lo) / m;
    for (int j = 0; j <= m; ++j) {
        r.nodes.push_back(lo + j * r.spacing);
        r.weights.push_back((j == 0 || j == m ? 0.5 : 1.0) * r.spacing);
    }
    return r;
}

TimeRule default_time_rule(int k) { return trapezoid_rule(0.0, 1.0, std::max(64, 8 << std::max(0, k))); }

TimeRule window_time_rule(double dt) {
    int m = std::max(1, static_cast<int>(std::lround(7.0 / dt)));
    return trapezoid_rule(-3.0, 4.0, m);
}

nlohmann::json SpacetimeResult::to_json() const {
    return {{"values", values}, {"spacing", spacing}, {"coarse_rule", coarse_rule}, {"gamma", gamma}};
}

nlohmann::json DecouplingResult::to_json() const { return {{"values", values}, {"tail", tail}, {"terms", terms}}; }

// ---------------------------------------------------------------- space-time norms

namespace {
void check_ps(const std::vector<double>& ps, const char* op) {
    if (ps.empty()) throw ParameterError(std::string(op) + ": no exponents");
    for (double p : ps)
        if (!(p > 1.0) || std::isinf(p)) throw ParameterError(std::string(op) + ": p must lie in (1, inf)");
}

double max_radius(const Field& F) {
    double r = 0;
    for (std::size_t i = 0; i < F.values.size(); ++i)
        if (F.values[i] != cplx(0.0, 0.0)) r = std::max(r, norm(F.grid.frequency(i), F.grid.n));
    return r;
}

std::vector<double> finish(const std::vector<PowerSums>& per_t, const std::vector<double>& ps, double vol) {
    PowerSums total(ps);
    for (auto& s : per_t) total.merge(s);
    std::vector<double> out(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) out[i] = total.norm(i, vol);
    return out;
}
}  // namespace

SpacetimeResult spacetime_lp_norms(const Field& f, const std::vector<double>& ps, const PhaseSymbol& ph,
                                   const TimeRule& rule, double gamma) {
    check_ps(ps, "spacetime_lp_norm");
    Field F = to_frequency(f);
    SpacetimeResult res;
    res.gamma = gamma;
    res.spacing = rule.spacing;
    res.values.assign(ps.size(), 0.0);
    SpectralPiece pc = full_piece(F, gamma);
    if (pc.idx.empty()) return res;
    res.coarse_rule = rule.spacing > 0.5 / max_radius(F);
    pc.cache_phase(F.grid, ph.phi);
    std::vector<PowerSums> per_t(rule.size(), PowerSums(ps));
    parallel_for(rule.size(), [&](std::size_t j) {
        thread_local CVec factor;
        factor.resize(pc.size());
        pc.time_factor(rule.nodes[j], 1.0, factor.data());
        cplx* buf = scratch_buffer(pc.patch.size());
        pc.synthesize(factor.data(), buf);
        per_t[j].add(buf, pc.patch.size(), rule.weights[j]);
    });
    res.values = finish(per_t, ps, pc.patch.cell_volume());
    return res;
}

double spacetime_lp_norm(const Field& f, double p, const PhaseSymbol& ph, const TimeRule& rule, double gamma) {
    return spacetime_lp_norms(f, {p}, ph, rule, gamma).values[0];
}

SpacetimeResult spacetime_square_function(const Field& f, const std::vector<double>& ps, const PhaseSymbol& ph,
                                          const SectorPartition& part, const TimeRule& rule, double gamma) {
    check_ps(ps, "spacetime_square_function");
    Field F = to_frequency(f);
    require_annulus(F, part.k(), "spacetime_square_function");
    SpacetimeResult res;
    res.gamma = gamma;
    res.spacing = rule.spacing;
    res.values.assign(ps.size(), 0.0);
    auto pieces = sector_pieces(F, part, gamma, true);
    if (pieces.empty()) return res;
    res.coarse_rule = rule.spacing > 0.5 / max_radius(F);
    for (auto& pc : pieces) pc.cache_phase(F.grid, ph.phi);
    std::vector<PowerSums> per_t(rule.size(), PowerSums(ps));
    parallel_for(rule.size(), [&](std::size_t j) {
        std::vector<CVec> factors(pieces.size());
        std::vector<const cplx*> fp(pieces.size());
        for (std::size_t q = 0; q < pieces.size(); ++q) {
            factors[q].resize(pieces[q].size());
            pieces[q].time_factor(rule.nodes[j], 1.0, factors[q].data());
            fp[q] = factors[q].data();
        }
        PowerSums s(ps);
        square_sums(pieces, fp, s);
        per_t[j].merge(s, rule.weights[j]);
    });
    res.values = finish(per_t, ps, pieces.front().patch.cell_volume());
    return res;
}

DecouplingResult decoupling_rhs(const Field& f, const std::vector<double>& ps, const PhaseSymbol& ph, const Window& g,
                                const SectorPartition& part, const TimeRule& rule, double gamma) {
    check_ps(ps, "decoupling_rhs");
    Field F = to_frequency(f);
    require_annulus(F, part.k(), "decoupling_rhs");
    DecouplingResult res;
    res.values.assign(ps.size(), 0.0);
    for (double p : ps) res.tail.push_back(g.tail_fraction(p, rule.lo, rule.hi));
    auto pieces = sector_pieces(F, part, gamma);
    res.terms = pieces.size();
    if (pieces.empty()) return res;
    for (auto& pc : pieces) pc.cache_phase(F.grid, ph.phi);
    std::vector<double> gt(rule.size());
    for (std::size_t j = 0; j < rule.size(); ++j) gt[j] = std::abs(g(rule.nodes[j]));

    const std::size_t J = pieces.size(), M = rule.size(), np = ps.size();
    std::vector<double> raw(J * M * np, 0.0);
    parallel_for(J * M, [&](std::size_t task) {
        std::size_t q = task / M, j = task % M;
        const SpectralPiece& pc = pieces[q];
        thread_local CVec factor;
        factor.resize(pc.size());
        pc.time_factor(rule.nodes[j], 1.0, factor.data());
        cplx* buf = scratch_buffer(pc.patch.size());
        pc.synthesize(factor.data(), buf);
        PowerSums s(ps);
        s.add(buf, pc.patch.size());
        for (std::size_t i = 0; i < np; ++i) raw[task * np + i] = s.sum(i) * pc.patch.cell_volume();
    });
    for (std::size_t i = 0; i < np; ++i) {
        double total = 0;
        for (std::size_t q = 0; q < J; ++q)
            for (std::size_t j = 0; j < M; ++j)
                total += rule.weights[j] * std::pow(gt[j], ps[i]) * raw[(q * M + j) * np + i];
        res.values[i] = std::pow(total, 1.0 / ps[i]);
    }
    return res;
}

std::vector<double> windowed_hfio_time_norm(const Field& f, double s, const std::vector<double>& ps, const PhaseSymbol& ph,
                                            const Window& g, const SectorPartition& part, const TimeRule& rule,
                                            double gamma) {
    auto d = decoupling_rhs(f, ps, ph, g, part, rule, gamma);
    std::vector<double> out(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) out[i] = hfio_prefactor(part.n(), part.k(), s, ps[i]) * d.values[i];
    return out;
}

// ---------------------------------------------------------------- translation bound

double kappa(const PhaseSymbol& ph, const Field& h, const Vec& nu) {
    Field H = to_frequency(h);
    const int n = H.grid.n;
    if (n != ph.n) throw ContractError("kappa: dimension mismatch");
    double total = 0, low = 0, amax = 0;
    for (std::size_t i = 0; i < H.values.size(); ++i) {
        double a = std::norm(H.values[i]);
        total += a;
        amax = std::max(amax, std::sqrt(a));
        if (norm(H.grid.frequency(i), n) < 0.125) low += a;
    }
    if (total == 0) return 0.0;
    if (low > 1e-24 * total)
        throw PreconditionError("kappa: h^ has mass near xi = 0 (relative l2 " + std::to_string(std::sqrt(low / total)) +
                                "); grad phi is undefined there");
    Vec gnu = ph.grad(nu);
    double best = 0;
    for (std::size_t i = 0; i < H.values.size(); ++i) {
        if (std::abs(H.values[i]) <= 1e-12 * amax) continue;
        Vec xi = H.grid.frequency(i);
        Vec gx = ph.grad(xi);
        double v = 0;
        for (int d = 0; d < n; ++d) v += (gx[d] - gnu[d]) * xi[d];
        best = std::max(best, std::abs(v));
    }
    return best;
}

TranslationDefect translation_defect(const Field& h, const Vec& nu, double t, const PhaseSymbol& ph, double gamma) {
    Field H = to_frequency(h);
    TranslationDefect res;
    res.kappa = kappa(ph, H, nu);
    if (res.kappa * std::abs(t) > 1.0)
        throw ParameterError("translation_defect: kappa |t| = " + std::to_string(res.kappa * std::abs(t)) + " exceeds 1");
    res.fourier_l1 = fourier_l1(H);
    res.bound = res.fourier_l1 * res.kappa * std::abs(t);
    if (t == 0.0) return res;
    const int n = H.grid.n;
    Vec a = ph.grad(nu);
    SpectralPiece pc = full_piece(H, gamma);
    if (pc.idx.empty()) return res;
    for (std::size_t i = 0; i < pc.idx.size(); ++i) {
        Vec xi = H.grid.frequency(pc.idx[i]);
        double ang = t * ph.phi(xi), shift = t * dot(a, xi, n);
        pc.coef[i] *= cplx(std::cos(ang), std::sin(ang)) - cplx(std::cos(shift), std::sin(shift));
    }
    CVec buf(pc.patch.size());
    pc.synthesize(nullptr, buf.data());
    for (auto& v : buf) res.defect = std::max(res.defect, std::abs(v));
    return res;
}

}  // namespace wpl
