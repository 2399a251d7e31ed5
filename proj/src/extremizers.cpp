#include "wpl/extremizers.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "wpl/fft.hpp"
#include "wpl/parallel.hpp"
#include "wpl/patch.hpp"
#include "wpl/profiles.hpp"

namespace wpl {

namespace {

constexpr int kPanels = 64;
constexpr double kLeakTol = 1e-6;

// radial inverse transform kernel: (2 pi)^{-n} int_{S^{n-1}} e^{i r rho w.e} dw
double radial_kernel(int n, double r, double rho) {
    double z = r * rho;
    if (n == 2) return std::cyl_bessel_j(0.0, z) / (2 * kPi);
    if (n == 3) return (z < 1e-8 ? 1.0 - z * z / 6 : std::sin(z) / z) / (2 * kPi * kPi);
    throw UnsupportedError("bump: n in {2,3} only");
}

// probe points of the ball |x| <= r: center, rings, boundary
std::vector<Vec> ball_probe(int n, double r) {
    std::vector<Vec> pts{Vec{}};
    auto dirs = probe_mesh(n, n == 2 ? 2 * kPi / 64 : 0.15);
    for (int i = 1; i <= 8; ++i) {
        double rr = r * i / 8.0;
        for (auto& d : dirs) {
            Vec x{};
            for (int a = 0; a < n; ++a) x[a] = rr * d[a];
            pts.push_back(x);
        }
    }
    return pts;
}

// N^{-n/2} sum coef e^{i xi.x}
cplx evaluate(const GridSpec& g, const SparseSpectrum& s, const Vec& x) {
    cplx acc = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        Vec xi = g.frequency(s.idx[i]);
        double a = dot(xi, x, g.n);
        acc += s.coef[i] * cplx(std::cos(a), std::sin(a));
    }
    return acc / std::sqrt(static_cast<double>(g.size()));
}

double l1_of(const GridSpec& g, const SparseSpectrum& s) {
    double a = 0;
    for (auto& c : s.coef) a += std::abs(c);
    return a / std::sqrt(static_cast<double>(g.size()));
}

// lattice points of the box [lo, hi] (lattice units) passing keep(m, xi)
template <class Keep>
void box_points(const GridSpec& g, const int* lo, const int* hi, Keep&& keep) {
    int m[kMaxDim];
    for (int d = 0; d < g.n; ++d) {
        if (lo[d] > hi[d]) return;
        m[d] = lo[d];
    }
    while (true) {
        Vec xi{};
        for (int d = 0; d < g.n; ++d) xi[d] = m[d] * g.dxi();
        keep(m, xi);
        int d = g.n - 1;
        for (; d >= 0; --d) {
            if (++m[d] <= hi[d]) break;
            m[d] = lo[d];
        }
        if (d < 0) break;
    }
}

// squares the trig polynomial with coefficients v (scaled by amp) exactly, keeping coefficients where keep(xi)
template <class Keep>
SparseSpectrum square_spectrum(const GridSpec& g, const SparseSpectrum& v, double amp, Keep&& keep) {
    int n = g.n;
    auto w = Patch::support_widths(g, v.idx);
    std::vector<int> lo(n, 1 << 30), hi(n, -(1 << 30));
    int m[kMaxDim];
    for (auto f : v.idx) {
        g.lattice(f, m);
        for (int d = 0; d < n; ++d) lo[d] = std::min(lo[d], m[d]), hi[d] = std::max(hi[d], m[d]);
    }
    std::vector<int> S(n);
    for (int d = 0; d < n; ++d) S[d] = fft::next_smooth(2 * w[d] + 2);
    Patch P = Patch::build(g, v.idx, 1.0, S);
    std::size_t M = P.size();
    CVec buf(M);
    P.synthesize(v.coef.data(), buf.data());
    for (auto& z : buf) z = amp * z * z;
    fft::transform(buf.data(), S, -1);
    double scale = std::sqrt(static_cast<double>(g.size())) / static_cast<double>(M);

    SparseSpectrum out;
    std::vector<int> blo(n), bhi(n);
    for (int d = 0; d < n; ++d) blo[d] = 2 * lo[d], bhi[d] = 2 * hi[d];
    box_points(g, blo.data(), bhi.data(), [&](const int* mm, const Vec& xi) {
        if (!keep(xi)) return;
        std::size_t bin = 0;
        for (int d = 0; d < n; ++d) bin = bin * S[d] + static_cast<std::size_t>(((mm[d] % S[d]) + S[d]) % S[d]);
        out.idx.push_back(g.flat_from_lattice(mm));
        out.coef.push_back(buf[bin] * scale);
    });
    return out;
}

// anisotropic metric |A^{-1} w| with A = 2^k nu nu^T + 2^{k/2} (I - nu nu^T)
double aniso(const Vec& w, const Vec& nu, int n, int k) {
    double a = dot(w, nu, n), ww = dot(w, w, n);
    double along = std::ldexp(a, -k);
    double perp2 = std::max(0.0, ww - a * a) * std::ldexp(1.0, -k);
    return std::sqrt(along * along + perp2);
}

double leak_of(const GridSpec& g, const SparseSpectrum& s, const SectorPartition& part, int nu) {
    double tot = 0, bad = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double a = std::norm(s.coef[i]);
        tot += a;
        double chi = part.chi(nu, g.frequency(s.idx[i]));
        bad += (1 - chi) * (1 - chi) * a;
    }
    return tot > 0 ? std::sqrt(bad / tot) : 0.0;
}

double min_abs_on(const GridSpec& g, const SparseSpectrum& s, const std::vector<Vec>& pts) {
    double mn = INFINITY;
    for (auto& x : pts) mn = std::min(mn, std::abs(evaluate(g, s, x)));
    return mn;
}

void finish(Extremizer& e, const SectorPartition& part) {
    e.info.resize(e.components.size());
    e.max_leak = 0;
    parallel_for(e.components.size(), [&](std::size_t i) {
        auto& inf = e.info[i];
        inf.nu = static_cast<int>(i);
        inf.fourier_l1 = l1_of(e.grid, e.components[i]);
        inf.leak = leak_of(e.grid, e.components[i], part, static_cast<int>(i));
    });
    for (auto& inf : e.info) e.max_leak = std::max(e.max_leak, inf.leak);
    e.field = assemble(e.grid, e.components);
}

void check_grid(const GridSpec& g, int k, const SectorPartition& part) {
    g.validate();
    if (part.k() != k || part.n() != g.n) throw ParameterError("extremizer: partition does not match k / n");
    g.require_resolves(std::ldexp(1.0, k + 1));
}

std::vector<double> c_candidates(double c, std::initializer_list<double> dflt) {
    if (c > 0) {
        if (c > 1) throw ParameterError("extremizer: c must lie in (0, 1]");
        return {c};
    }
    return dflt;
}

}  // namespace

// ---------------------------------------------------------------- bump

double BumpProfile::b_hat(double rho) const { return profile::bump(2 * rho / c); }

double BumpProfile::u(double r) const {
    double s = 0;
    for (auto& [rho, w] : *rule) s += w * radial_kernel(n, r, rho);
    return s;
}

BumpProfile build_bump(int n, double c) {
    if (n != 2 && n != 3) throw UnsupportedError("build_bump: n in {2,3} only");
    if (!(c > 0 && c <= 1)) throw ParameterError("build_bump: c must lie in (0, 1]");
    BumpProfile B;
    B.n = n;
    B.c = c;
    using G = boost::math::quadrature::gauss<double, 20>;
    auto rule = std::make_shared<std::vector<std::pair<double, double>>>();
    double a = c / 2, h = a / kPanels;
    for (int p = 0; p < kPanels; ++p) {
        double mid = (p + 0.5) * h;
        auto add = [&](double x, double w) {
            double rho = mid + 0.5 * h * x;
            double wt = 0.5 * h * w * B.b_hat(rho) * std::pow(rho, n - 1);
            if (wt > 0) rule->emplace_back(rho, wt);
        };
        auto& xs = G::abscissa();
        auto& ws = G::weights();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i] == 0) {
                add(0, ws[i]);
            } else {
                add(xs[i], ws[i]);
                add(-xs[i], ws[i]);
            }
        }
    }
    B.rule = rule;
    double u1 = B.u(1.0);
    if (!(u1 > 0)) throw ConstructionError("build_bump: inverse transform not positive on the unit ball");
    B.A = 1 / (u1 * u1);
    double mn = INFINITY;
    for (int i = 0; i <= 400; ++i) mn = std::min(mn, B.psi(i / 400.0));
    B.min_unit_ball = mn;
    if (!(mn > 0)) throw ConstructionError("build_bump: psi not positive on the unit ball");
    return B;
}

// ---------------------------------------------------------------- grids

GridSpec full_family_grid(int k, int N) {
    GridSpec g;
    g.n = 2;
    g.N = N;
    g.L = kPi * N / (1.05 * std::ldexp(1.0, k + 1));
    return g;
}

GridSpec unit_family_grid(int k) {
    GridSpec g;
    g.n = 2;
    g.L = 24;
    g.N = 2;
    while (kPi * g.N / g.L <= std::ldexp(1.0, k + 1)) g.N *= 2;
    return g;
}

// ---------------------------------------------------------------- families

Extremizer extremizer_full(int k, const SectorPartition& part, const GridSpec& g, double c) {
    check_grid(g, k, part);
    int n = g.n;
    auto cands = c_candidates(c, {0.5, 0.25});
    Extremizer best;
    for (double cc : cands) {
        BumpProfile B = build_bump(n, cc);
        Extremizer e;
        e.type = "full";
        e.k = k;
        e.c = cc;
        e.grid = g;
        e.psi_amplitude = B.A;
        e.components.resize(part.size());
        double a = cc / 2;
        double detA = std::ldexp(1.0, k) * std::pow(2.0, k * (n - 1) / 2.0);
        double Ln = std::pow(g.L, n);
        double amp = std::sqrt(static_cast<double>(g.size())) / Ln / detA;
        double dx = g.dxi();
        std::vector<SparseSpectrum> vs(part.size());
        std::vector<double> vmin(part.size());
        auto unit_ball = ball_probe(n, 1.0);
        parallel_for(part.size(), [&](std::size_t i) {
            const Vec& nu = part.dirs().dirs[i];
            Vec c0{};
            for (int d = 0; d < n; ++d) c0[d] = std::ldexp(nu[d], k - 1);
            int lo[kMaxDim], hi[kMaxDim];
            for (int d = 0; d < n; ++d) {
                double h = std::sqrt(std::pow(std::ldexp(a, k) * nu[d], 2) +
                                     std::pow(a * std::pow(2.0, k / 2.0), 2) * (1 - nu[d] * nu[d]));
                lo[d] = static_cast<int>(std::ceil((c0[d] - h) / dx));
                hi[d] = static_cast<int>(std::floor((c0[d] + h) / dx));
            }
            auto& v = vs[i];
            box_points(g, lo, hi, [&](const int* m, const Vec& xi) {
                Vec w{};
                for (int d = 0; d < n; ++d) w[d] = xi[d] - c0[d];
                double bh = B.b_hat(aniso(w, nu, n, k));
                if (bh > 0) {
                    v.idx.push_back(g.flat_from_lattice(m));
                    v.coef.push_back(amp * bh);
                }
            });
            // |A x| <= 1 pulled back from the unit ball, x = A^{-1} y
            std::vector<Vec> pts;
            for (auto& y : unit_ball) {
                double t = dot(y, nu, n);
                Vec x{};
                for (int d = 0; d < n; ++d)
                    x[d] = std::ldexp(t * nu[d], -k) + (y[d] - t * nu[d]) * std::pow(2.0, -k / 2.0);
                pts.push_back(x);
            }
            vmin[i] = min_abs_on(g, v, pts);
        });
        // the torus copy of u is the periodization, so the amplitude comes from it rather than from u(1)
        double umin = *std::min_element(vmin.begin(), vmin.end());
        if (!(umin > 0)) throw ConstructionError("extremizer_full: packet vanishes on its unit ellipse");
        e.psi_amplitude = 1 / (umin * umin);
        parallel_for(part.size(), [&](std::size_t i) {
            const Vec& nu = part.dirs().dirs[i];
            Vec c1{};
            for (int d = 0; d < n; ++d) c1[d] = std::ldexp(nu[d], k);
            e.components[i] = square_spectrum(g, vs[i], e.psi_amplitude, [&](const Vec& xi) {
                Vec w{};
                for (int d = 0; d < n; ++d) w[d] = xi[d] - c1[d];
                return aniso(w, nu, n, k) < cc;
            });
        });
        finish(e, part);
        auto pts = ball_probe(n, std::ldexp(1.0, -k));
        parallel_for(e.components.size(), [&](std::size_t i) {
            e.info[i].min_near_origin = min_abs_on(g, e.components[i], pts);
        });
        if (e.max_leak <= kLeakTol) return e;
        best = std::move(e);
    }
    throw ConstructionError("extremizer_full: sector containment fails (leak " + std::to_string(best.max_leak) +
                            " at c = " + std::to_string(best.c) + "); use a smaller c");
}

Extremizer extremizer_unit(int k, const SectorPartition& part, const GridSpec& g, double c) {
    check_grid(g, k, part);
    int n = g.n;
    auto cands = c_candidates(c, {1.0, 0.5});
    Extremizer best;
    double dx = g.dxi();
    for (double cc : cands) {
        BumpProfile B = build_bump(n, cc);
        // u on the torus from lattice samples of b_c, then psi = A u^2 with min over |x| <= 1 equal to 1
        double a = cc / 2;
        int r = static_cast<int>(std::floor(a / dx));
        std::vector<int> lo(n, -r), hi(n, r);
        SparseSpectrum v;
        double amp = std::sqrt(static_cast<double>(g.size())) / std::pow(g.L, n);
        box_points(g, lo.data(), hi.data(), [&](const int* m, const Vec& xi) {
            double bh = B.b_hat(norm(xi, n));
            if (bh > 0) {
                v.idx.push_back(g.flat_from_lattice(m));
                v.coef.push_back(amp * bh);
            }
        });
        double umin = min_abs_on(g, v, ball_probe(n, 1.0));
        if (!(umin > 0)) throw ConstructionError("extremizer_unit: torus bump vanishes on the unit ball");
        double A = 1 / (umin * umin);
        SparseSpectrum psi = square_spectrum(g, v, A, [&](const Vec& xi) { return norm(xi, n) < cc; });

        Extremizer e;
        e.type = "unit";
        e.k = k;
        e.c = cc;
        e.grid = g;
        e.psi_amplitude = A;
        e.components.resize(part.size());
        int m[kMaxDim], sh[kMaxDim];
        for (std::size_t i = 0; i < part.size(); ++i) {
            const Vec& nu = part.dirs().dirs[i];
            for (int d = 0; d < n; ++d) sh[d] = static_cast<int>(std::lround(std::ldexp(nu[d], k) / dx));
            auto& comp = e.components[i];
            comp.coef = psi.coef;
            comp.idx.resize(psi.size());
            for (std::size_t j = 0; j < psi.size(); ++j) {
                g.lattice(psi.idx[j], m);
                for (int d = 0; d < n; ++d) m[d] += sh[d];
                comp.idx[j] = g.flat_from_lattice(m);
            }
        }
        finish(e, part);
        auto pts = ball_probe(n, 1.0);
        double mn = min_abs_on(g, psi, pts);
        for (auto& inf : e.info) inf.min_near_origin = mn;  // |g_nu| = psi for every nu
        if (e.max_leak <= kLeakTol) return e;
        best = std::move(e);
    }
    throw ConstructionError("extremizer_unit: sector containment fails (leak " + std::to_string(best.max_leak) +
                            " at c = " + std::to_string(best.c) + "); use a smaller c");
}

Extremizer random_annulus(int k, const SectorPartition& part, const GridSpec& g, unsigned seed) {
    check_grid(g, k, part);
    Field F(g, Domain::frequency);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    double lo = std::ldexp(1.0, k - 1), hi = std::ldexp(1.0, k + 1);
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        // draw for every lattice point so the sample does not depend on the annulus test order
        cplx z(nd(rng), nd(rng));
        double r = norm(g.frequency(i), g.n);
        if (r >= lo && r <= hi) F.values[i] = z;
    }
    Extremizer e;
    e.type = "random";
    e.k = k;
    e.seed = seed;
    e.grid = g;
    e.components = sector_components(F, part);
    finish(e, part);
    e.max_leak = 0;  // components are chi_nu(D) f by definition
    for (auto& inf : e.info) inf.leak = 0;
    return e;
}

// ---------------------------------------------------------------- components

std::vector<SparseSpectrum> sector_components(const Field& F0, const SectorPartition& part) {
    F0.require(Domain::frequency, "sector_components");
    const Field& F = F0;
    std::vector<SparseSpectrum> out(part.size());
    std::vector<std::pair<int, double>> act;
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        if (F.values[i] == cplx(0, 0)) continue;
        part.active(F.grid.frequency(i), act);
        for (auto& [nu, chi] : act) {
            out[nu].idx.push_back(i);
            out[nu].coef.push_back(chi * F.values[i]);
        }
    }
    return out;
}

Field assemble(const GridSpec& g, const std::vector<SparseSpectrum>& comps) {
    Field F(g, Domain::frequency);
    for (auto& c : comps)
        for (std::size_t j = 0; j < c.size(); ++j) F.values[c.idx[j]] += c.coef[j];
    return F;
}

std::vector<int> rademacher_signs(std::size_t m, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> s(m);
    for (auto& x : s) x = (rng() >> 63) ? 1 : -1;
    return s;
}

Field rademacher_sample(const GridSpec& g, const std::vector<SparseSpectrum>& comps, unsigned seed) {
    auto eps = rademacher_signs(comps.size(), seed);
    Field F(g, Domain::frequency);
    for (std::size_t i = 0; i < comps.size(); ++i)
        for (std::size_t j = 0; j < comps[i].size(); ++j) F.values[comps[i].idx[j]] += double(eps[i]) * comps[i].coef[j];
    return F;
}

double component_lp_norm(const GridSpec& g, const SparseSpectrum& comp, double p, double gamma) {
    if (comp.size() == 0) return 0;
    Patch P = Patch::build(g, comp.idx, gamma);
    CVec buf(P.size());
    P.synthesize(comp.coef.data(), buf.data());
    PowerSums ps({p});
    ps.add(buf.data(), buf.size());
    return ps.norm(0, P.cell_volume());
}

nlohmann::json Extremizer::spec() const {
    nlohmann::json j;
    j["type"] = type;
    j["k"] = k;
    j["c"] = c;
    j["seed"] = seed;
    j["grid"] = {{"n", grid.n}, {"N", grid.N}, {"L", grid.L}};
    j["components"] = components.size();
    j["max_leak"] = max_leak;
    j["psi_amplitude"] = psi_amplitude;
    return j;
}

}  // namespace wpl
