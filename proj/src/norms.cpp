#include "wpl/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wpl/parallel.hpp"
#include "wpl/pieces.hpp"
#include "wpl/profiles.hpp"

namespace wpl {

nlohmann::json NormDiagnostics::to_json() const {
    return {{"path", path},           {"gamma", gamma},           {"leakage", leakage},
            {"terms", terms},         {"rule_spacing", rule_spacing}, {"coarse_rule", coarse_rule},
            {"low_term", low_term},   {"packet_term", packet_term}, {"zero_input", zero_input}};
}

namespace {
void check_p(double p, const char* op, bool allow_inf) {
    if (!(p > 1.0) || (!allow_inf && std::isinf(p))) throw ParameterError(std::string(op) + ": p must lie in (1, inf), got " + std::to_string(p));
}
double bracket(const Vec& xi, int n, double s) { return std::pow(1.0 + dot(xi, xi, n), 0.5 * s); }
}  // namespace

double sobolev_norm(const Field& f, double s, double p, int gamma) {
    check_p(p, "sobolev_norm", false);
    Field F = to_frequency(f);
    const int n = F.grid.n;
    if (s != 0.0) F = apply_real_multiplier(F, [&](const Vec& xi) { return bracket(xi, n, s); });
    return lp_norm(inverse_transform(F), p, gamma);
}

double annulus_leakage(const Field& F, int k) {
    double lo = std::ldexp(1.0, k - 1), hi = std::ldexp(1.0, k + 1);
    // one ulp of slack for lattice points sitting on the boundary
    return mass_outside_annulus(F, lo * (1 - 1e-12), hi * (1 + 1e-12));
}

void require_annulus(const Field& F, int k, const char* op, double tol) {
    double leak = annulus_leakage(F, k);
    if (leak > tol)
        throw PreconditionError(std::string(op) + ": input not supported in the annulus [2^" + std::to_string(k - 1) + ", 2^" +
                                std::to_string(k + 1) + "]; stray relative l2 mass " + std::to_string(leak));
}

double hfio_prefactor(int n, int k, double s, double p) {
    double e = std::isinf(p) ? s + 0.25 * (n - 1) : s + 0.5 * (n - 1) * (0.5 - 1.0 / p);
    return std::pow(2.0, k * e);
}

namespace {
std::vector<double> discrete_from_pieces(const std::vector<SpectralPiece>& pieces, int n, int k, double s,
                                         const std::vector<double>& ps) {
    std::vector<PowerSums> sums(pieces.size(), PowerSums(ps));
    parallel_for(pieces.size(), [&](std::size_t j) {
        cplx* buf = scratch_buffer(pieces[j].patch.size());
        pieces[j].synthesize(nullptr, buf);
        sums[j].add(buf, pieces[j].patch.size());
    });
    std::vector<double> out(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        double total = 0;
        for (std::size_t j = 0; j < pieces.size(); ++j) {
            double v = sums[j].norm(i, pieces[j].patch.cell_volume());
            total = std::isinf(ps[i]) ? std::max(total, v) : total + std::pow(v, ps[i]);
        }
        double agg = std::isinf(ps[i]) ? total : std::pow(total, 1.0 / ps[i]);
        out[i] = hfio_prefactor(n, k, s, ps[i]) * agg;
    }
    return out;
}
}  // namespace

std::vector<double> hfio_discrete_norms(const Field& f, double s, const std::vector<double>& ps, const SectorPartition& part,
                                        double gamma) {
    for (double p : ps) check_p(p, "hfio_discrete_norm", true);
    Field F = to_frequency(f);
    require_annulus(F, part.k(), "hfio_discrete_norm");
    auto pieces = sector_pieces(F, part, gamma);
    return discrete_from_pieces(pieces, F.grid.n, part.k(), s, ps);
}

NormResult hfio_discrete_norm(const Field& f, double s, double p, const SectorPartition& part, EvalPath path, double gamma) {
    check_p(p, "hfio_discrete_norm", true);
    Field F = to_frequency(f);
    NormResult res;
    res.diag.leakage = annulus_leakage(F, part.k());
    require_annulus(F, part.k(), "hfio_discrete_norm");
    res.diag.gamma = gamma;
    if (path == EvalPath::cropped) {
        res.diag.path = "cropped";
        auto pieces = sector_pieces(F, part, gamma);
        res.diag.terms = pieces.size();
        res.value = discrete_from_pieces(pieces, F.grid.n, part.k(), s, {p})[0];
        res.diag.zero_input = pieces.empty();
        return res;
    }
    res.diag.path = "full_grid";
    int g = static_cast<int>(gamma);
    if (g != 1 && g != 2 && g != 4) throw ParameterError("hfio_discrete_norm: full-grid oversampling must be 1, 2 or 4");
    std::vector<double> vals(part.size(), 0.0);
    std::vector<char> used(part.size(), 0);
    parallel_for(part.size(), [&](std::size_t nu) {
        Field G(F.grid, Domain::frequency);
        bool any = false;
        for (std::size_t i = 0; i < F.values.size(); ++i) {
            if (F.values[i] == cplx(0.0, 0.0)) continue;
            double c = part.chi(static_cast<int>(nu), F.grid.frequency(i));
            if (c > 0) {
                G.values[i] = F.values[i] * c;
                any = true;
            }
        }
        if (!any) return;
        used[nu] = 1;
        SpectralPiece pc = padded_piece(G, g);
        CVec buf(pc.patch.size());
        pc.synthesize(nullptr, buf.data());
        PowerSums ps({p});
        ps.add(buf.data(), buf.size());
        vals[nu] = ps.norm(0, pc.patch.cell_volume());
    });
    double total = 0;
    for (std::size_t nu = 0; nu < vals.size(); ++nu) {
        if (!used[nu]) continue;
        ++res.diag.terms;
        total = std::isinf(p) ? std::max(total, vals[nu]) : total + std::pow(vals[nu], p);
    }
    double agg = std::isinf(p) ? total : std::pow(total, 1.0 / p);
    res.value = hfio_prefactor(F.grid.n, part.k(), s, p) * agg;
    res.diag.zero_input = res.diag.terms == 0;
    return res;
}

NormResult hfio_continuous_norm(const Field& f, double s, double p, const WavePacketSystem& sys, const SphereRule& rule,
                                double gamma, double tol) {
    check_p(p, "hfio_continuous_norm", false);
    Field F = to_frequency(f);
    const int n = F.grid.n;
    if (n != sys.n() || rule.n != n) throw ContractError("hfio_continuous_norm: dimension mismatch");
    NormResult res;
    res.diag.path = "cropped";
    res.diag.gamma = gamma;
    res.diag.rule_spacing = rule.spacing;

    auto support = nonzero_support(F);
    if (support.empty()) {
        res.diag.zero_input = true;
        return res;
    }
    struct Pt {
        std::size_t flat;
        Vec unit;
        double r;
        cplx c;
    };
    std::vector<Pt> pts;
    std::vector<std::size_t> low_idx;
    CVec low_coef;
    double wsum = 0, wlog = 0;
    for (std::size_t i : support) {
        Vec xi = F.grid.frequency(i);
        double r = norm(xi, n);
        cplx c = F.values[i] * bracket(xi, n, s);
        double qv = profile::low_cut(r);
        if (qv > 0) {
            low_idx.push_back(i);
            low_coef.push_back(c * qv);
        }
        if (r >= 0.125) {
            Vec u{};
            for (int d = 0; d < n; ++d) u[d] = xi[d] / r;
            pts.push_back({i, u, r, c});
            double a = std::norm(F.values[i]);
            wsum += a;
            wlog += a * std::log2(r);
        }
    }
    if (!low_idx.empty()) {
        SpectralPiece lp;
        lp.idx = low_idx;
        lp.coef = low_coef;
        lp.patch = Patch::build(F.grid, lp.idx, gamma);
        CVec buf(lp.patch.size());
        lp.synthesize(nullptr, buf.data());
        PowerSums ps({p});
        ps.add(buf.data(), buf.size());
        res.diag.low_term = ps.norm(0, lp.patch.cell_volume());
    }
    if (wsum > 0) {
        // dominant dyadic scale; the rule should resolve 2^{-k/2-1} (20% slack for integer node counts)
        int kdom = static_cast<int>(std::lround(wlog / wsum));
        res.diag.coarse_rule = rule.spacing > 1.2 * std::pow(2.0, -0.5 * kdom - 1.0);
    }

    // angle-sorted points for n = 2 so each node only scans its window
    std::vector<double> ang;
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    if (n == 2) {
        ang.resize(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) ang[i] = std::atan2(pts[i].unit[1], pts[i].unit[0]);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ang[a] < ang[b] || (ang[a] == ang[b] && a < b); });
    }
    double rmin = pts.empty() ? 1.0 : pts[0].r;
    for (auto& q : pts) rmin = std::min(rmin, q.r);
    double reach_max = std::min(2.0, 2.0 / std::sqrt(rmin));
    double ang_reach = 2.0 * std::asin(std::min(1.0, reach_max / 2.0));

    std::vector<double> contrib(rule.size(), 0.0);
    std::vector<char> used(rule.size(), 0);
    parallel_for(rule.size(), [&](std::size_t j) {
        const Vec& w = rule.nodes[j];
        std::vector<std::size_t> cand;
        if (n == 2 && ang_reach < kPi) {
            double a0 = std::atan2(w[1], w[0]);
            auto scan = [&](double lo, double hi) {
                auto b = std::lower_bound(order.begin(), order.end(), lo, [&](std::size_t i, double v) { return ang[i] < v; });
                for (auto it = b; it != order.end() && ang[*it] <= hi; ++it) cand.push_back(*it);
            };
            double lo = a0 - ang_reach, hi = a0 + ang_reach;
            scan(std::max(lo, -kPi), std::min(hi, kPi));
            if (lo < -kPi) scan(lo + 2 * kPi, kPi);
            if (hi > kPi) scan(-kPi, hi - 2 * kPi);
            std::sort(cand.begin(), cand.end());
            cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        } else {
            cand = order;
        }
        SpectralPiece pc;
        for (std::size_t ci : cand) {
            const Pt& q = pts[ci];
            double d2 = 0;
            for (int d = 0; d < n; ++d) d2 += (q.unit[d] - w[d]) * (q.unit[d] - w[d]);
            double v = sys.packet_rd(q.r, std::sqrt(d2), tol);
            if (v == 0) continue;
            pc.idx.push_back(q.flat);
            pc.coef.push_back(q.c * v);
        }
        if (pc.idx.empty()) return;
        pc.patch = Patch::build(F.grid, pc.idx, gamma);
        cplx* buf = scratch_buffer(pc.patch.size());
        pc.synthesize(nullptr, buf);
        PowerSums ps({p});
        ps.add(buf, pc.patch.size());
        contrib[j] = rule.weights[j] * ps.sum(0) * pc.patch.cell_volume();
        used[j] = 1;
    });
    double total = 0;
    for (std::size_t j = 0; j < contrib.size(); ++j) {
        total += contrib[j];
        res.diag.terms += used[j];
    }
    res.diag.packet_term = std::pow(total, 1.0 / p);
    res.value = res.diag.low_term + res.diag.packet_term;
    return res;
}

NormResult square_function_norm(const Field& f, double p, const SectorPartition& part, double gamma) {
    check_p(p, "square_function_norm", false);
    Field F = to_frequency(f);
    NormResult res;
    res.diag.leakage = annulus_leakage(F, part.k());
    require_annulus(F, part.k(), "square_function_norm");
    res.diag.gamma = gamma;
    auto pieces = sector_pieces(F, part, gamma, true);
    res.diag.terms = pieces.size();
    if (pieces.empty()) {
        res.diag.zero_input = true;
        return res;
    }
    PowerSums ps({p});
    square_sums(pieces, {}, ps);
    res.value = ps.norm(0, pieces.front().patch.cell_volume());
    return res;
}

}  // namespace wpl
