#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "wpl/fft.hpp"
#include "wpl/norms.hpp"
#include "wpl/propagator.hpp"

using namespace wpl;

namespace {
Field sector_noise(const GridSpec& g, int k, const Vec& nu, double delta, unsigned seed) {
    Field F = testutil::annulus_noise(g, k, seed);
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        Vec xi = g.frequency(i);
        double r = norm(xi, 2);
        if (r == 0 || std::hypot(xi[0] / r - nu[0], xi[1] / r - nu[1]) > delta) F.values[i] = 0;
    }
    return F;
}

// exact lattice rotation by 90 degrees: (m1, m2) -> (-m2, m1)
Field rotate90(const Field& F) {
    Field G(F.grid, Domain::frequency);
    int m[2];
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        if (F.values[i] == cplx(0, 0)) continue;
        F.grid.lattice(i, m);
        int r[2] = {-m[1], m[0]};
        G.values[F.grid.flat_from_lattice(r)] = F.values[i];
    }
    return G;
}
}  // namespace

TEST_SUITE("propagator") {

TEST_CASE("phase symbols") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-10, 10), L(0.01, 100);
    for (auto ph : {euclidean_phase(2), linear_phase(2, Vec{0.3, -1.2}), degenerate_phase(2), euclidean_phase(3)}) {
        const int n = ph.n;
        for (int t = 0; t < 100; ++t) {
            Vec xi{};
            for (int d = 0; d < n; ++d) xi[d] = U(rng);
            if (std::abs(xi[0]) < 1e-2) xi[0] = 1;
            double l = L(rng);
            Vec lx{};
            for (int d = 0; d < n; ++d) lx[d] = l * xi[d];
            CHECK(std::abs(ph.phi(lx) - l * ph.phi(xi)) <= 1e-10 * std::max(1.0, std::abs(l * ph.phi(xi))));
            Vec g = ph.grad(xi);
            for (int d = 0; d < n; ++d) {
                double h = 1e-6 * norm(xi, n);
                Vec a = xi, b = xi;
                a[d] += h;
                b[d] -= h;
                double fd = (ph.phi(a) - ph.phi(b)) / (2 * h);
                CHECK(std::abs(fd - g[d]) <= 1e-5 * std::max(1.0, std::abs(g[d])));
            }
        }
    }
    CHECK(euclidean_phase(2).curved());
    CHECK_FALSE(linear_phase(2, Vec{1, 0}).curved());
    CHECK_FALSE(degenerate_phase(2).curved());
    CHECK(phase_by_name("linear", 2).name == "linear");
    CHECK_THROWS_AS(phase_by_name("cone", 2), ParameterError);
    CHECK(euclidean_phase(2).grad(Vec{}) == Vec{});
}

TEST_CASE("propagate: identity, translation, unitarity, group law") {
    GridSpec g{2, 64, 2 * kPi};
    Field f = testutil::white_noise(g, 3);
    auto eu = euclidean_phase(2);
    CHECK(l2_rel_diff(propagate(f, 0.0, eu), f) == 0.0);

    // v t = 3 grid cells along x_1: e^{i t v.xi} f^ is f(x + t v)
    auto lin = linear_phase(2, Vec{1, 0});
    double t = 3 * g.spacing();
    Field s = propagate(f, t, lin);
    double worst = 0;
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) worst = std::max(worst, std::abs(s.values[i * 64 + j] - f.values[((i + 3) % 64) * 64 + j]));
    CHECK(worst < 1e-10);

    for (double tt : {0.3, 1.7, -2.5}) CHECK(std::abs(lp_norm(propagate(f, tt, eu), 2) / lp_norm(f, 2) - 1) < 1e-10);
    Field a = propagate(propagate(f, 0.4, eu), 0.9, eu);
    Field b = propagate(f, 1.3, eu);
    CHECK(l2_rel_diff(a, b) < 1e-12);
    CHECK(propagate(forward_transform(f), 0.5, eu).domain == Domain::frequency);
}

TEST_CASE("window") {
    Window g = build_window();
    double mn = 1e9;
    for (int i = 0; i <= 10000; ++i) mn = std::min(mn, g(i / 10000.0));
    CHECK(mn == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mn >= 1.0 - 1e-12);
    CHECK(g(0.0) >= g(1.0));
    CHECK(g(1.0) > 0);
    for (double t : {0.3, 2.0, 7.5}) CHECK(g(-t) == g(t));

    // long-interval discrete transform: mass concentrated in |tau| <= 1
    const int M = 16384;
    const double dt = 0.05;
    CVec s(M);
    for (int j = 0; j < M; ++j) {
        double tt = (j < M / 2 ? j : j - M) * dt;
        s[j] = g(tt);
    }
    fft::transform(s.data(), {M}, -1);
    double in = 0, all = 0;
    for (int j = 0; j < M; ++j) {
        double tau = 2 * kPi * (j < M / 2 ? j : j - M) / (M * dt);
        double a = std::norm(s[j]);
        all += a;
        if (std::abs(tau) <= 1.0) in += a;
    }
    CHECK(in / all > 0.999);

    // p = 2 tail against Plancherel
    TimeRule fine = trapezoid_rule(-3, 4, 7000);
    double inside = 0;
    for (std::size_t j = 0; j < fine.size(); ++j) inside += fine.weights[j] * g(fine.nodes[j]) * g(fine.nodes[j]);
    double exact_tail = 1 - inside / g.l2_squared();
    CHECK(std::abs(g.tail_fraction(2, -3, 4) - exact_tail) < 1e-6);
    MESSAGE("window tail outside [-3,4], p=2: ", exact_tail, "  p=4: ", g.tail_fraction(4, -3, 4));
}

TEST_CASE("time rules") {
    auto r = default_time_rule(5);
    CHECK(r.size() == 257);
    CHECK(default_time_rule(1).size() == 65);
    double w = 0;
    for (double x : r.weights) w += x;
    CHECK(w == doctest::Approx(1.0));
    auto wr = window_time_rule();
    CHECK(wr.lo == -3.0);
    CHECK(wr.hi == 4.0);
    CHECK(wr.spacing == doctest::Approx(1.0 / 16));
    CHECK_THROWS_AS(trapezoid_rule(0, 1, 0), ParameterError);
}

TEST_CASE("space-time norms") {
    GridSpec g{2, 128, 2 * kPi};
    Field F = testutil::annulus_noise(g, 4, 5);
    Field u = inverse_transform(F);
    auto rule = default_time_rule(4);

    // translation invariance; |u|^4 is resolved exactly at gamma = 2
    auto lin = linear_phase(2, Vec{0.7, -0.4});
    CHECK(std::abs(spacetime_lp_norm(F, 4, lin, rule) / lp_norm(u, 4, 2) - 1) < 1e-10);

    auto eu = euclidean_phase(2);
    auto res = spacetime_lp_norms(F, {2.0, 4.0, 6.0}, eu, rule);
    CHECK(std::abs(res.values[0] / frequency_l2(F) - 1) < 1e-8);
    CHECK_FALSE(res.coarse_rule);
    CHECK(res.values[2] == doctest::Approx(spacetime_lp_norm(F, 6, eu, rule)).epsilon(1e-12));
    CHECK(spacetime_lp_norms(F, {4.0}, eu, trapezoid_rule(0, 1, 4)).coarse_rule);

    // dense oracle: propagate on the full grid at a few times
    auto few = trapezoid_rule(0, 1, 4);
    double acc = 0;
    for (std::size_t j = 0; j < few.size(); ++j)
        acc += few.weights[j] * std::pow(lp_norm(inverse_transform(propagate(F, few.nodes[j], eu)), 4, 2), 4);
    CHECK(std::abs(spacetime_lp_norm(F, 4, eu, few) / std::pow(acc, 0.25) - 1) < 1e-10);
}

TEST_CASE("decoupling right-hand side") {
    Window w = build_window();
    auto eu = euclidean_phase(2);
    auto rule = window_time_rule();
    int k = 4;
    GridSpec g{2, 128, 2 * kPi};
    SectorPartition part(build_direction_set(2, k));
    Field F = testutil::annulus_noise(g, k, 8);

    // p = 2: every sector norm is conserved, so rhs^2 = (sum_j w_j g_j^2) sum_nu ||chi_nu f||_2^2
    double gw = 0;
    for (std::size_t j = 0; j < rule.size(); ++j) gw += rule.weights[j] * w(rule.nodes[j]) * w(rule.nodes[j]);
    double sec = 0;
    for (std::size_t nu = 0; nu < part.size(); ++nu)
        sec += std::pow(frequency_l2(apply_real_multiplier(F, [&](const Vec& xi) { return part.chi(static_cast<int>(nu), xi); })), 2);
    auto d = decoupling_rhs(F, {2.0, 4.0}, eu, w, part, rule);
    CHECK(std::abs(d.values[0] / std::sqrt(gw * sec) - 1) < 1e-10);
    CHECK(d.tail.size() == 2);
    CHECK(d.tail[0] > 0);

    // one sector: the sum is one term, equal to a weighted space-time norm
    const Vec& nu = part.dirs().dirs[2];
    Field one = sector_noise(g, k, nu, 0.3 * part.dirs().delta, 4);
    auto d1 = decoupling_rhs(one, {4.0}, eu, w, part, rule);
    CHECK(d1.terms == 1);
    TimeRule wr = rule;
    for (std::size_t j = 0; j < wr.size(); ++j) wr.weights[j] *= std::pow(w(wr.nodes[j]), 4);
    CHECK(std::abs(d1.values[0] / spacetime_lp_norm(one, 4, eu, wr) - 1) < 1e-6);

    auto wh = windowed_hfio_time_norm(F, 0.5, {4.0}, eu, w, part, rule);
    CHECK(wh[0] == doctest::Approx(hfio_prefactor(2, k, 0.5, 4.0) * d.values[1]).epsilon(1e-12));

    Field bad = F;
    bad.values[1] = 1.0;
    CHECK_THROWS_AS(decoupling_rhs(bad, {4.0}, eu, w, part, rule), PreconditionError);
}

TEST_CASE("kappa") {
    GridSpec g{2, 256, 2 * kPi};
    int k = 6;
    double delta = std::pow(2.0, -k / 2.0);
    Vec nu{std::cos(0.3), std::sin(0.3)};
    Field h = sector_noise(g, k, nu, delta, 2);
    CHECK(kappa(linear_phase(2, Vec{1, 2}), h, nu) == 0.0);

    // (grad|xi|(xi^) - nu) . xi = |xi| (1 - nu . xi^), scanned directly
    double brute = 0, R = 0;
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        if (h.values[i] == cplx(0, 0)) continue;
        Vec xi = g.frequency(i);
        double r = norm(xi, 2);
        R = std::max(R, r);
        brute = std::max(brute, r - dot(nu, xi, 2));
    }
    double kap = kappa(euclidean_phase(2), h, nu);
    CHECK(kap == doctest::Approx(brute).epsilon(1e-12));
    CHECK(kap <= R * delta * delta / 2 * (1 + 1e-9));

    Field hr = rotate90(h);
    Vec nur{-nu[1], nu[0]};
    CHECK(kappa(euclidean_phase(2), hr, nur) == doctest::Approx(kap).epsilon(1e-12));

    Field low = h;
    low.values[0] = 1.0;
    CHECK_THROWS_AS(kappa(euclidean_phase(2), low, nu), PreconditionError);
}

TEST_CASE("translation defect") {
    GridSpec g{2, 256, 2 * kPi};
    int k = 6;
    double delta = std::pow(2.0, -k / 2.0);
    Vec nu{std::cos(1.1), std::sin(1.1)};
    Field h = sector_noise(g, k, nu, delta, 6);

    auto lin = translation_defect(h, nu, 0.5, linear_phase(2, Vec{0.2, 0.9}));
    CHECK(lin.kappa == 0.0);
    CHECK(lin.defect < 1e-10 * lin.fourier_l1);

    auto eu = euclidean_phase(2);
    CHECK(translation_defect(h, nu, 0.0, eu).defect == 0.0);
    auto a = translation_defect(h, nu, std::ldexp(1.0, -k), eu);
    auto b = translation_defect(h, nu, std::ldexp(1.0, -k - 1), eu);
    CHECK(a.defect <= a.bound * (1 + 1e-6));
    CHECK(b.defect <= b.bound * (1 + 1e-6));
    // linear in t for small t
    double ra = a.defect / std::ldexp(1.0, -k), rb = b.defect / std::ldexp(1.0, -k - 1);
    CHECK(std::abs(ra / rb - 1) < 0.1);
    CHECK_THROWS_AS(translation_defect(h, nu, 2.0 / a.kappa, eu), ParameterError);
}

}
