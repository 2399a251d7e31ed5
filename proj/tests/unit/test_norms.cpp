#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "wpl/exponents.hpp"
#include "wpl/norms.hpp"
#include "wpl/pieces.hpp"

using namespace wpl;

namespace {
// floating-point oracle straight from the defining formulas
struct Ref {
    double s, sigma, d, gap;
};
Ref ref_exponents(int n, double p) {
    Ref r;
    r.s = 0.5 * (n - 1) * std::abs(0.5 - 1 / p);
    r.d = p >= 2.0 * (n + 1) / (n - 1) ? 2 * r.s - 1 / p : r.s;
    r.sigma = p <= 2.0 * n / (n - 1) ? 0.0 : 2 * r.s - 1 / p;
    r.gap = r.d - r.s;
    return r;
}

// chi_nu(D) f by a dense multiplier, independent of the patch machinery
Field sector_field(const Field& F, const SectorPartition& part, int nu) {
    return apply_real_multiplier(F, [&](const Vec& xi) { return part.chi(nu, xi); });
}

// annulus noise kept only where sector nu is the single active sector
Field single_sector_noise(const GridSpec& g, int k, const SectorPartition& part, int nu, unsigned seed) {
    Field F = testutil::annulus_noise(g, k, seed);
    std::vector<std::pair<int, double>> act;
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        if (F.values[i] == cplx(0, 0)) continue;
        part.active(g.frequency(i), act);
        if (act.size() != 1 || act[0].first != nu) F.values[i] = 0;
    }
    return F;
}

GridSpec grid_for(int k) { return GridSpec{2, std::max(64, 1 << (k + 3)), 2 * kPi}; }
}  // namespace

TEST_SUITE("norms") {

TEST_CASE("exponent rows") {
    auto e = exponents(2, Rational(2));
    CHECK(e.s == Rational(0));
    CHECK(e.d == Rational(0));
    CHECK(e.sigma == Rational(0));
    CHECK(e.gap == Rational(0));

    e = exponents(2, Rational(6));
    CHECK(e.s == Rational(1, 6));
    CHECK(e.d == Rational(1, 6));
    CHECK(e.gap == Rational(0));

    e = exponents(2, Rational(12));
    CHECK(e.s == Rational(5, 24));
    CHECK(e.d == Rational(1, 3));
    CHECK(e.gap == Rational(1, 8));

    e = exponents(3, Rational(4));
    CHECK(e.s == Rational(1, 4));
    CHECK(e.sigma == Rational(1, 4));
    CHECK(e.d == Rational(1, 4));
    CHECK(e.gap == Rational(0));

    CHECK_THROWS_AS(exponents(2, Rational(3, 2)), ParameterError);
    CHECK_THROWS_AS(exponents(1, Rational(4)), ParameterError);
}

TEST_CASE("exponent identities over a rational sweep") {
    for (int n = 2; n <= 5; ++n) {
        for (int num = 2; num <= 60; ++num) {
            for (int den : {1, 2, 3, 7}) {
                Rational p(num, den);
                if (p < Rational(2)) continue;
                auto e = exponents(n, p);
                Ref r = ref_exponents(n, p.value());
                CHECK(std::abs(e.s.value() - r.s) < 1e-14);
                CHECK(std::abs(e.d.value() - r.d) < 1e-14);
                CHECK(std::abs(e.sigma.value() - r.sigma) < 1e-14);
                Rational inv = Rational(1) / p;
                CHECK(e.gap == max(Rational(0), e.s - inv));
                CHECK(e.gap >= Rational(0));
                bool zero = e.gap == Rational(0);
                CHECK(zero == (p <= Rational(2 * (n + 1), n - 1)));
            }
        }
    }
}

TEST_CASE("rational parsing and double entry") {
    CHECK(Rational::parse("12") == Rational(12));
    CHECK(Rational::parse("7/2") == Rational(7, 2));
    CHECK(Rational::parse("4.5") == Rational(9, 2));
    CHECK(Rational::parse("-3/6") == Rational(-1, 2));
    CHECK_THROWS(Rational::parse("x"));
    CHECK_THROWS(Rational::parse("1/0"));
    CHECK(exponents(2, 12.0).gap == Rational(1, 8));
    CHECK(exponents(2, 4.5).p == Rational(9, 2));
    auto j = to_json(exponents(2, Rational(12)));
    CHECK(j["gap"]["exact"] == "1/8");
}

TEST_CASE("sobolev norms") {
    GridSpec g{2, 64, 2 * kPi};
    Field f = testutil::white_noise(g, 11);
    CHECK(sobolev_norm(f, 0.0, 4.0) == lp_norm(f, 4.0));

    Field wave = Field::from_function(g, [](const Vec& x) { return std::exp(cplx(0, 3 * x[0] + 4 * x[1])); });
    for (double p : {1.5, 3.0, 4.0}) {
        double want = std::sqrt(26.0) * std::pow(2 * kPi, 2.0 / p);
        CHECK(std::abs(sobolev_norm(wave, 1.0, p) - want) / want < 1e-10);
    }

    GridSpec g5{2, 256, 2 * kPi};
    for (unsigned seed : {1u, 2u, 3u}) {
        Field F = testutil::annulus_noise(g5, 5, seed);
        Field u = inverse_transform(F);
        double ratio = sobolev_norm(F, 0.5, 4.0) / (std::pow(2.0, 2.5) * lp_norm(u, 4.0));
        CHECK(ratio >= 0.7);
        CHECK(ratio <= 1.5);
    }
    CHECK_THROWS_AS(sobolev_norm(f, 0.0, 1.0), ParameterError);
}

TEST_CASE("annulus precondition") {
    GridSpec g{2, 64, 2 * kPi};
    SectorPartition part(build_direction_set(2, 3));
    Field F = testutil::annulus_noise(g, 3, 5);
    CHECK(annulus_leakage(F, 3) == 0.0);
    F.values[g.flat_from_lattice(std::array<int, 2>{1, 0}.data())] = 1.0;
    CHECK(annulus_leakage(F, 3) > 0);
    try {
        hfio_discrete_norm(F, 0, 4, part);
        FAIL("expected a precondition error");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("stray") != std::string::npos);
    }
    CHECK_THROWS_AS(square_function_norm(F, 4, part), PreconditionError);
}

TEST_CASE("hfio at p = 2 sits in a band around the l2 norm") {
    for (int k = 3; k <= 6; ++k) {
        GridSpec g = grid_for(k);
        SectorPartition part(build_direction_set(2, k));
        for (unsigned seed : {1u, 2u}) {
            Field F = testutil::annulus_noise(g, k, seed);
            double r = hfio_discrete_norm(F, 0, 2, part).value / frequency_l2(F);
            CHECK(r <= 2.0);
            CHECK(r >= 0.5);
            // sum of chi^2 <= 1 pointwise
            CHECK(r <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("hfio single-sector collapse and prefactor") {
    int k = 5;
    GridSpec g = grid_for(k);
    SectorPartition part(build_direction_set(2, k));
    Field F = single_sector_noise(g, k, part, 7, 3);
    Field u = inverse_transform(F);
    for (double p : {2.0, 4.0, 6.0}) {
        auto res = hfio_discrete_norm(F, 0.5, p, part);
        CHECK(res.diag.terms == 1);
        double want = hfio_prefactor(2, k, 0.5, p) * lp_norm(u, p, 4);
        CHECK(std::abs(res.value - want) / want < 1e-3);
    }
    CHECK(hfio_prefactor(2, k, 0.5, 4.0) == doctest::Approx(std::pow(2.0, k * (0.5 + 0.125))));
    CHECK(hfio_prefactor(2, k, 0.0, std::numeric_limits<double>::infinity()) == doctest::Approx(std::pow(2.0, k * 0.25)));
}

TEST_CASE("hfio full-grid and cropped paths agree") {
    int k = 6;
    GridSpec g{2, 512, 2 * kPi};
    SectorPartition part(build_direction_set(2, k));
    Field F = testutil::annulus_noise(g, k, 9);
    auto a = hfio_discrete_norm(F, 0, 4, part, EvalPath::full_grid, 2);
    auto b = hfio_discrete_norm(F, 0, 4, part, EvalPath::cropped, 2);
    CHECK(a.diag.path == "full_grid");
    CHECK(b.diag.path == "cropped");
    CHECK(a.diag.terms == b.diag.terms);
    CHECK(std::abs(a.value / b.value - 1) < 0.02);
    auto many = hfio_discrete_norms(F, 0, {2.0, 4.0}, part);
    CHECK(many[1] == doctest::Approx(b.value).epsilon(1e-12));
    auto j = a.diag.to_json();
    CHECK(j["path"] == "full_grid");
}

TEST_CASE("hfio sector terms against dense multipliers") {
    int k = 4;
    GridSpec g = grid_for(k);
    SectorPartition part(build_direction_set(2, k));
    Field F = testutil::annulus_noise(g, k, 21);
    double p = 4, sum = 0;
    for (std::size_t nu = 0; nu < part.size(); ++nu) {
        double v = lp_norm(inverse_transform(sector_field(F, part, static_cast<int>(nu))), p, 4);
        sum += std::pow(v, p);
    }
    double want = hfio_prefactor(2, k, 0, p) * std::pow(sum, 1 / p);
    CHECK(std::abs(hfio_discrete_norm(F, 0, p, part, EvalPath::cropped, 4).value / want - 1) < 1e-3);
}

TEST_CASE("continuous norm") {
    WavePacketSystem sys(2);
    // support below 1/8: every packet vanishes
    {
        GridSpec g{2, 64, 2 * kPi * 32};
        Field F(g, Domain::frequency);
        int m1[2] = {1, 2}, m2[2] = {-3, 0};
        F.values[g.flat_from_lattice(m1)] = 1.0;
        F.values[g.flat_from_lattice(m2)] = cplx(0, 2);
        auto r = hfio_continuous_norm(F, 0.5, 4, sys, uniform_circle_rule(24));
        CHECK(r.diag.packet_term == 0.0);
        CHECK(r.value == r.diag.low_term);
        double want = sobolev_norm(F, 0.5, 4, 4);
        CHECK(std::abs(r.value - want) / want < 1e-3);
    }
    // support in |xi| <= 2: q = 1 there, the low term is the Sobolev norm and packets are the residual
    {
        GridSpec g{2, 64, 2 * kPi};
        Field F(g, Domain::frequency);
        int m1[2] = {1, 1}, m2[2] = {0, -2};
        F.values[g.flat_from_lattice(m1)] = 1.0;
        F.values[g.flat_from_lattice(m2)] = 0.5;
        auto r = hfio_continuous_norm(F, 0.0, 4, sys, uniform_circle_rule(48));
        double want = sobolev_norm(F, 0.0, 4, 4);
        CHECK(std::abs(r.diag.low_term - want) / want < 1e-3);
        CHECK(r.value == doctest::Approx(r.diag.low_term + r.diag.packet_term));
        CHECK(r.diag.packet_term > 0);
    }
    // p = 2, s = 0 on annuli
    for (int k = 3; k <= 5; ++k) {
        GridSpec g = grid_for(k);
        Field F = testutil::annulus_noise(g, k, 40 + k);
        auto r = hfio_continuous_norm(F, 0, 2, sys, default_sphere_rule(2, k));
        double ratio = r.value / frequency_l2(F);
        CHECK(ratio >= 0.5);
        CHECK(ratio <= 2.0);
        CHECK_FALSE(r.diag.coarse_rule);
    }
    // a coarse rule is flagged
    {
        GridSpec g = grid_for(5);
        Field F = testutil::annulus_noise(g, 5, 1);
        CHECK(hfio_continuous_norm(F, 0, 4, sys, uniform_circle_rule(8)).diag.coarse_rule);
    }
    GridSpec g{2, 32, 2 * kPi};
    auto z = hfio_continuous_norm(Field(g, Domain::frequency), 0, 4, sys, uniform_circle_rule(8));
    CHECK(z.diag.zero_input);
    CHECK(z.value == 0.0);
}

TEST_CASE("square function") {
    int k = 5;
    GridSpec g = grid_for(k);
    SectorPartition part(build_direction_set(2, k));

    Field one = single_sector_noise(g, k, part, 3, 8);
    double a = square_function_norm(one, 4, part, 4).value;
    double b = lp_norm(inverse_transform(sector_field(one, part, 3)), 4, 4);
    CHECK(std::abs(a / b - 1) < 1e-3);

    Field F = testutil::annulus_noise(g, k, 12);
    double l2 = 0;
    std::vector<Field> pieces;
    for (std::size_t nu = 0; nu < part.size(); ++nu) {
        pieces.push_back(sector_field(F, part, static_cast<int>(nu)));
        l2 += std::pow(frequency_l2(pieces.back()), 2);
    }
    CHECK(std::abs(square_function_norm(F, 2, part, 1).value / std::sqrt(l2) - 1) < 1e-10);

    // Khintchine: E ||sum eps_nu chi_nu f||_4^4 against the square function
    std::mt19937_64 rng(77);
    double avg = 0;
    const int trials = 64;
    for (int t = 0; t < trials; ++t) {
        Field G(g, Domain::frequency);
        for (auto& pc : pieces) {
            double e = (rng() & 1) ? 1.0 : -1.0;
            for (std::size_t i = 0; i < G.values.size(); ++i) G.values[i] += e * pc.values[i];
        }
        avg += std::pow(lp_norm(inverse_transform(G), 4, 2), 4) / trials;
    }
    double sf4 = std::pow(square_function_norm(F, 4, part, 2).value, 4);
    CHECK(avg / sf4 <= 4.0);
    CHECK(avg / sf4 >= 0.25);
}

TEST_CASE("single dyadic-parabolic piece equivalence") {
    // f supported in |xi^ - nu| <= 2^{-k/2}, 2^{k-1} <= |xi| <= 2^{k+1}; the discrete norm
    // behaves like 2^{k(s + s(p))} ||f||_p for p > 2 and 2^{k(s - s(p))} ||f||_p for p <= 2
    for (double p : {1.5, 4.0}) {
        std::vector<double> ratios;
        for (int k = 3; k <= 7; ++k) {
            GridSpec g = grid_for(k);
            SectorPartition part(build_direction_set(2, k));
            const Vec& nu = part.dirs().dirs[0];
            Field F = testutil::annulus_noise(g, k, 100 + k);
            for (std::size_t i = 0; i < F.values.size(); ++i) {
                Vec xi = g.frequency(i);
                double r = norm(xi, 2);
                if (r == 0 || std::hypot(xi[0] / r - nu[0], xi[1] / r - nu[1]) > part.dirs().delta) F.values[i] = 0;
            }
            double sp = s_exponent(2, p);
            double e = p > 2 ? sp : -sp;
            double s = 0.25;
            double v = hfio_discrete_norm(F, s, p, part).value;
            ratios.push_back(v / (std::pow(2.0, k * (s + e)) * lp_norm(inverse_transform(F), p, 4)));
        }
        double lo = *std::min_element(ratios.begin(), ratios.end());
        double hi = *std::max_element(ratios.begin(), ratios.end());
        INFO("p = ", p, " band ", lo, " .. ", hi);
        CHECK(lo > 0.2);
        CHECK(hi < 5.0);
        CHECK(hi / lo < 2.0);
    }
}

}
