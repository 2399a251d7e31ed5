#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "wpl/fft.hpp"
#include "wpl/field.hpp"
#include "wpl/patch.hpp"

using namespace wpl;

TEST_SUITE("spectral-core") {

TEST_CASE("grid validation") {
    GridSpec g{2, 48, 1.0};
    CHECK_THROWS_AS(g.validate(), ParameterError);
    g = GridSpec{2, 64, -1.0};
    CHECK_THROWS_AS(g.validate(), ParameterError);
    g = GridSpec{2, 64, 2 * kPi};
    CHECK_NOTHROW(g.validate());
    CHECK(g.nyquist() == doctest::Approx(32.0));
    CHECK_THROWS_AS(g.require_resolves(40.0), ParameterError);
    try {
        g.require_resolves(64.0);
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("Nyquist") != std::string::npos);
    }
}

TEST_CASE("lattice index round trip") {
    GridSpec g{3, 8, 2 * kPi};
    int m[kMaxDim];
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.lattice(i, m);
        for (int d = 0; d < 3; ++d) CHECK((m[d] >= -4 && m[d] < 4));
        CHECK(g.flat_from_lattice(m) == i);
    }
}

TEST_CASE("constant field transforms to a delta at zero") {
    // unitary scaling puts N^{n/2} at xi = 0
    GridSpec g{2, 32, 2 * kPi};
    Field f = Field::from_function(g, [](const Vec&) { return cplx(1.0, 0.0); });
    Field F = forward_transform(f);
    CHECK(std::abs(F.values[0] - cplx(32.0, 0.0)) < 1e-12);
    double rest = 0;
    for (std::size_t i = 1; i < F.values.size(); ++i) rest += std::abs(F.values[i]);
    CHECK(rest < 1e-10);
    // the physical amplitude in the continuum convention is 1
    CHECK(std::abs(F.values[0] / std::sqrt(double(g.size())) - 1.0) < 1e-14);
}

TEST_CASE("plane wave lands on its lattice point") {
    GridSpec g{2, 32, 2 * kPi};
    Field f = Field::from_function(g, [](const Vec& x) { return std::exp(cplx(0, 3 * x[0] - 5 * x[1])); });
    Field F = forward_transform(f);
    int m[2] = {3, -5};
    std::size_t at = g.flat_from_lattice(m);
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        if (i == at) CHECK(std::abs(F.values[i]) == doctest::Approx(32.0));
        else CHECK(std::abs(F.values[i]) < 1e-10);
    }
}

TEST_CASE("round trip and Parseval") {
    GridSpec g{2, 64, 5.0};
    Field f = testutil::white_noise(g, 7);
    Field F = forward_transform(f);
    Field back = inverse_transform(F);
    CHECK(l2_rel_diff(back, f) < 1e-10);
    double a = lp_norm(f, 2), b = frequency_l2(F);
    CHECK(std::abs(a - b) / b < 1e-10);
    GridSpec g3{3, 16, 3.0};
    Field h = testutil::white_noise(g3, 9);
    CHECK(l2_rel_diff(inverse_transform(forward_transform(h)), h) < 1e-10);
}

TEST_CASE("domain contracts") {
    GridSpec g{2, 16, 2 * kPi};
    Field f(g, Domain::space);
    CHECK_THROWS_AS(inverse_transform(f), ContractError);
    CHECK_THROWS_AS(forward_transform(forward_transform(f)), ContractError);
    CHECK_THROWS_AS(apply_multiplier(f, [](const Vec&) { return cplx(1, 0); }), ContractError);
    CHECK_THROWS_AS(lp_norm(forward_transform(f), 2), ContractError);
}

TEST_CASE("multipliers") {
    GridSpec g{2, 64, 2 * kPi};
    Field F = forward_transform(testutil::white_noise(g, 3));
    Field same = apply_multiplier(F, [](const Vec&) { return cplx(1, 0); });
    CHECK(l2_rel_diff(same, F) == 0.0);

    auto br = [](double s) {
        return [s](const Vec& xi) { return cplx(std::pow(1 + xi[0] * xi[0] + xi[1] * xi[1], s / 2), 0); };
    };
    Field back = apply_multiplier(apply_multiplier(F, br(1.5)), br(-1.5));
    CHECK(l2_rel_diff(back, F) < 1e-10);

    // composition equals the product symbol, bit for bit
    auto m1 = [](const Vec& xi) { return cplx(std::cos(xi[0]), xi[1]); };
    auto m2 = [](const Vec& xi) { return cplx(1.0 + xi[0] * xi[0], 0.5); };
    Field a = apply_multiplier(apply_multiplier(F, m2), m1);
    Field b = apply_multiplier(F, [&](const Vec& xi) { return m2(xi) * m1(xi); });
    double worst = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - b.values[i]) / (std::abs(b.values[i]) + 1e-300));
    CHECK(worst < 1e-15);

    // annulus indicator: nothing left outside
    int k = 3;
    Field A = apply_real_multiplier(F, [&](const Vec& xi) {
        double r = std::hypot(xi[0], xi[1]);
        return (r >= std::ldexp(1.0, k - 1) && r <= std::ldexp(1.0, k + 1)) ? 1.0 : 0.0;
    });
    CHECK(mass_outside_annulus(A, std::ldexp(1.0, k - 1), std::ldexp(1.0, k + 1)) == 0.0);

    auto bad = [](const Vec& xi) { return cplx(1.0 / std::hypot(xi[0], xi[1]), 0); };
    CHECK_THROWS_AS(apply_multiplier(F, bad), EvaluationError);
    try {
        apply_multiplier(F, bad);
    } catch (const EvaluationError& e) {
        CHECK(std::string(e.what()).find("xi = (0, 0)") != std::string::npos);
    }
}

TEST_CASE("grid-vector translation is a cyclic shift") {
    GridSpec g{2, 32, 2 * kPi};
    Field f = testutil::white_noise(g, 11);
    int sx = 5, sy = -3;
    double ax = sx * g.spacing(), ay = sy * g.spacing();
    Field moved = inverse_transform(apply_multiplier(forward_transform(f), [&](const Vec& xi) {
        return std::exp(cplx(0, ax * xi[0] + ay * xi[1]));
    }));
    double worst = 0;
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            cplx want = f.values[((i + sx + 32) % 32) * 32 + ((j + sy + 32) % 32)];
            worst = std::max(worst, std::abs(moved.values[i * 32 + j] - want));
        }
    // the Nyquist row has symbol e^{+-i pi s}, which is the same for even and odd s
    CHECK(worst < 1e-12);
}

TEST_CASE("lp norms") {
    GridSpec g{2, 32, 2 * kPi};
    Field one = Field::from_function(g, [](const Vec&) { return cplx(1, 0); });
    for (double p : {1.0, 2.0, 3.0, 4.0, 7.5})
        CHECK(lp_norm(one, p) == doctest::Approx(std::pow(2 * kPi, 2.0 / p)).epsilon(1e-12));
    CHECK(lp_norm(one, INFINITY) == doctest::Approx(1.0));
    CHECK_THROWS_AS(lp_norm(one, 0.5), ParameterError);

    // band-limited bump, p = 4: N and 2N agree
    auto bump = [](const GridSpec& gg) {
        return inverse_transform(Field::from_spectrum(gg, [](const Vec& xi) {
            double r2 = (xi[0] * xi[0] + xi[1] * xi[1]) / 36.0;
            return cplx(r2 < 1 ? std::exp(1 - 1 / (1 - r2)) : 0.0, 0);
        }));
    };
    GridSpec a{2, 32, 2 * kPi}, b{2, 64, 2 * kPi};
    double na = lp_norm(bump(a), 4), nb = lp_norm(bump(b), 4);
    // values differ by the unitary scaling N^{-n/2}; compare per-unit amplitude
    na *= 32.0 / 1.0;
    nb *= 64.0 / 1.0;
    CHECK(std::abs(na - nb) / nb < 1e-4);
}

TEST_CASE("oversampled lp norm matches a finer grid") {
    GridSpec a{2, 32, 4.0};
    Field F = testutil::annulus_noise(a, 1, 5);
    Field f = inverse_transform(F);
    double g2 = lp_norm(f, 6, 2), g4 = lp_norm(f, 6, 4);
    CHECK(std::abs(g2 - g4) / g4 < 5e-2);
    CHECK(lp_norm(f, 2, 4) == doctest::Approx(lp_norm(f, 2, 1)).epsilon(1e-12));
    CHECK_THROWS_AS(lp_norm(f, 4, 3), ParameterError);
}

TEST_CASE("patch samples equal the full-grid samples") {
    GridSpec g{2, 64, 2 * kPi};
    Field F(g, Domain::frequency);
    std::vector<std::size_t> sup;
    std::mt19937 rng(1);
    std::normal_distribution<double> nd;
    for (int a = 10; a < 17; ++a)
        for (int b = -3; b < 2; ++b) {
            int m[2] = {a, b};
            std::size_t i = g.flat_from_lattice(m);
            F.values[i] = cplx(nd(rng), nd(rng));
            sup.push_back(i);
        }
    std::sort(sup.begin(), sup.end());
    Patch p = Patch::build(g, sup, 1.0, {16, 16});
    CVec coef(sup.size()), out(p.size());
    for (std::size_t i = 0; i < sup.size(); ++i) coef[i] = F.values[sup[i]];
    p.synthesize(coef.data(), out.data());
    Field f = inverse_transform(F);
    // coarse sample j sits at x = j L/16 = full-grid sample 4j
    double worst = 0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) worst = std::max(worst, std::abs(out[i * 16 + j] - f.values[(4 * i) * 64 + 4 * j]));
    CHECK(worst < 1e-12);
    CHECK_THROWS_AS(Patch::build(g, sup, 1.0, {4, 4}), ParameterError);
}

TEST_CASE("power sums") {
    CVec u = {cplx(3, 4), cplx(0, 1), cplx(-2, 0)};
    PowerSums ps({2.0, 4.0, 3.0, INFINITY});
    ps.add(u.data(), u.size());
    CHECK(ps.sum(0) == doctest::Approx(30.0));
    CHECK(ps.sum(1) == doctest::Approx(625.0 + 1 + 16));
    CHECK(ps.sum(2) == doctest::Approx(125.0 + 1 + 8));
    CHECK(ps.norm(3, 1.0) == doctest::Approx(5.0));
    CHECK_THROWS_AS(PowerSums({0.5}), ParameterError);
}

TEST_CASE("serialization") {
    GridSpec g{2, 8, 3.5};
    Field f = testutil::white_noise(g, 2);
    std::stringstream ss;
    write_binary(f, ss);
    std::string bytes = ss.str();
    CHECK(bytes.size() == 32 + 8 * g.size());
    CHECK(bytes.substr(0, 4) == "WPL1");
    Field back = read_binary(ss);
    CHECK(back.grid == g);
    CHECK(back.domain == Domain::space);
    CHECK(l2_rel_diff(back, f) < 1e-7);

    auto j = to_json(forward_transform(f));
    Field jf = field_from_json(nlohmann::json::parse(j.dump()));
    CHECK(jf.domain == Domain::frequency);
    CHECK(l2_rel_diff(jf, forward_transform(f)) == 0.0);

    GridSpec big{2, 128, 1.0};
    CHECK_THROWS_AS(to_json(Field(big, Domain::space)), ParameterError);
    std::stringstream junk("XXXX");
    CHECK_THROWS_AS(read_binary(junk), ParameterError);
}

TEST_CASE("fft helpers") {
    CHECK(fft::next_smooth(11) == 12);
    CHECK(fft::next_smooth(97) == 98);
    for (int n : {13, 127, 1961, 4099}) {
        int m = fft::next_smooth(n);
        CHECK(m >= n);
        int r = m;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        CHECK(r == 1);
    }
}

}
