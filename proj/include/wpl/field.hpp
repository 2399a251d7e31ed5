#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "wpl/common.hpp"

namespace wpl {

enum class Domain { space = 0, frequency = 1 };
const char* domain_name(Domain d);

// Torus [0,L)^n sampled at N points per axis. Frequencies live on (2pi/L) Z^n,
// stored in FFT order: array index i on an axis is lattice index i for i < N/2
// and i - N otherwise.
struct GridSpec {
    int n = 2;
    int N = 64;
    double L = 2.0 * kPi;

    void validate() const;
    std::size_t size() const;
    double spacing() const { return L / N; }
    double dxi() const { return 2.0 * kPi / L; }
    double nyquist() const { return kPi * N / L; }
    std::vector<int> dims() const { return std::vector<int>(static_cast<std::size_t>(n), N); }

    int lattice_index(int i) const { return i < N / 2 ? i : i - N; }
    int array_index(int m) const { return ((m % N) + N) % N; }
    void lattice(std::size_t flat, int* m) const;
    Vec frequency(std::size_t flat) const;
    Vec position(std::size_t flat) const;
    std::size_t flat_from_lattice(const int* m) const;

    // throws ParameterError naming the bound when radius >= nyquist
    void require_resolves(double radius) const;

    bool operator==(const GridSpec& o) const { return n == o.n && N == o.N && L == o.L; }
};

struct Field {
    GridSpec grid;
    Domain domain = Domain::space;
    CVec values;

    Field() = default;
    Field(const GridSpec& g, Domain d);
    static Field from_function(const GridSpec& g, const std::function<cplx(const Vec&)>& f);
    static Field from_spectrum(const GridSpec& g, const std::function<cplx(const Vec&)>& F);

    void require(Domain d, const char* op) const;
};

Field forward_transform(const Field& f);
Field inverse_transform(const Field& f);

// symbol evaluated at exact lattice frequencies (including xi = 0)
using Symbol = std::function<cplx(const Vec& xi)>;
Field apply_multiplier(const Field& f, const Symbol& m);
Field apply_real_multiplier(const Field& f, const std::function<double(const Vec&)>& m);

// gamma = 0 picks the default: 1 for p in {2, inf}, 2 otherwise
double lp_norm(const Field& f, double p, int gamma = 0);
double frequency_l2(const Field& f);      // (L/N)^{n/2} * ||F||_2, equals lp_norm(.,2)
double fourier_l1(const Field& f);        // N^{-n/2} sum |F|, sup bound for the samples
double l2_rel_diff(const Field& a, const Field& b);

// relative l2 mass of a frequency field outside r in [lo, hi]
double mass_outside_annulus(const Field& F, double lo, double hi);

// binary: 32 byte header ("WPL1", u32 n, u32 N, u32 domain, f64 L, 8 reserved) + c64 pairs
void write_binary(const Field& f, std::ostream& os);
Field read_binary(std::istream& is);
nlohmann::json to_json(const Field& f);  // N <= 64 only
Field field_from_json(const nlohmann::json& j);

}  // namespace wpl
