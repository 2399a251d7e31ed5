#include "wpl/field.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "wpl/fft.hpp"
#include "wpl/patch.hpp"

namespace wpl {

const char* domain_name(Domain d) { return d == Domain::space ? "space" : "frequency"; }

void GridSpec::validate() const {
    if (n < 1 || n > kMaxDim) throw ParameterError("grid: n must be in [1," + std::to_string(kMaxDim) + "], got " + std::to_string(n));
    if (N < 2 || (N & (N - 1)) != 0) throw ParameterError("grid: N must be a power of two >= 2, got " + std::to_string(N));
    if (!(L > 0.0) || !std::isfinite(L)) throw ParameterError("grid: L must be positive");
}

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (int d = 0; d < n; ++d) s *= static_cast<std::size_t>(N);
    return s;
}

void GridSpec::lattice(std::size_t flat, int* m) const {
    for (int d = n - 1; d >= 0; --d) {
        m[d] = lattice_index(static_cast<int>(flat % static_cast<std::size_t>(N)));
        flat /= static_cast<std::size_t>(N);
    }
}

Vec GridSpec::frequency(std::size_t flat) const {
    int m[kMaxDim];
    lattice(flat, m);
    Vec xi{};
    double h = dxi();
    for (int d = 0; d < n; ++d) xi[d] = m[d] * h;
    return xi;
}

Vec GridSpec::position(std::size_t flat) const {
    Vec x{};
    double dx = spacing();
    for (int d = n - 1; d >= 0; --d) {
        x[d] = static_cast<double>(flat % static_cast<std::size_t>(N)) * dx;
        flat /= static_cast<std::size_t>(N);
    }
    return x;
}

std::size_t GridSpec::flat_from_lattice(const int* m) const {
    std::size_t f = 0;
    for (int d = 0; d < n; ++d) f = f * static_cast<std::size_t>(N) + static_cast<std::size_t>(array_index(m[d]));
    return f;
}

void GridSpec::require_resolves(double radius) const {
    if (!(nyquist() > radius)) {
        std::ostringstream os;
        os << "grid does not resolve frequency radius " << radius << ": Nyquist bound pi*N/L = " << nyquist()
           << " (N=" << N << ", L=" << L << ") must exceed it";
        throw ParameterError(os.str());
    }
}

Field::Field(const GridSpec& g, Domain d) : grid(g), domain(d), values(g.size()) { g.validate(); }

Field Field::from_function(const GridSpec& g, const std::function<cplx(const Vec&)>& f) {
    Field out(g, Domain::space);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = f(g.position(i));
    return out;
}

Field Field::from_spectrum(const GridSpec& g, const std::function<cplx(const Vec&)>& F) {
    Field out(g, Domain::frequency);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = F(g.frequency(i));
    return out;
}

void Field::require(Domain d, const char* op) const {
    if (domain != d)
        throw ContractError(std::string(op) + ": expected " + domain_name(d) + " field, got " + domain_name(domain));
}

namespace {
Field transformed(const Field& f, int sign, Domain to) {
    Field out = f;
    out.domain = to;
    fft::transform(out.values.data(), f.grid.dims(), sign);
    double s = 1.0 / std::sqrt(static_cast<double>(f.grid.size()));
    for (auto& v : out.values) v *= s;
    return out;
}
}  // namespace

Field forward_transform(const Field& f) {
    f.require(Domain::space, "forward_transform");
    return transformed(f, -1, Domain::frequency);
}

Field inverse_transform(const Field& f) {
    f.require(Domain::frequency, "inverse_transform");
    return transformed(f, +1, Domain::space);
}

Field apply_multiplier(const Field& f, const Symbol& m) {
    f.require(Domain::frequency, "apply_multiplier");
    Field out = f;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        Vec xi = f.grid.frequency(i);
        cplx v = m(xi);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            std::ostringstream os;
            os << "apply_multiplier: non-finite symbol value at xi = (";
            for (int d = 0; d < f.grid.n; ++d) os << (d ? ", " : "") << xi[d];
            os << ")";
            throw EvaluationError(os.str());
        }
        out.values[i] *= v;
    }
    return out;
}

Field apply_real_multiplier(const Field& f, const std::function<double(const Vec&)>& m) {
    return apply_multiplier(f, [&](const Vec& xi) { return cplx(m(xi), 0.0); });
}

double lp_norm(const Field& f, double p, int gamma) {
    f.require(Domain::space, "lp_norm");
    if (!(p >= 1.0)) throw ParameterError("lp_norm: p must be >= 1, got " + std::to_string(p));
    if (gamma == 0) gamma = (p == 2.0 || std::isinf(p)) ? 1 : 2;
    if (gamma != 1 && gamma != 2 && gamma != 4) throw ParameterError("lp_norm: oversampling must be 1, 2 or 4");
    double vol = std::pow(f.grid.spacing(), f.grid.n);
    if (gamma == 1) {
        PowerSums ps({p});
        ps.add(f.values.data(), f.values.size());
        return ps.norm(0, vol);
    }
    Field F = forward_transform(f);
    std::vector<std::size_t> all(F.values.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Patch patch = Patch::build(f.grid, all, static_cast<double>(gamma));
    CVec buf(patch.size());
    patch.synthesize(F.values.data(), buf.data());
    PowerSums ps({p});
    ps.add(buf.data(), buf.size());
    return ps.norm(0, patch.cell_volume());
}

double frequency_l2(const Field& f) {
    f.require(Domain::frequency, "frequency_l2");
    double s = 0;
    for (auto& v : f.values) s += std::norm(v);
    return std::sqrt(s * std::pow(f.grid.spacing(), f.grid.n));
}

double fourier_l1(const Field& f) {
    f.require(Domain::frequency, "fourier_l1");
    double s = 0;
    for (auto& v : f.values) s += std::abs(v);
    return s / std::sqrt(static_cast<double>(f.grid.size()));
}

double l2_rel_diff(const Field& a, const Field& b) {
    if (!(a.grid == b.grid) || a.domain != b.domain) throw ContractError("l2_rel_diff: mismatched fields");
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        num += std::norm(a.values[i] - b.values[i]);
        den += std::norm(b.values[i]);
    }
    if (den == 0) return num == 0 ? 0.0 : std::sqrt(num);
    return std::sqrt(num / den);
}

double mass_outside_annulus(const Field& F, double lo, double hi) {
    F.require(Domain::frequency, "mass_outside_annulus");
    double out = 0, tot = 0;
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        double a = std::norm(F.values[i]);
        if (a == 0) continue;
        tot += a;
        double r = norm(F.grid.frequency(i), F.grid.n);
        if (r < lo || r > hi) out += a;
    }
    return tot == 0 ? 0.0 : std::sqrt(out / tot);
}

namespace {
template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get_le(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ParameterError("read_binary: truncated stream");
    return v;
}
}  // namespace

void write_binary(const Field& f, std::ostream& os) {
    os.write("WPL1", 4);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.n));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.N));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.domain));
    put_le<double>(os, f.grid.L);
    put_le<std::uint64_t>(os, 0);
    for (auto& v : f.values) {
        put_le<float>(os, static_cast<float>(v.real()));
        put_le<float>(os, static_cast<float>(v.imag()));
    }
}

Field read_binary(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "WPL1", 4) != 0) throw ParameterError("read_binary: bad magic");
    GridSpec g;
    g.n = static_cast<int>(get_le<std::uint32_t>(is));
    g.N = static_cast<int>(get_le<std::uint32_t>(is));
    auto dom = get_le<std::uint32_t>(is);
    g.L = get_le<double>(is);
    (void)get_le<std::uint64_t>(is);
    if (dom > 1) throw ParameterError("read_binary: bad domain tag");
    g.validate();
    Field f(g, static_cast<Domain>(dom));
    for (auto& v : f.values) {
        float re = get_le<float>(is);
        float im = get_le<float>(is);
        v = cplx(re, im);
    }
    return f;
}

nlohmann::json to_json(const Field& f) {
    if (f.grid.N > 64) throw ParameterError("to_json: debug form limited to N <= 64");
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (auto& v : f.values) {
        re.push_back(v.real());
        im.push_back(v.imag());
    }
    return {{"n", f.grid.n}, {"N", f.grid.N}, {"L", f.grid.L}, {"domain", domain_name(f.domain)}, {"re", re}, {"im", im}};
}

Field field_from_json(const nlohmann::json& j) {
    GridSpec g;
    g.n = j.at("n").get<int>();
    g.N = j.at("N").get<int>();
    g.L = j.at("L").get<double>();
    g.validate();
    std::string d = j.at("domain").get<std::string>();
    if (d != "space" && d != "frequency") throw ParameterError("field_from_json: bad domain " + d);
    Field f(g, d == "space" ? Domain::space : Domain::frequency);
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (re.size() != f.values.size() || im.size() != f.values.size()) throw ParameterError("field_from_json: size mismatch");
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = cplx(re[i].get<double>(), im[i].get<double>());
    return f;
}

}  // namespace wpl
