#include "wpl/exponents.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wpl/common.hpp"

namespace wpl {

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw ParameterError("rational: zero denominator");
    if (den < 0) num = -num, den = -den;
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g == 0) g = 1;
    num_ = num / g;
    den_ = den / g;
}

namespace {
std::int64_t to_int(const std::string& s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw ParameterError("rational: cannot parse '" + s + "'");
    return v;
}
Rational checked(__int128 n, __int128 d) {
    const __int128 lim = static_cast<__int128>(INT64_MAX);
    // reduce first so the result fits
    __int128 a = n < 0 ? -n : n, b = d < 0 ? -d : d;
    while (b) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) n /= a, d /= a;
    if (n > lim || n < -lim || d > lim || d < -lim) throw ParameterError("rational: overflow");
    return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
}
}  // namespace

Rational Rational::parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) return Rational(to_int(s.substr(0, slash)), to_int(s.substr(slash + 1)));
    auto dotp = s.find('.');
    if (dotp == std::string::npos) return Rational(to_int(s), 1);
    std::string ip = s.substr(0, dotp), fp = s.substr(dotp + 1);
    if (fp.size() > 15) throw ParameterError("rational: too many decimals in '" + s + "'");
    bool neg = !ip.empty() && ip[0] == '-';
    std::int64_t den = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
    std::int64_t whole = (ip.empty() || ip == "-") ? 0 : to_int(ip);
    std::int64_t frac = fp.empty() ? 0 : to_int(fp);
    if (whole < 0) whole = -whole;
    std::int64_t num = whole * den + frac;
    return Rational(neg ? -num : num, den);
}

std::string Rational::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator+(const Rational& o) const {
    return checked(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_, static_cast<__int128>(den_) * o.den_);
}
Rational Rational::operator-(const Rational& o) const { return *this + (-o); }
Rational Rational::operator*(const Rational& o) const {
    return checked(static_cast<__int128>(num_) * o.num_, static_cast<__int128>(den_) * o.den_);
}
Rational Rational::operator/(const Rational& o) const {
    if (o.num_ == 0) throw ParameterError("rational: division by zero");
    return checked(static_cast<__int128>(num_) * o.den_, static_cast<__int128>(den_) * o.num_);
}

Rational abs(const Rational& r) { return r.num() < 0 ? -r : r; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

ExponentTriple exponents(int n, const Rational& p) {
    if (n < 2) throw ParameterError("exponents: n must be >= 2");
    if (p < Rational(2)) throw ParameterError("exponents: p = " + p.str() + " is below 2, outside the range of the exponent formulas");
    ExponentTriple e;
    e.n = n;
    e.p = p;
    Rational inv = Rational(1) / p;
    e.s = Rational(n - 1, 2) * abs(Rational(1, 2) - inv);
    Rational thr(2 * (n + 1), n - 1);
    e.d = p >= thr ? Rational(2) * e.s - inv : e.s;
    Rational lower(2 * n, n - 1);
    // p = 2: the conjectured exponent is 0 (sharp fixed-time case)
    e.sigma = p <= lower ? Rational(0) : Rational(2) * e.s - inv;
    e.gap = e.d - e.s;
    if (!(e.gap == max(Rational(0), e.s - inv))) throw ConstructionError("exponents: gap identity failed");
    return e;
}

ExponentTriple exponents(int n, double p) {
    if (!std::isfinite(p)) throw ParameterError("exponents: p must be finite");
    std::ostringstream os;
    os.precision(15);
    os << std::fixed << p;
    std::string s = os.str();
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return exponents(n, Rational::parse(s));
}

double s_exponent(int n, double p) { return 0.5 * (n - 1) * std::abs(0.5 - 1.0 / p); }

double d_exponent(int n, double p) {
    double s = s_exponent(n, p);
    return p >= 2.0 * (n + 1) / (n - 1) ? 2.0 * s - 1.0 / p : s;
}

nlohmann::json to_json(const ExponentTriple& e) {
    auto r = [](const Rational& q) { return nlohmann::json{{"exact", q.str()}, {"value", q.value()}}; };
    return {{"n", e.n}, {"p", r(e.p)}, {"s", r(e.s)}, {"sigma", r(e.sigma)}, {"d", r(e.d)}, {"gap", r(e.gap)}};
}

}  // namespace wpl
