#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace wpl {

class Rational {
public:
    Rational(std::int64_t num = 0, std::int64_t den = 1);
    static Rational parse(const std::string& s);  // "12", "7/2", "4.5"

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string str() const;

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    Rational operator-() const { return Rational(-num_, den_); }
    auto operator<=>(const Rational& o) const {
        // cross-multiplied in 128 bits
        __int128 l = static_cast<__int128>(num_) * o.den_, r = static_cast<__int128>(o.num_) * den_;
        return l <=> r;
    }
    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }

private:
    std::int64_t num_, den_;
};

Rational abs(const Rational& r);
Rational max(const Rational& a, const Rational& b);

struct ExponentTriple {
    int n = 2;
    Rational p;
    Rational s;      // s(p)
    Rational sigma;  // sigma(p)
    Rational d;      // d(p)
    Rational gap;    // d(p) - s(p)
};

// exact for rational p >= 2, n >= 2
ExponentTriple exponents(int n, const Rational& p);
ExponentTriple exponents(int n, double p);  // p converted via its shortest decimal form

// real-valued versions for arbitrary p >= 1 (s uses |1/2 - 1/p|)
double s_exponent(int n, double p);
double d_exponent(int n, double p);

nlohmann::json to_json(const ExponentTriple& e);

}  // namespace wpl
