#include "wpl/packets.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <map>
#include <sstream>

#include "wpl/profiles.hpp"

namespace wpl {

using boost::math::quadrature::gauss_kronrod;

namespace {
constexpr double kSigmaMin = 1e-12;
constexpr double kTableStep = 0.02;
}  // namespace

WavePacketSystem::WavePacketSystem(int n) : n_(n) {
    if (n != 2 && n != 3) throw UnsupportedError("wave packet system: n in {2,3} only, got " + std::to_string(n));
    s_lo_ = std::log(kSigmaMin);
    s_hi_ = std::log(4.0);
    int m = static_cast<int>(std::ceil((s_hi_ - s_lo_) / kTableStep));
    ds_ = (s_hi_ - s_lo_) / m;
    logc_.resize(m + 1);
    loga_.resize(m + 1);
    for (int i = 0; i <= m; ++i) {
        double sigma = std::exp(s_lo_ + i * ds_);
        logc_[i] = -0.5 * std::log(sphere_integral(sigma, 2));
        loga_[i] = std::log(sphere_integral(sigma, 1));
    }
}

double WavePacketSystem::phi(double r) const { return profile::flat_top(r); }
double WavePacketSystem::Psi(double r) const { return profile::calderon_window(r); }
double WavePacketSystem::q(double r) const { return profile::low_cut(r); }

double WavePacketSystem::sphere_integral(double sigma, int power) const {
    // in the chord variable u = |e1 - nu| / sqrt(sigma): on S^1 dnu = sqrt(sigma) du / (pi sqrt(1 - sigma u^2 / 4)),
    // on S^2 dnu = sigma u du / 2. phi = 1 on the plateau, so that piece is closed form.
    const double a = profile::kFlatEdge;
    double rs = std::sqrt(sigma);
    double umax = std::min(1.0, 2.0 / rs);
    double ua = std::min(a, umax);
    double inner = n_ == 2 ? 2.0 * std::asin(std::min(1.0, rs * ua / 2.0)) / kPi : sigma / 4.0 * ua * ua;
    if (umax <= a) return inner;
    auto g = [&](double u) {
        double v = profile::flat_top(u);
        if (power == 2) v *= v;
        if (n_ == 2) return v * rs / (kPi * std::sqrt(std::max(0.0, 1.0 - 0.25 * sigma * u * u)));
        return 0.5 * sigma * v * u;
    };
    return inner + gauss_kronrod<double, 61>::integrate(g, a, umax, 10, 1e-13);
}

double WavePacketSystem::table(const std::vector<double>& t, double sigma, bool c) const {
    if (!(sigma > 0)) throw ParameterError("c_sigma: sigma must be positive");
    double s = std::log(sigma);
    int last = static_cast<int>(t.size()) - 1;
    if (s <= s_lo_) {
        // small caps: measure ~ sigma^{(n-1)/2}
        double slope = 0.5 * (n_ - 1);
        return std::exp(t[0] + (c ? -0.5 : 1.0) * slope * (s - s_lo_));
    }
    if (s >= s_hi_) s = s_hi_;
    double x = (s - s_lo_) / ds_;
    int i = static_cast<int>(std::floor(x));
    int i0 = std::clamp(i - 1, 0, last - 3);
    double v = 0;
    for (int a = 0; a < 4; ++a) {
        double w = 1;
        for (int b = 0; b < 4; ++b)
            if (b != a) w *= (x - (i0 + b)) / static_cast<double>(a - b);
        v += w * t[i0 + a];
    }
    return std::exp(v);
}

double WavePacketSystem::c_sigma(double sigma) const { return table(logc_, sigma, true); }
double WavePacketSystem::c_sigma_direct(double sigma) const { return 1.0 / std::sqrt(sphere_integral(sigma, 2)); }
double WavePacketSystem::cap_mass(double sigma) const { return table(loga_, sigma, false); }
double WavePacketSystem::cap_mass_direct(double sigma) const { return sphere_integral(sigma, 1); }

double WavePacketSystem::packet_rd(double r, double d, double tol) const {
    if (r < 0.125 || d > 2.0 / std::sqrt(r)) return 0.0;
    double lo = std::log(0.5 / r);
    if (d > 0) lo = std::max(lo, 2.0 * std::log(d));
    double hi = std::log(std::min(2.0 / r, 4.0));
    if (lo >= hi) return 0.0;
    auto f = [&](double s) {
        double sigma = std::exp(s);
        return Psi(sigma * r) * c_sigma(sigma) * phi(d / std::sqrt(sigma));
    };
    double err = 0, l1 = 0;
    double v = gauss_kronrod<double, 15>::integrate(f, lo, hi, 12, tol, &err, &l1);
    // absolute floor: near the support edge the value itself is below roundoff of the peak (>= 1)
    if (!(err <= 10.0 * tol * std::max(l1, 1.0))) {
        std::ostringstream os;
        os << "packet quadrature did not converge: |xi|=" << r << " d=" << d << " estimate=" << v << " error=" << err
           << " tol=" << tol;
        throw NumericalError(os.str());
    }
    return v;
}

double WavePacketSystem::packet(const Vec& omega, const Vec& xi, double tol) const {
    double r = norm(xi, n_);
    if (r == 0) return 0.0;
    double d2 = 0;
    for (int i = 0; i < n_; ++i) {
        double t = xi[i] / r - omega[i];
        d2 += t * t;
    }
    return packet_rd(r, std::sqrt(d2), tol);
}

double WavePacketSystem::mass(double r, double tol) const {
    if (r < 0.125) return 0.0;
    double lo = std::log(0.5 / r);
    double hi = std::log(std::min(2.0 / r, 4.0));
    if (lo >= hi) return 0.0;
    auto f = [&](double s) {
        double sigma = std::exp(s);
        return Psi(sigma * r) * c_sigma(sigma) * cap_mass(sigma);
    };
    return gauss_kronrod<double, 31>::integrate(f, lo, hi, 10, tol);
}

double eval_continuous_packet(const WavePacketSystem& sys, const Vec& omega, const Vec& xi, double tol) {
    return sys.packet(omega, xi, tol);
}

ReconstructionResult reconstruction_defect(const WavePacketSystem& sys, const Field& F, const SphereRule& rule) {
    F.require(Domain::frequency, "reconstruction_defect");
    if (F.grid.n != sys.n() || rule.n != sys.n()) throw ContractError("reconstruction_defect: dimension mismatch");
    ReconstructionResult res;
    res.rule_spacing = rule.spacing;
    res.packet_scale = std::numeric_limits<double>::infinity();
    double num = 0, den = 0;
    std::map<long long, double> mcache;
    const int n = sys.n();
    int m[kMaxDim];
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        double a = std::norm(F.values[i]);
        if (a == 0) continue;
        Vec xi = F.grid.frequency(i);
        double r = norm(xi, n);
        if (r < 0.5) throw PreconditionError("reconstruction_defect: input has mass below |xi| = 1/2");
        res.packet_scale = std::min(res.packet_scale, 1.0 / std::sqrt(r));
        F.grid.lattice(i, m);
        long long key = 0;
        for (int d = 0; d < n; ++d) key += static_cast<long long>(m[d]) * m[d];
        auto it = mcache.find(key);
        double inv = it != mcache.end() ? it->second : (mcache[key] = 1.0 / sys.mass(r));
        double s = 0;
        double reach = 2.0 / std::sqrt(r);
        for (std::size_t j = 0; j < rule.size(); ++j) {
            double d2 = 0;
            for (int d = 0; d < n; ++d) {
                double t = xi[d] / r - rule.nodes[j][d];
                d2 += t * t;
            }
            if (d2 > reach * reach) continue;
            s += rule.weights[j] * sys.packet_rd(r, std::sqrt(d2), 1e-11);
        }
        double e = 1.0 - inv * s;
        num += e * e * a;
        den += a;
    }
    if (den == 0) {
        res.zero_input = true;
        res.packet_scale = 0;
        return res;
    }
    res.defect = std::sqrt(num / den);
    res.coarse_rule = rule.spacing > res.packet_scale;
    return res;
}

}  // namespace wpl
