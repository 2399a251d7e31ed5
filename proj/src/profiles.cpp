#include "wpl/profiles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace wpl::profile {

double bump(double r) {
    double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r2));
}

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double a = std::exp(-1.0 / u);
    double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

double flat_top(double r) { return 1.0 - smooth_step((r - kFlatEdge) / (1.0 - kFlatEdge)); }

double calderon_constant() {
    static const double c = [] {
        using boost::math::quadrature::gauss_kronrod;
        double v = gauss_kronrod<double, 61>::integrate(
            [](double u) { return bump(u) * bump(u); }, -1.0, 1.0, 10, 1e-13);
        return std::log(2.0) * v;
    }();
    return c;
}

double calderon_window(double r) {
    if (r <= 0.5 || r >= 2.0) return 0.0;
    static const double inv = 1.0 / std::sqrt(calderon_constant());
    return bump(std::log2(r)) * inv;
}

double low_cut(double r) { return 1.0 - smooth_step((r - 2.0) / 2.0); }

}  // namespace wpl::profile
