#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "wpl/field.hpp"
#include "wpl/sphere.hpp"

namespace wpl {

// positively homogeneous degree-1 phase with its gradient (degree 0)
struct PhaseSymbol {
    std::string name;
    int n = 2;
    std::function<double(const Vec&)> phi;
    std::function<Vec(const Vec&)> grad;  // zero vector at xi = 0 by convention
    int hessian_rank = 0;                 // rank of d^2 phi on the sphere, known analytically
    bool curved() const { return hessian_rank == n - 1; }
};

PhaseSymbol euclidean_phase(int n);               // |xi|
PhaseSymbol linear_phase(int n, const Vec& v);    // v . xi
PhaseSymbol degenerate_phase(int n);              // |xi_1|
// "euclidean", "linear" (v = e1), "degenerate"
PhaseSymbol phase_by_name(const std::string& name, int n);

// e^{i t phi(D)} f, returned in the domain of f
Field propagate(const Field& f, double t, const PhaseSymbol& ph);

// g(t) = A int_{-1}^{1} b(tau) cos(t tau) dtau, min over [0,1] of g equal to 1
class Window {
public:
    double operator()(double t) const;
    double amplitude() const { return A_; }
    double support() const { return 1.0; }
    // 2 pi A^2 int b^2, the exact int_R g^2 dt
    double l2_squared() const;
    // relative share of int |g|^p dt outside [lo, hi]
    double tail_fraction(double p, double lo, double hi) const;

    // composite Gauss nodes for the tau integral, and |g| tabulated on [0, kTableT]
    struct Tables {
        std::vector<double> tau, wb;  // wb = weight * b(tau)
        double h = 0;
        std::vector<double> g;
    };
    static constexpr double kTableT = 160.0;

private:
    friend Window build_window();
    double raw(double t) const;
    double A_ = 1;
    std::shared_ptr<const Tables> tab_;
};

Window build_window();

// weighted time nodes
struct TimeRule {
    std::vector<double> nodes, weights;
    double lo = 0, hi = 1;
    double spacing = 0;
    std::size_t size() const { return nodes.size(); }
    nlohmann::json to_json() const;
};

// trapezoid with m intervals on [lo, hi]
TimeRule trapezoid_rule(double lo, double hi, int m);
// m = max(64, 8 * 2^k) intervals on [0, 1]
TimeRule default_time_rule(int k);
// the R-window rule for decoupling: [-3, 4], spacing about 1/16
TimeRule window_time_rule(double dt = 1.0 / 16.0);

struct SpacetimeResult {
    std::vector<double> values;  // one per p
    double spacing = 0;
    bool coarse_rule = false;     // spacing exceeds 1/(2 max|xi|)
    double gamma = 2;
    nlohmann::json to_json() const;
};

// (int ||e^{it phi(D)} f||_p^p w(t) dt)^{1/p} for every p at once
SpacetimeResult spacetime_lp_norms(const Field& f, const std::vector<double>& ps, const PhaseSymbol& ph,
                                   const TimeRule& rule, double gamma = 2);
double spacetime_lp_norm(const Field& f, double p, const PhaseSymbol& ph, const TimeRule& rule, double gamma = 2);

// same with the square function (sum_nu |chi_nu(D) e^{it phi(D)} f|^2)^{1/2} in place of |e^{it phi(D)} f|
SpacetimeResult spacetime_square_function(const Field& f, const std::vector<double>& ps, const PhaseSymbol& ph,
                                          const SectorPartition& part, const TimeRule& rule, double gamma = 2);

struct DecouplingResult {
    std::vector<double> values;  // one per p
    std::vector<double> tail;    // share of int |g|^p outside the rule's interval
    std::size_t terms = 0;
    nlohmann::json to_json() const;
};

// (sum_nu int ||chi_nu(D) g(t) e^{it phi(D)} f||_p^p dt)^{1/p}, t over the rule
DecouplingResult decoupling_rhs(const Field& f, const std::vector<double>& ps, const PhaseSymbol& ph, const Window& g,
                                const SectorPartition& part, const TimeRule& rule, double gamma = 2);
// 2^{k(s + (n-1)/2 (1/2 - 1/p))} times the above
std::vector<double> windowed_hfio_time_norm(const Field& f, double s, const std::vector<double>& ps, const PhaseSymbol& ph,
                                            const Window& g, const SectorPartition& part, const TimeRule& rule,
                                            double gamma = 2);

// sup over the support of h^ of |(grad phi(xi^) - grad phi(nu)) . xi|
double kappa(const PhaseSymbol& ph, const Field& h, const Vec& nu);

struct TranslationDefect {
    double defect = 0;  // sup_x |e^{it phi(D)} h(x) - h(x + t grad phi(nu))|
    double kappa = 0;
    double fourier_l1 = 0;
    double bound = 0;   // fourier_l1 * kappa * |t|
};

// requires kappa |t| <= 1
TranslationDefect translation_defect(const Field& h, const Vec& nu, double t, const PhaseSymbol& ph, double gamma = 2);

}  // namespace wpl
