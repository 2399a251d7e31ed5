#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "wpl/field.hpp"
#include "wpl/packets.hpp"
#include "wpl/sphere.hpp"

namespace wpl {

enum class EvalPath { full_grid, cropped };

struct NormDiagnostics {
    std::string path = "cropped";
    double gamma = 2;
    double leakage = 0;        // relative l2 mass outside the annulus
    std::size_t terms = 0;     // sectors or sphere nodes that contributed
    double rule_spacing = 0;   // continuous norm only
    bool coarse_rule = false;
    double low_term = 0;       // continuous norm: ||q(D) <D>^s f||_p
    double packet_term = 0;    // continuous norm: the sphere-integral part
    bool zero_input = false;
    nlohmann::json to_json() const;
};

struct NormResult {
    double value = 0;
    NormDiagnostics diag;
};

// <xi>^s weighted L^p norm; f in either domain
double sobolev_norm(const Field& f, double s, double p, int gamma = 0);

// relative l2 mass outside [2^{k-1}, 2^{k+1}]
double annulus_leakage(const Field& F, int k);
void require_annulus(const Field& F, int k, const char* op, double tol = 1e-12);

// 2^{k(s + (n-1)/2 (1/2 - 1/p))} (sum_nu ||chi_nu(D) f||_p^p)^{1/p}; p = inf uses the max form
NormResult hfio_discrete_norm(const Field& f, double s, double p, const SectorPartition& part,
                              EvalPath path = EvalPath::cropped, double gamma = 2);
// same for several p at once (cropped path)
std::vector<double> hfio_discrete_norms(const Field& f, double s, const std::vector<double>& ps,
                                        const SectorPartition& part, double gamma = 2);
double hfio_prefactor(int n, int k, double s, double p);

// ||q(D) <D>^s f||_p + (int ||<D>^s phi_w(D) f||_p^p dw)^{1/p}, the w-integral by the given rule
NormResult hfio_continuous_norm(const Field& f, double s, double p, const WavePacketSystem& sys, const SphereRule& rule,
                                double gamma = 2, double tol = 1e-8);

// || (sum_nu |chi_nu(D) f|^2)^{1/2} ||_p
NormResult square_function_norm(const Field& f, double p, const SectorPartition& part, double gamma = 2);

}  // namespace wpl
