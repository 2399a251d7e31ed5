#pragma once

#include <vector>

#include "wpl/field.hpp"
#include "wpl/sphere.hpp"

namespace wpl {

// Continuous wave-packet family phi_omega built from a flat-top bump phi, the
// Calderon window Psi and the sphere normalization c_sigma.
class WavePacketSystem {
public:
    explicit WavePacketSystem(int n);

    int n() const { return n_; }
    double phi(double r) const;
    double Psi(double r) const;
    double q(double r) const;

    // c_sigma = (int_{S^{n-1}} phi(|e1 - nu| / sqrt(sigma))^2 dnu)^{-1/2}, normalized measure
    double c_sigma(double sigma) const;         // tabulated, cubic in log-log
    double c_sigma_direct(double sigma) const;  // straight quadrature of the definition
    // int_{S^{n-1}} phi(|e1 - nu| / sqrt(sigma)) dnu
    double cap_mass(double sigma) const;
    double cap_mass_direct(double sigma) const;

    // phi_omega(xi) as a function of r = |xi| and d = |xi^ - omega|
    double packet_rd(double r, double d, double tol = 1e-9) const;
    double packet(const Vec& omega, const Vec& xi, double tol = 1e-9) const;

    // int_{S^{n-1}} phi_nu(xi) dnu, depends on |xi| only; m = 1/mass
    double mass(double r, double tol = 1e-11) const;

private:
    double sphere_integral(double sigma, int power) const;
    double table(const std::vector<double>& t, double sigma, bool c) const;

    int n_;
    double s_lo_, s_hi_, ds_;
    std::vector<double> logc_, loga_;
};

// phi_omega(xi), quadrature over sigma restricted to its support window
double eval_continuous_packet(const WavePacketSystem& sys, const Vec& omega, const Vec& xi, double tol = 1e-9);

struct ReconstructionResult {
    double defect = 0;
    bool zero_input = false;
    bool coarse_rule = false;  // node spacing exceeds |xi|^{-1/2} somewhere on the support
    double rule_spacing = 0;
    double packet_scale = 0;   // min |xi|^{-1/2} over the support
};

// ||f - sum_j w_j m(D) phi_{nu_j}(D) f||_2 / ||f||_2, m from the exact sphere mass
ReconstructionResult reconstruction_defect(const WavePacketSystem& sys, const Field& F, const SphereRule& rule);

}  // namespace wpl
