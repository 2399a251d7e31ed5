#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "wpl/field.hpp"
#include "wpl/sphere.hpp"

namespace wpl {

// psi = A u^2 with u = F^{-1} b_c, b_c(xi) = b(2|xi|/c); psi^ lives in |xi| <= c
struct BumpProfile {
    int n = 2;
    double c = 0.5;
    double A = 1;
    double u(double r) const;      // radial inverse transform of b_c, (2 pi)^{-n} int b_c e^{ix.xi} dxi
    double psi(double r) const { return A * u(r) * u(r); }
    double b_hat(double rho) const;  // b_c(rho)
    double min_unit_ball = 0;        // min over |x| <= 1 of psi, probed
    // (rho, weight) pairs of the radial rule, weight includes b_c and the measure
    std::shared_ptr<const std::vector<std::pair<double, double>>> rule;
};

BumpProfile build_bump(int n, double c);

// coefficients on a subset of the frequency lattice
struct SparseSpectrum {
    std::vector<std::size_t> idx;
    CVec coef;
    std::size_t size() const { return idx.size(); }
};

struct ComponentInfo {
    int nu = -1;
    double fourier_l1 = 0;        // N^{-n/2} sum |coef|
    double leak = 0;              // relative l2 mass where chi_nu < 1
    double min_near_origin = 0;   // min |f_nu| over probes |x| <= 2^{-k} (full) or |x| <= 1 (unit)
};

struct Extremizer {
    std::string type;  // full, unit, random
    int k = 0;
    double c = 0;
    unsigned seed = 0;
    GridSpec grid;
    Field field;  // frequency domain, components summed in direction order
    std::vector<SparseSpectrum> components;
    std::vector<ComponentInfo> info;
    double max_leak = 0;
    double psi_amplitude = 0;
    nlohmann::json spec() const;
};

// grids: full and random families scale the torus with k so the annulus fills a fixed fraction
GridSpec full_family_grid(int k, int N = 1024);
GridSpec unit_family_grid(int k);

// f_nu(x) = e^{i 2^k nu.x} psi(2^k nu.x + 2^{k/2} P_nu x); c = 0 tries 1/2, then 1/4
Extremizer extremizer_full(int k, const SectorPartition& part, const GridSpec& g, double c = 0);
// g_nu(x) = e^{i m_nu.x} psi(x), m_nu the lattice point nearest 2^k nu; c = 0 tries 1, then 1/2
Extremizer extremizer_unit(int k, const SectorPartition& part, const GridSpec& g, double c = 0);
// unit-variance complex Gaussian coefficients on the annulus; components are chi_nu(D) f
Extremizer random_annulus(int k, const SectorPartition& part, const GridSpec& g, unsigned seed);

std::vector<SparseSpectrum> sector_components(const Field& F, const SectorPartition& part);
Field assemble(const GridSpec& g, const std::vector<SparseSpectrum>& comps);

// sum_nu eps_nu comps_nu with seeded Rademacher signs
Field rademacher_sample(const GridSpec& g, const std::vector<SparseSpectrum>& comps, unsigned seed);
std::vector<int> rademacher_signs(std::size_t m, unsigned seed);

double component_lp_norm(const GridSpec& g, const SparseSpectrum& comp, double p, double gamma = 2);

}  // namespace wpl
