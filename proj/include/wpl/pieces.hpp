#pragma once

#include <functional>
#include <vector>

#include "wpl/field.hpp"
#include "wpl/patch.hpp"
#include "wpl/sphere.hpp"

namespace wpl {

// A frequency-localized piece of a field: coefficients on a subset of the
// lattice plus the coarse patch that resamples it.
struct SpectralPiece {
    int sector = -1;
    std::vector<std::size_t> idx;  // flat indices into the frequency array
    CVec coef;                     // weighted coefficients
    std::vector<double> phase;     // optional cached phase values phi(xi)
    Patch patch;

    std::size_t size() const { return idx.size(); }
    // factor may be null
    void synthesize(const cplx* factor, cplx* out) const;
    void cache_phase(const GridSpec& g, const std::function<double(const Vec&)>& phi);
    // factor[i] = exp(i t phase[i]) * scale
    void time_factor(double t, double scale, cplx* factor) const;
};

// frequency view of f (copy-free when already in frequency domain)
Field to_frequency(const Field& f);

std::vector<std::size_t> nonzero_support(const Field& F);

// whole nonzero support, weights 1
SpectralPiece full_piece(const Field& F, double gamma, const std::vector<int>& force_dims = {});
// every coefficient, weights 1, patch of gamma * N per axis (zero padding of the full grid)
SpectralPiece padded_piece(const Field& F, int gamma);

// chi_nu(D) f for every sector with nonzero content. With common_dims all
// patches share one size, so their samples sit at the same points.
std::vector<SpectralPiece> sector_pieces(const Field& F, const SectorPartition& part, double gamma,
                                         bool common_dims = false);

// sum over pieces of |piece|^2 on a common patch, then sums of (.)^{p/2}
void square_sums(const std::vector<SpectralPiece>& pieces, const std::vector<const cplx*>& factors, PowerSums& ps);

}  // namespace wpl
