#pragma once

#include <span>
#include <vector>

#include "wpl/field.hpp"

namespace wpl {

// Sums of |u|^p for several exponents in one sweep. p = inf keeps the max.
class PowerSums {
public:
    explicit PowerSums(std::vector<double> ps);
    void add(const cplx* u, std::size_t m, double weight = 1.0);
    void merge(const PowerSums& o, double weight = 1.0);
    double sum(std::size_t i) const { return sums_[i]; }
    // (sum * vol)^{1/p}; max for p = inf
    double norm(std::size_t i, double vol) const;
    const std::vector<double>& exponents() const { return ps_; }
    void reset();

private:
    std::vector<double> ps_;
    std::vector<int> even_;  // p/2 when p is an even integer, else 0
    std::vector<double> sums_;
};

// Coarse periodic resampling of a band-limited field given by a subset of its
// lattice coefficients. Coefficient at lattice m goes to bin m mod S, so the
// coarse samples are exactly the field's values at x_j = j L / S as long as the
// support fits in S bins per axis.
class Patch {
public:
    Patch() = default;
    // support: flat indices into the grid's frequency array
    static Patch build(const GridSpec& g, std::span<const std::size_t> support, double gamma,
                       const std::vector<int>& force_dims = {});
    // bounding widths of the support per axis (lattice units)
    static std::vector<int> support_widths(const GridSpec& g, std::span<const std::size_t> support);

    const std::vector<int>& dims() const { return dims_; }
    std::size_t size() const { return size_; }
    double cell_volume() const { return vol_; }
    std::size_t support_size() const { return dst_.size(); }

    // vals[i] is the coefficient of support[i]; out holds size() samples
    void synthesize(const cplx* vals, cplx* out) const;
    // same with an extra per-point factor
    void synthesize(const cplx* vals, const cplx* factor, cplx* out) const;

private:
    GridSpec grid_;
    std::vector<int> dims_;
    std::vector<std::uint32_t> dst_;
    std::size_t size_ = 0;
    double vol_ = 0;
    double scale_ = 0;
};

// thread-local scratch buffer reused across calls
cplx* scratch_buffer(std::size_t m, int slot = 0);

}  // namespace wpl
