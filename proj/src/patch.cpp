#include "wpl/patch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wpl/fft.hpp"

namespace wpl {

PowerSums::PowerSums(std::vector<double> ps) : ps_(std::move(ps)), even_(ps_.size(), 0), sums_(ps_.size(), 0.0) {
    for (std::size_t i = 0; i < ps_.size(); ++i) {
        double p = ps_[i];
        if (!(p >= 1.0)) throw ParameterError("p must be >= 1, got " + std::to_string(p));
        if (std::isfinite(p) && p == std::floor(p) && static_cast<long>(p) % 2 == 0 && p <= 64) even_[i] = static_cast<int>(p / 2);
    }
}

void PowerSums::reset() { std::fill(sums_.begin(), sums_.end(), 0.0); }

void PowerSums::add(const cplx* u, std::size_t m, double weight) {
    const std::size_t np = ps_.size();
    // chunked partials keep the summation order fixed and the error small
    constexpr std::size_t kChunk = 4096;
    std::vector<double> part(np);
    for (std::size_t b = 0; b < m; b += kChunk) {
        std::size_t e = std::min(m, b + kChunk);
        std::fill(part.begin(), part.end(), 0.0);
        for (std::size_t j = b; j < e; ++j) {
            double a = std::norm(u[j]);
            for (std::size_t i = 0; i < np; ++i) {
                if (std::isinf(ps_[i])) {
                    part[i] = std::max(part[i], std::sqrt(a));
                } else if (even_[i] == 1) {
                    part[i] += a;
                } else if (even_[i] > 1) {
                    double v = a;
                    for (int q = 1; q < even_[i]; ++q) v *= a;
                    part[i] += v;
                } else {
                    part[i] += std::pow(a, 0.5 * ps_[i]);
                }
            }
        }
        for (std::size_t i = 0; i < np; ++i) {
            if (std::isinf(ps_[i])) sums_[i] = std::max(sums_[i], part[i]);
            else sums_[i] += weight * part[i];
        }
    }
}

void PowerSums::merge(const PowerSums& o, double weight) {
    for (std::size_t i = 0; i < ps_.size(); ++i) {
        if (std::isinf(ps_[i])) sums_[i] = std::max(sums_[i], o.sums_[i]);
        else sums_[i] += weight * o.sums_[i];
    }
}

double PowerSums::norm(std::size_t i, double vol) const {
    if (std::isinf(ps_[i])) return sums_[i];
    return std::pow(sums_[i] * vol, 1.0 / ps_[i]);
}

std::vector<int> Patch::support_widths(const GridSpec& g, std::span<const std::size_t> support) {
    std::vector<int> lo(g.n, std::numeric_limits<int>::max()), hi(g.n, std::numeric_limits<int>::min());
    int m[kMaxDim];
    for (std::size_t f : support) {
        g.lattice(f, m);
        for (int d = 0; d < g.n; ++d) {
            lo[d] = std::min(lo[d], m[d]);
            hi[d] = std::max(hi[d], m[d]);
        }
    }
    std::vector<int> w(g.n, 1);
    if (!support.empty())
        for (int d = 0; d < g.n; ++d) w[d] = hi[d] - lo[d] + 1;
    return w;
}

Patch Patch::build(const GridSpec& g, std::span<const std::size_t> support, double gamma,
                   const std::vector<int>& force_dims) {
    if (!(gamma >= 1.0)) throw ParameterError("patch oversampling must be >= 1");
    Patch p;
    p.grid_ = g;
    auto w = support_widths(g, support);
    p.dims_.resize(g.n);
    for (int d = 0; d < g.n; ++d) {
        int want = std::max(w[d], fft::next_smooth(static_cast<int>(std::ceil(gamma * w[d]))));
        if (!force_dims.empty()) {
            if (force_dims[d] < w[d]) throw ParameterError("patch: forced size smaller than support width");
            want = force_dims[d];
        }
        p.dims_[d] = std::max(want, 2);
    }
    p.size_ = 1;
    p.vol_ = 1;
    for (int d = 0; d < g.n; ++d) {
        p.size_ *= static_cast<std::size_t>(p.dims_[d]);
        p.vol_ *= g.L / p.dims_[d];
    }
    if (p.size_ > std::numeric_limits<std::uint32_t>::max()) throw ParameterError("patch too large");
    p.dst_.resize(support.size());
    int m[kMaxDim];
    for (std::size_t i = 0; i < support.size(); ++i) {
        g.lattice(support[i], m);
        std::size_t f = 0;
        for (int d = 0; d < g.n; ++d) {
            int S = p.dims_[d];
            f = f * static_cast<std::size_t>(S) + static_cast<std::size_t>(((m[d] % S) + S) % S);
        }
        p.dst_[i] = static_cast<std::uint32_t>(f);
    }
    p.scale_ = 1.0 / std::sqrt(static_cast<double>(g.size()));
    return p;
}

void Patch::synthesize(const cplx* vals, cplx* out) const {
    std::fill(out, out + size_, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < dst_.size(); ++i) out[dst_[i]] = vals[i];
    fft::transform(out, dims_, +1);
    for (std::size_t j = 0; j < size_; ++j) out[j] *= scale_;
}

void Patch::synthesize(const cplx* vals, const cplx* factor, cplx* out) const {
    std::fill(out, out + size_, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < dst_.size(); ++i) out[dst_[i]] = vals[i] * factor[i];
    fft::transform(out, dims_, +1);
    for (std::size_t j = 0; j < size_; ++j) out[j] *= scale_;
}

cplx* scratch_buffer(std::size_t m, int slot) {
    thread_local std::vector<CVec> bufs;
    if (bufs.size() <= static_cast<std::size_t>(slot)) bufs.resize(slot + 1);
    auto& b = bufs[slot];
    if (b.size() < m) {
        b = CVec();
        b.resize(m);
    }
    return b.data();
}

}  // namespace wpl
