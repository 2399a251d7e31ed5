#include "wpl/pieces.hpp"

#include <algorithm>
#include <cmath>

#include "wpl/fft.hpp"
#include "wpl/parallel.hpp"

namespace wpl {

void SpectralPiece::synthesize(const cplx* factor, cplx* out) const {
    if (factor) patch.synthesize(coef.data(), factor, out);
    else patch.synthesize(coef.data(), out);
}

void SpectralPiece::cache_phase(const GridSpec& g, const std::function<double(const Vec&)>& phi) {
    phase.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) phase[i] = phi(g.frequency(idx[i]));
}

void SpectralPiece::time_factor(double t, double scale, cplx* factor) const {
    if (phase.size() != idx.size()) throw ContractError("time_factor: phase not cached");
    for (std::size_t i = 0; i < idx.size(); ++i) {
        double a = t * phase[i];
        factor[i] = cplx(scale * std::cos(a), scale * std::sin(a));
    }
}

Field to_frequency(const Field& f) { return f.domain == Domain::frequency ? f : forward_transform(f); }

std::vector<std::size_t> nonzero_support(const Field& F) {
    F.require(Domain::frequency, "nonzero_support");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < F.values.size(); ++i)
        if (F.values[i] != cplx(0.0, 0.0)) out.push_back(i);
    return out;
}

SpectralPiece full_piece(const Field& F, double gamma, const std::vector<int>& force_dims) {
    SpectralPiece p;
    p.idx = nonzero_support(F);
    p.coef.resize(p.idx.size());
    for (std::size_t i = 0; i < p.idx.size(); ++i) p.coef[i] = F.values[p.idx[i]];
    p.patch = Patch::build(F.grid, p.idx, gamma, force_dims);
    return p;
}

SpectralPiece padded_piece(const Field& F, int gamma) {
    F.require(Domain::frequency, "padded_piece");
    SpectralPiece p;
    p.idx.resize(F.values.size());
    p.coef.resize(F.values.size());
    for (std::size_t i = 0; i < p.idx.size(); ++i) {
        p.idx[i] = i;
        p.coef[i] = F.values[i];
    }
    std::vector<int> dims(F.grid.n, gamma * F.grid.N);
    p.patch = Patch::build(F.grid, p.idx, 1.0, dims);
    return p;
}

std::vector<SpectralPiece> sector_pieces(const Field& F, const SectorPartition& part, double gamma, bool common_dims) {
    F.require(Domain::frequency, "sector_pieces");
    if (F.grid.n != part.n()) throw ContractError("sector_pieces: dimension mismatch");
    std::vector<SpectralPiece> all(part.size());
    std::vector<std::pair<int, double>> act;
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        const cplx v = F.values[i];
        if (v == cplx(0.0, 0.0)) continue;
        part.active(F.grid.frequency(i), act);
        for (auto& [nu, c] : act) {
            all[nu].idx.push_back(i);
            all[nu].coef.push_back(v * c);
        }
    }
    std::vector<SpectralPiece> out;
    for (std::size_t nu = 0; nu < all.size(); ++nu) {
        if (all[nu].idx.empty()) continue;
        all[nu].sector = static_cast<int>(nu);
        out.push_back(std::move(all[nu]));
    }
    std::vector<int> dims;
    if (common_dims) {
        std::vector<int> w(F.grid.n, 1);
        for (auto& p : out) {
            auto pw = Patch::support_widths(F.grid, p.idx);
            for (int d = 0; d < F.grid.n; ++d) w[d] = std::max(w[d], pw[d]);
        }
        int S = 2;
        for (int d = 0; d < F.grid.n; ++d) S = std::max(S, w[d]);
        // one cubic patch size shared by every sector
        S = std::max(S, fft::next_smooth(static_cast<int>(std::ceil(gamma * S))));
        dims.assign(F.grid.n, S);
    }
    parallel_for(out.size(), [&](std::size_t j) { out[j].patch = Patch::build(F.grid, out[j].idx, gamma, dims); });
    return out;
}

void square_sums(const std::vector<SpectralPiece>& pieces, const std::vector<const cplx*>& factors, PowerSums& ps) {
    if (pieces.empty()) return;
    const std::size_t m = pieces.front().patch.size();
    for (auto& p : pieces)
        if (p.patch.dims() != pieces.front().patch.dims()) throw ContractError("square_sums: pieces need a common patch");
    std::vector<double> acc(m, 0.0);
    cplx* buf = scratch_buffer(m, 1);
    for (std::size_t j = 0; j < pieces.size(); ++j) {
        pieces[j].synthesize(factors.empty() ? nullptr : factors[j], buf);
        for (std::size_t i = 0; i < m; ++i) acc[i] += std::norm(buf[i]);
    }
    for (std::size_t i = 0; i < m; ++i) buf[i] = cplx(std::sqrt(acc[i]), 0.0);
    ps.add(buf, m);
}

}  // namespace wpl
