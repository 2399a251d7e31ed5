#pragma once

#include <vector>

#include "wpl/common.hpp"

namespace wpl::fft {

// Unnormalized in-place DFT over a row-major array (last axis fastest).
// sign = -1: sum_x f(x) e^{-i...}, sign = +1: sum_k F(k) e^{+i...}.
// data must come from AlignedAllocator (64-byte aligned).
void transform(cplx* data, const std::vector<int>& dims, int sign);

// smallest m >= n whose only prime factors are 2,3,5,7
int next_smooth(int n);

std::size_t cached_plans();

}  // namespace wpl::fft
