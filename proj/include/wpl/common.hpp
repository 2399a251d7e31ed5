#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <new>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpl {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 4;
using Vec = std::array<double, kMaxDim>;

inline constexpr double kPi = std::numbers::pi;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// wrong domain tag, bad carrier usage
struct ContractError : Error { using Error::Error; };
// out-of-range argument
struct ParameterError : Error { using Error::Error; };
// symbol produced inf/nan
struct EvaluationError : Error { using Error::Error; };
// quadrature / convergence trouble
struct NumericalError : Error { using Error::Error; };
// input does not satisfy a support hypothesis
struct PreconditionError : Error { using Error::Error; };
// a built object fails its own invariants
struct ConstructionError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct UnsupportedError : Error { using Error::Error; };

template <class T, std::size_t Align = 64>
struct AlignedAllocator {
    using value_type = T;
    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U, Align>&) {}
    template <class U>
    struct rebind { using other = AlignedAllocator<U, Align>; };

    T* allocate(std::size_t n) {
        std::size_t bytes = ((n * sizeof(T) + Align - 1) / Align) * Align;
        if (bytes == 0) bytes = Align;
        void* p = std::aligned_alloc(Align, bytes);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { std::free(p); }
    bool operator==(const AlignedAllocator&) const { return true; }
    bool operator!=(const AlignedAllocator&) const { return false; }
};

using CVec = std::vector<cplx, AlignedAllocator<cplx>>;

inline double dot(const Vec& a, const Vec& b, int n) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}
inline double norm(const Vec& a, int n) { return std::sqrt(dot(a, a, n)); }

}  // namespace wpl
