#include "wpl/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace wpl::fft {

namespace {

struct PlanCache {
    std::mutex mu;
    std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;
    ~PlanCache() {
        for (auto& [k, p] : plans) fftw_destroy_plan(p);
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

fftw_plan get_plan(const std::vector<int>& dims, int sign) {
    auto& c = cache();
    std::lock_guard<std::mutex> lk(c.mu);
    auto key = std::make_pair(dims, sign);
    auto it = c.plans.find(key);
    if (it != c.plans.end()) return it->second;
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    CVec scratch(total);
    // ESTIMATE keeps the plan (and so the arithmetic) independent of timing
    fftw_plan p = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(),
                                reinterpret_cast<fftw_complex*>(scratch.data()),
                                reinterpret_cast<fftw_complex*>(scratch.data()),
                                sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!p) throw NumericalError("fftw planner failed");
    c.plans.emplace(key, p);
    return p;
}

}  // namespace

void transform(cplx* data, const std::vector<int>& dims, int sign) {
    fftw_plan p = get_plan(dims, sign);
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, d, d);
}

int next_smooth(int n) {
    if (n <= 1) return 1;
    for (int m = n;; ++m) {
        int r = m;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

std::size_t cached_plans() {
    auto& c = cache();
    std::lock_guard<std::mutex> lk(c.mu);
    return c.plans.size();
}

}  // namespace wpl::fft
