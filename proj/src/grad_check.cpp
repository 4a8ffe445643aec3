#include "uavdet/grad_check.hpp"

#include <cmath>

#include "uavdet/rng.hpp"

namespace uavdet::nn {

double grad_check(ParamStore& store, const std::function<double(bool)>& eval, double eps,
                  size_t max_coords_per_param, uint64_t seed) {
    eval(true);

    // Snapshot the analytic gradients before probing.
    std::map<std::string, Tensor> analytic;
    double scale = 0.0;
    for (const auto& [name, p] : store.params()) {
        analytic[name] = p.grad;
        for (double g : p.grad.data) scale = std::max(scale, std::abs(g));
    }
    // Near-zero coordinates (dead relu paths) are judged against the overall
    // gradient scale; otherwise finite-difference noise divided by a vanishing
    // gradient would dominate the report.
    const double floor = std::max(1e-2 * scale, 1e-12);

    double worst = 0.0;
    for (auto& [name, p] : store.params()) {
        const size_t n = p.value.numel();
        CounterRng rng(seed, mix64(std::hash<std::string>{}(name)) ^ 0xABCDULL);
        for (size_t pick = 0; pick < std::min(n, max_coords_per_param); ++pick) {
            const size_t i = n <= max_coords_per_param ? pick : rng.next_below(n);
            const double saved = p.value[i];
            p.value[i] = saved + eps;
            const double up = eval(false);
            p.value[i] = saved - eps;
            const double down = eval(false);
            p.value[i] = saved;

            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[name][i];
            const double denom = std::max({std::abs(a), std::abs(numeric), floor});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

} // namespace uavdet::nn
