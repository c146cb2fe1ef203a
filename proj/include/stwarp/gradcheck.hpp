#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace stwarp {

struct GradCheckResult {
    double maxRelError = 0.0;
    size_t worstIndex = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

/// Central finite-difference check of an analytic gradient. `loss` must
/// re-evaluate the scalar objective from the current contents of `params`;
/// each parameter is perturbed by +-h in turn. Double precision only.
inline GradCheckResult gradCheck(const std::function<double()>& loss, std::span<double> params,
                                 std::span<const double> analyticGrad, double h = 1e-5) {
    GradCheckResult res;
    for (size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const double up = loss();
        params[i] = saved - h;
        const double down = loss();
        params[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = analyticGrad[i];
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
        const double rel = std::abs(numeric - analytic) / denom;
        if (rel > res.maxRelError) {
            res.maxRelError = rel;
            res.worstIndex = i;
            res.analytic = analytic;
            res.numeric = numeric;
        }
    }
    return res;
}

}  // namespace stwarp
