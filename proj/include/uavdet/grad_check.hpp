#pragma once

#include <functional>

#include "uavdet/param_store.hpp"

namespace uavdet::nn {

/// Central finite differences against the analytic backward pass.
///
/// `eval(true)` must zero gradients, run forward + backward, and return the
/// loss; `eval(false)` must return the loss without touching gradients. Every
/// coordinate is checked, or a seeded random subset of max_coords_per_param
/// for larger tensors. Returns the worst relative error
/// |analytic - numeric| / max(|analytic|, |numeric|), absolute when both are
/// tiny.
double grad_check(ParamStore& store, const std::function<double(bool)>& eval,
                  double eps = 1e-4, size_t max_coords_per_param = 200,
                  uint64_t seed = 0);

} // namespace uavdet::nn
