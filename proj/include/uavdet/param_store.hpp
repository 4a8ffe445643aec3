#pragma once

#include <map>
#include <string>
#include <vector>

#include "uavdet/tensor.hpp"

namespace uavdet::nn {

/// One trainable tensor with its gradient and Adam moments.
struct Param {
    Tensor value;
    Tensor grad;
    Tensor m; // first moment
    Tensor v; // second moment
};

/// Named parameters with deterministic (name-sorted) iteration order.
class ParamStore {
public:
    Param& add(const std::string& name, std::vector<size_t> shape);
    Param& get(const std::string& name);
    const Param& get(const std::string& name) const;
    bool has(const std::string& name) const { return params_.count(name) > 0; }

    void zero_grads();
    size_t total_values() const;

    std::map<std::string, Param>& params() { return params_; }
    const std::map<std::string, Param>& params() const { return params_; }

    int64_t step_count = 0;

private:
    std::map<std::string, Param> params_;
};

/// Bias-corrected Adam update over every parameter in the store. Throws
/// NumericError naming the parameter on a non-finite gradient.
void adam_step(ParamStore& store, double lr = 4e-4, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

/// Kaiming-style uniform init, U(-sqrt(6/fan_in), +sqrt(6/fan_in)), seeded and
/// keyed by parameter name so registration order does not matter.
void kaiming_uniform_init(ParamStore& store, uint64_t seed);

// Checkpoint layout (little endian), documented for cross-implementation reload:
//   bytes 0..7  magic "UAVNN001"
//   then per parameter, in name-sorted order:
//     u32  name length, then that many name bytes
//     u32  ndim, then ndim u64 dims
//     numel f64 values
// Only values are persisted (not gradients or moments).
void save_checkpoint(const std::vector<std::pair<std::string, const ParamStore*>>& groups,
                     const std::string& path);
void load_checkpoint(const std::vector<std::pair<std::string, ParamStore*>>& groups,
                     const std::string& path);

} // namespace uavdet::nn
