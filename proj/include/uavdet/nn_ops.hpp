#pragma once

#include <string>
#include <vector>

#include "uavdet/param_store.hpp"
#include "uavdet/tensor.hpp"

namespace uavdet::nn {

// Layer primitives with explicit forward/backward pairs. Backward functions
// accumulate (+=) into any non-null output so batch loops can reuse them.

/// Valid cross-correlation, no padding. x [Cin,H,W], w [Cout,Cin,kh,kw],
/// b [Cout] -> y [Cout, (H-kh)/stride+1, (W-kw)/stride+1].
Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride);
void conv2d_backward(const Tensor& x, const Tensor& w, int stride, const Tensor& dy,
                     Tensor* dx, Tensor* dw, Tensor* db);

/// Near-equal region mean pool to (oh, ow). Region r covers rows
/// [floor(r*H/oh), ceil((r+1)*H/oh)), so regions overlap when H % oh != 0;
/// that boundary convention is frozen here and in backward.
Tensor adaptive_avg_pool_forward(const Tensor& x, size_t oh, size_t ow);
void adaptive_avg_pool_backward(const std::vector<size_t>& x_shape, const Tensor& dy,
                                Tensor* dx);

/// y = W x + b with x flattened; w [out,in], b [out].
Tensor fc_forward(const Tensor& x, const Tensor& w, const Tensor& b);
void fc_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor* dx,
                 Tensor* dw, Tensor* db);

Tensor relu_forward(const Tensor& x);
void relu_backward(const Tensor& x, const Tensor& dy, Tensor* dx);

/// Max-subtracted exponential normalization.
std::vector<double> softmax(const std::vector<double>& logits);
void softmax_backward(const std::vector<double>& y, const std::vector<double>& dy,
                      std::vector<double>* dlogits);

/// GRU cell parameters viewed inside a ParamStore. Gates follow the canonical
/// formulation: z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br),
/// n = tanh(Wh x + Uh (r*h) + bh), h' = (1-z)*h + z*n.
struct GruWeights {
    size_t input_dim = 0, hidden = 0;
    Param *wz, *uz, *bz, *wr, *ur, *br, *wh, *uh, *bh;

    static GruWeights create(ParamStore& store, const std::string& prefix,
                             size_t input_dim, size_t hidden);
    static GruWeights view(ParamStore& store, const std::string& prefix,
                           size_t input_dim, size_t hidden);
};

struct GruStepCache {
    std::vector<double> x, h_prev, z, r, n;
};
using GruCache = std::vector<GruStepCache>;

/// Runs the cell over the sequence from zero state; returns the final hidden
/// state. Pass a cache to enable backward.
std::vector<double> gru_forward(const GruWeights& w,
                                const std::vector<std::vector<double>>& seq,
                                GruCache* cache = nullptr);

/// Backpropagation through time from the gradient of the final hidden state.
/// Accumulates parameter gradients; returns gradients w.r.t. the inputs.
std::vector<std::vector<double>> gru_backward(const GruWeights& w, const GruCache& cache,
                                              const std::vector<double>& dh_final);

} // namespace uavdet::nn
