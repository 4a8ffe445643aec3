#include "uavdet/nn_ops.hpp"

#include <algorithm>
#include <cmath>

namespace uavdet::nn {

Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
    if (x.shape.size() != 3 || w.shape.size() != 4 || b.shape.size() != 1) {
        throw ParamError("conv2d: x must be [C,H,W], w [O,C,kh,kw], b [O]");
    }
    const size_t cin = x.shape[0], h = x.shape[1], wd = x.shape[2];
    const size_t cout = w.shape[0], kh = w.shape[2], kw = w.shape[3];
    if (w.shape[1] != cin || b.shape[0] != cout) throw ParamError("conv2d: channel mismatch");
    if (h < kh || wd < kw || stride < 1) throw ParamError("conv2d: kernel exceeds input");

    const size_t oh = (h - kh) / stride + 1;
    const size_t ow = (wd - kw) / stride + 1;
    Tensor y({cout, oh, ow});
    for (size_t o = 0; o < cout; ++o) {
        for (size_t r = 0; r < oh; ++r) {
            for (size_t c = 0; c < ow; ++c) {
                double acc = b[o];
                for (size_t ci = 0; ci < cin; ++ci) {
                    for (size_t i = 0; i < kh; ++i) {
                        const double* xrow = &x.data[(ci * h + r * stride + i) * wd + c * stride];
                        const double* wrow = &w.data[((o * cin + ci) * kh + i) * kw];
                        for (size_t j = 0; j < kw; ++j) acc += xrow[j] * wrow[j];
                    }
                }
                y.at(o, r, c) = acc;
            }
        }
    }
    return y;
}

void conv2d_backward(const Tensor& x, const Tensor& w, int stride, const Tensor& dy,
                     Tensor* dx, Tensor* dw, Tensor* db) {
    const size_t cin = x.shape[0], h = x.shape[1], wd = x.shape[2];
    const size_t cout = w.shape[0], kh = w.shape[2], kw = w.shape[3];
    const size_t oh = dy.shape[1], ow = dy.shape[2];
    for (size_t o = 0; o < cout; ++o) {
        for (size_t r = 0; r < oh; ++r) {
            for (size_t c = 0; c < ow; ++c) {
                const double g = dy.at(o, r, c);
                if (db) (*db)[o] += g;
                for (size_t ci = 0; ci < cin; ++ci) {
                    for (size_t i = 0; i < kh; ++i) {
                        const size_t xbase = (ci * h + r * stride + i) * wd + c * stride;
                        const size_t wbase = ((o * cin + ci) * kh + i) * kw;
                        for (size_t j = 0; j < kw; ++j) {
                            if (dw) dw->data[wbase + j] += g * x.data[xbase + j];
                            if (dx) dx->data[xbase + j] += g * w.data[wbase + j];
                        }
                    }
                }
            }
        }
    }
}

Tensor adaptive_avg_pool_forward(const Tensor& x, size_t oh, size_t ow) {
    if (x.shape.size() != 3) throw ParamError("adaptive_avg_pool: x must be [C,H,W]");
    const size_t ch = x.shape[0], h = x.shape[1], wd = x.shape[2];
    if (oh == 0 || ow == 0 || oh > h || ow > wd) {
        throw ParamError("adaptive_avg_pool: bad output dims");
    }
    Tensor y({ch, oh, ow});
    for (size_t c = 0; c < ch; ++c) {
        for (size_t r = 0; r < oh; ++r) {
            const size_t r0 = r * h / oh;
            const size_t r1 = ((r + 1) * h + oh - 1) / oh; // ceil
            for (size_t q = 0; q < ow; ++q) {
                const size_t c0 = q * wd / ow;
                const size_t c1 = ((q + 1) * wd + ow - 1) / ow;
                double acc = 0.0;
                for (size_t i = r0; i < r1; ++i) {
                    for (size_t j = c0; j < c1; ++j) acc += x.at(c, i, j);
                }
                y.at(c, r, q) = acc / (static_cast<double>(r1 - r0) * (c1 - c0));
            }
        }
    }
    return y;
}

void adaptive_avg_pool_backward(const std::vector<size_t>& x_shape, const Tensor& dy,
                                Tensor* dx) {
    const size_t ch = x_shape[0], h = x_shape[1], wd = x_shape[2];
    const size_t oh = dy.shape[1], ow = dy.shape[2];
    for (size_t c = 0; c < ch; ++c) {
        for (size_t r = 0; r < oh; ++r) {
            const size_t r0 = r * h / oh;
            const size_t r1 = ((r + 1) * h + oh - 1) / oh;
            for (size_t q = 0; q < ow; ++q) {
                const size_t c0 = q * wd / ow;
                const size_t c1 = ((q + 1) * wd + ow - 1) / ow;
                const double g = dy.at(c, r, q) / (static_cast<double>(r1 - r0) * (c1 - c0));
                for (size_t i = r0; i < r1; ++i) {
                    for (size_t j = c0; j < c1; ++j) dx->data[(c * h + i) * wd + j] += g;
                }
            }
        }
    }
}

Tensor fc_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (w.shape.size() != 2 || b.shape.size() != 1) throw ParamError("fc: w [out,in], b [out]");
    const size_t out = w.shape[0], in = w.shape[1];
    if (x.numel() != in || b.shape[0] != out) throw ParamError("fc: shape mismatch");
    Tensor y({out});
    for (size_t o = 0; o < out; ++o) {
        double acc = b[o];
        const double* wrow = &w.data[o * in];
        for (size_t i = 0; i < in; ++i) acc += wrow[i] * x[i];
        y[o] = acc;
    }
    return y;
}

void fc_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor* dx,
                 Tensor* dw, Tensor* db) {
    const size_t out = w.shape[0], in = w.shape[1];
    for (size_t o = 0; o < out; ++o) {
        const double g = dy[o];
        if (db) (*db)[o] += g;
        const double* wrow = &w.data[o * in];
        double* dwrow = dw ? &dw->data[o * in] : nullptr;
        for (size_t i = 0; i < in; ++i) {
            if (dwrow) dwrow[i] += g * x[i];
            if (dx) (*dx)[i] += g * wrow[i];
        }
    }
}

Tensor relu_forward(const Tensor& x) {
    Tensor y = x;
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    return y;
}

void relu_backward(const Tensor& x, const Tensor& dy, Tensor* dx) {
    for (size_t i = 0; i < x.numel(); ++i) {
        if (x[i] > 0.0) (*dx)[i] += dy[i];
    }
}

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw ParamError("softmax: empty input");
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> y(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        y[i] = std::exp(logits[i] - top);
        sum += y[i];
    }
    for (double& v : y) v /= sum;
    return y;
}

void softmax_backward(const std::vector<double>& y, const std::vector<double>& dy,
                      std::vector<double>* dlogits) {
    double dot = 0.0;
    for (size_t i = 0; i < y.size(); ++i) dot += y[i] * dy[i];
    for (size_t i = 0; i < y.size(); ++i) (*dlogits)[i] += y[i] * (dy[i] - dot);
}

GruWeights GruWeights::create(ParamStore& store, const std::string& prefix,
                              size_t input_dim, size_t hidden) {
    store.add(prefix + "/wz", {hidden, input_dim});
    store.add(prefix + "/uz", {hidden, hidden});
    store.add(prefix + "/bz", {hidden});
    store.add(prefix + "/wr", {hidden, input_dim});
    store.add(prefix + "/ur", {hidden, hidden});
    store.add(prefix + "/br", {hidden});
    store.add(prefix + "/wh", {hidden, input_dim});
    store.add(prefix + "/uh", {hidden, hidden});
    store.add(prefix + "/bh", {hidden});
    return view(store, prefix, input_dim, hidden);
}

GruWeights GruWeights::view(ParamStore& store, const std::string& prefix,
                            size_t input_dim, size_t hidden) {
    GruWeights w;
    w.input_dim = input_dim;
    w.hidden = hidden;
    w.wz = &store.get(prefix + "/wz");
    w.uz = &store.get(prefix + "/uz");
    w.bz = &store.get(prefix + "/bz");
    w.wr = &store.get(prefix + "/wr");
    w.ur = &store.get(prefix + "/ur");
    w.br = &store.get(prefix + "/br");
    w.wh = &store.get(prefix + "/wh");
    w.uh = &store.get(prefix + "/uh");
    w.bh = &store.get(prefix + "/bh");
    return w;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y += W x + b over flat row-major W [rows, cols].
void gemv_add(const Tensor& w, const std::vector<double>& x, const double* b,
              std::vector<double>& y) {
    const size_t rows = w.shape[0], cols = w.shape[1];
    for (size_t r = 0; r < rows; ++r) {
        double acc = b ? b[r] : 0.0;
        const double* wrow = &w.data[r * cols];
        for (size_t c = 0; c < cols; ++c) acc += wrow[c] * x[c];
        y[r] += acc;
    }
}

// y += W^T g
void gemv_t_add(const Tensor& w, const std::vector<double>& g, std::vector<double>& y) {
    const size_t rows = w.shape[0], cols = w.shape[1];
    for (size_t r = 0; r < rows; ++r) {
        const double* wrow = &w.data[r * cols];
        for (size_t c = 0; c < cols; ++c) y[c] += wrow[c] * g[r];
    }
}

// dW += g x^T
void outer_add(Tensor& dw, const std::vector<double>& g, const std::vector<double>& x) {
    const size_t rows = dw.shape[0], cols = dw.shape[1];
    for (size_t r = 0; r < rows; ++r) {
        double* row = &dw.data[r * cols];
        for (size_t c = 0; c < cols; ++c) row[c] += g[r] * x[c];
    }
}

} // namespace

std::vector<double> gru_forward(const GruWeights& w,
                                const std::vector<std::vector<double>>& seq,
                                GruCache* cache) {
    if (seq.empty()) throw ParamError("gru_forward: empty sequence");
    const size_t hidden = w.hidden;
    std::vector<double> h(hidden, 0.0);
    if (cache) cache->clear();

    for (const auto& x : seq) {
        if (x.size() != w.input_dim) throw ParamError("gru_forward: input dim mismatch");
        std::vector<double> z(hidden, 0.0), r(hidden, 0.0), n(hidden, 0.0), rh(hidden);
        gemv_add(w.wz->value, x, w.bz->value.data.data(), z);
        gemv_add(w.uz->value, h, nullptr, z);
        gemv_add(w.wr->value, x, w.br->value.data.data(), r);
        gemv_add(w.ur->value, h, nullptr, r);
        for (size_t i = 0; i < hidden; ++i) {
            z[i] = sigmoid(z[i]);
            r[i] = sigmoid(r[i]);
        }
        for (size_t i = 0; i < hidden; ++i) rh[i] = r[i] * h[i];
        gemv_add(w.wh->value, x, w.bh->value.data.data(), n);
        gemv_add(w.uh->value, rh, nullptr, n);
        for (size_t i = 0; i < hidden; ++i) n[i] = std::tanh(n[i]);

        if (cache) cache->push_back({x, h, z, r, n});
        for (size_t i = 0; i < hidden; ++i) h[i] = (1.0 - z[i]) * h[i] + z[i] * n[i];
    }
    return h;
}

std::vector<std::vector<double>> gru_backward(const GruWeights& w, const GruCache& cache,
                                              const std::vector<double>& dh_final) {
    const size_t hidden = w.hidden;
    std::vector<std::vector<double>> dseq(cache.size(), std::vector<double>(w.input_dim, 0.0));
    std::vector<double> dh = dh_final;
    std::vector<double> dz(hidden), dn(hidden), dr(hidden), drh(hidden), dh_prev(hidden);

    for (size_t t = cache.size(); t-- > 0;) {
        const auto& st = cache[t];
        for (size_t i = 0; i < hidden; ++i) {
            dz[i] = dh[i] * (st.n[i] - st.h_prev[i]);
            dn[i] = dh[i] * st.z[i];
            dh_prev[i] = dh[i] * (1.0 - st.z[i]);
        }
        // tanh and sigmoid pre-activations
        for (size_t i = 0; i < hidden; ++i) dn[i] *= 1.0 - st.n[i] * st.n[i];
        std::fill(drh.begin(), drh.end(), 0.0);
        gemv_t_add(w.uh->value, dn, drh);
        for (size_t i = 0; i < hidden; ++i) {
            dr[i] = drh[i] * st.h_prev[i] * st.r[i] * (1.0 - st.r[i]);
            dh_prev[i] += drh[i] * st.r[i];
            dz[i] *= st.z[i] * (1.0 - st.z[i]);
        }

        std::vector<double> rh(hidden);
        for (size_t i = 0; i < hidden; ++i) rh[i] = st.r[i] * st.h_prev[i];

        outer_add(w.wh->grad, dn, st.x);
        outer_add(w.uh->grad, dn, rh);
        outer_add(w.wr->grad, dr, st.x);
        outer_add(w.ur->grad, dr, st.h_prev);
        outer_add(w.wz->grad, dz, st.x);
        outer_add(w.uz->grad, dz, st.h_prev);
        for (size_t i = 0; i < hidden; ++i) {
            w.bh->grad[i] += dn[i];
            w.br->grad[i] += dr[i];
            w.bz->grad[i] += dz[i];
        }

        gemv_t_add(w.uz->value, dz, dh_prev);
        gemv_t_add(w.ur->value, dr, dh_prev);
        gemv_t_add(w.wz->value, dz, dseq[t]);
        gemv_t_add(w.wr->value, dr, dseq[t]);
        gemv_t_add(w.wh->value, dn, dseq[t]);

        dh = dh_prev;
    }
    return dseq;
}

} // namespace uavdet::nn
