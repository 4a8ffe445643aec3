#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "uavdet/common.hpp"

namespace uavdet::nn {

/// Dense row-major n-d array of doubles. Training runs in 64-bit throughout;
/// finite-difference checks need the headroom.
struct Tensor {
    std::vector<size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), 0.0);
    }
    Tensor(std::vector<size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != numel_of(shape)) throw ParamError("Tensor: data/shape mismatch");
    }

    static size_t numel_of(const std::vector<size_t>& s) {
        size_t n = 1;
        for (size_t d : s) n *= d;
        return n;
    }

    size_t numel() const { return data.size(); }

    double& operator[](size_t i) { return data[i]; }
    double operator[](size_t i) const { return data[i]; }

    // 3-d accessor [c][h][w]
    double& at(size_t c, size_t h, size_t w) {
        return data[(c * shape[1] + h) * shape[2] + w];
    }
    double at(size_t c, size_t h, size_t w) const {
        return data[(c * shape[1] + h) * shape[2] + w];
    }
    // 2-d accessor [r][c]
    double& at(size_t r, size_t c) { return data[r * shape[1] + c]; }
    double at(size_t r, size_t c) const { return data[r * shape[1] + c]; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

} // namespace uavdet::nn
