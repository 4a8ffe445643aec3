#include "uavdet/fft.hpp"

#include <cmath>

namespace uavdet::tf {

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_inplace(std::vector<cd>& a, bool inverse) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw ParamError("fft_inplace: size must be a power of two");

    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const cd wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const cd u = a[i + k];
                const cd v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (cd& v : a) v /= static_cast<double>(n);
    }
}

std::vector<cd> dft(const std::vector<cd>& x, bool inverse) {
    const size_t n = x.size();
    if (n == 0) throw ParamError("dft: empty input");
    if ((n & (n - 1)) == 0) {
        std::vector<cd> a = x;
        fft_inplace(a, inverse);
        return a;
    }
    std::vector<cd> out(n);
    const double sign = inverse ? 2.0 : -2.0;
    for (size_t k = 0; k < n; ++k) {
        cd acc(0.0, 0.0);
        for (size_t i = 0; i < n; ++i) {
            const double ang = sign * kPi * static_cast<double>((k * i) % n) / static_cast<double>(n);
            acc += x[i] * cd(std::cos(ang), std::sin(ang));
        }
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

} // namespace uavdet::tf
