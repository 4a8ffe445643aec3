#pragma once

#include <vector>

#include "uavdet/common.hpp"

namespace uavdet::tf {

size_t next_pow2(size_t n);

/// In-place radix-2 FFT; size must be a power of two.
void fft_inplace(std::vector<cd>& a, bool inverse);

/// Forward transform of arbitrary-size input: radix-2 when n is a power of
/// two, direct DFT otherwise. Output length == input length.
std::vector<cd> dft(const std::vector<cd>& x, bool inverse = false);

} // namespace uavdet::tf
