#include "uavdet/pulse_train.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace uavdet::sim {

namespace {

constexpr char kMagic[8] = {'U', 'A', 'V', 'P', 'T', '0', '0', '1'};
constexpr size_t kHeaderSize = 64;

void put_u64(char* dst, uint64_t v) {
    for (int i = 0; i < 8; ++i) dst[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
}

uint64_t get_u64(const char* src) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(src[i])) << (8 * i);
    return v;
}

void put_f64(char* dst, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(dst, bits);
}

double get_f64(const char* src) {
    const uint64_t bits = get_u64(src);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void put_f32(char* dst, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    for (int i = 0; i < 4; ++i) dst[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
}

float get_f32(const char* src) {
    uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<uint32_t>(static_cast<unsigned char>(src[i])) << (8 * i);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace

void save_pulse_train(const PulseTrain& train, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path);

    std::array<char, kHeaderSize> header{};
    std::memcpy(header.data(), kMagic, 8);
    put_u64(header.data() + 8, static_cast<uint64_t>(train.fast_time_bins));
    put_u64(header.data() + 16, static_cast<uint64_t>(train.num_pulses));
    put_f64(header.data() + 24, train.fast_time_step);
    put_f64(header.data() + 32, train.pri);
    put_f64(header.data() + 40, train.origin_time);
    out.write(header.data(), kHeaderSize);

    // Row-major [fast_time x pulse] on disk; memory is pulse-major.
    std::vector<char> row(static_cast<size_t>(train.num_pulses) * 8);
    for (int ft = 0; ft < train.fast_time_bins; ++ft) {
        for (int p = 0; p < train.num_pulses; ++p) {
            const cd v = train.at(ft, p);
            put_f32(row.data() + static_cast<size_t>(p) * 8, static_cast<float>(v.real()));
            put_f32(row.data() + static_cast<size_t>(p) * 8 + 4, static_cast<float>(v.imag()));
        }
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("write failed: " + path);
}

PulseTrain load_pulse_train(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for read: " + path);

    std::array<char, kHeaderSize> header{};
    in.read(header.data(), kHeaderSize);
    if (!in || std::memcmp(header.data(), kMagic, 8) != 0) {
        throw IoError("bad pulse train magic: " + path);
    }
    const auto fast = static_cast<int>(get_u64(header.data() + 8));
    const auto pulses = static_cast<int>(get_u64(header.data() + 16));
    if (fast <= 0 || pulses <= 0) throw IoError("bad pulse train dims: " + path);

    PulseTrain train(fast, pulses, get_f64(header.data() + 24), get_f64(header.data() + 32),
                     get_f64(header.data() + 40));
    std::vector<char> row(static_cast<size_t>(pulses) * 8);
    for (int ft = 0; ft < fast; ++ft) {
        in.read(row.data(), static_cast<std::streamsize>(row.size()));
        if (!in) throw IoError("truncated pulse train: " + path);
        for (int p = 0; p < pulses; ++p) {
            train.at(ft, p) = cd(get_f32(row.data() + static_cast<size_t>(p) * 8),
                                 get_f32(row.data() + static_cast<size_t>(p) * 8 + 4));
        }
    }
    return train;
}

} // namespace uavdet::sim
