#include "uavdet/tf_image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

namespace uavdet::tf {

namespace {

constexpr char kMagic[8] = {'U', 'A', 'V', 'T', 'F', '0', '0', '1'};
constexpr size_t kHeaderSize = 32;

void put_u32(char* dst, uint32_t v) {
    for (int i = 0; i < 4; ++i) dst[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
}

uint32_t get_u32(const char* src) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(src[i])) << (8 * i);
    return v;
}

void put_f64(char* dst, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) dst[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
}

double get_f64(const char* src) {
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(static_cast<unsigned char>(src[i])) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_values(std::ofstream& out, const double* vals, size_t n, const std::string& path) {
    std::vector<char> buf(n * 4);
    for (size_t i = 0; i < n; ++i) {
        const float f = static_cast<float>(vals[i]);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(buf.data() + i * 4, bits);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + path);
}

struct Header {
    int rows, cols;
    double time_step, freq_step;
};

Header read_header(std::ifstream& in, const std::string& path) {
    std::array<char, kHeaderSize> h{};
    in.read(h.data(), kHeaderSize);
    if (!in || std::memcmp(h.data(), kMagic, 8) != 0) throw IoError("bad TF magic: " + path);
    Header out{static_cast<int>(get_u32(h.data() + 8)), static_cast<int>(get_u32(h.data() + 12)),
               get_f64(h.data() + 16), get_f64(h.data() + 24)};
    if (out.rows <= 0 || out.cols <= 0) throw IoError("bad TF dims: " + path);
    return out;
}

void write_header(std::ofstream& out, int rows, int cols, double dt, double df,
                  const std::string& path) {
    std::array<char, kHeaderSize> h{};
    std::memcpy(h.data(), kMagic, 8);
    put_u32(h.data() + 8, static_cast<uint32_t>(rows));
    put_u32(h.data() + 12, static_cast<uint32_t>(cols));
    put_f64(h.data() + 16, dt);
    put_f64(h.data() + 24, df);
    out.write(h.data(), kHeaderSize);
    if (!out) throw IoError("write failed: " + path);
}

std::vector<float> read_values(std::ifstream& in, size_t n, const std::string& path) {
    std::vector<char> buf(n * 4);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!in) throw IoError("truncated TF image: " + path);
    std::vector<float> vals(n);
    for (size_t i = 0; i < n; ++i) {
        const uint32_t bits = get_u32(buf.data() + i * 4);
        std::memcpy(&vals[i], &bits, 4);
    }
    return vals;
}

// Shared box-overlap resampler; `get` fetches a source pixel as double.
template <typename Get>
void area_resample(int in_rows, int in_cols, int out_rows, int out_cols, const Get& get,
                   std::vector<double>& out) {
    const double rscale = static_cast<double>(in_rows) / out_rows;
    const double cscale = static_cast<double>(in_cols) / out_cols;
    for (int r = 0; r < out_rows; ++r) {
        const double r0 = r * rscale, r1 = (r + 1) * rscale;
        const int ri0 = static_cast<int>(std::floor(r0));
        const int ri1 = std::min(in_rows, static_cast<int>(std::ceil(r1)));
        for (int c = 0; c < out_cols; ++c) {
            const double c0 = c * cscale, c1 = (c + 1) * cscale;
            const int ci0 = static_cast<int>(std::floor(c0));
            const int ci1 = std::min(in_cols, static_cast<int>(std::ceil(c1)));
            double acc = 0.0, area = 0.0;
            for (int ri = ri0; ri < ri1; ++ri) {
                const double rw = std::min<double>(ri + 1, r1) - std::max<double>(ri, r0);
                for (int ci = ci0; ci < ci1; ++ci) {
                    const double cw = std::min<double>(ci + 1, c1) - std::max<double>(ci, c0);
                    acc += rw * cw * get(ri, ci);
                    area += rw * cw;
                }
            }
            out[static_cast<size_t>(r) * out_cols + c] = area > 0.0 ? acc / area : 0.0;
        }
    }
}

} // namespace

void save_tf_image(const TFImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path);
    write_header(out, img.rows, img.cols, img.time_step, img.freq_step, path);
    write_values(out, img.values.data(), img.values.size(), path);
}

TFImage load_tf_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for read: " + path);
    const Header h = read_header(in, path);
    TFImage img(h.rows, h.cols, h.time_step, h.freq_step);
    const auto vals = read_values(in, img.values.size(), path);
    for (size_t i = 0; i < vals.size(); ++i) img.values[i] = vals[i];
    return img;
}

void save_binary_image(const BinaryImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path);
    write_header(out, img.rows, img.cols, img.time_step, img.freq_step, path);
    std::vector<double> vals(img.bits.size());
    for (size_t i = 0; i < vals.size(); ++i) vals[i] = img.bits[i] ? 1.0 : 0.0;
    write_values(out, vals.data(), vals.size(), path);
}

BinaryImage load_binary_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for read: " + path);
    const Header h = read_header(in, path);
    BinaryImage img(h.rows, h.cols, h.time_step, h.freq_step);
    const auto vals = read_values(in, img.bits.size(), path);
    for (size_t i = 0; i < vals.size(); ++i) img.bits[i] = vals[i] >= 0.5 ? 1 : 0;
    return img;
}

void save_pgm(const TFImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path);
    double lo = img.values.empty() ? 0.0 : img.values[0];
    double hi = lo;
    for (double v : img.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    out << "P5\n" << img.cols << " " << img.rows << "\n255\n";
    std::vector<unsigned char> row(img.cols);
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            row[c] = static_cast<unsigned char>(
                std::lround(255.0 * (img.at(r, c) - lo) / span));
        }
        out.write(reinterpret_cast<const char*>(row.data()), img.cols);
    }
    if (!out) throw IoError("write failed: " + path);
}

TFImage resize(const TFImage& img, int out_rows, int out_cols) {
    if (out_rows <= 0 || out_cols <= 0) throw ParamError("resize: output dims must be positive");
    TFImage out(out_rows, out_cols,
                img.time_step * img.rows / out_rows,
                img.freq_step * img.cols / out_cols);
    out.freq_origin = img.freq_origin;
    if (out_rows == img.rows && out_cols == img.cols) {
        out.values = img.values;
        return out;
    }
    area_resample(img.rows, img.cols, out_rows, out_cols,
                  [&](int r, int c) { return img.at(r, c); }, out.values);
    return out;
}

BinaryImage resize(const BinaryImage& img, int out_rows, int out_cols) {
    if (out_rows <= 0 || out_cols <= 0) throw ParamError("resize: output dims must be positive");
    BinaryImage out(out_rows, out_cols,
                    img.time_step * img.rows / out_rows,
                    img.freq_step * img.cols / out_cols);
    if (out_rows == img.rows && out_cols == img.cols) {
        out.bits = img.bits;
        return out;
    }
    std::vector<double> mean(static_cast<size_t>(out_rows) * out_cols);
    area_resample(img.rows, img.cols, out_rows, out_cols,
                  [&](int r, int c) { return img.at(r, c) ? 1.0 : 0.0; }, mean);
    for (size_t i = 0; i < mean.size(); ++i) out.bits[i] = mean[i] >= 0.5 ? 1 : 0;
    return out;
}

} // namespace uavdet::tf
