#include "uavdet/param_store.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "uavdet/rng.hpp"

namespace uavdet::nn {

Param& ParamStore::add(const std::string& name, std::vector<size_t> shape) {
    if (params_.count(name)) throw ParamError("ParamStore: duplicate parameter " + name);
    Param p;
    p.value = Tensor(shape);
    p.grad = Tensor(shape);
    p.m = Tensor(shape);
    p.v = Tensor(std::move(shape));
    return params_.emplace(name, std::move(p)).first->second;
}

Param& ParamStore::get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ParamError("ParamStore: unknown parameter " + name);
    return it->second;
}

const Param& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ParamError("ParamStore: unknown parameter " + name);
    return it->second;
}

void ParamStore::zero_grads() {
    for (auto& [name, p] : params_) p.grad.fill(0.0);
}

size_t ParamStore::total_values() const {
    size_t n = 0;
    for (const auto& [name, p] : params_) n += p.value.numel();
    return n;
}

void adam_step(ParamStore& store, double lr, double beta1, double beta2, double eps) {
    ++store.step_count;
    const double t = static_cast<double>(store.step_count);
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (auto& [name, p] : store.params()) {
        for (size_t i = 0; i < p.value.numel(); ++i) {
            const double g = p.grad[i];
            if (!std::isfinite(g)) {
                throw NumericError("adam_step: non-finite gradient in " + name);
            }
            p.m[i] = beta1 * p.m[i] + (1.0 - beta1) * g;
            p.v[i] = beta2 * p.v[i] + (1.0 - beta2) * g * g;
            const double m_hat = p.m[i] / bc1;
            const double v_hat = p.v[i] / bc2;
            p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

void kaiming_uniform_init(ParamStore& store, uint64_t seed) {
    for (auto& [name, p] : store.params()) {
        // Bias vectors (rank 1 named "*/b") start at zero.
        if (name.size() >= 2 && name.compare(name.size() - 2, 2, "/b") == 0) {
            p.value.fill(0.0);
            continue;
        }
        // fan_in = everything but the leading (output) dimension.
        size_t fan_in = 1;
        for (size_t d = 1; d < p.value.shape.size(); ++d) fan_in *= p.value.shape[d];
        if (p.value.shape.size() == 1) fan_in = p.value.shape[0];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        CounterRng rng(seed, mix64(std::hash<std::string>{}(name)));
        for (size_t i = 0; i < p.value.numel(); ++i) {
            p.value[i] = rng.uniform(-bound, bound);
        }
    }
}

namespace {

void put_u32(std::ofstream& out, uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

void put_u64(std::ofstream& out, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

void put_f64(std::ofstream& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

bool get_u32(std::ifstream& in, uint32_t& v) {
    char b[4];
    in.read(b, 4);
    if (!in) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return true;
}

uint64_t get_u64(std::ifstream& in) {
    char b[8];
    in.read(b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

double get_f64(std::ifstream& in) {
    const uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

constexpr char kMagic[8] = {'U', 'A', 'V', 'N', 'N', '0', '0', '1'};

} // namespace

void save_checkpoint(const std::vector<std::pair<std::string, const ParamStore*>>& groups,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path);
    out.write(kMagic, 8);
    // Records in globally sorted order to keep the bytes deterministic.
    std::map<std::string, const Param*> all;
    for (const auto& [prefix, store] : groups) {
        for (const auto& [name, p] : store->params()) all[prefix + name] = &p;
    }
    for (const auto& [name, p] : all) {
        put_u32(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<uint32_t>(p->value.shape.size()));
        for (size_t d : p->value.shape) put_u64(out, d);
        for (double v : p->value.data) put_f64(out, v);
    }
    if (!out) throw IoError("write failed: " + path);
}

void load_checkpoint(const std::vector<std::pair<std::string, ParamStore*>>& groups,
                     const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for read: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw IoError("bad checkpoint magic: " + path);

    while (true) {
        uint32_t name_len;
        if (!get_u32(in, name_len)) break; // clean EOF
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        uint32_t ndim;
        if (!get_u32(in, ndim)) throw IoError("truncated checkpoint: " + path);
        std::vector<size_t> shape(ndim);
        for (auto& d : shape) d = static_cast<size_t>(get_u64(in));

        Param* target = nullptr;
        for (const auto& [prefix, store] : groups) {
            if (name.rfind(prefix, 0) == 0 && store->has(name.substr(prefix.size()))) {
                target = &store->get(name.substr(prefix.size()));
                break;
            }
        }
        if (!target) throw IoError("checkpoint parameter not expected: " + name);
        if (target->value.shape != shape) throw IoError("checkpoint shape mismatch: " + name);
        for (double& v : target->value.data) v = get_f64(in);
        if (!in) throw IoError("truncated checkpoint: " + path);
    }
}

} // namespace uavdet::nn
