#include "uavdet/losses.hpp"

#include <cmath>

namespace uavdet::nn {

double supcon_loss(const std::vector<std::vector<double>>& z, const std::vector<int>& labels,
                   double tau, std::vector<std::vector<double>>* dz) {
    const size_t n = z.size();
    if (n < 2 || labels.size() != n) throw ParamError("supcon_loss: need >= 2 labeled rows");
    if (!(tau > 0.0)) throw ParamError("supcon_loss: tau must be > 0");
    const size_t dim = z[0].size();

    std::vector<size_t> positives(n, 0);
    for (size_t i = 0; i < n; ++i) {
        if (z[i].size() != dim) throw ParamError("supcon_loss: ragged embeddings");
        for (size_t j = 0; j < n; ++j) {
            if (j != i && labels[j] == labels[i]) ++positives[i];
        }
    }
    for (size_t i = 0; i < n; ++i) {
        if (positives[i] == 0) {
            throw ParamError("supcon_loss: label " + std::to_string(labels[i]) +
                             " has a single member; positive set undefined");
        }
    }

    std::vector<double> norms(n);
    for (size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (double v : z[i]) s += v * v;
        norms[i] = std::sqrt(s);
        if (norms[i] < 1e-12) throw ParamError("supcon_loss: zero-norm embedding");
    }

    // Cosine similarities.
    std::vector<double> sim(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double dot = 0.0;
            for (size_t d = 0; d < dim; ++d) dot += z[i][d] * z[j][d];
            sim[i * n + j] = sim[j * n + i] = dot / (norms[i] * norms[j]);
        }
    }

    std::vector<double> denom(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t k = 0; k < n; ++k) {
            if (k != i) denom[i] += std::exp(sim[i * n + k] / tau);
        }
    }

    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double pos_sum = 0.0;
        for (size_t j = 0; j < n; ++j) {
            if (j != i && labels[j] == labels[i]) pos_sum += sim[i * n + j] / tau;
        }
        loss += -pos_sum / static_cast<double>(positives[i]) + std::log(denom[i]);
    }

    if (dz) {
        dz->assign(n, std::vector<double>(dim, 0.0));
        // g[i*n+k] = dL/ds_ik restricted to the L_i term (ordered pair).
        std::vector<double> g(n * n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            for (size_t k = 0; k < n; ++k) {
                if (k == i) continue;
                double v = std::exp(sim[i * n + k] / tau) / denom[i];
                if (labels[k] == labels[i]) v -= 1.0 / static_cast<double>(positives[i]);
                g[i * n + k] = v / tau;
            }
        }
        // ds_ik/dz_i = (z_k/|z_k| - s_ik z_i/|z_i|) / |z_i|
        for (size_t i = 0; i < n; ++i) {
            for (size_t k = 0; k < n; ++k) {
                if (k == i) continue;
                const double coeff = g[i * n + k] + g[k * n + i];
                const double s = sim[i * n + k];
                for (size_t d = 0; d < dim; ++d) {
                    (*dz)[i][d] += coeff * (z[k][d] / norms[k] - s * z[i][d] / norms[i]) / norms[i];
                }
            }
        }
    }
    return loss;
}

double recon_loss(const std::vector<std::vector<double>>& target,
                  const std::vector<std::vector<double>>& recon,
                  std::vector<std::vector<double>>* d_recon) {
    if (target.empty() || target.size() != recon.size()) {
        throw ParamError("recon_loss: batch size mismatch");
    }
    const size_t batch = target.size();
    if (d_recon) d_recon->assign(batch, {});

    double loss = 0.0;
    for (size_t b = 0; b < batch; ++b) {
        if (target[b].size() != recon[b].size()) throw ParamError("recon_loss: shape mismatch");
        double sq = 0.0;
        for (size_t i = 0; i < target[b].size(); ++i) {
            const double d = target[b][i] - recon[b][i];
            sq += d * d;
        }
        const double norm = std::sqrt(sq);
        loss += norm;
        if (d_recon) {
            auto& g = (*d_recon)[b];
            g.assign(target[b].size(), 0.0);
            if (norm > 1e-15) {
                for (size_t i = 0; i < target[b].size(); ++i) {
                    g[i] = (recon[b][i] - target[b][i]) / (norm * static_cast<double>(batch));
                }
            }
        }
    }
    return loss / static_cast<double>(batch);
}

double cross_entropy(const std::vector<double>& p, const std::vector<double>& q,
                     std::vector<double>* dp) {
    if (p.empty() || p.size() != q.size()) throw ParamError("cross_entropy: shape mismatch");
    double sum = 0.0;
    for (double v : p) sum += v;
    if (std::abs(sum - 1.0) > 1e-6) throw ParamError("cross_entropy: p does not sum to 1");

    constexpr double kClip = 1e-12;
    double loss = 0.0;
    if (dp) dp->assign(p.size(), 0.0);
    for (size_t i = 0; i < p.size(); ++i) {
        const double pc = std::max(p[i], kClip);
        loss -= q[i] * std::log(pc);
        if (dp && p[i] > kClip) (*dp)[i] = -q[i] / pc;
    }
    return loss;
}

} // namespace uavdet::nn
