#pragma once

#include <vector>

#include "uavdet/common.hpp"

namespace uavdet::nn {

/// Supervised contrastive loss over a batch of embeddings (rows of z, usually
/// 2N of them), summed across anchors:
///   L_i = -(1/|P(i)|) sum_{j in P(i)} log( exp(s_ij/tau) / sum_{k != i} exp(s_ik/tau) )
/// with P(i) the same-label rows and s the cosine similarity. Inputs are
/// expected unit-norm; cosine is computed exactly so slightly off-sphere
/// inputs (finite-difference probes) stay well-defined.
/// Throws if any label has a single member or tau <= 0.
double supcon_loss(const std::vector<std::vector<double>>& z, const std::vector<int>& labels,
                   double tau, std::vector<std::vector<double>>* dz = nullptr);

/// Mean over the batch of the Euclidean norm of the flattened difference.
double recon_loss(const std::vector<std::vector<double>>& target,
                  const std::vector<std::vector<double>>& recon,
                  std::vector<std::vector<double>>* d_recon = nullptr);

/// -sum q_i log(max(p_i, 1e-12)); p must sum to 1 within 1e-6.
double cross_entropy(const std::vector<double>& p, const std::vector<double>& q,
                     std::vector<double>* dp = nullptr);

} // namespace uavdet::nn
