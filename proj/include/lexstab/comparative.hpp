// include/lexstab/comparative.hpp
//
// Brownian-motion trait evolution on a tree and the D statistic of
// phylogenetic signal for a binary trait.
//
// All per-tip vectors are indexed by Tree::tips() order; per-node vectors by NodeId.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lexstab/random.hpp"
#include "lexstab/tree.hpp"

namespace lexstab {

struct BmParams {
  double sigma2 = 1.0;  // variance per unit branch length, > 0
  double root_value = 0.0;
  std::uint64_t seed = 0;
};

/// Values at every node. Node i draws its increment from the standard normal
/// at counter i of stream (seed, domain, replicate), scaled by sqrt(sigma2 * length).
/// Throws DomainError for a non-positive or non-finite sigma2.
std::vector<double> simulate_bm(const Tree& tree, const BmParams& params, std::uint32_t replicate = 0,
                                StreamDomain domain = StreamDomain::simulate);

/// Picks the tip entries out of a per-node vector.
std::vector<double> tip_values(const Tree& tree, std::span<const double> node_values);

/// Weighted-mean ancestral estimates, one pass in postorder. Each internal node
/// gets sum(w_c * x_c) / sum(w_c) over its children with w_c = 1 / length(c);
/// zero lengths use Tree::zero_length_floor(). Returns a per-node vector
/// (tips carry their own values).
std::vector<double> nodal_estimates(const Tree& tree, std::span<const double> tips);

/// BM rate from standardized independent contrasts (mean squared contrast).
/// Polytomies are resolved at random from `seed` with zero-length branches;
/// unary nodes are passed through. Throws DomainError("zero variance") for constant tips.
double estimate_sigma2(const Tree& tree, std::span<const double> tips, std::uint64_t seed = 0);

/// Sum over every non-root node of |estimate(node) - estimate(parent)|, with
/// nodal_estimates computed on the 0/1 tip values. Edge terms are accumulated
/// in postorder. A trait whose first tip is 1 is scored as its complement
/// (same value in exact arithmetic), so d_sum(v) == d_sum(1 - v) bitwise.
/// Throws DomainError for a constant trait.
double d_sum(const Tree& tree, std::span<const std::uint8_t> tips);

/// Sets the `m` largest values to 1; ties straddling the cut are broken
/// uniformly at random. Throws DomainError unless 1 <= m < values.size().
std::vector<std::uint8_t> threshold_at_prevalence(std::span<const double> values, std::size_t m, RandomStream& rng);
std::vector<std::uint8_t> threshold_at_prevalence(std::span<const double> values, std::size_t m, std::uint64_t seed);

struct DStatConfig {
  std::size_t n_reps = 1000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct DStatResult {
  double d_obs = 0.0;
  double mean_d_random = 0.0;
  double mean_d_bm = 0.0;
  double sd_d_random = 0.0;
  double sd_d_bm = 0.0;
  double D = 0.0;
  double p_random = 0.0;  // fraction of random-null d <= d_obs
  double p_bm = 0.0;      // fraction of BM-null d >= d_obs
  std::size_t n_reps = 0;
  std::size_t n_tips_used = 0;
  std::size_t n_present = 0;
};

/// D = (d_obs - mean d_BM) / (mean d_random - mean d_BM). Unattested tips are
/// pruned first. The random null shuffles the observed tip values; the BM null
/// simulates sigma2 = 1 BM from 0 and thresholds at the observed prevalence.
/// Replicate r of each null uses its own stream, so any worker count gives the
/// same result. Throws DomainError for fewer than 4 usable tips, no variation,
/// or indistinguishable nulls.
DStatResult d_statistic(const Tree& tree, std::span<const std::uint8_t> presence,
                        std::span<const std::uint8_t> attested, const DStatConfig& config);

/// Helper for tests and tools: a fully balanced tree with 2^levels tips named
/// t0, t1, ... and every branch of the given length.
Tree balanced_tree(unsigned levels, double branch_length = 1.0);

}  // namespace lexstab
