// include/lexstab/ranking.hpp
//
// Axis orientation, suitability ranking, and wordlist selection.
//
// Orientation fixes the eigenvector sign ambiguity so that high PC1 means
// little missing data and high PC2 means many singleton classes. Concepts high
// on PC1 and low on PC2 rank first; the south-east quadrant (PC1 > 0, PC2 < 0)
// holds the most stable concepts.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lexstab/multivariate.hpp"

namespace lexstab {

inline constexpr std::size_t kDefaultWordlistSize = 30;
inline constexpr double kDefaultStabilityMix = 0.8;
inline constexpr const char* kSuitabilityFormula = "PC1 - PC2";

/// Flips dimension 1 so missing_fraction loads negatively and dimension 2 so
/// n_singletons loads positively; loadings and scores flip together and
/// `flipped` records what changed. Eigenvalues and contributions are unaffected.
PcaResult orient_axes(const PcaResult& pca);

enum class Quadrant { NE, NW, SE, SW };
const char* to_string(Quadrant q);
/// E iff pc1 > 0; S iff pc2 < 0.
Quadrant quadrant_of(double pc1, double pc2);

struct RankedConcept {
  std::string concept_id;
  double pc1 = 0.0;
  double pc2 = 0.0;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
  Quadrant quadrant = Quadrant::NE;
  std::size_t cluster = 0;
};

struct SuitabilityRanking {
  std::vector<RankedConcept> entries;  // rank order
};

/// score = PC1 - PC2 on oriented axes; descending, ties by concept ID.
/// `clusters.labels` must follow pca.rows.
SuitabilityRanking suitability_rank(const PcaResult& oriented, const ClusterAssignment& clusters);

struct WordlistSelection {
  std::vector<std::string> concepts;
  double se_fraction = 0.0;
  std::vector<std::string> warnings;
};

/// Top-k concepts by rank. Warns when more than `stability_mix` of them lie in
/// the SE quadrant: drawing only from the most stable concepts tends to
/// underestimate split times. Throws DomainError unless 1 <= k <= N.
WordlistSelection select_wordlist(const SuitabilityRanking& ranking, std::size_t k = kDefaultWordlistSize,
                                  double stability_mix = kDefaultStabilityMix);

/// Tab-separated: concept, PC1, PC2, score, rank, quadrant, cluster.
std::string write_ranking(const SuitabilityRanking& ranking);

}  // namespace lexstab
