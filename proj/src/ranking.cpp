#include "lexstab/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lexstab/error.hpp"

namespace lexstab {
namespace {

void flip_component(PcaResult& r, std::size_t j) {
  for (std::size_t i = 0; i < r.loadings.rows(); ++i) r.loadings(i, j) = -r.loadings(i, j);
  for (std::size_t k = 0; k < r.scores.rows(); ++k) r.scores(k, j) = -r.scores(k, j);
}

}  // namespace

PcaResult orient_axes(const PcaResult& pca) {
  if (pca.loadings.cols() < 2) throw DomainError("orientation needs at least two components");
  PcaResult out = pca;
  const std::size_t missing = out.variable_index(std::string(kFeatureNames[kColMissing]));
  const std::size_t singletons = out.variable_index(std::string(kFeatureNames[kColSingletons]));
  out.flipped = {false, false};
  if (out.loadings(missing, 0) > 0.0) {
    flip_component(out, 0);
    out.flipped[0] = true;
  }
  if (out.loadings(singletons, 1) < 0.0) {
    flip_component(out, 1);
    out.flipped[1] = true;
  }
  return out;
}

const char* to_string(Quadrant q) {
  switch (q) {
    case Quadrant::NE: return "NE";
    case Quadrant::NW: return "NW";
    case Quadrant::SE: return "SE";
    case Quadrant::SW: return "SW";
  }
  return "?";
}

Quadrant quadrant_of(double pc1, double pc2) {
  const bool east = pc1 > 0.0;
  const bool south = pc2 < 0.0;
  if (east) return south ? Quadrant::SE : Quadrant::NE;
  return south ? Quadrant::SW : Quadrant::NW;
}

SuitabilityRanking suitability_rank(const PcaResult& oriented, const ClusterAssignment& clusters) {
  const std::size_t n = oriented.rows.size();
  if (oriented.scores.cols() < 2) throw DomainError("ranking needs at least two components");
  if (clusters.labels.size() != n) throw DomainError("cluster labels do not match PCA rows");

  SuitabilityRanking out;
  out.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RankedConcept c;
    c.concept_id = oriented.rows[i];
    c.pc1 = oriented.scores(i, 0);
    c.pc2 = oriented.scores(i, 1);
    c.score = c.pc1 - c.pc2;
    c.quadrant = quadrant_of(c.pc1, c.pc2);
    c.cluster = clusters.labels[i];
    out.entries.push_back(std::move(c));
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const RankedConcept& a, const RankedConcept& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.concept_id < b.concept_id;
  });
  for (std::size_t i = 0; i < n; ++i) out.entries[i].rank = i + 1;
  return out;
}

WordlistSelection select_wordlist(const SuitabilityRanking& ranking, std::size_t k, double stability_mix) {
  const std::size_t n = ranking.entries.size();
  if (k < 1 || k > n) throw DomainError("k out of range: " + std::to_string(k) + " not in [1, " + std::to_string(n) + "]");
  WordlistSelection out;
  std::size_t se = 0;
  for (std::size_t i = 0; i < k; ++i) {
    out.concepts.push_back(ranking.entries[i].concept_id);
    se += ranking.entries[i].quadrant == Quadrant::SE;
  }
  out.se_fraction = static_cast<double>(se) / static_cast<double>(k);
  if (out.se_fraction > stability_mix) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "stability mix: %.0f%% SE > %.0f%%; a list drawn mostly from the most stable concepts "
                  "is likely to underestimate splits",
                  100.0 * out.se_fraction, 100.0 * stability_mix);
    out.warnings.emplace_back(buf);
  }
  return out;
}

std::string write_ranking(const SuitabilityRanking& ranking) {
  std::string out = "concept\tPC1\tPC2\tscore\trank\tquadrant\tcluster\n";
  for (const auto& e : ranking.entries) {
    out += e.concept_id + '\t' + format_real(e.pc1) + '\t' + format_real(e.pc2) + '\t' + format_real(e.score) + '\t' +
           std::to_string(e.rank) + '\t' + to_string(e.quadrant) + '\t' + std::to_string(e.cluster) + '\n';
  }
  return out;
}

}  // namespace lexstab
