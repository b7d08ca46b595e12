// include/lexstab/pipeline.hpp
//
// Stage orchestration: metrics (the expensive D computations) are a separate,
// cacheable stage; everything after it is cheap and re-runnable.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexstab/cognates.hpp"
#include "lexstab/metrics.hpp"
#include "lexstab/multivariate.hpp"
#include "lexstab/ranking.hpp"
#include "lexstab/tree.hpp"

namespace lexstab {

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t n_reps = 1000;
  std::size_t wordlist_k = kDefaultWordlistSize;
  std::optional<std::size_t> cluster_k;  // empty: choose by silhouette
  std::size_t k_min = 2;
  std::size_t k_max = 6;
  std::size_t restarts = 25;
  double stability_mix = kDefaultStabilityMix;
  std::size_t workers = 1;  // never affects results
};

struct InputDigest {
  std::string role;  // "tree" or "cognates"
  std::string name;  // file name without directories
  std::string sha256;
};

struct MetricsStage {
  std::vector<MeaningClassMetrics> metrics;  // sorted by concept ID
  std::vector<std::string> dropped_concepts;  // no tree-language attestation
  std::uint64_t seed = 0;
  std::size_t n_reps = 0;
  std::size_t tree_tips = 0;
  std::vector<InputDigest> inputs;
};

MetricsStage run_metrics_stage(const Tree& tree, const CognateMatrix& matrix, const RunConfig& config,
                               std::vector<InputDigest> inputs = {});

/// JSON cache of a metrics stage; read_metrics_cache(write_metrics_cache(s)) == s.
std::string write_metrics_cache(const MetricsStage& stage);
/// Throws DataError on malformed input.
MetricsStage read_metrics_cache(std::string_view json);

struct Analysis {
  MetricsStage stage;
  RunConfig config;
  FeatureTable table;
  FeatureTable standardized;
  PcaResult pca;  // oriented
  ClusterAssignment clusters;
  std::optional<ChooseKResult> k_choice;
  SuitabilityRanking ranking;
  WordlistSelection selection;
  std::vector<std::string> warnings;
};

/// feature table -> standardize -> pca -> orient -> cluster -> rank -> select.
/// Errors are rethrown with the failing stage name prefixed.
Analysis analyze(MetricsStage stage, const RunConfig& config);

}  // namespace lexstab
