// include/lexstab/report.hpp
//
// Output documents. The report is a single JSON document (schema
// "lexstab.report/1", described in docs/report-schema.md); the scatter is a
// standalone SVG. Both are byte-identical for identical inputs and seed.

#pragma once

#include <string>
#include <vector>

#include "lexstab/pipeline.hpp"

namespace lexstab {

inline constexpr const char* kReportSchema = "lexstab.report/1";

/// Throws DomainError naming the first concept that is not present in every
/// one of metrics, feature table, PCA rows and ranking.
std::string emit_report(const Analysis& analysis);

/// Per-cell provenance of the feature table (computed / imputed, D skip reasons).
std::string emit_provenance(const FeatureTable& table, const std::vector<MeaningClassMetrics>& metrics);

/// PCA and cluster sections on their own, for the pca / cluster subcommands.
std::string emit_pca(const PcaResult& pca);
std::string emit_clusters(const PcaResult& pca, const ClusterAssignment& clusters,
                          const std::optional<ChooseKResult>& k_choice);

/// Oriented PC1/PC2 scatter: labelled points coloured by cluster, a convex
/// hull for every cluster with at least three members, one loading arrow per
/// variable, explained variance in the axis captions. Throws DomainError for
/// fewer than three points.
std::string emit_scatter(const PcaResult& oriented, const ClusterAssignment& clusters,
                         const SuitabilityRanking& ranking);

}  // namespace lexstab
