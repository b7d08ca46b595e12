// include/lexstab/metrics.hpp
//
// Per-concept suitability variables and the feature table fed to PCA.
// Only languages that are tips of the tree are counted.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexstab/cognates.hpp"
#include "lexstab/comparative.hpp"
#include "lexstab/matrix.hpp"
#include "lexstab/tree.hpp"

namespace lexstab {

/// D outcome for one cognate class.
struct ClassD {
  std::string cognate_id;
  std::size_t size = 0;  // tree languages attesting the class
  std::optional<DStatResult> result;
  std::string skip_reason;  // set when result is empty
};

struct MeaningClassMetrics {
  std::string concept_id;
  std::size_t n_loans = 0;
  std::optional<double> mean_D;  // empty when every class was skipped
  std::size_t n_singletons = 0;
  double missing_fraction = 0.0;
  double mean_class_size = 0.0;
  std::size_t max_class_size = 0;
  std::size_t n_classes = 0;
  std::size_t attested_languages = 0;
  std::vector<ClassD> classes;

  std::size_t d_computed() const noexcept;
  std::size_t d_skipped() const noexcept { return classes.size() - d_computed(); }
};

/// Seed used for the D nulls of one cognate class: the run seed mixed with
/// the concept and class IDs, so results do not depend on evaluation order.
std::uint64_t class_seed(std::uint64_t run_seed, std::string_view concept_id, std::string_view cognate_id);

/// Throws DomainError if no tree language attests the concept.
MeaningClassMetrics compute_metrics(const CognateMatrix& matrix, const Tree& tree, std::string_view concept_id,
                                    const DStatConfig& config);

/// compute_metrics for every concept with at least one tree-language
/// attestation, in matrix concept order. Concepts with none are listed in
/// `dropped` when given. D computations are spread over config.workers threads.
std::vector<MeaningClassMetrics> compute_all_metrics(const CognateMatrix& matrix, const Tree& tree,
                                                     const DStatConfig& config,
                                                     std::vector<std::string>* dropped = nullptr);

inline constexpr std::array<std::string_view, 6> kFeatureNames = {
    "n_loans", "mean_D", "n_singletons", "missing_fraction", "mean_class_size", "max_class_size"};
inline constexpr std::size_t kColMeanD = 1;
inline constexpr std::size_t kColSingletons = 2;
inline constexpr std::size_t kColMissing = 3;

enum class CellSource { computed, imputed };

struct FeatureTable {
  std::vector<std::string> rows;     // concept IDs, sorted
  std::vector<std::string> columns;  // kFeatureNames order
  Matrix values;
  bool standardized = false;
  std::vector<CellSource> mean_D_source;  // per row; other columns are always computed

  std::size_t imputed_count() const noexcept;
  std::optional<std::size_t> row_index(std::string_view concept_id) const;
};

/// Rows sorted by concept ID. A concept without mean_D gets the mean of the
/// defined mean_D values (0 if there are none). Throws DomainError for fewer
/// than 3 concepts or a repeated concept ID.
FeatureTable build_feature_table(const std::vector<MeaningClassMetrics>& metrics);

/// Comma-separated, header row first.
std::string write_feature_table(const FeatureTable& table);

}  // namespace lexstab
