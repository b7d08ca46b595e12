// include/lexstab/multivariate.hpp
//
// Correlation-matrix PCA (cyclic Jacobi) and k-means clustering of PC scores.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lexstab/matrix.hpp"
#include "lexstab/metrics.hpp"

namespace lexstab {

/// z-scores every column (sample standard deviation). A column whose spread
/// is zero at machine precision becomes all zeros and a warning is appended.
FeatureTable standardize(const FeatureTable& table, std::vector<std::string>* warnings = nullptr);

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
  std::size_t sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// `tolerance` (scaled by max(1, ||A||_F)). Throws DomainError for a
/// non-square, non-symmetric or non-finite input, or if it fails to converge.
EigenDecomposition jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-12, std::size_t max_sweeps = 100);

struct PcaResult {
  std::vector<std::string> variables;
  std::vector<std::string> rows;
  std::vector<double> eigenvalues;  // non-increasing, clamped at 0
  std::vector<double> explained;    // eigenvalue / sum of eigenvalues
  Matrix correlation;               // variables x variables
  Matrix loadings;                  // variables x components, orthonormal columns
  Matrix scores;                    // rows x components
  Matrix contributions;             // variables x components, percent; columns sum to 100
  std::size_t sweeps = 0;
  std::array<bool, 2> flipped{};    // set by orient_axes

  std::size_t variable_index(const std::string& name) const;
};

/// Requires a standardized table with finite cells.
PcaResult pca(const FeatureTable& standardized);

/// Copy of the first `count` score columns (points for clustering / plotting).
Matrix leading_scores(const PcaResult& result, std::size_t count = 2);

struct ClusterAssignment {
  std::vector<std::size_t> labels;  // relabelled by first appearance in row order
  Matrix centroids;                 // k x dims
  double wcss = 0.0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::size_t n_restarts = 0;
  std::size_t best_restart = 0;
  std::size_t iterations = 0;
  std::vector<double> wcss_trace;   // WCSS after each assignment step of the winning restart
};

/// Lloyd's algorithm from k-means++ seeding, keeping the lowest WCSS over
/// `n_restarts` (ties: lowest restart index). Restart r uses stream
/// (seed, kmeans, r). Stops when assignments are stable or after `max_iterations`.
ClusterAssignment kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t n_restarts = 25,
                         std::size_t max_iterations = 100);

/// Per-point silhouette; points in singleton clusters score 0.
std::vector<double> silhouette_values(const Matrix& points, const std::vector<std::size_t>& labels);
double mean_silhouette(const Matrix& points, const std::vector<std::size_t>& labels);

struct ChooseKResult {
  std::size_t k = 0;
  double silhouette = 0.0;
  std::vector<std::pair<std::size_t, double>> candidates;  // (k, mean silhouette)
  bool low_structure = false;  // best silhouette below kLowStructureSilhouette
};

// Below 0.5 a partition is at best weak structure (Kaufman & Rousseeuw).
// k-means on structureless 2-D noise typically lands near 0.4.
inline constexpr double kLowStructureSilhouette = 0.5;

/// k in [k_min, k_max] maximizing mean silhouette; ties go to the smaller k.
ChooseKResult choose_k(const Matrix& points, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                       std::size_t n_restarts = 25);

}  // namespace lexstab
