#include "lexstab/multivariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lexstab/error.hpp"
#include "lexstab/random.hpp"

namespace lexstab {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

struct LloydRun {
  std::vector<std::size_t> labels;
  Matrix centroids;
  double wcss = 0.0;
  std::size_t iterations = 0;
  std::vector<double> trace;
};

Matrix seed_plus_plus(const Matrix& points, std::size_t k, RandomStream& rng) {
  const std::size_t n = points.rows();
  Matrix centers(k, points.cols());
  std::vector<char> chosen(n, 0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t pick = static_cast<std::size_t>(rng.next_below(n));
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += d2[i];
      if (total > 0.0) {
        const double target = rng.next_unit() * total;
        double acc = 0.0;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (d2[i] == 0.0) continue;
          acc += d2[i];
          if (target < acc) {
            pick = i;
            break;
          }
        }
        if (pick == n)  // rounding at the top end
          for (std::size_t i = n; i-- > 0;)
            if (d2[i] > 0.0) {
              pick = i;
              break;
            }
      } else {
        // every point coincides with a center already; take the first unused row
        pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
      }
    }
    chosen[pick] = 1;
    std::copy(points.row(pick).begin(), points.row(pick).end(), centers.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points.row(i), centers.row(c)));
  }
  return centers;
}

double assign(const Matrix& points, const Matrix& centers, std::vector<std::size_t>& labels) {
  double wcss = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    std::size_t best = 0;
    double best_d = squared_distance(points.row(i), centers.row(0));
    for (std::size_t c = 1; c < centers.rows(); ++c) {
      const double d = squared_distance(points.row(i), centers.row(c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    labels[i] = best;
    wcss += best_d;
  }
  return wcss;
}

/// Centroid = mean of members; an empty cluster keeps its previous centroid.
void update(const Matrix& points, const std::vector<std::size_t>& labels, Matrix& centers) {
  Matrix sums(centers.rows(), centers.cols());
  std::vector<std::size_t> counts(centers.rows(), 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    ++counts[labels[i]];
    for (std::size_t d = 0; d < points.cols(); ++d) sums(labels[i], d) += points(i, d);
  }
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t d = 0; d < centers.cols(); ++d) centers(c, d) = sums(c, d) / static_cast<double>(counts[c]);
  }
}

double wcss_of(const Matrix& points, const std::vector<std::size_t>& labels, const Matrix& centers) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) s += squared_distance(points.row(i), centers.row(labels[i]));
  return s;
}

void require_non_increasing(double previous, double current) {
  if (current > previous + 1e-9 * (1.0 + std::fabs(previous)))
    throw std::logic_error("k-means WCSS increased between iterations");
}

LloydRun lloyd(const Matrix& points, std::size_t k, RandomStream& rng, std::size_t max_iterations) {
  LloydRun run;
  run.centroids = seed_plus_plus(points, k, rng);
  run.labels.assign(points.rows(), 0);
  run.trace.push_back(assign(points, run.centroids, run.labels));
  std::vector<std::size_t> next(points.rows());
  for (run.iterations = 1; run.iterations <= max_iterations; ++run.iterations) {
    update(points, run.labels, run.centroids);
    const double after_update = wcss_of(points, run.labels, run.centroids);
    require_non_increasing(run.trace.back(), after_update);
    const double after_assign = assign(points, run.centroids, next);
    require_non_increasing(after_update, after_assign);
    run.trace.push_back(after_assign);
    const bool stable = next == run.labels;
    run.labels.swap(next);
    if (stable) break;
  }
  run.iterations = std::min(run.iterations, max_iterations);
  update(points, run.labels, run.centroids);
  run.wcss = wcss_of(points, run.labels, run.centroids);
  return run;
}

}  // namespace

FeatureTable standardize(const FeatureTable& table, std::vector<std::string>* warnings) {
  const std::size_t n = table.values.rows();
  if (n < 2) throw DomainError("standardize needs >= 2 rows");
  FeatureTable out = table;
  for (std::size_t c = 0; c < table.values.cols(); ++c) {
    double mean = 0.0;
    double scale = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      mean += table.values(r, c);
      scale = std::max(scale, std::fabs(table.values(r, c)));
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (table.values(r, c) - mean) * (table.values(r, c) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 1e-12 * std::max(scale, std::numeric_limits<double>::min()))) {
      for (std::size_t r = 0; r < n; ++r) out.values(r, c) = 0.0;
      if (warnings) warnings->push_back("column '" + table.columns[c] + "' has zero variance; set to 0");
      continue;
    }
    for (std::size_t r = 0; r < n; ++r) out.values(r, c) = (table.values(r, c) - mean) / sd;
  }
  out.standardized = true;
  return out;
}

EigenDecomposition jacobi_eigen(const Matrix& symmetric, double tolerance, std::size_t max_sweeps) {
  const std::size_t p = symmetric.rows();
  if (p != symmetric.cols()) throw DomainError("eigen-decomposition needs a square matrix");
  double frob = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      const double v = symmetric(i, j);
      if (!std::isfinite(v)) throw DomainError("non-finite matrix entry");
      if (std::fabs(v - symmetric(j, i)) > 1e-12 * (1.0 + std::fabs(v))) throw DomainError("matrix is not symmetric");
      frob += v * v;
    }
  const double threshold = tolerance * std::max(1.0, std::sqrt(frob));

  Matrix a = symmetric;
  Matrix v(p, p);
  for (std::size_t i = 0; i < p; ++i) v(i, i) = 1.0;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  EigenDecomposition out;
  while (off_norm() >= threshold) {
    if (out.sweeps == max_sweeps) throw DomainError("Jacobi eigensolver did not converge");
    ++out.sweeps;
    for (std::size_t i = 0; i + 1 < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        const double aij = a(i, j);
        if (aij == 0.0) continue;
        const double theta = (a(j, j) - a(i, i)) / (2.0 * aij);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J, rotating rows/columns i and j.
        for (std::size_t k = 0; k < p; ++k) {
          const double aki = a(k, i);
          const double akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double aik = a(i, k);
          const double ajk = a(j, k);
          a(i, k) = c * aik - s * ajk;
          a(j, k) = s * aik + c * ajk;
        }
        a(i, j) = 0.0;
        a(j, i) = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          const double vki = v(k, i);
          const double vkj = v(k, j);
          v(k, i) = c * vki - s * vkj;
          v(k, j) = s * vki + c * vkj;
        }
      }
    }
  }

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  out.values.resize(p);
  out.vectors = Matrix(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < p; ++k) out.vectors(k, j) = v(k, order[j]);
  }
  return out;
}

std::size_t PcaResult::variable_index(const std::string& name) const {
  const auto it = std::find(variables.begin(), variables.end(), name);
  if (it == variables.end()) throw DomainError("PCA has no variable '" + name + "'");
  return static_cast<std::size_t>(it - variables.begin());
}

PcaResult pca(const FeatureTable& table) {
  if (!table.standardized) throw DomainError("pca requires a standardized table");
  const Matrix& x = table.values;
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n < 2 || p < 1) throw DomainError("pca needs >= 2 rows and >= 1 column");
  for (const double v : x.data())
    if (!std::isfinite(v)) throw DomainError("non-finite cell in feature table");

  PcaResult r;
  r.variables = table.columns;
  r.rows = table.rows;
  r.correlation = Matrix(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += x(k, i) * x(k, j);
      r.correlation(i, j) = r.correlation(j, i) = s / static_cast<double>(n - 1);
    }

  const EigenDecomposition eig = jacobi_eigen(r.correlation);
  r.sweeps = eig.sweeps;
  r.loadings = eig.vectors;
  r.eigenvalues.resize(p);
  double total = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    r.eigenvalues[j] = std::max(0.0, eig.values[j]);
    total += r.eigenvalues[j];
  }
  r.explained.resize(p);
  for (std::size_t j = 0; j < p; ++j) r.explained[j] = total > 0.0 ? r.eigenvalues[j] / total : 0.0;

  r.scores = Matrix(n, p);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < p; ++i) s += x(k, i) * r.loadings(i, j);
      r.scores(k, j) = s;
    }

  r.contributions = Matrix(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < p; ++i) ss += r.loadings(i, j) * r.loadings(i, j);
    for (std::size_t i = 0; i < p; ++i) r.contributions(i, j) = 100.0 * r.loadings(i, j) * r.loadings(i, j) / ss;
  }
  return r;
}

Matrix leading_scores(const PcaResult& result, std::size_t count) {
  if (count > result.scores.cols()) throw DomainError("not enough principal components");
  Matrix out(result.scores.rows(), count);
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = result.scores(r, c);
  return out;
}

ClusterAssignment kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t n_restarts,
                         std::size_t max_iterations) {
  if (k < 1) throw DomainError("k must be >= 1");
  if (k > points.rows()) throw DomainError("k exceeds the number of points");
  if (n_restarts < 1) throw DomainError("n_restarts must be >= 1");
  for (const double v : points.data())
    if (!std::isfinite(v)) throw DomainError("non-finite point coordinate");

  LloydRun best;
  std::size_t best_restart = 0;
  for (std::size_t r = 0; r < n_restarts; ++r) {
    RandomStream rng(seed, StreamDomain::kmeans, static_cast<std::uint32_t>(r));
    LloydRun run = lloyd(points, k, rng, max_iterations);
    if (r == 0 || run.wcss < best.wcss) {
      best = std::move(run);
      best_restart = r;
    }
  }

  // Relabel clusters by first appearance so labels do not depend on seeding order.
  std::vector<std::size_t> relabel(k, k);
  std::size_t next = 0;
  for (const std::size_t l : best.labels)
    if (relabel[l] == k) relabel[l] = next++;
  for (std::size_t c = 0; c < k; ++c)
    if (relabel[c] == k) relabel[c] = next++;

  ClusterAssignment out;
  out.k = k;
  out.seed = seed;
  out.n_restarts = n_restarts;
  out.best_restart = best_restart;
  out.iterations = best.iterations;
  out.wcss = best.wcss;
  out.wcss_trace = std::move(best.trace);
  out.labels.resize(best.labels.size());
  for (std::size_t i = 0; i < best.labels.size(); ++i) out.labels[i] = relabel[best.labels[i]];
  out.centroids = Matrix(k, points.cols());
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t d = 0; d < points.cols(); ++d) out.centroids(relabel[c], d) = best.centroids(c, d);
  return out;
}

std::vector<double> silhouette_values(const Matrix& points, const std::vector<std::size_t>& labels) {
  const std::size_t n = points.rows();
  if (labels.size() != n) throw DomainError("label count does not match point count");
  const std::size_t k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> sizes(k, 0);
  for (const auto l : labels) ++sizes[l];

  std::vector<double> s(n, 0.0);
  std::vector<double> dist_sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[labels[i]] <= 1) continue;
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dist_sum[labels[j]] += std::sqrt(squared_distance(points.row(i), points.row(j)));
    const double a = dist_sum[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != labels[i] && sizes[c] > 0) b = std::min(b, dist_sum[c] / static_cast<double>(sizes[c]));
    if (!std::isfinite(b)) continue;  // only one non-empty cluster
    const double m = std::max(a, b);
    s[i] = m > 0.0 ? (b - a) / m : 0.0;
  }
  return s;
}

double mean_silhouette(const Matrix& points, const std::vector<std::size_t>& labels) {
  const auto s = silhouette_values(points, labels);
  if (s.empty()) return 0.0;
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

ChooseKResult choose_k(const Matrix& points, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                       std::size_t n_restarts) {
  if (k_min > k_max) throw DomainError("empty k range");
  if (k_min < 2 || k_max + 1 > points.rows())
    throw DomainError("k range must lie within [2, " + std::to_string(points.rows() == 0 ? 0 : points.rows() - 1) + "]");
  ChooseKResult out;
  out.silhouette = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const auto fit = kmeans(points, k, seed, n_restarts);
    const double s = mean_silhouette(points, fit.labels);
    out.candidates.emplace_back(k, s);
    if (s > out.silhouette) {
      out.silhouette = s;
      out.k = k;
    }
  }
  out.low_structure = out.silhouette < kLowStructureSilhouette;
  return out;
}

}  // namespace lexstab
