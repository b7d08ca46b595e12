#include "lexstab/report.hpp"

#include <algorithm>
#include <set>

#include "json_io.hpp"
#include "lexstab/error.hpp"

namespace lexstab {

using detail::Json;

namespace {

Json named_matrix(const Matrix& m, const std::vector<std::string>& names) {
  Json out = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (const double v : m.row(r)) row.push_back(v);
    out.push_back({{"variable", names[r]}, {"values", std::move(row)}});
  }
  return out;
}

Json pca_json(const PcaResult& pca) {
  Json j;
  j["variables"] = pca.variables;
  j["eigenvalues"] = pca.eigenvalues;
  j["explained"] = pca.explained;
  j["loadings"] = named_matrix(pca.loadings, pca.variables);
  j["contributions"] = named_matrix(pca.contributions, pca.variables);
  j["flipped"] = {pca.flipped[0], pca.flipped[1]};
  j["jacobi_sweeps"] = pca.sweeps;
  Json scores = Json::array();
  for (std::size_t r = 0; r < pca.rows.size(); ++r) {
    Json row = Json::array();
    for (const double v : pca.scores.row(r)) row.push_back(v);
    scores.push_back({{"concept", pca.rows[r]}, {"scores", std::move(row)}});
  }
  j["scores"] = std::move(scores);
  return j;
}

Json clusters_json(const PcaResult& pca, const ClusterAssignment& c, const std::optional<ChooseKResult>& choice) {
  Json j;
  j["method"] = "k-means (Lloyd iterations, k-means++ seeding)";
  j["space"] = "oriented PC1/PC2 scores";
  j["k"] = c.k;
  j["k_mode"] = choice ? "silhouette" : "fixed";
  j["seed"] = c.seed;
  j["restarts"] = c.n_restarts;
  j["best_restart"] = c.best_restart;
  j["iterations"] = c.iterations;
  j["wcss"] = c.wcss;
  j["centroids"] = detail::rows_of(c.centroids);
  Json labels = Json::array();
  for (std::size_t i = 0; i < c.labels.size(); ++i) labels.push_back({{"concept", pca.rows.at(i)}, {"cluster", c.labels[i]}});
  j["labels"] = std::move(labels);
  if (choice) {
    Json cands = Json::array();
    for (const auto& [k, s] : choice->candidates) cands.push_back({{"k", k}, {"mean_silhouette", s}});
    j["silhouette"] = {{"best", choice->silhouette}, {"low_structure", choice->low_structure}, {"candidates", std::move(cands)}};
  }
  return j;
}

void check_row_sets(const Analysis& a) {
  std::set<std::string> reference;
  for (const auto& m : a.stage.metrics) reference.insert(m.concept_id);
  auto check = [&](const std::vector<std::string>& ids, const char* where) {
    std::set<std::string> got(ids.begin(), ids.end());
    for (const auto& id : got)
      if (!reference.count(id)) throw DomainError(std::string("concept '") + id + "' in " + where + " has no metrics");
    for (const auto& id : reference)
      if (!got.count(id)) throw DomainError(std::string("concept '") + id + "' missing from " + where);
  };
  check(a.table.rows, "feature table");
  check(a.pca.rows, "PCA");
  std::vector<std::string> ranked;
  for (const auto& e : a.ranking.entries) ranked.push_back(e.concept_id);
  check(ranked, "ranking");
  if (a.clusters.labels.size() != a.pca.rows.size()) throw DomainError("cluster labels do not match PCA rows");
}

}  // namespace

std::string emit_report(const Analysis& a) {
  check_row_sets(a);
  const RunConfig& cfg = a.config;

  Json j;
  j["schema"] = kReportSchema;
  j["tool"] = {{"name", "lexstab"}, {"version", "0.1.0"}};

  Json run;
  run["seed"] = cfg.seed;
  run["d_seed"] = a.stage.seed;
  run["n_reps"] = a.stage.n_reps;
  run["wordlist_k"] = cfg.wordlist_k;
  run["cluster_k"] = cfg.cluster_k ? Json(*cfg.cluster_k) : Json("auto");
  run["k_range"] = {cfg.k_min, cfg.k_max};
  run["restarts"] = cfg.restarts;
  run["stability_mix"] = cfg.stability_mix;
  run["suitability_formula"] = kSuitabilityFormula;
  run["orientation"] = {{"dim1", "missing_fraction loads negatively"}, {"dim2", "n_singletons loads positively"}};
  run["d_statistic"] = {
      {"change_score", "sum over edges of |nodal estimate - parent estimate|, inverse-branch-length weighted means"},
      {"random_null", "tip values shuffled at fixed prevalence"},
      {"bm_null", "BM (sigma2 = 1, root 0) thresholded at observed prevalence"},
      {"concept_aggregate", "mean of class D over analyzable classes"},
      {"imputation", "column mean of defined concept mean_D"},
      {"min_tips", 4}};
  run["rng"] = "Philox4x32-10, per-replicate streams";
  run["tree_tips"] = a.stage.tree_tips;
  Json inputs = Json::array();
  for (const auto& in : a.stage.inputs) inputs.push_back({{"role", in.role}, {"name", in.name}, {"sha256", in.sha256}});
  run["inputs"] = std::move(inputs);
  j["run"] = std::move(run);

  Json concepts = Json::array();
  for (const auto& m : a.stage.metrics) {
    Json cj = detail::to_json(m);
    const auto row = a.table.row_index(m.concept_id);
    cj["mean_D_source"] = a.table.mean_D_source.at(*row) == CellSource::computed ? "computed" : "imputed";
    concepts.push_back(std::move(cj));
  }
  j["concepts"] = std::move(concepts);
  j["dropped_concepts"] = a.stage.dropped_concepts;

  j["feature_table"] = {{"columns", a.table.columns},
                        {"rows", a.table.rows},
                        {"values", detail::rows_of(a.table.values)},
                        {"standardized", detail::rows_of(a.standardized.values)}};
  j["pca"] = pca_json(a.pca);
  j["clusters"] = clusters_json(a.pca, a.clusters, a.k_choice);

  Json ranking = Json::array();
  for (const auto& e : a.ranking.entries)
    ranking.push_back({{"concept", e.concept_id}, {"pc1", e.pc1}, {"pc2", e.pc2}, {"score", e.score},
                       {"rank", e.rank}, {"quadrant", to_string(e.quadrant)}, {"cluster", e.cluster}});
  j["ranking"] = std::move(ranking);
  j["wordlist"] = {{"k", cfg.wordlist_k}, {"concepts", a.selection.concepts}, {"se_fraction", a.selection.se_fraction}};
  j["warnings"] = a.warnings;
  return j.dump(1) + "\n";
}

std::string emit_provenance(const FeatureTable& table, const std::vector<MeaningClassMetrics>& metrics) {
  Json j;
  j["schema"] = "lexstab.provenance/1";
  j["columns"] = table.columns;
  Json rows = Json::array();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto it = std::find_if(metrics.begin(), metrics.end(), [&](const auto& m) { return m.concept_id == table.rows[r]; });
    if (it == metrics.end()) throw DomainError("concept '" + table.rows[r] + "' has no metrics");
    Json cells;
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      cells[table.columns[c]] = c == kColMeanD && table.mean_D_source[r] == CellSource::imputed ? "imputed" : "computed";
    Json skips = Json::array();
    for (const auto& cls : it->classes)
      if (!cls.result) skips.push_back({{"cognate_id", cls.cognate_id}, {"reason", cls.skip_reason}});
    rows.push_back({{"concept", table.rows[r]},
                    {"cells", std::move(cells)},
                    {"d_computed", it->d_computed()},
                    {"d_skipped", std::move(skips)}});
  }
  j["rows"] = std::move(rows);
  j["imputed_count"] = table.imputed_count();
  j["computed_count"] = table.rows.size() - table.imputed_count();
  return j.dump(1) + "\n";
}

std::string emit_pca(const PcaResult& pca) {
  Json j;
  j["schema"] = "lexstab.pca/1";
  j["pca"] = pca_json(pca);
  return j.dump(1) + "\n";
}

std::string emit_clusters(const PcaResult& pca, const ClusterAssignment& clusters,
                          const std::optional<ChooseKResult>& k_choice) {
  Json j;
  j["schema"] = "lexstab.clusters/1";
  j["clusters"] = clusters_json(pca, clusters, k_choice);
  return j.dump(1) + "\n";
}

}  // namespace lexstab
