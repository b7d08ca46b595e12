#include "lexstab/pipeline.hpp"

#include <algorithm>

#include "json_io.hpp"
#include "lexstab/error.hpp"

namespace lexstab {
namespace detail {

Json to_json(const DStatResult& r) {
  Json j;
  j["D"] = r.D;
  j["d_obs"] = r.d_obs;
  j["mean_d_random"] = r.mean_d_random;
  j["mean_d_bm"] = r.mean_d_bm;
  j["sd_d_random"] = r.sd_d_random;
  j["sd_d_bm"] = r.sd_d_bm;
  j["p_random"] = r.p_random;
  j["p_bm"] = r.p_bm;
  j["n_reps"] = r.n_reps;
  j["n_tips_used"] = r.n_tips_used;
  j["n_present"] = r.n_present;
  return j;
}

DStatResult dstat_from_json(const Json& j) {
  DStatResult r;
  r.D = j.at("D").get<double>();
  r.d_obs = j.at("d_obs").get<double>();
  r.mean_d_random = j.at("mean_d_random").get<double>();
  r.mean_d_bm = j.at("mean_d_bm").get<double>();
  r.sd_d_random = j.at("sd_d_random").get<double>();
  r.sd_d_bm = j.at("sd_d_bm").get<double>();
  r.p_random = j.at("p_random").get<double>();
  r.p_bm = j.at("p_bm").get<double>();
  r.n_reps = j.at("n_reps").get<std::size_t>();
  r.n_tips_used = j.at("n_tips_used").get<std::size_t>();
  r.n_present = j.at("n_present").get<std::size_t>();
  return r;
}

Json to_json(const MeaningClassMetrics& m) {
  Json j;
  j["concept"] = m.concept_id;
  j["n_loans"] = m.n_loans;
  j["mean_D"] = m.mean_D ? Json(*m.mean_D) : Json(nullptr);
  j["n_singletons"] = m.n_singletons;
  j["missing_fraction"] = m.missing_fraction;
  j["mean_class_size"] = m.mean_class_size;
  j["max_class_size"] = m.max_class_size;
  j["n_classes"] = m.n_classes;
  j["attested_languages"] = m.attested_languages;
  j["d_computed"] = m.d_computed();
  j["d_skipped"] = m.d_skipped();
  Json classes = Json::array();
  for (const auto& c : m.classes) {
    Json cj;
    cj["cognate_id"] = c.cognate_id;
    cj["size"] = c.size;
    if (c.result) cj["dstat"] = to_json(*c.result);
    else cj["skipped"] = c.skip_reason;
    classes.push_back(std::move(cj));
  }
  j["classes"] = std::move(classes);
  return j;
}

MeaningClassMetrics metrics_from_json(const Json& j) {
  MeaningClassMetrics m;
  m.concept_id = j.at("concept").get<std::string>();
  m.n_loans = j.at("n_loans").get<std::size_t>();
  if (!j.at("mean_D").is_null()) m.mean_D = j.at("mean_D").get<double>();
  m.n_singletons = j.at("n_singletons").get<std::size_t>();
  m.missing_fraction = j.at("missing_fraction").get<double>();
  m.mean_class_size = j.at("mean_class_size").get<double>();
  m.max_class_size = j.at("max_class_size").get<std::size_t>();
  m.n_classes = j.at("n_classes").get<std::size_t>();
  m.attested_languages = j.at("attested_languages").get<std::size_t>();
  for (const auto& cj : j.at("classes")) {
    ClassD c;
    c.cognate_id = cj.at("cognate_id").get<std::string>();
    c.size = cj.at("size").get<std::size_t>();
    if (cj.contains("dstat")) c.result = dstat_from_json(cj.at("dstat"));
    else c.skip_reason = cj.at("skipped").get<std::string>();
    m.classes.push_back(std::move(c));
  }
  return m;
}

Json rows_of(const Matrix& m) {
  Json out = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (const double v : m.row(r)) row.push_back(v);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

using detail::Json;

MetricsStage run_metrics_stage(const Tree& tree, const CognateMatrix& matrix, const RunConfig& config,
                               std::vector<InputDigest> inputs) {
  MetricsStage stage;
  stage.seed = config.seed;
  stage.n_reps = config.n_reps;
  stage.tree_tips = tree.tip_count();
  stage.inputs = std::move(inputs);
  stage.metrics = compute_all_metrics(matrix, tree, {config.n_reps, config.seed, config.workers}, &stage.dropped_concepts);
  std::sort(stage.metrics.begin(), stage.metrics.end(),
            [](const auto& a, const auto& b) { return a.concept_id < b.concept_id; });
  std::sort(stage.dropped_concepts.begin(), stage.dropped_concepts.end());
  return stage;
}

std::string write_metrics_cache(const MetricsStage& stage) {
  Json j;
  j["schema"] = "lexstab.metrics/1";
  j["seed"] = stage.seed;
  j["n_reps"] = stage.n_reps;
  j["tree_tips"] = stage.tree_tips;
  Json inputs = Json::array();
  for (const auto& in : stage.inputs) inputs.push_back({{"role", in.role}, {"name", in.name}, {"sha256", in.sha256}});
  j["inputs"] = std::move(inputs);
  j["dropped_concepts"] = stage.dropped_concepts;
  Json metrics = Json::array();
  for (const auto& m : stage.metrics) metrics.push_back(detail::to_json(m));
  j["metrics"] = std::move(metrics);
  return j.dump(1) + "\n";
}

MetricsStage read_metrics_cache(std::string_view text) {
  try {
    const Json j = Json::parse(text.begin(), text.end());
    if (j.at("schema").get<std::string>() != "lexstab.metrics/1") throw DataError("unsupported metrics cache schema");
    MetricsStage s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.n_reps = j.at("n_reps").get<std::size_t>();
    s.tree_tips = j.at("tree_tips").get<std::size_t>();
    for (const auto& in : j.at("inputs"))
      s.inputs.push_back({in.at("role").get<std::string>(), in.at("name").get<std::string>(), in.at("sha256").get<std::string>()});
    s.dropped_concepts = j.at("dropped_concepts").get<std::vector<std::string>>();
    for (const auto& m : j.at("metrics")) s.metrics.push_back(detail::metrics_from_json(m));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metrics cache: ") + e.what());
  }
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

}  // namespace

Analysis analyze(MetricsStage metrics_stage, const RunConfig& config) {
  Analysis a;
  a.config = config;
  a.stage = std::move(metrics_stage);

  for (const auto& c : a.stage.dropped_concepts)
    a.warnings.push_back("concept '" + c + "' has no attestations in tree languages; excluded");

  a.table = stage("feature-table", [&] { return build_feature_table(a.stage.metrics); });
  if (const auto n = a.table.imputed_count())
    a.warnings.push_back("mean_D imputed (column mean) for " + std::to_string(n) + " concept(s) with no analyzable class");
  a.standardized = stage("standardize", [&] { return standardize(a.table, &a.warnings); });
  a.pca = stage("pca", [&] { return orient_axes(pca(a.standardized)); });

  a.clusters = stage("cluster", [&] {
    const Matrix points = leading_scores(a.pca, 2);
    std::size_t k = 0;
    if (config.cluster_k) {
      k = *config.cluster_k;
    } else {
      const std::size_t hi = std::min(config.k_max, points.rows() - 1);
      a.k_choice = choose_k(points, config.k_min, hi, config.seed, config.restarts);
      k = a.k_choice->k;
      if (a.k_choice->low_structure) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "low cluster structure: best mean silhouette %.3f < %.2f",
                      a.k_choice->silhouette, kLowStructureSilhouette);
        a.warnings.emplace_back(buf);
      }
    }
    return kmeans(points, k, config.seed, config.restarts);
  });

  a.ranking = stage("rank", [&] { return suitability_rank(a.pca, a.clusters); });
  a.selection = stage("select", [&] { return select_wordlist(a.ranking, config.wordlist_k, config.stability_mix); });
  a.warnings.insert(a.warnings.end(), a.selection.warnings.begin(), a.selection.warnings.end());
  return a;
}

}  // namespace lexstab
