// C ABI over the lexstab core. No C++ exception crosses this boundary.

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <sstream>

#include "lexstab/comparative.hpp"
#include "lexstab/digest.hpp"
#include "lexstab/error.hpp"
#include "lexstab/lexstab.h"
#include "lexstab/pipeline.hpp"
#include "lexstab/report.hpp"

using namespace lexstab;

struct lexstab_tree {
  Tree tree;
  InputDigest digest;
};

struct lexstab_cognates {
  CognateMatrix matrix;
  InputDigest digest;
};

struct lexstab_diagnostics {
  Diagnostics items;
};

struct lexstab_metrics {
  MetricsStage stage;
};

struct lexstab_analysis {
  Analysis analysis;
};

namespace {

thread_local std::string g_last_error;
thread_local std::size_t g_last_location = 0;

lexstab_status fail(lexstab_status status, std::string message, std::size_t location = 0) {
  g_last_error = std::move(message);
  g_last_location = location;
  return status;
}

template <typename Fn>
lexstab_status guard(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    g_last_location = 0;
    fn();
    return LEXSTAB_OK;
  } catch (const ParseError& e) {
    return fail(LEXSTAB_ERR_PARSE, e.what(), e.offset());
  } catch (const DataError& e) {
    return fail(LEXSTAB_ERR_DATA, e.what(), e.line());
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::parse: return fail(LEXSTAB_ERR_PARSE, e.what());
      case ErrorKind::data: return fail(LEXSTAB_ERR_DATA, e.what());
      case ErrorKind::domain: return fail(LEXSTAB_ERR_DOMAIN, e.what());
      case ErrorKind::io: return fail(LEXSTAB_ERR_IO, e.what());
    }
    return fail(LEXSTAB_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LEXSTAB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LEXSTAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LEXSTAB_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::string base_name(const char* path) { return std::filesystem::path(path).filename().string(); }

RunConfig to_run_config(const lexstab_config& c) {
  RunConfig r;
  r.seed = c.seed;
  r.n_reps = c.n_reps;
  r.wordlist_k = c.wordlist_k;
  if (c.cluster_k) r.cluster_k = c.cluster_k;
  r.k_min = c.k_min;
  r.k_max = c.k_max;
  r.restarts = c.restarts;
  r.stability_mix = c.stability_mix;
  r.workers = c.workers == 0 ? 1 : c.workers;
  return r;
}

std::string render(const Analysis& a, lexstab_output kind) {
  switch (kind) {
    case LEXSTAB_OUTPUT_REPORT: return emit_report(a);
    case LEXSTAB_OUTPUT_RANKING: return write_ranking(a.ranking);
    case LEXSTAB_OUTPUT_SCATTER: return emit_scatter(a.pca, a.clusters, a.ranking);
    case LEXSTAB_OUTPUT_PCA: return emit_pca(a.pca);
    case LEXSTAB_OUTPUT_CLUSTERS: return emit_clusters(a.pca, a.clusters, a.k_choice);
  }
  throw Error(ErrorKind::domain, "unknown output kind");
}

}  // namespace

// Null-argument failures are reported as LEXSTAB_ERR_ARGUMENT.
#define LEXSTAB_REQUIRE(...)                                   \
  do {                                                         \
    if (!lexstab_all_nonnull(__VA_ARGS__))                     \
      return fail(LEXSTAB_ERR_ARGUMENT, "null argument");      \
  } while (0)

template <typename... Ptrs>
static bool lexstab_all_nonnull(const Ptrs*... ptrs) {
  return ((ptrs != nullptr) && ...);
}

extern "C" {

const char* lexstab_version(void) { return "0.1.0"; }

const char* lexstab_status_name(lexstab_status status) {
  switch (status) {
    case LEXSTAB_OK: return "ok";
    case LEXSTAB_ERR_ARGUMENT: return "invalid argument";
    case LEXSTAB_ERR_PARSE: return "parse error";
    case LEXSTAB_ERR_DATA: return "data error";
    case LEXSTAB_ERR_DOMAIN: return "domain error";
    case LEXSTAB_ERR_IO: return "I/O error";
    case LEXSTAB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lexstab_last_error(void) { return g_last_error.c_str(); }
size_t lexstab_last_error_location(void) { return g_last_location; }
void lexstab_string_free(char* str) { std::free(str); }

/* trees */

lexstab_status lexstab_tree_parse(const char* text, size_t len, lexstab_tree** out) {
  LEXSTAB_REQUIRE(out);
  *out = nullptr;
  if (!text && len) return fail(LEXSTAB_ERR_ARGUMENT, "null argument");
  return guard([&] {
    const std::string_view view(text ? text : "", len);
    *out = new lexstab_tree{parse_newick(view), {"tree", "<memory>", sha256_hex(view)}};
  });
}

lexstab_status lexstab_tree_load(const char* path, lexstab_tree** out) {
  LEXSTAB_REQUIRE(path, out);
  *out = nullptr;
  return guard([&] {
    const std::string bytes = read_file(path);
    *out = new lexstab_tree{parse_newick(bytes), {"tree", base_name(path), sha256_hex(bytes)}};
  });
}

void lexstab_tree_free(lexstab_tree* tree) { delete tree; }

lexstab_status lexstab_tree_write_newick(const lexstab_tree* tree, char** out) {
  LEXSTAB_REQUIRE(tree, out);
  return guard([&] { *out = dup_string(write_newick(tree->tree)); });
}

lexstab_status lexstab_tree_get_summary(const lexstab_tree* tree, lexstab_tree_summary* out) {
  LEXSTAB_REQUIRE(tree, out);
  return guard([&] {
    const TreeSummary s = tree_summary(tree->tree);
    *out = {s.tips, s.nodes, s.height, s.is_binary ? 1 : 0, s.polytomies, tree->tree.defaulted_length_count()};
  });
}

const char* lexstab_tree_tip_label(const lexstab_tree* tree, size_t i) {
  if (!tree || i >= tree->tree.tip_count()) return nullptr;
  return tree->tree.node(tree->tree.tips()[i]).label.c_str();
}

lexstab_status lexstab_tree_prune(const lexstab_tree* tree, const char* const* labels, size_t n_labels,
                                  lexstab_tree** out) {
  LEXSTAB_REQUIRE(tree, out);
  *out = nullptr;
  if (!labels && n_labels) return fail(LEXSTAB_ERR_ARGUMENT, "null argument");
  return guard([&] {
    std::set<std::string> keep;
    for (size_t i = 0; i < n_labels; ++i) {
      if (!labels[i]) throw Error(ErrorKind::domain, "null label");
      keep.insert(labels[i]);
    }
    Tree pruned = prune_to_taxa(tree->tree, keep);
    const std::string text = write_newick(pruned);
    *out = new lexstab_tree{std::move(pruned), {"tree", "<pruned>", sha256_hex(text)}};
  });
}

/* cognates */

static lexstab_status parse_cognates(std::string bytes, std::string name, lexstab_cognates** out,
                                     lexstab_diagnostics** warnings) {
  return guard([&] {
    std::istringstream in(bytes);
    Diagnostics diags;
    CognateMatrix m = load_cognates(in, &diags);
    if (warnings) *warnings = new lexstab_diagnostics{std::move(diags)};
    *out = new lexstab_cognates{std::move(m), {"cognates", std::move(name), sha256_hex(bytes)}};
  });
}

lexstab_status lexstab_cognates_parse(const char* text, size_t len, lexstab_cognates** out,
                                      lexstab_diagnostics** warnings) {
  LEXSTAB_REQUIRE(out);
  *out = nullptr;
  if (warnings) *warnings = nullptr;
  if (!text && len) return fail(LEXSTAB_ERR_ARGUMENT, "null argument");
  return parse_cognates(std::string(text ? text : "", len), "<memory>", out, warnings);
}

lexstab_status lexstab_cognates_load(const char* path, lexstab_cognates** out, lexstab_diagnostics** warnings) {
  LEXSTAB_REQUIRE(path, out);
  *out = nullptr;
  if (warnings) *warnings = nullptr;
  std::string bytes;
  const lexstab_status st = guard([&] { bytes = read_file(path); });
  if (st != LEXSTAB_OK) return st;
  return parse_cognates(std::move(bytes), base_name(path), out, warnings);
}

void lexstab_cognates_free(lexstab_cognates* cognates) { delete cognates; }

lexstab_status lexstab_cognates_get_counts(const lexstab_cognates* cognates, lexstab_cognate_counts* out) {
  LEXSTAB_REQUIRE(cognates, out);
  const auto& m = cognates->matrix;
  *out = {m.languages().size(), m.concepts().size(), m.row_count(), m.loan_count()};
  return LEXSTAB_OK;
}

/* diagnostics */

lexstab_status lexstab_validate_files(const char* tree_path, const char* cognates_path, lexstab_diagnostics** out) {
  LEXSTAB_REQUIRE(tree_path, cognates_path, out);
  *out = nullptr;
  return guard([&] {
    const std::string tree_bytes = read_file(tree_path);
    const std::string cognate_bytes = read_file(cognates_path);
    Diagnostics diags;
    std::optional<Tree> tree;
    try {
      tree = parse_newick(tree_bytes);
      const std::size_t defaulted = tree->defaulted_length_count();
      if (defaulted)
        diags.push_back({Diagnostic::Level::warning, 0,
                         "tree: " + std::to_string(defaulted) + " branch length(s) missing; defaulted to 1.0"});
    } catch (const ParseError& e) {
      diags.push_back({Diagnostic::Level::error, 0, std::string("tree: ") + e.what()});
    }
    std::istringstream in(cognate_bytes);
    const auto matrix = read_cognates(in, diags);
    if (tree && matrix) {
      const Diagnostics cross = check_against_tree(*matrix, *tree);
      diags.insert(diags.end(), cross.begin(), cross.end());
    }
    *out = new lexstab_diagnostics{std::move(diags)};
  });
}

size_t lexstab_diagnostics_count(const lexstab_diagnostics* diags) { return diags ? diags->items.size() : 0; }

size_t lexstab_diagnostics_count_level(const lexstab_diagnostics* diags, lexstab_level level) {
  if (!diags) return 0;
  return count_level(diags->items, level == LEXSTAB_LEVEL_ERROR ? Diagnostic::Level::error : Diagnostic::Level::warning);
}

lexstab_level lexstab_diagnostic_level(const lexstab_diagnostics* diags, size_t i) {
  if (!diags || i >= diags->items.size()) return LEXSTAB_LEVEL_ERROR;
  return diags->items[i].level == Diagnostic::Level::error ? LEXSTAB_LEVEL_ERROR : LEXSTAB_LEVEL_WARNING;
}

size_t lexstab_diagnostic_line(const lexstab_diagnostics* diags, size_t i) {
  if (!diags || i >= diags->items.size()) return 0;
  return diags->items[i].line;
}

const char* lexstab_diagnostic_message(const lexstab_diagnostics* diags, size_t i) {
  if (!diags || i >= diags->items.size()) return nullptr;
  return diags->items[i].message.c_str();
}

void lexstab_diagnostics_free(lexstab_diagnostics* diags) { delete diags; }

/* comparative */

lexstab_status lexstab_dstat(const lexstab_tree* tree, const lexstab_cognates* cognates, const char* concept_id,
                             const char* cognate_id, size_t n_reps, uint64_t seed, size_t workers,
                             lexstab_dstat_result* out) {
  LEXSTAB_REQUIRE(tree, cognates, concept_id, cognate_id, out);
  return guard([&] {
    const auto taxa = tree->tree.tip_labels();
    const auto con = cognates->matrix.concept_index(concept_id);
    if (!con) throw DomainError(std::string("unknown concept '") + concept_id + "'");
    BinaryTrait trait;
    try {
      trait = binary_trait(cognates->matrix, concept_id, cognate_id, taxa);
    } catch (const DataError& e) {
      throw DomainError(e.what());
    }
    const DStatConfig cfg{n_reps, class_seed(seed, concept_id, cognate_id), workers == 0 ? 1 : workers};
    const DStatResult r = d_statistic(tree->tree, trait.presence, trait.attested, cfg);
    *out = {r.d_obs, r.mean_d_random, r.mean_d_bm, r.sd_d_random, r.sd_d_bm, r.D,
            r.p_random, r.p_bm, r.n_reps, r.n_tips_used, r.n_present};
  });
}

lexstab_status lexstab_simulate_bm(const lexstab_tree* tree, double sigma2, double root_value, uint64_t seed,
                                   double* values, size_t n) {
  LEXSTAB_REQUIRE(tree, values);
  if (n != tree->tree.tip_count()) return fail(LEXSTAB_ERR_ARGUMENT, "value buffer size does not match tip count");
  return guard([&] {
    const auto tips = tip_values(tree->tree, simulate_bm(tree->tree, {sigma2, root_value, seed}));
    std::copy(tips.begin(), tips.end(), values);
  });
}

lexstab_status lexstab_simulate_bm_table(const lexstab_tree* tree, double sigma2, double root_value, uint64_t seed,
                                         char** out) {
  LEXSTAB_REQUIRE(tree, out);
  return guard([&] {
    const auto tips = tip_values(tree->tree, simulate_bm(tree->tree, {sigma2, root_value, seed}));
    std::string text = "tip\tvalue\n";
    for (size_t i = 0; i < tips.size(); ++i)
      text += tree->tree.node(tree->tree.tips()[i]).label + '\t' + format_real(tips[i]) + '\n';
    *out = dup_string(text);
  });
}

/* pipeline */

void lexstab_config_init(lexstab_config* config) {
  if (!config) return;
  const RunConfig d;
  *config = {d.seed, d.n_reps, d.wordlist_k, 0, d.k_min, d.k_max, d.restarts, d.stability_mix, d.workers};
}

lexstab_status lexstab_metrics_compute(const lexstab_tree* tree, const lexstab_cognates* cognates,
                                       const lexstab_config* config, lexstab_metrics** out) {
  LEXSTAB_REQUIRE(tree, cognates, config, out);
  *out = nullptr;
  return guard([&] {
    MetricsStage stage = run_metrics_stage(tree->tree, cognates->matrix, to_run_config(*config),
                                           {tree->digest, cognates->digest});
    *out = new lexstab_metrics{std::move(stage)};
  });
}

lexstab_status lexstab_metrics_load(const char* path, lexstab_metrics** out) {
  LEXSTAB_REQUIRE(path, out);
  *out = nullptr;
  return guard([&] { *out = new lexstab_metrics{read_metrics_cache(read_file(path))}; });
}

lexstab_status lexstab_metrics_save(const lexstab_metrics* metrics, const char* path) {
  LEXSTAB_REQUIRE(metrics, path);
  return guard([&] { write_file(path, write_metrics_cache(metrics->stage)); });
}

size_t lexstab_metrics_concept_count(const lexstab_metrics* metrics) { return metrics ? metrics->stage.metrics.size() : 0; }
uint64_t lexstab_metrics_seed(const lexstab_metrics* metrics) { return metrics ? metrics->stage.seed : 0; }

lexstab_status lexstab_metrics_write_table(const lexstab_metrics* metrics, const char* path) {
  LEXSTAB_REQUIRE(metrics, path);
  return guard([&] { write_file(path, write_feature_table(build_feature_table(metrics->stage.metrics))); });
}

lexstab_status lexstab_metrics_write_provenance(const lexstab_metrics* metrics, const char* path) {
  LEXSTAB_REQUIRE(metrics, path);
  return guard([&] {
    write_file(path, emit_provenance(build_feature_table(metrics->stage.metrics), metrics->stage.metrics));
  });
}

void lexstab_metrics_free(lexstab_metrics* metrics) { delete metrics; }

lexstab_status lexstab_analysis_run(const lexstab_metrics* metrics, const lexstab_config* config,
                                    lexstab_analysis** out) {
  LEXSTAB_REQUIRE(metrics, config, out);
  *out = nullptr;
  return guard([&] { *out = new lexstab_analysis{analyze(metrics->stage, to_run_config(*config))}; });
}

lexstab_status lexstab_analysis_render(const lexstab_analysis* analysis, lexstab_output kind, char** out) {
  LEXSTAB_REQUIRE(analysis, out);
  return guard([&] { *out = dup_string(render(analysis->analysis, kind)); });
}

lexstab_status lexstab_analysis_write(const lexstab_analysis* analysis, lexstab_output kind, const char* path) {
  LEXSTAB_REQUIRE(analysis, path);
  return guard([&] { write_file(path, render(analysis->analysis, kind)); });
}

size_t lexstab_analysis_cluster_k(const lexstab_analysis* analysis) {
  return analysis ? analysis->analysis.clusters.k : 0;
}

size_t lexstab_analysis_selected_count(const lexstab_analysis* analysis) {
  return analysis ? analysis->analysis.selection.concepts.size() : 0;
}

const char* lexstab_analysis_selected(const lexstab_analysis* analysis, size_t i) {
  if (!analysis || i >= analysis->analysis.selection.concepts.size()) return nullptr;
  return analysis->analysis.selection.concepts[i].c_str();
}

size_t lexstab_analysis_warning_count(const lexstab_analysis* analysis) {
  return analysis ? analysis->analysis.warnings.size() : 0;
}

const char* lexstab_analysis_warning(const lexstab_analysis* analysis, size_t i) {
  if (!analysis || i >= analysis->analysis.warnings.size()) return nullptr;
  return analysis->analysis.warnings[i].c_str();
}

void lexstab_analysis_free(lexstab_analysis* analysis) { delete analysis; }

}  // extern "C"
