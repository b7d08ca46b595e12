// lexstab command line. Talks to the library only through the C API.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lexstab/lexstab.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitIo = 2;

struct Options {
  std::string tree;
  std::string cognates;
  std::string metrics;
  std::optional<std::uint64_t> seed;
  std::size_t reps = 1000;
  std::size_t k = 30;
  std::size_t clusters = 0;
  std::size_t k_min = 2;
  std::size_t k_max = 6;
  std::size_t restarts = 25;
  double stability_mix = 0.8;
  std::string out;
  std::size_t workers = 1;
  std::string concept_id;
  std::string cognate_id;
  double sigma2 = 1.0;
  double root = 0.0;
};

// Carries a C API failure up to main.
struct Failure {
  int exit_code;
  std::string message;
};

[[noreturn]] void raise(lexstab_status st, const std::string& context = {}) {
  std::string msg = lexstab_last_error();
  if (msg.empty()) msg = lexstab_status_name(st);
  if (!context.empty()) msg = context + ": " + msg;
  throw Failure{st == LEXSTAB_ERR_IO ? kExitIo : kExitDomain, msg};
}

void check(lexstab_status st, const std::string& context = {}) {
  if (st != LEXSTAB_OK) raise(st, context);
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{kExitDomain, msg}; }

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using TreePtr = std::unique_ptr<lexstab_tree, Deleter<lexstab_tree, lexstab_tree_free>>;
using CognatesPtr = std::unique_ptr<lexstab_cognates, Deleter<lexstab_cognates, lexstab_cognates_free>>;
using DiagPtr = std::unique_ptr<lexstab_diagnostics, Deleter<lexstab_diagnostics, lexstab_diagnostics_free>>;
using MetricsPtr = std::unique_ptr<lexstab_metrics, Deleter<lexstab_metrics, lexstab_metrics_free>>;
using AnalysisPtr = std::unique_ptr<lexstab_analysis, Deleter<lexstab_analysis, lexstab_analysis_free>>;

std::string take_string(char* s) {
  std::string out(s ? s : "");
  lexstab_string_free(s);
  return out;
}

void require_inputs(const Options& o, const char* cmd) {
  if (o.tree.empty()) usage_error(std::string(cmd) + ": --tree is required");
  if (o.cognates.empty()) usage_error(std::string(cmd) + ": --cognates is required");
}

std::uint64_t require_seed(const Options& o, const char* cmd) {
  if (!o.seed) usage_error(std::string(cmd) + ": --seed is required (no default seed is used)");
  return *o.seed;
}

lexstab_config make_config(const Options& o) {
  lexstab_config c;
  lexstab_config_init(&c);
  c.seed = o.seed.value_or(0);
  c.n_reps = o.reps;
  c.wordlist_k = o.k;
  c.cluster_k = o.clusters;
  c.k_min = o.k_min;
  c.k_max = o.k_max;
  c.restarts = o.restarts;
  c.stability_mix = o.stability_mix;
  c.workers = o.workers;
  return c;
}

TreePtr load_tree(const std::string& path) {
  lexstab_tree* t = nullptr;
  const lexstab_status st = lexstab_tree_load(path.c_str(), &t);
  if (st == LEXSTAB_ERR_PARSE)
    raise(st, path + " (offset " + std::to_string(lexstab_last_error_location()) + ")");
  check(st, path);
  return TreePtr(t);
}

CognatesPtr load_cognates(const std::string& path) {
  lexstab_cognates* c = nullptr;
  lexstab_diagnostics* w = nullptr;
  check(lexstab_cognates_load(path.c_str(), &c, &w), path);
  DiagPtr warnings(w);
  for (std::size_t i = 0; i < lexstab_diagnostics_count(warnings.get()); ++i)
    std::cerr << "warning: " << lexstab_diagnostic_message(warnings.get(), i) << '\n';
  return CognatesPtr(c);
}

fs::path out_dir(const Options& o) {
  fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{kExitIo, "cannot create output directory " + dir.string() + ": " + ec.message()};
  return dir;
}

std::string in_dir(const fs::path& dir, const char* name) { return (dir / name).string(); }

MetricsPtr compute_metrics(const Options& o, const char* cmd) {
  require_inputs(o, cmd);
  require_seed(o, cmd);
  TreePtr tree = load_tree(o.tree);
  CognatesPtr cognates = load_cognates(o.cognates);
  const lexstab_config cfg = make_config(o);
  lexstab_metrics* m = nullptr;
  check(lexstab_metrics_compute(tree.get(), cognates.get(), &cfg, &m), "metrics");
  return MetricsPtr(m);
}

void save_stage(const lexstab_metrics* m, const fs::path& dir) {
  check(lexstab_metrics_save(m, in_dir(dir, "metrics.json").c_str()));
  check(lexstab_metrics_write_table(m, in_dir(dir, "features.csv").c_str()));
  check(lexstab_metrics_write_provenance(m, in_dir(dir, "provenance.json").c_str()));
}

// Metrics for the downstream subcommands: an explicit cache, then a fresh
// computation if inputs were given, then the cache in the output directory.
MetricsPtr stage_metrics(Options& o, const fs::path& dir, const char* cmd) {
  lexstab_metrics* m = nullptr;
  if (!o.metrics.empty()) {
    check(lexstab_metrics_load(o.metrics.c_str(), &m), o.metrics);
  } else if (!o.tree.empty() || !o.cognates.empty()) {
    MetricsPtr fresh = compute_metrics(o, cmd);
    save_stage(fresh.get(), dir);
    return fresh;
  } else {
    const std::string cached = in_dir(dir, "metrics.json");
    if (!fs::exists(cached))
      usage_error(std::string(cmd) + ": no cached metrics in " + dir.string() +
                  "; run 'metrics' first or pass --tree and --cognates");
    check(lexstab_metrics_load(cached.c_str(), &m), cached);
  }
  MetricsPtr stage(m);
  if (!o.seed) o.seed = lexstab_metrics_seed(stage.get());
  return stage;
}

AnalysisPtr run_analysis(const lexstab_metrics* m, const Options& o) {
  const lexstab_config cfg = make_config(o);
  lexstab_analysis* a = nullptr;
  check(lexstab_analysis_run(m, &cfg, &a));
  return AnalysisPtr(a);
}

void print_warnings(const lexstab_analysis* a) {
  for (std::size_t i = 0; i < lexstab_analysis_warning_count(a); ++i)
    std::cerr << "warning: " << lexstab_analysis_warning(a, i) << '\n';
}

int cmd_validate(const Options& o) {
  require_inputs(o, "validate");
  lexstab_diagnostics* d = nullptr;
  check(lexstab_validate_files(o.tree.c_str(), o.cognates.c_str(), &d));
  DiagPtr diags(d);
  for (std::size_t i = 0; i < lexstab_diagnostics_count(d); ++i) {
    const bool is_error = lexstab_diagnostic_level(d, i) == LEXSTAB_LEVEL_ERROR;
    std::cout << (is_error ? "error" : "warning");
    if (const std::size_t line = lexstab_diagnostic_line(d, i)) std::cout << " (line " << line << ")";
    std::cout << ": " << lexstab_diagnostic_message(d, i) << '\n';
  }
  const std::size_t errors = lexstab_diagnostics_count_level(d, LEXSTAB_LEVEL_ERROR);
  const std::size_t warnings = lexstab_diagnostics_count_level(d, LEXSTAB_LEVEL_WARNING);
  std::cout << errors << (errors == 1 ? " error, " : " errors, ") << warnings
            << (warnings == 1 ? " warning" : " warnings") << '\n';
  return errors ? kExitDomain : kExitOk;
}

int cmd_metrics(const Options& o) {
  MetricsPtr m = compute_metrics(o, "metrics");
  const fs::path dir = out_dir(o);
  save_stage(m.get(), dir);
  std::cout << lexstab_metrics_concept_count(m.get()) << " concepts -> " << in_dir(dir, "metrics.json") << '\n';
  return kExitOk;
}

int cmd_dstat(const Options& o) {
  require_inputs(o, "dstat");
  const std::uint64_t seed = require_seed(o, "dstat");
  if (o.concept_id.empty() || o.cognate_id.empty()) usage_error("dstat: --concept and --class are required");
  TreePtr tree = load_tree(o.tree);
  CognatesPtr cognates = load_cognates(o.cognates);
  lexstab_dstat_result r;
  check(lexstab_dstat(tree.get(), cognates.get(), o.concept_id.c_str(), o.cognate_id.c_str(), o.reps, seed,
                      o.workers, &r),
        "dstat");
  std::printf("concept\t%s\nclass\t%s\n", o.concept_id.c_str(), o.cognate_id.c_str());
  std::printf("tips_used\t%zu\npresent\t%zu\nreps\t%zu\n", r.n_tips_used, r.n_present, r.n_reps);
  std::printf("d_obs\t%.10g\nmean_d_random\t%.10g\nmean_d_bm\t%.10g\n", r.d_obs, r.mean_d_random, r.mean_d_bm);
  std::printf("sd_d_random\t%.10g\nsd_d_bm\t%.10g\n", r.sd_d_random, r.sd_d_bm);
  std::printf("D\t%.10g\np_random\t%.10g\np_bm\t%.10g\n", r.D, r.p_random, r.p_bm);
  return kExitOk;
}

int cmd_simulate(const Options& o) {
  if (o.tree.empty()) usage_error("simulate: --tree is required");
  const std::uint64_t seed = require_seed(o, "simulate");
  TreePtr tree = load_tree(o.tree);
  char* table = nullptr;
  check(lexstab_simulate_bm_table(tree.get(), o.sigma2, o.root, seed, &table), "simulate");
  const std::string text = take_string(table);
  if (o.out.empty()) {
    std::cout << text;
    return kExitOk;
  }
  const fs::path dir = out_dir(o);
  const std::string path = in_dir(dir, "simulated.tsv");
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Failure{kExitIo, "cannot write " + path};
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  if (std::fclose(f) != 0 || !ok) throw Failure{kExitIo, "cannot write " + path};
  std::cout << path << '\n';
  return kExitOk;
}

int cmd_pca(Options& o) {
  const fs::path dir = out_dir(o);
  MetricsPtr m = stage_metrics(o, dir, "pca");
  AnalysisPtr a = run_analysis(m.get(), o);
  check(lexstab_analysis_write(a.get(), LEXSTAB_OUTPUT_PCA, in_dir(dir, "pca.json").c_str()));
  print_warnings(a.get());
  std::cout << in_dir(dir, "pca.json") << '\n';
  return kExitOk;
}

int cmd_cluster(Options& o) {
  const fs::path dir = out_dir(o);
  MetricsPtr m = stage_metrics(o, dir, "cluster");
  AnalysisPtr a = run_analysis(m.get(), o);
  check(lexstab_analysis_write(a.get(), LEXSTAB_OUTPUT_CLUSTERS, in_dir(dir, "clusters.json").c_str()));
  print_warnings(a.get());
  std::cout << "k = " << lexstab_analysis_cluster_k(a.get()) << " -> " << in_dir(dir, "clusters.json") << '\n';
  return kExitOk;
}

void write_outputs(const lexstab_analysis* a, const fs::path& dir) {
  check(lexstab_analysis_write(a, LEXSTAB_OUTPUT_REPORT, in_dir(dir, "report.json").c_str()));
  check(lexstab_analysis_write(a, LEXSTAB_OUTPUT_RANKING, in_dir(dir, "ranking.tsv").c_str()));
  check(lexstab_analysis_write(a, LEXSTAB_OUTPUT_SCATTER, in_dir(dir, "scatter.svg").c_str()));
}

void print_selection(const lexstab_analysis* a) {
  const std::size_t n = lexstab_analysis_selected_count(a);
  std::cout << "top " << n << " concepts:\n";
  for (std::size_t i = 0; i < n; ++i) std::cout << (i + 1) << '\t' << lexstab_analysis_selected(a, i) << '\n';
}

int cmd_report(Options& o) {
  const fs::path dir = out_dir(o);
  MetricsPtr m = stage_metrics(o, dir, "report");
  AnalysisPtr a = run_analysis(m.get(), o);
  write_outputs(a.get(), dir);
  print_warnings(a.get());
  std::cout << in_dir(dir, "report.json") << '\n';
  return kExitOk;
}

int cmd_rank(Options& o) {
  require_inputs(o, "rank");
  require_seed(o, "rank");
  const fs::path dir = out_dir(o);
  MetricsPtr m = compute_metrics(o, "rank");
  save_stage(m.get(), dir);
  AnalysisPtr a = run_analysis(m.get(), o);
  write_outputs(a.get(), dir);
  print_warnings(a.get());
  print_selection(a.get());
  return kExitOk;
}

void add_inputs(CLI::App* cmd, Options& o) {
  cmd->add_option("--tree", o.tree, "Newick tree file");
  cmd->add_option("--cognates", o.cognates, "cognate table (CSV or TSV)");
}

void add_run(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "random seed (required for stochastic steps)");
  cmd->add_option("--reps", o.reps, "null replicates per cognate class")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--workers", o.workers, "worker threads; output does not depend on it")
      ->capture_default_str()
      ->check(CLI::Range(1, 256));
  cmd->add_option("--out", o.out, "output directory");
}

void add_analysis(CLI::App* cmd, Options& o) {
  cmd->add_option("--metrics", o.metrics, "cached metrics.json to start from");
  cmd->add_option("--k", o.k, "word list size")->capture_default_str();
  cmd->add_option("--clusters", o.clusters, "k-means k; 0 chooses by silhouette")->capture_default_str();
  cmd->add_option("--k-min", o.k_min, "smallest k tried when choosing")->capture_default_str();
  cmd->add_option("--k-max", o.k_max, "largest k tried when choosing")->capture_default_str();
  cmd->add_option("--restarts", o.restarts, "k-means restarts")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--stability-mix", o.stability_mix, "warn above this fraction of SE-quadrant picks")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
}

/// Keys in a flat config file belong to whichever subcommand was chosen.
class FlatConfig : public CLI::ConfigINI {
 public:
  explicit FlatConfig(const CLI::App* app) : app_(app) {}
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigINI::from_config(input);
    const auto chosen = app_->get_subcommands();
    if (chosen.empty()) return items;
    for (auto& item : items)
      if (item.parents.empty()) item.parents.push_back(chosen.front()->get_name());
    return items;
  }

 private:
  const CLI::App* app_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lexstab: rank meaning classes for lexical phylogenetics"};
  app.set_version_flag("--version", std::string(lexstab_version()));
  app.require_subcommand(1);
  app.set_config("--config", "", "flat config file mirroring the flags (key = value); command-line flags win");
  app.config_formatter(std::make_shared<FlatConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();

  Options o;

  CLI::App* validate = app.add_subcommand("validate", "check a tree and cognate table");
  add_inputs(validate, o);

  CLI::App* metrics = app.add_subcommand("metrics", "compute per-concept metrics and cache them");
  add_inputs(metrics, o);
  add_run(metrics, o);

  CLI::App* dstat = app.add_subcommand("dstat", "D statistic for one cognate class");
  add_inputs(dstat, o);
  add_run(dstat, o);
  dstat->add_option("--concept", o.concept_id, "concept ID");
  dstat->add_option("--class", o.cognate_id, "cognate class ID");

  CLI::App* simulate = app.add_subcommand("simulate", "Brownian-motion tip values on a tree");
  simulate->add_option("--tree", o.tree, "Newick tree file");
  simulate->add_option("--seed", o.seed, "random seed");
  simulate->add_option("--sigma2", o.sigma2, "rate")->capture_default_str();
  simulate->add_option("--root", o.root, "root value")->capture_default_str();
  simulate->add_option("--out", o.out, "output directory (stdout if omitted)");

  CLI::App* pca = app.add_subcommand("pca", "principal components of the feature table");
  CLI::App* cluster = app.add_subcommand("cluster", "k-means on the leading components");
  CLI::App* report = app.add_subcommand("report", "write report, ranking and scatter from cached metrics");
  CLI::App* rank = app.add_subcommand("rank", "full pipeline: metrics through word list selection");
  for (CLI::App* cmd : {pca, cluster, report, rank}) {
    add_inputs(cmd, o);
    add_run(cmd, o);
    add_analysis(cmd, o);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    app.exit(e);
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitDomain;
  }

  try {
    if (validate->parsed()) return cmd_validate(o);
    if (metrics->parsed()) return cmd_metrics(o);
    if (dstat->parsed()) return cmd_dstat(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (pca->parsed()) return cmd_pca(o);
    if (cluster->parsed()) return cmd_cluster(o);
    if (report->parsed()) return cmd_report(o);
    if (rank->parsed()) return cmd_rank(o);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitDomain;
}
