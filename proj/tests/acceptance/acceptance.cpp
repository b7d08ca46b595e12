// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lexstab/cognates.hpp"
#include "lexstab/comparative.hpp"
#include "lexstab/error.hpp"
#include "lexstab/multivariate.hpp"
#include "lexstab/random.hpp"
#include "lexstab/ranking.hpp"
#include "lexstab/tree.hpp"

using namespace lexstab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1 -------------------------------------------------------------------------

Outcome calibration() {
  const auto t0 = std::chrono::steady_clock::now();
  const Tree t = balanced_tree(6);
  const std::vector<std::uint8_t> all(64, 1);
  double bm_sum = 0, shuffled_sum = 0;
  for (std::uint32_t i = 0; i < 200; ++i) {
    const auto values = tip_values(t, simulate_bm(t, {1.0, 0.0, 101}, i));
    const auto bm_trait = threshold_at_prevalence(values, 32, derive_seed(101, "threshold" + std::to_string(i)));
    bm_sum += d_statistic(t, bm_trait, all, {1000, derive_seed(5, "bm" + std::to_string(i)), 1}).D;

    std::vector<std::uint8_t> trait(64, 0);
    std::fill(trait.begin(), trait.begin() + 32, 1);
    RandomStream rng(derive_seed(202, std::to_string(i)), StreamDomain::fixture);
    shuffle(std::span<std::uint8_t>(trait), rng);
    shuffled_sum += d_statistic(t, trait, all, {1000, derive_seed(5, "shuffled" + std::to_string(i)), 1}).D;
  }
  const double bm = bm_sum / 200, shuffled = shuffled_sum / 200, secs = seconds_since(t0);
  return {bm >= -0.2 && bm <= 0.2 && shuffled >= 0.8 && shuffled <= 1.2 && secs < 60.0,
          fmt("mean D: BM-threshold %.4f (want [-0.2, 0.2]), shuffled %.4f (want [0.8, 1.2]); %.1f s", bm, shuffled,
              secs)};
}

// 2 -------------------------------------------------------------------------

// Recomputes every estimate from scratch; sums edges children-first.
struct Naive {
  const Tree& tree;
  std::vector<double> value;

  double weight(NodeId id) const {
    const double len = tree.node(id).length;
    return 1.0 / (len > 0.0 ? len : tree.zero_length_floor());
  }
  double estimate(NodeId id) const {
    const Node& n = tree.node(id);
    if (n.children.empty()) return value[id];
    double num = 0, den = 0;
    for (NodeId c : n.children) {
      num += weight(c) * estimate(c);
      den += weight(c);
    }
    return num / den;
  }
  void add(NodeId id, double& total) const {
    for (NodeId c : tree.node(id).children) add(c, total);
    if (id != tree.root()) total += std::fabs(estimate(id) - estimate(tree.node(id).parent));
  }
};

double naive_d_sum(const Tree& tree, const std::vector<std::uint8_t>& tips) {
  Naive n{tree, std::vector<double>(tree.node_count(), 0.0)};
  const bool flip = tips[0] == 1;
  for (std::size_t i = 0; i < tips.size(); ++i) n.value[tree.tips()[i]] = flip ? 1 - tips[i] : tips[i];
  double total = 0;
  n.add(tree.root(), total);
  return total;
}

Outcome oracle() {
  std::ifstream in(std::string(LEXSTAB_FIXTURE_DIR) + "/small_trees.nwk");
  std::string line;
  std::size_t trees = 0, patterns = 0, mismatches = 0, polytomies = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Tree t = parse_newick(line);
    if (t.tip_count() > 8) continue;
    ++trees;
    polytomies += tree_summary(t).polytomies > 0;
    const unsigned n = static_cast<unsigned>(t.tip_count());
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<std::uint8_t> v(n);
      for (unsigned i = 0; i < n; ++i) v[i] = (mask >> i) & 1u;
      ++patterns;
      mismatches += std::bit_cast<std::uint64_t>(d_sum(t, v)) != std::bit_cast<std::uint64_t>(naive_d_sum(t, v));
    }
  }
  return {trees > 0 && polytomies > 0 && mismatches == 0,
          std::to_string(trees) + " trees (" + std::to_string(polytomies) + " with polytomies), " +
              std::to_string(patterns) + " patterns, " + std::to_string(mismatches) + " bitwise mismatches"};
}

// 3 -------------------------------------------------------------------------

Outcome bm_consistency() {
  const Tree t = balanced_tree(7);
  double sum = 0;
  for (std::uint32_t rep = 0; rep < 500; ++rep) sum += estimate_sigma2(t, tip_values(t, simulate_bm(t, {2.0, 0.0, 31}, rep)));
  const double mean_rate = sum / 500;

  const std::size_t reps = 10000;
  const double depth = t.depths()[t.tips()[0]];
  double s = 0, sq = 0;
  for (std::uint32_t rep = 0; rep < reps; ++rep) {
    const double x = tip_values(t, simulate_bm(t, {2.0, 0.0, 32}, rep))[0];
    s += x;
    sq += x * x;
  }
  const double mean = s / reps;
  const double var = (sq - reps * mean * mean) / (reps - 1);
  const double rel = std::fabs(var / (2.0 * depth) - 1.0);
  return {mean_rate >= 1.9 && mean_rate <= 2.1 && rel <= 0.05,
          fmt("mean sigma2 estimate %.4f (want [1.9, 2.1]); tip variance %.3f vs %.3f (%.1f%% off)", mean_rate, var,
              2.0 * depth, 100 * rel)};
}

// 4 -------------------------------------------------------------------------

FeatureTable table_of(const Matrix& values) {
  FeatureTable t;
  for (std::size_t r = 0; r < values.rows(); ++r) t.rows.push_back("c" + std::to_string(1000 + r));
  t.columns.assign(kFeatureNames.begin(), kFeatureNames.end());
  t.values = values;
  t.mean_D_source.assign(values.rows(), CellSource::computed);
  return t;
}

Outcome pca_structure() {
  const std::size_t n = 200, k = 6;
  RandomStream rng(41, StreamDomain::fixture);
  Matrix m(n, k);
  for (std::size_t r = 0; r < n; ++r) {
    const double f = rng.next_normal();
    for (std::size_t c = 0; c < k; ++c) m(r, c) = c == kColMissing ? f : 0.6 * f + rng.next_normal();
  }
  const PcaResult p = pca(standardize(table_of(m)));
  const double trace = std::accumulate(p.eigenvalues.begin(), p.eigenvalues.end(), 0.0);
  double ortho = 0, recon = 0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      double dot = 0, rec = 0;
      for (std::size_t v = 0; v < k; ++v) {
        dot += p.loadings(v, a) * p.loadings(v, b);
        rec += p.loadings(a, v) * p.eigenvalues[v] * p.loadings(b, v);
      }
      ortho = std::max(ortho, std::fabs(dot - (a == b ? 1.0 : 0.0)));
      recon = std::max(recon, std::fabs(rec - p.correlation(a, b)));
    }
  std::size_t top = 0;
  for (std::size_t v = 1; v < k; ++v)
    if (p.contributions(v, 0) > p.contributions(top, 0)) top = v;
  const bool ok = std::fabs(trace - 6.0) <= 1e-9 && ortho <= 1e-9 && recon <= 1e-8 && top == kColMissing;
  return {ok, fmt("|sum eig - 6| %.1e, orthonormality %.1e, reconstruction %.1e; ", std::fabs(trace - 6.0), ortho,
                  recon) +
                  "top dim-1 contributor " + p.variables[top] + fmt(" (%.1f%%)", p.contributions(top, 0))};
}

// 5 -------------------------------------------------------------------------

Outcome cluster_recovery() {
  const double spread = 0.5;
  const std::size_t per = 50;
  Matrix pts(2 * per, 2);
  std::vector<std::size_t> truth(2 * per);
  RandomStream rng(51, StreamDomain::fixture);
  for (std::size_t i = 0; i < 2 * per; ++i) {
    truth[i] = i / per;
    pts(i, 0) = (truth[i] ? 20 * spread : 0.0) + spread * rng.next_normal();
    pts(i, 1) = spread * rng.next_normal();
  }
  const ClusterAssignment c = kmeans(pts, 2, 7, 25);
  std::size_t same = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) same += c.labels[i] == truth[i];
  const double agree = static_cast<double>(std::max(same, truth.size() - same)) / static_cast<double>(truth.size());
  const ChooseKResult ck = choose_k(pts, 2, 6, 7, 25);
  return {agree == 1.0 && ck.k == 2,
          fmt("label agreement %.0f%%; choose_k on 2..6 -> %.0f (silhouette %.3f)", 100 * agree,
              static_cast<double>(ck.k), ck.silhouette)};
}

// 6 -------------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + LEXSTAB_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("lexstab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string data = LEXSTAB_DATA_DIR;
  const std::string in = " --tree \"" + data + "/tree.nwk\" --cognates \"" + data + "/cognates.tsv\" --seed 7";
  struct Run {
    std::string name;
    int workers;
    double secs = 0;
    int code = -1;
  };
  std::vector<Run> runs{{"w1a", 1}, {"w1b", 1}, {"w8", 8}};
  for (auto& r : runs) {
    const auto t0 = std::chrono::steady_clock::now();
    r.code = run_cli("rank" + in + " --workers " + std::to_string(r.workers) + " --out \"" + (root / r.name).string() + "\"",
                     root / (r.name + ".log"));
    r.secs = seconds_since(t0);
  }
  bool ok = true;
  std::string detail;
  double slowest = 0;
  for (const auto& r : runs) {
    slowest = std::max(slowest, r.secs);
    if (r.code != 0) {
      ok = false;
      detail += "run " + r.name + " exited " + std::to_string(r.code) + ": " + slurp(root / (r.name + ".log")) + "; ";
    }
  }
  std::size_t compared = 0;
  for (const char* f : {"report.json", "ranking.tsv", "scatter.svg"}) {
    const std::string ref = slurp(root / runs[0].name / f);
    if (ref.empty()) ok = false;
    for (std::size_t i = 1; i < runs.size(); ++i) {
      ++compared;
      if (slurp(root / runs[i].name / f) != ref) {
        ok = false;
        detail += std::string(f) + " differs in " + runs[i].name + "; ";
      }
    }
  }
  if (slowest >= 300.0) ok = false;
  fs::remove_all(root);
  return {ok, detail + std::to_string(compared) + " file comparisons (two runs at 1 worker, one at 8); slowest run " +
                  fmt("%.1f s (limit 300 s)", slowest)};
}

// 7 -------------------------------------------------------------------------

PcaResult flip(const PcaResult& p, std::size_t j) {
  PcaResult out = p;
  for (std::size_t v = 0; v < out.loadings.rows(); ++v) out.loadings(v, j) = -out.loadings(v, j);
  for (std::size_t r = 0; r < out.scores.rows(); ++r) out.scores(r, j) = -out.scores(r, j);
  return out;
}

Outcome orientation() {
  const std::size_t n = 50;
  RandomStream rng(71, StreamDomain::fixture);
  Matrix m(n, 6);
  for (std::size_t r = 0; r < n; ++r) {
    const double f = rng.next_normal();
    for (std::size_t c = 0; c < 6; ++c) m(r, c) = rng.next_normal() + (c % 2 ? f : -f);
  }
  const PcaResult p = pca(standardize(table_of(m)));
  const PcaResult o = orient_axes(p);
  const PcaResult oo = orient_axes(o);
  const bool idempotent = oo.loadings == o.loadings && oo.scores == o.scores && !oo.flipped[0] && !oo.flipped[1];

  const ClusterAssignment c = kmeans(leading_scores(o), 3, 5);
  const std::string base = write_ranking(suitability_rank(o, c));
  bool sign_invariant = true;
  for (const PcaResult& q : {flip(p, 0), flip(p, 1), flip(flip(p, 0), 1)}) {
    const PcaResult oq = orient_axes(q);
    sign_invariant = sign_invariant && write_ranking(suitability_rank(oq, kmeans(leading_scores(oq), 3, 5))) == base;
  }

  const SuitabilityRanking ranking = suitability_rank(o, c);
  bool prefix = true;
  std::vector<std::string> prev;
  for (std::size_t k = 1; k <= n; ++k) {
    const auto cur = select_wordlist(ranking, k).concepts;
    prefix = prefix && cur.size() == k && std::equal(prev.begin(), prev.end(), cur.begin());
    prev = cur;
  }

  // every concept high on PC1 and low on PC2: the most stable corner
  PcaResult stable;
  stable.variables.assign(kFeatureNames.begin(), kFeatureNames.end());
  stable.loadings = Matrix(6, 2);
  stable.loadings(kColMissing, 0) = -1.0;
  stable.loadings(kColSingletons, 1) = 1.0;
  stable.scores = Matrix(40, 2);
  for (std::size_t i = 0; i < 40; ++i) {
    stable.rows.push_back("s" + std::to_string(100 + i));
    stable.scores(i, 0) = 1.0 + 0.01 * static_cast<double>(i);
    stable.scores(i, 1) = -0.5 - 0.01 * static_cast<double>(i);
  }
  stable.eigenvalues = {1.0, 1.0};
  ClusterAssignment one;
  one.labels.assign(40, 0);
  one.k = 1;
  const WordlistSelection sel = select_wordlist(suitability_rank(stable, one), 30);
  const bool warned = sel.warnings.size() == 1 && sel.warnings[0].find("underestimate splits") != std::string::npos;

  return {idempotent && sign_invariant && prefix && warned,
          std::string("idempotent ") + (idempotent ? "yes" : "no") + ", sign-flip invariant " +
              (sign_invariant ? "yes" : "no") + ", prefix property " + (prefix ? "yes" : "no") +
              ", SE warning " + (warned ? "fired" : "missing")};
}

// 8 -------------------------------------------------------------------------

std::string mutate(std::string s, std::mt19937_64& gen, const std::string& alphabet) {
  const int edits = 1 + static_cast<int>(gen() % 4);
  for (int e = 0; e < edits; ++e) {
    const std::size_t pos = s.empty() ? 0 : gen() % (s.size() + 1);
    const char c = alphabet[gen() % alphabet.size()];
    switch (gen() % 4) {
      case 0: s.insert(s.begin() + static_cast<std::ptrdiff_t>(pos), c); break;
      case 1: if (pos < s.size()) s.erase(pos, 1); break;
      case 2: if (pos < s.size()) s[pos] = c; break;
      default: s.resize(pos); break;
    }
  }
  return s;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) + 1; }

Outcome robustness() {
  std::size_t cases = 0, structured = 0, bad = 0;
  std::string first_bad;
  auto unexpected = [&](const std::string& what) {
    if (bad++ == 0) first_bad = what;
  };

  std::mt19937_64 gen(8);
  const std::string newick = slurp(std::string(LEXSTAB_FIXTURE_DIR) + "/small_trees.nwk");
  const std::string trees[] = {"((A:1,B:2)ab:0.5,(C:1,D:1e-2):3,E);", "(('x y':1,[c]B_2:0.1):0,C:1,(D,E,F):2)r;",
                               newick};
  for (const auto& base : trees)
    for (int i = 0; i < 4000; ++i) {
      const std::string text = mutate(base, gen, "(),:;'[]_ .e-+0123456789ABxyz\n\t\"");
      ++cases;
      try {
        parse_newick(text);
      } catch (const ParseError& e) {
        ++structured;
        if (e.offset() > text.size()) unexpected("offset past end: " + std::string(e.what()));
      } catch (const std::exception& e) {
        unexpected(std::string("newick: ") + e.what());
      }
    }

  auto load = [&](const std::string& text) {
    ++cases;
    std::istringstream in(text);
    try {
      load_cognates(in);
    } catch (const DataError& e) {
      ++structured;
      if (e.line() == 0 && text.find('\n') != std::string::npos && e.message() != "empty input: no header row")
        unexpected("no line: " + std::string(e.what()));
      if (e.line() > line_count(text)) unexpected("line past end: " + std::string(e.what()));
    } catch (const std::exception& e) {
      unexpected(std::string("table: ") + e.what());
    }
  };
  const std::string table =
      "language,concept,cognate_id,loan\nA,eye,1,0\nB,eye,1,0\nC,eye,\"2,x\",1\nA,ear,3,\nB,ear,4,0\nC,ear,3,0\n";
  for (int i = 0; i < 6000; ++i) load(mutate(table, gen, ",\t\n\"01aAeB "));
  const std::string corpus = slurp(std::string(LEXSTAB_DATA_DIR) + "/cognates.tsv");
  for (int i = 0; i < 60; ++i) load(corpus.substr(0, gen() % corpus.size()));
  const std::size_t header_end = corpus.find('\n') + 1;
  const std::string row = corpus.substr(header_end, corpus.find('\n', header_end) + 1 - header_end);
  const std::size_t before = structured;
  load(corpus + row);
  if (structured == before) unexpected("duplicate row accepted");

  return {bad == 0, std::to_string(cases) + " inputs, " + std::to_string(structured) + " structured errors, " +
                        std::to_string(bad) + " unexpected" + (first_bad.empty() ? "" : " (" + first_bad + ")")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"D-statistic calibration", calibration},
      {"change score oracle equivalence", oracle},
      {"BM consistency", bm_consistency},
      {"PCA structure", pca_structure},
      {"clustering recovery", cluster_recovery},
      {"end-to-end determinism", determinism},
      {"orientation and ranking invariants", orientation},
      {"parser and ingestion robustness", robustness},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu %s: %s - %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
