#include "lexstab/comparative.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "lexstab/error.hpp"
#include "lexstab/parallel.hpp"

namespace lexstab {
namespace {

void require_tip_count(const Tree& tree, std::size_t n) {
  if (n != tree.tip_count())
    throw DomainError("expected " + std::to_string(tree.tip_count()) + " tip values, got " + std::to_string(n));
}

/// Precomputed edge weights for repeated nodal-estimate / change-score passes.
class ChangeScore {
 public:
  explicit ChangeScore(const Tree& tree) : tree_(tree), weight_(tree.node_count(), 0.0) {
    const double floor = tree.zero_length_floor();
    for (NodeId i = 0; i < tree.node_count(); ++i) {
      const double len = tree.node(i).length;
      weight_[i] = 1.0 / (len > 0.0 ? len : floor);
    }
  }

  void estimates(std::span<const double> tips, std::vector<double>& x) const {
    x.assign(tree_.node_count(), 0.0);
    for (std::size_t t = 0; t < tips.size(); ++t) x[tree_.tips()[t]] = tips[t];
    for (const NodeId id : tree_.postorder()) {
      const auto& ch = tree_.node(id).children;
      if (ch.empty()) continue;
      double num = 0.0;
      double den = 0.0;
      for (const NodeId c : ch) {
        num += weight_[c] * x[c];
        den += weight_[c];
      }
      x[id] = num / den;
    }
  }

  // Binary tips are scored on the representative whose first tip is 0, so a
  // trait and its complement give bitwise-equal scores.
  double score(std::span<const double> tips, std::vector<double>& x) const {
    if (!tips.empty() && tips[0] == 1.0) {
      std::vector<double> flipped(tips.size());
      for (std::size_t i = 0; i < tips.size(); ++i) flipped[i] = 1.0 - tips[i];
      estimates(flipped, x);
    } else {
      estimates(tips, x);
    }
    double total = 0.0;
    const NodeId root = tree_.root();
    for (const NodeId id : tree_.postorder())
      if (id != root) total += std::fabs(x[id] - x[tree_.node(id).parent]);
    return total;
  }

 private:
  const Tree& tree_;
  std::vector<double> weight_;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (const double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<double> simulate_bm(const Tree& tree, const BmParams& params, std::uint32_t replicate,
                                StreamDomain domain) {
  if (!(params.sigma2 > 0.0) || !std::isfinite(params.sigma2))
    throw DomainError("sigma2 must be positive and finite");
  std::vector<double> x(tree.node_count(), 0.0);
  x[tree.root()] = params.root_value;
  // Node ids are in preorder, so every parent is filled before its children.
  for (NodeId i = 0; i < tree.node_count(); ++i) {
    if (i == tree.root()) continue;
    const double len = tree.node(i).length;
    const double parent = x[tree.node(i).parent];
    x[i] = len > 0.0 ? parent + std::sqrt(params.sigma2 * len) * RandomStream::normal_at(params.seed, domain, replicate, i)
                     : parent;
  }
  return x;
}

std::vector<double> tip_values(const Tree& tree, std::span<const double> node_values) {
  std::vector<double> out;
  out.reserve(tree.tip_count());
  for (const NodeId t : tree.tips()) out.push_back(node_values[t]);
  return out;
}

std::vector<double> nodal_estimates(const Tree& tree, std::span<const double> tips) {
  require_tip_count(tree, tips.size());
  for (const double v : tips)
    if (!std::isfinite(v)) throw DomainError("tip values must be finite");
  std::vector<double> x;
  ChangeScore(tree).estimates(tips, x);
  return x;
}

double estimate_sigma2(const Tree& tree, std::span<const double> tips, std::uint64_t seed) {
  require_tip_count(tree, tips.size());
  if (tips.size() < 2) throw DomainError("need >= 2 tips");
  for (const double v : tips)
    if (!std::isfinite(v)) throw DomainError("tip values must be finite");
  if (std::all_of(tips.begin(), tips.end(), [&](double v) { return v == tips[0]; }))
    throw DomainError("zero variance");

  const double floor = tree.zero_length_floor();
  auto raw = [&](double len) { return len > 0.0 ? len : floor; };

  struct Partial {
    double value;
    double length;  // branch length to the parent, extended by pruning
  };
  std::vector<Partial> at(tree.node_count());
  for (std::size_t t = 0; t < tips.size(); ++t) {
    const NodeId id = tree.tips()[t];
    at[id] = {tips[t], raw(tree.node(id).length)};
  }

  RandomStream rng(seed, StreamDomain::polytomy);
  double sum_sq = 0.0;
  std::size_t contrasts = 0;
  auto join = [&](const Partial& a, const Partial& b) {
    const double v = a.length + b.length;
    const double u = (a.value - b.value) / std::sqrt(v);
    sum_sq += u * u;
    ++contrasts;
    return Partial{(a.value / a.length + b.value / b.length) / (1.0 / a.length + 1.0 / b.length),
                   a.length * b.length / v};
  };

  for (const NodeId id : tree.postorder()) {
    const auto& ch = tree.node(id).children;
    if (ch.empty()) continue;
    std::vector<Partial> pool;
    pool.reserve(ch.size());
    for (const NodeId c : ch) pool.push_back(at[c]);
    // Random resolution of a polytomy: join two random members under a new
    // zero-length (floored) branch until two remain.
    while (pool.size() > 2) {
      const auto i = static_cast<std::size_t>(rng.next_below(pool.size()));
      auto j = static_cast<std::size_t>(rng.next_below(pool.size() - 1));
      if (j >= i) ++j;
      Partial merged = join(pool[i], pool[j]);
      merged.length += floor;
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(std::min(i, j)));
      pool.push_back(merged);
    }
    Partial node = pool.size() == 2 ? join(pool[0], pool[1]) : Partial{pool[0].value, pool[0].length};
    if (id != tree.root()) node.length += raw(tree.node(id).length);
    at[id] = node;
  }
  return sum_sq / static_cast<double>(contrasts);
}

double d_sum(const Tree& tree, std::span<const std::uint8_t> tips) {
  require_tip_count(tree, tips.size());
  std::vector<double> values(tips.size());
  bool any0 = false;
  bool any1 = false;
  for (std::size_t i = 0; i < tips.size(); ++i) {
    if (tips[i] > 1) throw DomainError("binary trait values must be 0 or 1");
    values[i] = tips[i];
    (tips[i] ? any1 : any0) = true;
  }
  if (!any0 || !any1) throw DomainError("no variation");
  std::vector<double> scratch;
  return ChangeScore(tree).score(values, scratch);
}

std::vector<std::uint8_t> threshold_at_prevalence(std::span<const double> values, std::size_t m, RandomStream& rng) {
  const std::size_t n = values.size();
  if (m < 1 || m >= n) throw DomainError("prevalence m out of range");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

  const double cut = values[order[m - 1]];
  std::vector<std::uint8_t> out(n, 0);
  std::size_t above = 0;
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] > cut) {
      out[i] = 1;
      ++above;
    } else if (values[i] == cut) {
      tied.push_back(i);
    }
  }
  // Partial Fisher-Yates: the first `need` slots become a uniform sample.
  const std::size_t need = m - above;
  for (std::size_t k = 0; k < need; ++k) {
    const auto j = k + static_cast<std::size_t>(rng.next_below(tied.size() - k));
    std::swap(tied[k], tied[j]);
    out[tied[k]] = 1;
  }
  return out;
}

std::vector<std::uint8_t> threshold_at_prevalence(std::span<const double> values, std::size_t m, std::uint64_t seed) {
  RandomStream rng(seed, StreamDomain::threshold_ties);
  return threshold_at_prevalence(values, m, rng);
}

DStatResult d_statistic(const Tree& tree, std::span<const std::uint8_t> presence,
                        std::span<const std::uint8_t> attested, const DStatConfig& config) {
  require_tip_count(tree, presence.size());
  require_tip_count(tree, attested.size());
  if (config.n_reps == 0) throw DomainError("n_reps must be positive");

  std::map<std::string, std::uint8_t> by_label;
  std::set<std::string> keep;
  for (std::size_t i = 0; i < presence.size(); ++i) {
    if (!attested[i]) continue;
    if (presence[i] > 1) throw DomainError("binary trait values must be 0 or 1");
    const std::string& label = tree.node(tree.tips()[i]).label;
    by_label[label] = presence[i];
    keep.insert(label);
  }
  if (keep.size() < 4) throw DomainError("fewer than 4 usable tips");

  const Tree pruned = keep.size() == tree.tip_count() ? tree : prune_to_taxa(tree, keep);
  const std::size_t n = pruned.tip_count();
  std::vector<double> observed(n);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) {
    observed[i] = by_label.at(pruned.node(pruned.tips()[i]).label);
    ones += observed[i] != 0.0;
  }
  if (ones == 0 || ones == n) throw DomainError("no variation");

  const ChangeScore score(pruned);
  DStatResult r;
  std::vector<double> scratch;
  r.d_obs = score.score(observed, scratch);
  r.n_reps = config.n_reps;
  r.n_tips_used = n;
  r.n_present = ones;

  std::vector<double> d_random(config.n_reps);
  std::vector<double> d_bm(config.n_reps);
  const BmParams bm{1.0, 0.0, config.seed};
  parallel_for(config.n_reps, config.workers, [&](std::size_t rep) {
    const auto replicate = static_cast<std::uint32_t>(rep);
    std::vector<double> x;

    std::vector<double> shuffled = observed;
    RandomStream shuffle_rng(config.seed, StreamDomain::shuffle_null, replicate);
    shuffle(std::span<double>(shuffled), shuffle_rng);
    d_random[rep] = score.score(shuffled, x);

    const auto sim = tip_values(pruned, simulate_bm(pruned, bm, replicate, StreamDomain::bm_null));
    RandomStream tie_rng(config.seed, StreamDomain::bm_null_ties, replicate);
    const auto binary = threshold_at_prevalence(sim, ones, tie_rng);
    const std::vector<double> as_real(binary.begin(), binary.end());
    d_bm[rep] = score.score(as_real, x);
  });

  r.mean_d_random = mean_of(d_random);
  r.mean_d_bm = mean_of(d_bm);
  r.sd_d_random = sd_of(d_random, r.mean_d_random);
  r.sd_d_bm = sd_of(d_bm, r.mean_d_bm);
  if (std::fabs(r.mean_d_random - r.mean_d_bm) <= 1e-12) throw DomainError("nulls indistinguishable");
  r.D = (r.d_obs - r.mean_d_bm) / (r.mean_d_random - r.mean_d_bm);

  std::size_t random_le = 0;
  std::size_t bm_ge = 0;
  for (std::size_t i = 0; i < config.n_reps; ++i) {
    random_le += d_random[i] <= r.d_obs;
    bm_ge += d_bm[i] >= r.d_obs;
  }
  r.p_random = static_cast<double>(random_le) / static_cast<double>(config.n_reps);
  r.p_bm = static_cast<double>(bm_ge) / static_cast<double>(config.n_reps);
  return r;
}

Tree balanced_tree(unsigned levels, double branch_length) {
  TreeBuilder b;
  const NodeId root = b.add_node({}, 0.0, false);
  std::vector<NodeId> frontier{root};
  for (unsigned level = 0; level < levels; ++level) {
    std::vector<NodeId> next;
    next.reserve(frontier.size() * 2);
    for (const NodeId parent : frontier) {
      for (int k = 0; k < 2; ++k) {
        const NodeId child = b.add_node({}, branch_length, true);
        b.attach(parent, child);
        next.push_back(child);
      }
    }
    frontier = std::move(next);
  }
  for (std::size_t i = 0; i < frontier.size(); ++i) b.at(frontier[i]).label = "t" + std::to_string(i);
  return std::move(b).build();
}

}  // namespace lexstab
