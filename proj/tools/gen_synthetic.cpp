// Writes the bundled synthetic corpus: a 100-language ultrametric tree and a
// 50-concept cognate table evolved on it (replacement, borrowing, missing
// cells, the odd synonym). Output is a pure function of --seed.
//
//   gen_synthetic <outdir> [seed]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lexstab/cognates.hpp"
#include "lexstab/digest.hpp"
#include "lexstab/random.hpp"
#include "lexstab/tree.hpp"

using namespace lexstab;

namespace {

constexpr std::size_t kLanguages = 100;

const char* const kConcepts[] = {
    "I",     "you",   "we",   "one",   "two",   "eye",   "ear",   "nose",  "mouth", "tooth",
    "tongue", "hand", "foot", "blood", "bone",  "water", "fire",  "stone", "sun",   "moon",
    "star",  "tree",  "leaf", "root",  "bird",  "dog",   "fish",  "louse", "egg",   "name",
    "die",   "eat",   "drink", "see",  "hear",  "sleep", "come",  "give",  "big",   "small",
    "long",  "good",  "new",  "full",  "hot",   "cold",  "night", "rain",  "road",  "say"};

double exponential(RandomStream& rng, double rate) { return -std::log1p(-rng.next_unit()) / rate; }

double round4(double x) { return std::round(x * 1e4) / 1e4; }

// Kingman coalescent, rescaled to height about 1.
Tree make_tree(std::uint64_t seed) {
  RandomStream rng(seed, StreamDomain::fixture, 0);
  TreeBuilder b;
  std::vector<double> time;
  std::vector<NodeId> active;
  for (std::size_t i = 0; i < kLanguages; ++i) {
    char name[8];
    std::snprintf(name, sizeof name, "L%03zu", i + 1);
    active.push_back(b.add_node(name));
    time.push_back(0.0);
  }
  double t = 0.0;
  while (active.size() > 1) {
    const double k = static_cast<double>(active.size());
    t += exponential(rng, k * (k - 1) / 2) / 2;
    const std::size_t i = rng.next_below(active.size());
    const NodeId a = active[i];
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(i));
    const std::size_t j = rng.next_below(active.size());
    const NodeId c = active[j];
    const NodeId p = b.add_node();
    time.push_back(round4(t));
    for (NodeId child : {a, c}) {
      b.attach(p, child);
      b.at(child).length = round4(time[p] - time[child]);
    }
    active[j] = p;
  }
  return std::move(b).build();
}

std::vector<CognateRow> evolve(const Tree& tree, std::uint64_t seed) {
  std::vector<CognateRow> rows;
  const auto order = tree.postorder();
  const auto tips = tree.tips();
  std::uint32_t c = 0;
  for (const char* concept_id : kConcepts) {
    RandomStream rng(seed, StreamDomain::fixture, ++c);
    const double rate = std::exp(std::log(0.3) + rng.next_unit() * std::log(30.0));
    const double p_missing = 0.4 * rng.next_unit() * rng.next_unit();
    const double p_loan = 0.08 * rng.next_unit();
    const double p_synonym = 0.06 * rng.next_unit();

    // Replacement events along branches, walking root to tips.
    std::vector<int> state(tree.node_count(), 0);
    int next_state = 1;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const Node& n = tree.node(*it);
      if (n.parent == kNoNode) continue;
      state[*it] = state[n.parent];
      if (rng.next_unit() < 1.0 - std::exp(-rate * n.length)) state[*it] = next_state++;
    }

    std::vector<int> tip_state(tips.size());
    for (std::size_t i = 0; i < tips.size(); ++i) tip_state[i] = state[tips[i]];
    std::vector<bool> loan(tips.size(), false);
    for (std::size_t i = 0; i < tips.size(); ++i) {
      if (rng.next_unit() < p_loan) {
        tip_state[i] = tip_state[rng.next_below(tips.size())];
        loan[i] = true;
      }
    }

    // Number classes by first appearance so IDs read naturally.
    std::map<int, int> number;
    auto class_id = [&](int s) {
      auto [pos, fresh] = number.emplace(s, static_cast<int>(number.size()) + 1);
      (void)fresh;
      return std::string(concept_id) + "-" + std::to_string(pos->second);
    };
    for (std::size_t i = 0; i < tips.size(); ++i) {
      const bool missing = rng.next_unit() < p_missing;
      const bool synonym = rng.next_unit() < p_synonym;
      if (missing) continue;
      const std::string& lang = tree.node(tips[i]).label;
      rows.push_back({lang, concept_id, class_id(tip_state[i]), loan[i]});
      if (synonym) rows.push_back({lang, concept_id, class_id(next_state++), false});
    }
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2 || argc > 3) {
    std::cerr << "usage: gen_synthetic <outdir> [seed]\n";
    return 1;
  }
  const std::uint64_t seed = argc == 3 ? std::strtoull(argv[2], nullptr, 10) : 20240607;
  const std::filesystem::path dir(argv[1]);
  try {
    std::filesystem::create_directories(dir);
    const Tree tree = make_tree(seed);
    const CognateMatrix m = CognateMatrix::from_rows(evolve(tree, seed));
    write_file((dir / "tree.nwk").string(), write_newick(tree) + "\n");
    write_file((dir / "cognates.tsv").string(), write_cognates(m));
    std::cout << tree.tip_count() << " languages, " << m.concepts().size() << " concepts, " << m.row_count()
              << " rows, " << m.loan_count() << " loans\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
