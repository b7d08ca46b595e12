#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "lexstab/error.hpp"
#include "lexstab/random.hpp"
#include "lexstab/ranking.hpp"

using namespace lexstab;

namespace {

PcaResult noise_pca(std::size_t rows, std::uint64_t seed) {
  FeatureTable t;
  t.columns.assign(kFeatureNames.begin(), kFeatureNames.end());
  t.values = Matrix(rows, 6);
  RandomStream rng(seed, StreamDomain::fixture);
  for (std::size_t r = 0; r < rows; ++r) {
    char id[16];
    std::snprintf(id, sizeof id, "k%03zu", r);
    t.rows.emplace_back(id);
    const double f = rng.next_normal();
    for (std::size_t c = 0; c < 6; ++c) t.values(r, c) = rng.next_normal() + (c % 2 ? f : -f);
  }
  t.mean_D_source.assign(rows, CellSource::computed);
  return pca(standardize(t));
}

// Scores given directly; loadings already in the oriented convention.
PcaResult scored(const std::vector<std::pair<std::string, std::pair<double, double>>>& points) {
  PcaResult p;
  p.variables.assign(kFeatureNames.begin(), kFeatureNames.end());
  p.loadings = Matrix(6, 2);
  p.loadings(kColMissing, 0) = -1.0;
  p.loadings(kColSingletons, 1) = 1.0;
  p.scores = Matrix(points.size(), 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    p.rows.push_back(points[i].first);
    p.scores(i, 0) = points[i].second.first;
    p.scores(i, 1) = points[i].second.second;
  }
  p.eigenvalues = {1.0, 1.0};
  return p;
}

ClusterAssignment one_cluster(std::size_t n) {
  ClusterAssignment c;
  c.labels.assign(n, 0);
  c.k = 1;
  return c;
}

std::vector<std::string> order_of(const SuitabilityRanking& r) {
  std::vector<std::string> out;
  for (const auto& e : r.entries) out.push_back(e.concept_id);
  return out;
}

PcaResult flip(const PcaResult& p, std::size_t j) {
  PcaResult out = p;
  for (std::size_t v = 0; v < out.loadings.rows(); ++v) out.loadings(v, j) = -out.loadings(v, j);
  for (std::size_t r = 0; r < out.scores.rows(); ++r) out.scores(r, j) = -out.scores(r, j);
  return out;
}

}  // namespace

TEST_CASE("orientation flips dimension 1 against missing data", "[ranking]") {
  PcaResult p = noise_pca(25, 1);
  if (p.loadings(kColMissing, 0) < 0) p = flip(p, 0);
  p.loadings(kColMissing, 0) = 0.8;
  const PcaResult o = orient_axes(p);
  CHECK(o.loadings(kColMissing, 0) == -0.8);
  CHECK(o.flipped[0]);
  for (std::size_t r = 0; r < 25; ++r) CHECK(o.scores(r, 0) == -p.scores(r, 0));
}

TEST_CASE("orientation conventions, idempotence and invariants", "[ranking]") {
  const PcaResult p = noise_pca(40, 2);
  const PcaResult o = orient_axes(p);
  CHECK(o.loadings(kColMissing, 0) <= 0.0);
  CHECK(o.loadings(kColSingletons, 1) >= 0.0);
  const PcaResult oo = orient_axes(o);
  CHECK(oo.loadings == o.loadings);
  CHECK(oo.scores == o.scores);
  CHECK(oo.flipped == std::array<bool, 2>{false, false});
  CHECK(o.eigenvalues == p.eigenvalues);
  CHECK(o.contributions == p.contributions);
  for (std::size_t r = 0; r < 40; ++r)
    for (std::size_t c = 0; c < 6; ++c) CHECK(std::fabs(o.scores(r, c)) == std::fabs(p.scores(r, c)));
}

TEST_CASE("pre-flipped eigenvectors give the same ranking", "[ranking]") {
  const PcaResult p = noise_pca(40, 3);
  const ClusterAssignment c = kmeans(leading_scores(orient_axes(p)), 3, 5);
  const SuitabilityRanking base = suitability_rank(orient_axes(p), c);
  for (const PcaResult& q : {flip(p, 0), flip(p, 1), flip(flip(p, 0), 1)}) {
    const PcaResult oq = orient_axes(q);
    CHECK(oq.scores == orient_axes(p).scores);
    CHECK(write_ranking(suitability_rank(oq, kmeans(leading_scores(oq), 3, 5))) == write_ranking(base));
  }
  // distances between score points are unchanged by orientation
  const Matrix a = leading_scores(p), b = leading_scores(orient_axes(p));
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 40; ++j) {
      const double da = std::hypot(a(i, 0) - a(j, 0), a(i, 1) - a(j, 1));
      const double db = std::hypot(b(i, 0) - b(j, 0), b(i, 1) - b(j, 1));
      CHECK(da == db);
    }
}

TEST_CASE("suitability score and ties", "[ranking]") {
  const SuitabilityRanking r = suitability_rank(scored({{"b", {0, 0}}, {"a", {2, -1}}, {"d", {1, 1}}, {"c", {0, 0}}}),
                                                one_cluster(4));
  CHECK(order_of(r) == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(r.entries[0].score == 3.0);
  CHECK(r.entries[1].score == 0.0);
  CHECK(r.entries[0].quadrant == Quadrant::SE);
  CHECK(r.entries[3].quadrant == Quadrant::NE);
  for (std::size_t i = 0; i < 4; ++i) CHECK(r.entries[i].rank == i + 1);
}

TEST_CASE("quadrants", "[ranking]") {
  CHECK(quadrant_of(1, -1) == Quadrant::SE);
  CHECK(quadrant_of(1, 1) == Quadrant::NE);
  CHECK(quadrant_of(-1, 1) == Quadrant::NW);
  CHECK(quadrant_of(-1, -1) == Quadrant::SW);
  CHECK(quadrant_of(0, -1) == Quadrant::SW);
  CHECK(quadrant_of(1, 0) == Quadrant::NE);
}

TEST_CASE("ranking survives positive rescaling", "[ranking]") {
  const PcaResult p = orient_axes(noise_pca(30, 4));
  PcaResult scaled = p;
  for (std::size_t r = 0; r < 30; ++r)
    for (std::size_t c = 0; c < 2; ++c) scaled.scores(r, c) *= 3.5;
  CHECK(order_of(suitability_rank(p, one_cluster(30))) == order_of(suitability_rank(scaled, one_cluster(30))));
}

TEST_CASE("ranks are a permutation in score order", "[ranking]") {
  const SuitabilityRanking r = suitability_rank(orient_axes(noise_pca(50, 5)), one_cluster(50));
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(r.entries[i].rank == i + 1);
    if (i) CHECK(r.entries[i - 1].score >= r.entries[i].score);
  }
}

TEST_CASE("word list prefix property and bounds", "[ranking]") {
  const SuitabilityRanking r = suitability_rank(orient_axes(noise_pca(50, 6)), one_cluster(50));
  WordlistSelection prev = select_wordlist(r, 1);
  for (std::size_t k = 2; k <= 50; ++k) {
    const WordlistSelection cur = select_wordlist(r, k);
    REQUIRE(cur.concepts.size() == k);
    CHECK(std::equal(prev.concepts.begin(), prev.concepts.end(), cur.concepts.begin()));
    prev = cur;
  }
  CHECK(select_wordlist(r, 50).concepts.size() == 50);
  CHECK_THROWS_WITH(select_wordlist(r, 51), Catch::Matchers::ContainsSubstring("k out of range"));
  CHECK_THROWS_AS(select_wordlist(r, 0), DomainError);
  CHECK(select_wordlist(r).concepts.size() == kDefaultWordlistSize);
}

TEST_CASE("stability mix warning on an all-stable top of the list", "[ranking]") {
  std::vector<std::pair<std::string, std::pair<double, double>>> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({"s" + std::to_string(10 + i), {2.0 + 0.01 * i, -1.0}});
  for (int i = 0; i < 20; ++i) pts.push_back({"u" + std::to_string(10 + i), {-1.0, 1.0 + 0.01 * i}});
  const SuitabilityRanking r = suitability_rank(scored(pts), one_cluster(50));
  const WordlistSelection sel = select_wordlist(r, 30);
  CHECK(sel.se_fraction == 1.0);
  REQUIRE(sel.warnings.size() == 1);
  CHECK_THAT(sel.warnings[0], Catch::Matchers::StartsWith("stability mix: 100% SE > 80%"));
  CHECK_THAT(sel.warnings[0], Catch::Matchers::ContainsSubstring("underestimate splits"));

  // mixing in the other concepts brings it under the threshold
  CHECK(select_wordlist(r, 50).warnings.empty());
  CHECK(select_wordlist(r, 30, 1.0).warnings.empty());
}

TEST_CASE("ranking table", "[ranking]") {
  const SuitabilityRanking r = suitability_rank(scored({{"a", {2, -1}}, {"b", {0.5, 0.25}}, {"c", {-1, 0}}}), one_cluster(3));
  CHECK(write_ranking(r) ==
        "concept\tPC1\tPC2\tscore\trank\tquadrant\tcluster\n"
        "a\t2\t-1\t3\t1\tSE\t0\n"
        "b\t0.5\t0.25\t0.25\t2\tNE\t0\n"
        "c\t-1\t0\t-1\t3\tNW\t0\n");
}
