#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lexstab/error.hpp"
#include "lexstab/metrics.hpp"
#include "lexstab/pipeline.hpp"
#include "support.hpp"

using namespace lexstab;
using testing::cognates_from;

namespace {

const char* kTree = "(((L1:1,L2:1):1,L3:2):1,((L4:1,L5:1):1,L6:2):1);";

// eye: classes {3,2,1} over L1..L5, L6 missing; one: everyone in one class;
// ear: every language its own class; sun: only L1 attests, with a loan
const char* kTable =
    "language,concept,cognate_id,loan\n"
    "L1,eye,A,0\nL2,eye,A,0\nL3,eye,A,0\nL4,eye,B,0\nL5,eye,B,0\nL4,eye,C,0\n"
    "L1,one,X,0\nL2,one,X,0\nL3,one,X,0\nL4,one,X,0\nL5,one,X,0\nL6,one,X,0\n"
    "L1,ear,E1,0\nL2,ear,E2,0\nL3,ear,E3,1\nL4,ear,E4,0\nL5,ear,E5,0\nL6,ear,E6,0\n"
    "L1,sun,S,1\n"
    "L9,moon,M,0\n";

const DStatConfig kConfig{200, 3, 1};

MeaningClassMetrics metrics_for(const std::string& concept_id, const std::string& table = kTable) {
  return compute_metrics(cognates_from(table), parse_newick(kTree), concept_id, kConfig);
}

MeaningClassMetrics fake(const std::string& id, std::optional<double> mean_D, double missing = 0.0) {
  MeaningClassMetrics m;
  m.concept_id = id;
  m.n_loans = id.size();
  m.mean_D = mean_D;
  m.n_singletons = 1;
  m.missing_fraction = missing;
  m.mean_class_size = 2.0;
  m.max_class_size = 3;
  m.n_classes = 2;
  m.attested_languages = 4;
  return m;
}

}  // namespace

TEST_CASE("counts on the six-language fixture", "[metrics]") {
  const MeaningClassMetrics eye = metrics_for("eye");
  CHECK(eye.n_classes == 3);
  CHECK(eye.n_singletons == 1);
  CHECK(eye.missing_fraction == 1.0 / 6.0);
  CHECK(eye.mean_class_size == 2.0);
  CHECK(eye.max_class_size == 3);
  CHECK(eye.n_loans == 0);
  CHECK(eye.attested_languages == 5);
  CHECK(eye.classes.size() == 3);
}

TEST_CASE("one class everywhere: D is undefined", "[metrics]") {
  const MeaningClassMetrics one = metrics_for("one");
  CHECK(one.mean_class_size == 6.0);
  CHECK(one.max_class_size == 6);
  CHECK_FALSE(one.mean_D.has_value());
  CHECK(one.d_skipped() == 1);
  CHECK(one.classes[0].skip_reason == "no variation");
  CHECK(one.missing_fraction == 0.0);
}

TEST_CASE("all singletons", "[metrics]") {
  const MeaningClassMetrics ear = metrics_for("ear");
  CHECK(ear.n_singletons == ear.n_classes);
  CHECK(ear.n_classes == 6);
  CHECK(ear.n_loans == 1);
  CHECK(ear.d_computed() + ear.d_skipped() == 6);
}

TEST_CASE("too few attesting languages skips every class", "[metrics]") {
  const MeaningClassMetrics sun = metrics_for("sun");
  CHECK(sun.n_loans == 1);
  CHECK(sun.classes[0].skip_reason == "fewer than 4 usable tips");
  CHECK_FALSE(sun.mean_D.has_value());
  CHECK(sun.missing_fraction == 5.0 / 6.0);
}

TEST_CASE("concepts absent from the tree languages are errors or dropped", "[metrics]") {
  CHECK_THROWS_AS(metrics_for("moon"), DomainError);
  CHECK_THROWS_AS(metrics_for("nose"), DomainError);
  std::vector<std::string> dropped;
  const auto all = compute_all_metrics(cognates_from(kTable), parse_newick(kTree), kConfig, &dropped);
  CHECK(dropped == std::vector<std::string>{"moon"});
  CHECK(all.size() == 4);
}

TEST_CASE("mean D averages the computed classes", "[metrics]") {
  const MeaningClassMetrics m = compute_metrics(cognates_from(testing::slurp(testing::data_path("cognates.tsv"))),
                                                parse_newick(testing::slurp(testing::data_path("tree.nwk"))), "eye",
                                                {100, 7, 1});
  double sum = 0;
  std::size_t n = 0;
  for (const auto& c : m.classes)
    if (c.result) {
      sum += c.result->D;
      ++n;
      CHECK(c.skip_reason.empty());
    } else {
      CHECK_FALSE(c.skip_reason.empty());
    }
  REQUIRE(n > 0);
  REQUIRE(m.mean_D.has_value());
  CHECK(*m.mean_D == sum / static_cast<double>(n));
}

TEST_CASE("class D matches a direct computation with the class seed", "[metrics]") {
  const auto matrix = cognates_from(kTable);
  const Tree tree = parse_newick(kTree);
  const MeaningClassMetrics eye = compute_metrics(matrix, tree, "eye", kConfig);
  const auto taxa = tree.tip_labels();
  for (const auto& c : eye.classes) {
    if (!c.result) continue;
    const auto trait = binary_trait(matrix, "eye", c.cognate_id, taxa);
    const DStatResult direct =
        d_statistic(tree, trait.presence, trait.attested, {kConfig.n_reps, class_seed(3, "eye", c.cognate_id), 1});
    CHECK(direct.D == c.result->D);
  }
}

TEST_CASE("worker count does not change metrics", "[metrics]") {
  const auto matrix = cognates_from(testing::slurp(testing::data_path("cognates.tsv")));
  const Tree tree = parse_newick(testing::slurp(testing::data_path("tree.nwk")));
  MetricsStage a, b;
  a.metrics = compute_all_metrics(matrix, tree, {50, 9, 1});
  b.metrics = compute_all_metrics(matrix, tree, {50, 9, 3});
  CHECK(write_metrics_cache(a) == write_metrics_cache(b));
}

TEST_CASE("missing fraction falls when a gap is filled", "[metrics]") {
  const double before = metrics_for("eye").missing_fraction;
  const double after = metrics_for("eye", std::string(kTable) + "L6,eye,A,0\n").missing_fraction;
  CHECK(after < before);
}

TEST_CASE("feature table layout", "[metrics]") {
  const FeatureTable t = build_feature_table({fake("c", 0.5), fake("a", 0.1), fake("b", 0.2)});
  CHECK(t.rows == std::vector<std::string>{"a", "b", "c"});
  CHECK(t.columns == std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end()));
  CHECK(t.values.rows() == 3);
  CHECK(t.values.cols() == 6);
  CHECK(t.values(0, kColMeanD) == 0.1);
  CHECK_FALSE(t.standardized);
  CHECK(t.imputed_count() == 0);
  CHECK(*t.row_index("b") == 1);
}

TEST_CASE("feature table imputes an undefined mean D", "[metrics]") {
  const FeatureTable t = build_feature_table({fake("a", 0.1), fake("b", std::nullopt), fake("c", 0.5), fake("d", 0.6)});
  CHECK(t.values(1, kColMeanD) == (0.1 + 0.5 + 0.6) / 3.0);
  CHECK(t.mean_D_source[1] == CellSource::imputed);
  CHECK(t.mean_D_source[0] == CellSource::computed);
  CHECK(t.imputed_count() == 1);
  for (double v : t.values.data()) CHECK(std::isfinite(v));

  const FeatureTable none = build_feature_table({fake("a", std::nullopt), fake("b", std::nullopt), fake("c", std::nullopt)});
  CHECK(none.values(0, kColMeanD) == 0.0);
  CHECK(none.imputed_count() == 3);
}

TEST_CASE("feature table ignores input order", "[metrics]") {
  std::vector<MeaningClassMetrics> in{fake("e", 0.3), fake("a", 0.1, 0.2), fake("c", std::nullopt), fake("b", 0.4)};
  const FeatureTable first = build_feature_table(in);
  std::reverse(in.begin(), in.end());
  const FeatureTable second = build_feature_table(in);
  CHECK(first.values == second.values);
  CHECK(first.rows == second.rows);
}

TEST_CASE("feature table errors", "[metrics]") {
  CHECK_THROWS_AS(build_feature_table({fake("a", 0.1), fake("b", 0.2)}), DomainError);
  CHECK_THROWS_AS(build_feature_table({fake("a", 0.1), fake("b", 0.2), fake("a", 0.3)}), DomainError);
}

TEST_CASE("feature table CSV", "[metrics]") {
  const std::string csv = write_feature_table(build_feature_table({fake("a", 0.25), fake("b", 0.5), fake("c", 1.0)}));
  CHECK(csv.rfind("concept,n_loans,mean_D,n_singletons,missing_fraction,mean_class_size,max_class_size\n", 0) == 0);
  CHECK(csv.find("\na,1,0.25,1,0,2,3\n") != std::string::npos);
}

TEST_CASE("metrics cache round trip", "[metrics]") {
  MetricsStage s;
  s.metrics = compute_all_metrics(cognates_from(kTable), parse_newick(kTree), kConfig, &s.dropped_concepts);
  s.seed = 3;
  s.n_reps = 200;
  s.tree_tips = 6;
  s.inputs = {{"tree", "t.nwk", "00ff"}};
  const std::string once = write_metrics_cache(s);
  CHECK(write_metrics_cache(read_metrics_cache(once)) == once);
  CHECK_THROWS_AS(read_metrics_cache("{"), DataError);
  CHECK_THROWS_AS(read_metrics_cache("{\"schema\":\"other\"}"), DataError);
}
