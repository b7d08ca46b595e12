#include "lexstab/metrics.hpp"

#include <algorithm>
#include <map>

#include "lexstab/error.hpp"
#include "lexstab/parallel.hpp"

namespace lexstab {
namespace {

struct ClassTask {
  std::size_t concept_slot;
  std::size_t class_slot;
  BinaryTrait trait;
};

/// Everything except D, plus one pending task per class.
MeaningClassMetrics count_concept(const CognateMatrix& matrix, const std::vector<std::string>& taxa,
                                  std::size_t concept_index, std::size_t slot, std::vector<ClassTask>& tasks) {
  MeaningClassMetrics m;
  m.concept_id = matrix.concepts()[concept_index];

  std::map<std::string, std::size_t> sizes;
  for (const auto& taxon : taxa) {
    const auto lang = matrix.language_index(taxon);
    if (!lang) continue;
    const auto* ids = matrix.classes(*lang, concept_index);
    if (!ids) continue;
    ++m.attested_languages;
    for (const auto& id : *ids) {
      ++sizes[id];
      if (matrix.is_loan(*lang, concept_index, id)) ++m.n_loans;
    }
  }
  if (m.attested_languages == 0)
    throw DomainError("concept '" + m.concept_id + "' has no attestations in tree languages");

  m.missing_fraction = static_cast<double>(taxa.size() - m.attested_languages) / static_cast<double>(taxa.size());
  m.n_classes = sizes.size();
  std::size_t total = 0;
  for (const auto& [id, n] : sizes) {
    total += n;
    m.max_class_size = std::max(m.max_class_size, n);
    if (n == 1) ++m.n_singletons;
    m.classes.push_back({id, n, std::nullopt, {}});
    ClassD& cls = m.classes.back();

    BinaryTrait trait = binary_trait(matrix, m.concept_id, id, taxa);
    if (m.attested_languages < 4) {
      cls.skip_reason = "fewer than 4 usable tips";
    } else if (n == m.attested_languages) {
      cls.skip_reason = "no variation";
    } else {
      tasks.push_back({slot, m.classes.size() - 1, std::move(trait)});
    }
  }
  m.mean_class_size = static_cast<double>(total) / static_cast<double>(m.n_classes);
  return m;
}

void finish_mean_D(MeaningClassMetrics& m) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : m.classes) {
    if (!c.result) continue;
    sum += c.result->D;
    ++n;
  }
  if (n > 0) m.mean_D = sum / static_cast<double>(n);
}

std::vector<MeaningClassMetrics> run(const CognateMatrix& matrix, const Tree& tree,
                                     const std::vector<std::size_t>& concept_indices, const DStatConfig& config) {
  const auto taxa = tree.tip_labels();
  std::vector<MeaningClassMetrics> out;
  std::vector<ClassTask> tasks;
  out.reserve(concept_indices.size());
  for (const std::size_t ci : concept_indices) out.push_back(count_concept(matrix, taxa, ci, out.size(), tasks));

  DStatConfig single = config;
  single.workers = 1;
  parallel_for(tasks.size(), config.workers, [&](std::size_t t) {
    const ClassTask& task = tasks[t];
    MeaningClassMetrics& m = out[task.concept_slot];
    ClassD& cls = m.classes[task.class_slot];
    DStatConfig cfg = single;
    cfg.seed = class_seed(config.seed, m.concept_id, cls.cognate_id);
    try {
      cls.result = d_statistic(tree, task.trait.presence, task.trait.attested, cfg);
    } catch (const DomainError& e) {
      cls.skip_reason = e.what();
    }
  });
  for (auto& m : out) finish_mean_D(m);
  return out;
}

}  // namespace

std::size_t MeaningClassMetrics::d_computed() const noexcept {
  return static_cast<std::size_t>(std::count_if(classes.begin(), classes.end(), [](const ClassD& c) { return c.result.has_value(); }));
}

std::uint64_t class_seed(std::uint64_t run_seed, std::string_view concept_id, std::string_view cognate_id) {
  std::string label(concept_id);
  label.push_back('\x1f');
  label.append(cognate_id);
  return derive_seed(run_seed, label);
}

MeaningClassMetrics compute_metrics(const CognateMatrix& matrix, const Tree& tree, std::string_view concept_id,
                                    const DStatConfig& config) {
  const auto ci = matrix.concept_index(concept_id);
  if (!ci) throw DomainError("concept '" + std::string(concept_id) + "' has no attestations in tree languages");
  return std::move(run(matrix, tree, {*ci}, config).front());
}

std::vector<MeaningClassMetrics> compute_all_metrics(const CognateMatrix& matrix, const Tree& tree,
                                                     const DStatConfig& config, std::vector<std::string>* dropped) {
  std::vector<std::size_t> usable;
  const auto taxa = tree.tip_labels();
  for (std::size_t ci = 0; ci < matrix.concepts().size(); ++ci) {
    bool attested = false;
    for (const auto& taxon : taxa) {
      const auto lang = matrix.language_index(taxon);
      if (lang && matrix.classes(*lang, ci)) {
        attested = true;
        break;
      }
    }
    if (attested) usable.push_back(ci);
    else if (dropped) dropped->push_back(matrix.concepts()[ci]);
  }
  return run(matrix, tree, usable, config);
}

std::size_t FeatureTable::imputed_count() const noexcept {
  return static_cast<std::size_t>(std::count(mean_D_source.begin(), mean_D_source.end(), CellSource::imputed));
}

std::optional<std::size_t> FeatureTable::row_index(std::string_view concept_id) const {
  const auto it = std::lower_bound(rows.begin(), rows.end(), concept_id);
  if (it == rows.end() || *it != concept_id) return std::nullopt;
  return static_cast<std::size_t>(it - rows.begin());
}

FeatureTable build_feature_table(const std::vector<MeaningClassMetrics>& metrics) {
  if (metrics.size() < 3) throw DomainError("feature table needs >= 3 concepts, got " + std::to_string(metrics.size()));
  std::vector<const MeaningClassMetrics*> sorted;
  for (const auto& m : metrics) sorted.push_back(&m);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->concept_id < b->concept_id; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i]->concept_id == sorted[i - 1]->concept_id)
      throw DomainError("duplicate concept '" + sorted[i]->concept_id + "'");

  double d_sum = 0.0;
  std::size_t d_count = 0;
  for (const auto* m : sorted) {
    if (!m->mean_D) continue;
    d_sum += *m->mean_D;
    ++d_count;
  }
  const double imputed = d_count ? d_sum / static_cast<double>(d_count) : 0.0;

  FeatureTable t;
  t.columns.assign(kFeatureNames.begin(), kFeatureNames.end());
  t.values = Matrix(sorted.size(), kFeatureNames.size());
  for (std::size_t r = 0; r < sorted.size(); ++r) {
    const auto& m = *sorted[r];
    t.rows.push_back(m.concept_id);
    t.values(r, 0) = static_cast<double>(m.n_loans);
    t.values(r, 1) = m.mean_D.value_or(imputed);
    t.values(r, 2) = static_cast<double>(m.n_singletons);
    t.values(r, 3) = m.missing_fraction;
    t.values(r, 4) = m.mean_class_size;
    t.values(r, 5) = static_cast<double>(m.max_class_size);
    t.mean_D_source.push_back(m.mean_D ? CellSource::computed : CellSource::imputed);
  }
  return t;
}

std::string write_feature_table(const FeatureTable& table) {
  std::string out = "concept";
  for (const auto& c : table.columns) out += "," + c;
  out += '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& id = table.rows[r];
    if (id.find_first_of(",\"\n") != std::string::npos) {
      out += '"';
      for (const char ch : id) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      out += '"';
    } else {
      out += id;
    }
    for (std::size_t c = 0; c < table.values.cols(); ++c) out += "," + format_real(table.values(r, c));
    out += '\n';
  }
  return out;
}

}  // namespace lexstab
