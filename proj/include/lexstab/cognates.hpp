// include/lexstab/cognates.hpp
//
// Long-format cognate database: one row per (language, concept, cognate class),
// with an optional loan flag. A (language, concept) pair with no row is
// missing data, which is different from a language lacking a given class.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace lexstab {

class Tree;

struct Diagnostic {
  enum class Level { error, warning };
  Level level = Level::error;
  std::size_t line = 0;  // 0 when not tied to an input line
  std::string message;
};
using Diagnostics = std::vector<Diagnostic>;

std::string_view to_string(Diagnostic::Level level);
std::size_t count_level(const Diagnostics& diags, Diagnostic::Level level);

struct CognateRow {
  std::string language;
  std::string concept_id;
  std::string cognate_id;
  bool loan = false;
};

class CognateMatrix {
 public:
  /// Throws DataError on empty fields or duplicate (language, concept, class).
  static CognateMatrix from_rows(const std::vector<CognateRow>& rows);

  const std::vector<std::string>& languages() const noexcept { return languages_; }
  const std::vector<std::string>& concepts() const noexcept { return concepts_; }
  std::optional<std::size_t> language_index(std::string_view language) const;
  std::optional<std::size_t> concept_index(std::string_view concept_id) const;

  /// Classes attested by a language for a concept; nullptr when the cell is missing.
  const std::set<std::string>* classes(std::size_t language, std::size_t concept_id) const;
  bool is_loan(std::size_t language, std::size_t concept_id, const std::string& cognate_id) const;

  /// All class IDs recorded under a concept, sorted.
  std::vector<std::string> classes_of(std::size_t concept_id) const;

  std::size_t row_count() const noexcept { return row_count_; }
  std::size_t loan_count() const noexcept { return loans_.size(); }

  /// Rows sorted by (language order, concept order, class ID).
  std::vector<CognateRow> rows() const;

 private:
  friend std::optional<CognateMatrix> read_cognates(std::istream& in, Diagnostics& diags);
  /// False if the (language, concept, class) triple is already present.
  bool add(const CognateRow& row);

  using Cell = std::pair<std::size_t, std::size_t>;  // (language, concept)
  std::vector<std::string> languages_;
  std::vector<std::string> concepts_;
  std::map<std::string, std::size_t, std::less<>> language_ids_;
  std::map<std::string, std::size_t, std::less<>> concept_ids_;
  std::map<Cell, std::set<std::string>> entries_;
  std::set<std::tuple<std::size_t, std::size_t, std::string>> loans_;
  std::size_t row_count_ = 0;
};

/// Parses a delimited table (tab if the header line contains a tab, comma
/// otherwise) with columns language, concept, cognate_id and optional loan.
/// Every problem found is appended to `diags`; returns nullopt if any was an error.
std::optional<CognateMatrix> read_cognates(std::istream& in, Diagnostics& diags);

/// As read_cognates, but throws DataError for the first error. Warnings are
/// appended to `warnings` when given.
CognateMatrix load_cognates(std::istream& in, Diagnostics* warnings = nullptr);
CognateMatrix load_cognates_file(const std::string& path, Diagnostics* warnings = nullptr);

/// Tab-separated serialization with header, rows sorted by (language, concept,
/// class) and fields quoted where needed; load_cognates reads it back.
std::string write_cognates(const CognateMatrix& matrix);

/// Warnings for database languages that are not tree tips and for tips with no data.
Diagnostics check_against_tree(const CognateMatrix& matrix, const Tree& tree);

struct BinaryTrait {
  std::vector<std::uint8_t> presence;  // 1 iff the language attests the class
  std::vector<std::uint8_t> attested;  // 0 iff the language has no entry for the concept
};

/// Presence/absence of one cognate class over `taxa`. Taxa that have no row for
/// the concept (including taxa unknown to the database) are unattested and
/// have presence 0. Throws DataError for an unknown concept or class.
BinaryTrait binary_trait(const CognateMatrix& matrix, std::string_view concept_id,
                         std::string_view cognate_id, std::span<const std::string> taxa);

struct ConceptSummary {
  std::string concept_id;
  std::size_t class_count = 0;
  std::vector<std::pair<std::string, std::size_t>> class_sizes;  // languages attesting each class
  std::size_t singleton_count = 0;
  std::size_t attested_languages = 0;
  std::size_t loan_count = 0;
  double missing_fraction = 0.0;  // over all database languages
};

ConceptSummary concept_summary(const CognateMatrix& matrix, std::string_view concept_id);

}  // namespace lexstab
