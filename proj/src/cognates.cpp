#include "lexstab/cognates.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <tuple>

#include "lexstab/error.hpp"
#include "lexstab/tree.hpp"

namespace lexstab {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Splits one record. Double quotes delimit fields that may contain the separator;
/// a doubled quote inside is a literal quote. Returns false on an unterminated quote.
bool split_record(std::string_view line, char sep, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && trim(field).empty()) {
      quoted = true;
      was_quoted = true;
      field.clear();
    } else if (c == sep) {
      fields.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) return false;
  fields.push_back(was_quoted ? field : trim(field));
  return true;
}

}  // namespace

std::string_view to_string(Diagnostic::Level level) {
  return level == Diagnostic::Level::error ? "error" : "warning";
}

std::size_t count_level(const Diagnostics& diags, Diagnostic::Level level) {
  return static_cast<std::size_t>(
      std::count_if(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.level == level; }));
}

bool CognateMatrix::add(const CognateRow& row) {
  auto intern = [](std::vector<std::string>& names, auto& ids, const std::string& name) {
    const auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    names.push_back(name);
    ids.emplace(name, names.size() - 1);
    return names.size() - 1;
  };
  const std::size_t lang = intern(languages_, language_ids_, row.language);
  const std::size_t con = intern(concepts_, concept_ids_, row.concept_id);
  if (!entries_[{lang, con}].insert(row.cognate_id).second) return false;
  if (row.loan) loans_.emplace(lang, con, row.cognate_id);
  ++row_count_;
  return true;
}

CognateMatrix CognateMatrix::from_rows(const std::vector<CognateRow>& rows) {
  CognateMatrix m;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CognateRow& r = rows[i];
    if (r.language.empty()) throw DataError("empty language in row " + std::to_string(i + 1));
    if (r.concept_id.empty()) throw DataError("empty concept in row " + std::to_string(i + 1));
    if (r.cognate_id.empty()) throw DataError("empty cognate_id in row " + std::to_string(i + 1));
    if (!m.add(r)) throw DataError("duplicate row " + std::to_string(i + 1));
  }
  return m;
}

std::optional<std::size_t> CognateMatrix::language_index(std::string_view language) const {
  const auto it = language_ids_.find(language);
  if (it == language_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> CognateMatrix::concept_index(std::string_view concept_id) const {
  const auto it = concept_ids_.find(concept_id);
  if (it == concept_ids_.end()) return std::nullopt;
  return it->second;
}

const std::set<std::string>* CognateMatrix::classes(std::size_t language, std::size_t concept_id) const {
  const auto it = entries_.find({language, concept_id});
  return it == entries_.end() ? nullptr : &it->second;
}

bool CognateMatrix::is_loan(std::size_t language, std::size_t concept_id, const std::string& cognate_id) const {
  return loans_.count({language, concept_id, cognate_id}) != 0;
}

std::vector<std::string> CognateMatrix::classes_of(std::size_t concept_id) const {
  std::set<std::string> all;
  for (const auto& [cell, ids] : entries_)
    if (cell.second == concept_id) all.insert(ids.begin(), ids.end());
  return {all.begin(), all.end()};
}

std::vector<CognateRow> CognateMatrix::rows() const {
  std::vector<CognateRow> out;
  out.reserve(row_count_);
  for (const auto& [cell, ids] : entries_)
    for (const auto& id : ids)
      out.push_back({languages_[cell.first], concepts_[cell.second], id, is_loan(cell.first, cell.second, id)});
  return out;
}

std::optional<CognateMatrix> read_cognates(std::istream& in, Diagnostics& diags) {
  const std::size_t errors_before = count_level(diags, Diagnostic::Level::error);
  auto error = [&](std::size_t line, std::string msg) {
    diags.push_back({Diagnostic::Level::error, line, std::move(msg)});
  };

  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    have_header = !trim(line).empty();
  }
  if (!have_header) {
    error(0, "empty input: no header row");
    return std::nullopt;
  }

  const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
  std::vector<std::string> header;
  if (!split_record(line, sep, header)) {
    error(line_no, "unterminated quote");
    return std::nullopt;
  }
  const std::size_t header_line = line_no;
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  const auto col_lang = column("language");
  const auto col_concept = column("concept");
  const auto col_cognate = column("cognate_id");
  const auto col_loan = column("loan");
  bool missing_column = false;
  for (const auto& [col, name] : {std::pair{col_lang, "language"}, {col_concept, "concept"}, {col_cognate, "cognate_id"}}) {
    if (!col) {
      error(header_line, std::string("missing required column '") + name + "'");
      missing_column = true;
    }
  }
  if (missing_column) return std::nullopt;
  if (!col_loan)
    diags.push_back({Diagnostic::Level::warning, header_line, "no 'loan' column; all loan flags set to 0"});

  CognateMatrix matrix;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!split_record(line, sep, fields)) {
      error(line_no, "unterminated quote");
      continue;
    }
    if (fields.size() != header.size()) {
      error(line_no, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
      continue;
    }
    CognateRow row{fields[*col_lang], fields[*col_concept], fields[*col_cognate], false};
    if (row.language.empty()) {
      error(line_no, "empty language");
      continue;
    }
    if (row.concept_id.empty()) {
      error(line_no, "empty concept");
      continue;
    }
    if (row.cognate_id.empty()) {
      error(line_no, "empty cognate_id");
      continue;
    }
    if (col_loan) {
      const std::string& v = fields[*col_loan];
      if (v == "1") {
        row.loan = true;
      } else if (!v.empty() && v != "0") {
        error(line_no, "invalid loan value '" + v + "' (expected 0, 1 or empty)");
        continue;
      }
    }
    if (!matrix.add(row)) error(line_no, "duplicate");
  }
  if (in.bad()) error(line_no, "read failure");

  if (count_level(diags, Diagnostic::Level::error) > errors_before) return std::nullopt;
  if (matrix.row_count() == 0)
    diags.push_back({Diagnostic::Level::warning, header_line, "no data rows"});
  return matrix;
}

CognateMatrix load_cognates(std::istream& in, Diagnostics* warnings) {
  Diagnostics diags;
  auto matrix = read_cognates(in, diags);
  for (const auto& d : diags)
    if (d.level == Diagnostic::Level::error) throw DataError(d.message, d.line);
  if (warnings) warnings->insert(warnings->end(), diags.begin(), diags.end());
  return std::move(*matrix);
}

CognateMatrix load_cognates_file(const std::string& path, Diagnostics* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read cognate file '" + path + "'");
  return load_cognates(in, warnings);
}

std::string write_cognates(const CognateMatrix& matrix) {
  auto field = [](const std::string& v) {
    const bool plain = v.find_first_of("\t\"") == std::string::npos && v == trim(v);
    if (plain) return v;
    std::string q = "\"";
    for (const char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + '"';
  };
  auto rows = matrix.rows();
  std::sort(rows.begin(), rows.end(), [](const CognateRow& a, const CognateRow& b) {
    return std::tie(a.language, a.concept_id, a.cognate_id) < std::tie(b.language, b.concept_id, b.cognate_id);
  });
  std::string out = "language\tconcept\tcognate_id\tloan\n";
  for (const auto& r : rows) {
    out += field(r.language);
    out += '\t';
    out += field(r.concept_id);
    out += '\t';
    out += field(r.cognate_id);
    out += r.loan ? "\t1\n" : "\t0\n";
  }
  return out;
}

Diagnostics check_against_tree(const CognateMatrix& matrix, const Tree& tree) {
  Diagnostics out;
  for (const auto& lang : matrix.languages())
    if (!tree.find_tip(lang))
      out.push_back({Diagnostic::Level::warning, 0, "language '" + lang + "' is not a tip of the tree"});
  for (const auto& tip : tree.tip_labels())
    if (!matrix.language_index(tip))
      out.push_back({Diagnostic::Level::warning, 0, "tree tip '" + tip + "' has no cognate data"});
  return out;
}

BinaryTrait binary_trait(const CognateMatrix& matrix, std::string_view concept_id, std::string_view cognate_id,
                         std::span<const std::string> taxa) {
  const auto con = matrix.concept_index(concept_id);
  if (!con) throw DataError("unknown concept '" + std::string(concept_id) + "'");
  const auto all = matrix.classes_of(*con);
  if (!std::binary_search(all.begin(), all.end(), cognate_id))
    throw DataError("unknown cognate class '" + std::string(cognate_id) + "' for concept '" + std::string(concept_id) + "'");

  BinaryTrait trait;
  trait.presence.assign(taxa.size(), 0);
  trait.attested.assign(taxa.size(), 0);
  for (std::size_t i = 0; i < taxa.size(); ++i) {
    const auto lang = matrix.language_index(taxa[i]);
    if (!lang) continue;
    const auto* ids = matrix.classes(*lang, *con);
    if (!ids) continue;
    trait.attested[i] = 1;
    trait.presence[i] = ids->count(std::string(cognate_id)) ? 1 : 0;
  }
  return trait;
}

ConceptSummary concept_summary(const CognateMatrix& matrix, std::string_view concept_id) {
  const auto con = matrix.concept_index(concept_id);
  if (!con) throw DataError("no data for concept '" + std::string(concept_id) + "'");

  ConceptSummary s;
  s.concept_id = std::string(concept_id);
  std::map<std::string, std::size_t> sizes;
  for (std::size_t lang = 0; lang < matrix.languages().size(); ++lang) {
    const auto* ids = matrix.classes(lang, *con);
    if (!ids) continue;
    ++s.attested_languages;
    for (const auto& id : *ids) {
      ++sizes[id];
      if (matrix.is_loan(lang, *con, id)) ++s.loan_count;
    }
  }
  if (s.attested_languages == 0) throw DataError("no data for concept '" + s.concept_id + "'");
  s.class_sizes.assign(sizes.begin(), sizes.end());
  s.class_count = sizes.size();
  for (const auto& [id, n] : sizes)
    if (n == 1) ++s.singleton_count;
  const std::size_t n_lang = matrix.languages().size();
  s.missing_fraction = static_cast<double>(n_lang - s.attested_languages) / static_cast<double>(n_lang);
  return s;
}

}  // namespace lexstab
