#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hice/core_model.hpp"

namespace hice {

/// Closed set of predicate words and short phrases (e.g. "next to").
/// Read-only after construction.
class PredicateLexicon {
 public:
  /// The lexicon compiled in from data/predicates_v1.txt.
  static const PredicateLexicon& builtin();

  /// Parses the lexicon text format: one predicate per line, '#' comments,
  /// optional "# version: N" line.
  static PredicateLexicon from_text(std::string_view text);
  static PredicateLexicon load(const std::filesystem::path& path);

  int version() const noexcept { return version_; }
  std::size_t size() const noexcept { return size_; }
  std::vector<std::string> entries() const;

  /// Length in tokens of the longest entry starting at tokens[pos], or 0.
  std::size_t match(const std::vector<std::string>& tokens, std::size_t pos) const;
  /// Lengths of every entry starting at tokens[pos], longest first.
  std::vector<std::size_t> matches(const std::vector<std::string>& tokens, std::size_t pos) const;

 private:
  int version_ = 0;
  std::size_t size_ = 0;
  // first token -> entries (as token lists), longest first
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> by_first_;
};

/// Rule-based subject-predicate-object extraction:
///   lowercase; split clauses at . , ; : ! ? and at coordinating conjunctions;
///   drop articles; the longest chain of lexicon predicates starting at the
///   first one splits the clause into (subject, predicate, object). A clause without a predicate,
///   or with nothing before it, yields (clause, "", "").
std::vector<Triplet> extract_triplets(std::string_view text,
                                      const PredicateLexicon& lexicon = PredicateLexicon::builtin());

/// "subject predicate object", skipping empty parts.
std::string render_phrase(const Triplet& t);

}  // namespace hice
