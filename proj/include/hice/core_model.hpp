#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hice {

/// A point in the shared image/text embedding space.
///
/// Values are kept exactly as the producer wrote them (no normalisation);
/// `cosine` normalises on the fly. Construction accepts any values; checks
/// live in `validate_bundle`.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double norm() const noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<double> values_;
};

/// Relative box (x, y, w, h), each in [0, 1].
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct RegionEntry {
  std::string region_id;
  Embedding embedding;
  std::optional<double> area_frac;
  std::optional<BoundingBox> bbox;

  friend bool operator==(const RegionEntry&, const RegionEntry&) = default;
};

/// Subject-predicate-object decomposition of a caption clause. A clause with
/// no recognised predicate is carried as (clause, "", "").
struct Triplet {
  std::string subject;
  std::string predicate;
  std::string object;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct PhraseEntry {
  Triplet triplet;
  std::string text;
  Embedding embedding;

  friend bool operator==(const PhraseEntry&, const PhraseEntry&) = default;
};

/// A candidate caption or one human reference.
struct TextSide {
  std::string text;
  Embedding global;
  std::vector<PhraseEntry> phrases;

  friend bool operator==(const TextSide&, const TextSide&) = default;
};

/// Everything needed to score one image/caption(/references) instance.
struct EvalBundle {
  std::string bundle_id;
  std::size_t dim = 0;
  std::string image_id;
  Embedding image_global;  // encoded with the full-image mask
  std::vector<RegionEntry> regions;
  TextSide candidate;
  std::vector<TextSide> references;

  bool has_references() const noexcept { return !references.empty(); }

  friend bool operator==(const EvalBundle&, const EvalBundle&) = default;
};

inline constexpr std::string_view kFullImageRegionId = "FULL_IMAGE";

/// Loader fallbacks: a text side with no phrases gets one phrase made of the
/// whole sentence (embedding = sentence embedding); a bundle with no regions
/// gets a single FULL_IMAGE region carrying the image embedding.
void apply_loader_fallbacks(EvalBundle& bundle);
void apply_phrase_fallback(TextSide& side);

enum class Severity { error, warning };

std::string_view to_string(Severity severity) noexcept;

struct ValidationIssue {
  std::string field;  // e.g. "regions[0].embedding"
  std::string rule;   // short machine-friendly rule name, e.g. "dimension_mismatch"
  Severity severity = Severity::error;
  std::string message;

  friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

/// Checks every invariant of the bundle model. Issues come back in field
/// order: image, regions by index, candidate, references by index.
std::vector<ValidationIssue> validate_bundle(const EvalBundle& bundle);

bool has_errors(std::span<const ValidationIssue> issues) noexcept;

std::string format_issue(const ValidationIssue& issue);

}  // namespace hice
