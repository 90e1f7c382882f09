#include "hice/core_model.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace hice {

double Embedding::norm() const noexcept {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

bool Embedding::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void apply_phrase_fallback(TextSide& side) {
  if (!side.phrases.empty()) return;
  PhraseEntry whole;
  whole.triplet = Triplet{side.text, "", ""};
  whole.text = side.text;
  whole.embedding = side.global;
  side.phrases.push_back(std::move(whole));
}

void apply_loader_fallbacks(EvalBundle& bundle) {
  if (bundle.regions.empty()) {
    RegionEntry full;
    full.region_id = std::string(kFullImageRegionId);
    full.embedding = bundle.image_global;
    bundle.regions.push_back(std::move(full));
  }
  apply_phrase_fallback(bundle.candidate);
  for (auto& ref : bundle.references) apply_phrase_fallback(ref);
}

std::string_view to_string(Severity severity) noexcept {
  return severity == Severity::error ? "error" : "warning";
}

namespace {

class IssueCollector {
 public:
  void error(std::string field, std::string rule, std::string message) {
    issues_.push_back({std::move(field), std::move(rule), Severity::error, std::move(message)});
  }
  void warning(std::string field, std::string rule, std::string message) {
    issues_.push_back({std::move(field), std::move(rule), Severity::warning, std::move(message)});
  }

  void check_embedding(const std::string& field, const Embedding& e, std::size_t dim) {
    if (e.dim() != dim) {
      std::ostringstream msg;
      msg << "dimension mismatch: expected " << dim << ", got " << e.dim();
      error(field, "dimension_mismatch", msg.str());
      return;
    }
    if (!e.all_finite()) {
      error(field, "non_finite", "embedding contains NaN or infinity");
      return;
    }
    if (!(e.norm() > 0.0)) error(field, "zero_vector", "embedding is a zero vector");
  }

  void check_text_side(const std::string& prefix, const TextSide& side, std::size_t dim) {
    check_embedding(prefix + ".global", side.global, dim);
    if (side.phrases.empty()) {
      error(prefix + ".phrases", "empty_set", "phrase set is empty");
      return;
    }
    for (std::size_t j = 0; j < side.phrases.size(); ++j) {
      const auto& phrase = side.phrases[j];
      const std::string field = prefix + ".phrases[" + std::to_string(j) + "]";
      if (phrase.text.empty()) error(field + ".text", "empty_text", "phrase text is empty");
      check_embedding(field + ".embedding", phrase.embedding, dim);
    }
  }

  std::vector<ValidationIssue> take() { return std::move(issues_); }

 private:
  std::vector<ValidationIssue> issues_;
};

bool in_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

std::vector<ValidationIssue> validate_bundle(const EvalBundle& bundle) {
  IssueCollector out;
  if (bundle.dim == 0) out.error("dim", "nonpositive_dim", "dim must be at least 1");

  out.check_embedding("image_global", bundle.image_global, bundle.dim);

  if (bundle.regions.empty()) out.error("regions", "empty_set", "region set is empty");
  std::unordered_set<std::string> seen_ids;
  for (std::size_t k = 0; k < bundle.regions.size(); ++k) {
    const auto& region = bundle.regions[k];
    const std::string field = "regions[" + std::to_string(k) + "]";
    if (!seen_ids.insert(region.region_id).second) {
      out.error(field + ".region_id", "duplicate_id", "duplicate region_id '" + region.region_id + "'");
    }
    out.check_embedding(field + ".embedding", region.embedding, bundle.dim);
    if (region.area_frac) {
      const double a = *region.area_frac;
      if (!(std::isfinite(a) && a > 0.0 && a <= 1.0)) {
        out.error(field + ".area_frac", "out_of_range", "area_frac must lie in (0, 1]");
      }
    }
    if (region.bbox) {
      const auto& box = *region.bbox;
      if (!(in_unit_interval(box.x) && in_unit_interval(box.y) && in_unit_interval(box.w) &&
            in_unit_interval(box.h) && box.w > 0.0 && box.h > 0.0)) {
        out.error(field + ".bbox", "out_of_range",
                  "bbox values must lie in [0, 1] with positive width and height");
      } else if (box.x + box.w > 1.0 + 1e-9 || box.y + box.h > 1.0 + 1e-9) {
        out.warning(field + ".bbox", "bbox_overflow", "bbox extends past the image edge");
      }
    }
  }

  out.check_text_side("candidate", bundle.candidate, bundle.dim);
  for (std::size_t h = 0; h < bundle.references.size(); ++h) {
    out.check_text_side("references[" + std::to_string(h) + "]", bundle.references[h], bundle.dim);
  }
  return out.take();
}

bool has_errors(std::span<const ValidationIssue> issues) noexcept {
  for (const auto& issue : issues) {
    if (issue.severity == Severity::error) return true;
  }
  return false;
}

std::string format_issue(const ValidationIssue& issue) {
  return std::string(to_string(issue.severity)) + ": " + issue.field + ": " + issue.message;
}

}  // namespace hice
