#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hice/core_model.hpp"
#include "hice/scoring.hpp"

namespace hice {

inline constexpr double kDefaultReportThreshold = 0.5;

enum class PhraseFlag { correct, incorrect };
enum class RegionFlag { mentioned, unmentioned };

/// Correctness of one candidate phrase: its best similarity to any region.
struct PhraseVerdict {
  std::size_t phrase_index = 0;
  std::string text;
  double score = 0.0;
  PhraseFlag flag = PhraseFlag::incorrect;

  friend bool operator==(const PhraseVerdict&, const PhraseVerdict&) = default;
};

/// Coverage of one region: its best similarity to any candidate phrase, and
/// which phrase that was (lowest index on ties) when the region counts as mentioned.
struct RegionVerdict {
  std::string region_id;
  double score = 0.0;
  RegionFlag flag = RegionFlag::unmentioned;
  std::optional<std::size_t> matched_phrase_index;

  friend bool operator==(const RegionVerdict&, const RegionVerdict&) = default;
};

struct InterpretReport {
  std::string bundle_id;
  double threshold = kDefaultReportThreshold;
  ScoreBreakdown breakdown;
  std::vector<PhraseVerdict> phrases;
  std::vector<RegionVerdict> regions;

  friend bool operator==(const InterpretReport&, const InterpretReport&) = default;
};

/// Builds verdicts from the same region x phrase matrix used for local ITC.
/// A score strictly above `threshold` is correct / mentioned. The breakdown
/// includes reference terms when the bundle has references.
/// Throws InvalidArgumentError unless 0 < threshold < 1.
InterpretReport build_report(const EvalBundle& bundle, double threshold = kDefaultReportThreshold);

enum class ReportFormat { structured, markdown };

std::string_view to_string(ReportFormat format) noexcept;
std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept;
std::string_view to_string(PhraseFlag flag) noexcept;
std::string_view to_string(RegionFlag flag) noexcept;

std::string render_report(const InterpretReport& report, ReportFormat format);

/// Inverse of render_report(..., structured). Throws ParseError / SchemaError.
InterpretReport parse_structured_report(std::string_view text);

}  // namespace hice
