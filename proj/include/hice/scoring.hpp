#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hice/core_model.hpp"
#include "hice/similarity.hpp"

namespace hice {

/// Precision/recall of a set match and their harmonic mean.
struct SetMatch {
  double precision = 0.0;
  double recall = 0.0;
  double fused = 0.0;

  friend bool operator==(const SetMatch&, const SetMatch&) = default;
};

/// All component scores for one bundle. Reference-based fields are set only
/// when the bundle was scored against references.
struct ScoreBreakdown {
  double g_itc = 0.0;
  double l_itc_precision = 0.0;
  double l_itc_recall = 0.0;
  double l_itc = 0.0;
  std::optional<double> g_ttc;
  std::optional<double> l_ttc_precision;
  std::optional<double> l_ttc_recall;
  std::optional<double> l_ttc;
  double hice = 0.0;
  std::optional<double> ref_hice;

  friend bool operator==(const ScoreBreakdown&, const ScoreBreakdown&) = default;
};

enum class Scorer { hice, ref_hice, global_only, local_only };
enum class AblationMode { global_only, local_only, fused };

std::string_view to_string(Scorer scorer) noexcept;
std::string_view to_string(AblationMode mode) noexcept;
std::optional<Scorer> parse_scorer(std::string_view name) noexcept;
std::optional<AblationMode> parse_ablation_mode(std::string_view name) noexcept;
bool uses_references(Scorer scorer) noexcept;

/// Matches two sets through their similarity matrix: precision averages the
/// column maxima, recall the row maxima.
SetMatch match_sets(const SimMatrix& s);

/// Regions (rows) against candidate phrases (columns).
SimMatrix local_itc_matrix(const EvalBundle& b);
/// Pooled reference phrases (rows, in reference then phrase order) against
/// candidate phrases (columns).
SimMatrix local_ttc_matrix(const EvalBundle& b);
SimMatrix local_ttc_matrix(const EvalBundle& b, std::span<const std::size_t> reference_indices);

double global_itc(const EvalBundle& b);
SetMatch local_itc(const EvalBundle& b);

// The reference-based scores throw NoReferencesError when the bundle (or the
// selected subset) has no references. Multiple references are aggregated by
// max for the global term and by pooling phrases for the local term.
double global_ttc(const EvalBundle& b);
double global_ttc(const EvalBundle& b, std::span<const std::size_t> reference_indices);
SetMatch local_ttc(const EvalBundle& b);
SetMatch local_ttc(const EvalBundle& b, std::span<const std::size_t> reference_indices);

/// Reference-free score; reference fields stay empty even if the bundle has references.
ScoreBreakdown hice_score(const EvalBundle& b);
ScoreBreakdown ref_hice_score(const EvalBundle& b);
ScoreBreakdown ref_hice_score(const EvalBundle& b, std::span<const std::size_t> reference_indices);

double ablation_score(const EvalBundle& b, AblationMode mode);

/// Picks the requested value out of a breakdown. Throws NoReferencesError if
/// the scorer is ref_hice and the breakdown has no reference terms.
double select_score(const ScoreBreakdown& breakdown, Scorer scorer);

double score(const EvalBundle& b, Scorer scorer);
double score(const EvalBundle& b, Scorer scorer, std::span<const std::size_t> reference_indices);

/// Scores bundles on up to `threads` OpenMP workers; output is in input order
/// and bit-identical to score_batch_serial.
std::vector<double> score_batch(std::span<const EvalBundle> bundles, Scorer scorer, int threads);
std::vector<double> score_batch_serial(std::span<const EvalBundle> bundles, Scorer scorer);

/// Full breakdowns; reference terms are filled for bundles that have references.
std::vector<ScoreBreakdown> breakdown_batch(std::span<const EvalBundle> bundles, int threads);

}  // namespace hice
