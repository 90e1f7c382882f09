#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hice/core_model.hpp"
#include "hice/scoring.hpp"

namespace hice {

// ---------------------------------------------------------------------------
// Records. Record files are JSON Lines; bundle paths inside them are resolved
// relative to the directory of the record file.
// ---------------------------------------------------------------------------

/// One caption with its human rating (dataset-native scale).
struct JudgmentRecord {
  std::string bundle_path;
  double human_score = 0.0;
};

/// Two captions of the same image with human preference votes.
struct PairRecord {
  std::string bundle_a;
  std::string bundle_b;
  std::uint64_t votes_a = 0;
  std::uint64_t votes_b = 0;
};

/// A correct caption and its foiled (one noun swapped) counterpart.
struct FoilRecord {
  std::string bundle_correct;
  std::string bundle_foil;
};

std::vector<JudgmentRecord> read_judgment_records(const std::filesystem::path& path);
std::vector<PairRecord> read_pair_records(const std::filesystem::path& path);
std::vector<FoilRecord> read_foil_records(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Rank correlation
// ---------------------------------------------------------------------------

enum class CorrelationStat { tau_b, tau_c };

std::string_view to_string(CorrelationStat stat) noexcept;
std::optional<CorrelationStat> parse_correlation_stat(std::string_view name) noexcept;

/// Classification of all n(n-1)/2 unordered index pairs.
struct PairCounts {
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t ties_x_only = 0;
  std::int64_t ties_y_only = 0;
  std::int64_t ties_both = 0;
  std::int64_t distinct_x = 0;
  std::int64_t distinct_y = 0;
};

/// O(n log n) pair classification (sort + merge-count of inversions).
PairCounts count_pairs(std::span<const double> x, std::span<const double> y);

/// Tie-adjusted Kendall tau-b. Throws DegenerateInputError when either side
/// is constant or has fewer than two points.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);
/// Stuart's tau-c, 2m(C - D) / (n^2 (m - 1)) with m the smaller number of
/// distinct values. Throws DegenerateInputError when m < 2.
double kendall_tau_c(std::span<const double> x, std::span<const double> y);

double correlation(std::span<const double> x, std::span<const double> y, CorrelationStat stat);

// ---------------------------------------------------------------------------
// Protocols
// ---------------------------------------------------------------------------

struct BenchmarkResult {
  double value = 0.0;
  std::size_t n = 0;
  std::vector<std::string> warnings;  // e.g. image_id mismatches, in record order
};

struct PairwiseOptions {
  int draws = 5;                   // reference draws for reference-based scorers
  std::size_t refs_per_draw = 5;   // references sampled per draw (all if fewer)
  std::uint64_t seed = 42;
  int threads = 1;
};

/// Pair of bundle indices plus votes; used by the in-memory pairwise protocol.
struct IndexedPair {
  std::size_t a = 0;
  std::size_t b = 0;
  std::uint64_t votes_a = 0;
  std::uint64_t votes_b = 0;
};

/// Pairwise ranking accuracy over already-loaded bundles.
///
/// Ground truth is the majority side, a seeded coin flip on equal votes. The
/// prediction is the side with the higher score, a seeded coin flip on an
/// exact tie. Reference-based scorers average accuracy over `draws` random
/// reference subsets; reference-free scorers run a single pass. All random
/// decisions come from per-purpose streams derived from the seed and are
/// drawn serially in pair order, so the result does not depend on `threads`.
double pairwise_accuracy(std::span<const EvalBundle> bundles, std::span<const IndexedPair> pairs,
                         Scorer scorer, const PairwiseOptions& options);

/// Fraction of items where correct_scores[i] > foil_scores[i]; ties count as misses.
double foil_accuracy(std::span<const double> correct_scores, std::span<const double> foil_scores);

/// Loads (on `threads` workers) and validates bundles, preserving input order.
std::vector<EvalBundle> load_bundles(std::span<const std::string> paths, int threads);

BenchmarkResult correlation_benchmark(std::span<const JudgmentRecord> records, Scorer scorer,
                                      CorrelationStat stat, int threads);
BenchmarkResult pairwise_benchmark(std::span<const PairRecord> pairs, Scorer scorer,
                                   const PairwiseOptions& options);
BenchmarkResult foil_benchmark(std::span<const FoilRecord> records, Scorer scorer, int threads);

/// Single-object summary printed by the benchmark commands.
struct ProtocolReport {
  std::string protocol;  // correlation | pairs | foil
  std::string scorer;
  std::optional<std::string> stat;
  std::size_t n = 0;
  double value = 0.0;
  std::optional<std::uint64_t> seed;
};

std::string to_json(const ProtocolReport& report);

}  // namespace hice
