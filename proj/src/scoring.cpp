#include "hice/scoring.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "hice/errors.hpp"
#include "hice/parallel.hpp"

namespace hice {

std::string_view to_string(Scorer scorer) noexcept {
  switch (scorer) {
    case Scorer::hice: return "hice";
    case Scorer::ref_hice: return "ref_hice";
    case Scorer::global_only: return "global_only";
    case Scorer::local_only: return "local_only";
  }
  return "unknown";
}

std::string_view to_string(AblationMode mode) noexcept {
  switch (mode) {
    case AblationMode::global_only: return "global_only";
    case AblationMode::local_only: return "local_only";
    case AblationMode::fused: return "fused";
  }
  return "unknown";
}

std::optional<Scorer> parse_scorer(std::string_view name) noexcept {
  for (Scorer s : {Scorer::hice, Scorer::ref_hice, Scorer::global_only, Scorer::local_only}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<AblationMode> parse_ablation_mode(std::string_view name) noexcept {
  for (AblationMode m : {AblationMode::global_only, AblationMode::local_only, AblationMode::fused}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

bool uses_references(Scorer scorer) noexcept { return scorer == Scorer::ref_hice; }

namespace {

std::vector<std::size_t> all_references(const EvalBundle& b) {
  std::vector<std::size_t> idx(b.references.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

void check_subset(const EvalBundle& b, std::span<const std::size_t> reference_indices) {
  if (reference_indices.empty()) {
    throw NoReferencesError("bundle '" + b.bundle_id + "' has no references to score against");
  }
  for (std::size_t h : reference_indices) {
    if (h >= b.references.size()) {
      throw InvalidArgumentError("reference index " + std::to_string(h) + " out of range for bundle '" +
                                 b.bundle_id + "'");
    }
  }
}

EmbeddingSet phrase_set(std::size_t dim, const TextSide& side) {
  EmbeddingSet set(dim);
  for (const auto& p : side.phrases) set.add(p.embedding);
  return set;
}

}  // namespace

SetMatch match_sets(const SimMatrix& s) {
  SetMatch m;
  m.precision = set_precision(s);
  m.recall = set_recall(s);
  m.fused = harmonic_mean({m.precision, m.recall});
  return m;
}

SimMatrix local_itc_matrix(const EvalBundle& b) {
  EmbeddingSet regions(b.dim);
  for (const auto& r : b.regions) regions.add(r.embedding);
  return sim_matrix(regions, phrase_set(b.dim, b.candidate));
}

SimMatrix local_ttc_matrix(const EvalBundle& b) { return local_ttc_matrix(b, all_references(b)); }

SimMatrix local_ttc_matrix(const EvalBundle& b, std::span<const std::size_t> reference_indices) {
  check_subset(b, reference_indices);
  EmbeddingSet pool(b.dim);
  for (std::size_t h : reference_indices) {
    for (const auto& p : b.references[h].phrases) pool.add(p.embedding);
  }
  return sim_matrix(pool, phrase_set(b.dim, b.candidate));
}

double global_itc(const EvalBundle& b) { return clamp01(cosine(b.image_global, b.candidate.global)); }

SetMatch local_itc(const EvalBundle& b) { return match_sets(local_itc_matrix(b)); }

double global_ttc(const EvalBundle& b) { return global_ttc(b, all_references(b)); }

double global_ttc(const EvalBundle& b, std::span<const std::size_t> reference_indices) {
  check_subset(b, reference_indices);
  double best = 0.0;
  for (std::size_t h : reference_indices) {
    best = std::max(best, clamp01(cosine(b.references[h].global, b.candidate.global)));
  }
  return best;
}

SetMatch local_ttc(const EvalBundle& b) { return local_ttc(b, all_references(b)); }

SetMatch local_ttc(const EvalBundle& b, std::span<const std::size_t> reference_indices) {
  return match_sets(local_ttc_matrix(b, reference_indices));
}

ScoreBreakdown hice_score(const EvalBundle& b) {
  ScoreBreakdown out;
  out.g_itc = global_itc(b);
  const SetMatch local = local_itc(b);
  out.l_itc_precision = local.precision;
  out.l_itc_recall = local.recall;
  out.l_itc = local.fused;
  out.hice = harmonic_mean({out.g_itc, out.l_itc});
  return out;
}

ScoreBreakdown ref_hice_score(const EvalBundle& b) { return ref_hice_score(b, all_references(b)); }

ScoreBreakdown ref_hice_score(const EvalBundle& b, std::span<const std::size_t> reference_indices) {
  check_subset(b, reference_indices);
  ScoreBreakdown out = hice_score(b);
  out.g_ttc = global_ttc(b, reference_indices);
  const SetMatch local = local_ttc(b, reference_indices);
  out.l_ttc_precision = local.precision;
  out.l_ttc_recall = local.recall;
  out.l_ttc = local.fused;
  out.ref_hice = harmonic_mean({out.g_itc, out.l_itc, *out.g_ttc, *out.l_ttc});
  return out;
}

double ablation_score(const EvalBundle& b, AblationMode mode) {
  const ScoreBreakdown breakdown = hice_score(b);
  switch (mode) {
    case AblationMode::global_only: return breakdown.g_itc;
    case AblationMode::local_only: return breakdown.l_itc;
    case AblationMode::fused: return breakdown.hice;
  }
  return breakdown.hice;
}

double select_score(const ScoreBreakdown& breakdown, Scorer scorer) {
  switch (scorer) {
    case Scorer::hice: return breakdown.hice;
    case Scorer::global_only: return breakdown.g_itc;
    case Scorer::local_only: return breakdown.l_itc;
    case Scorer::ref_hice:
      if (!breakdown.ref_hice) throw NoReferencesError("breakdown has no reference-based terms");
      return *breakdown.ref_hice;
  }
  return breakdown.hice;
}

double score(const EvalBundle& b, Scorer scorer) {
  return select_score(uses_references(scorer) ? ref_hice_score(b) : hice_score(b), scorer);
}

double score(const EvalBundle& b, Scorer scorer, std::span<const std::size_t> reference_indices) {
  if (!uses_references(scorer)) return score(b, scorer);
  return select_score(ref_hice_score(b, reference_indices), scorer);
}

std::vector<double> score_batch(std::span<const EvalBundle> bundles, Scorer scorer, int threads) {
  std::vector<double> out(bundles.size());
  parallel_for(bundles.size(), threads, [&](std::size_t i) { out[i] = score(bundles[i], scorer); });
  return out;
}

std::vector<double> score_batch_serial(std::span<const EvalBundle> bundles, Scorer scorer) {
  std::vector<double> out;
  out.reserve(bundles.size());
  for (const auto& b : bundles) out.push_back(score(b, scorer));
  return out;
}

std::vector<ScoreBreakdown> breakdown_batch(std::span<const EvalBundle> bundles, int threads) {
  std::vector<ScoreBreakdown> out(bundles.size());
  parallel_for(bundles.size(), threads, [&](std::size_t i) {
    out[i] = bundles[i].has_references() ? ref_hice_score(bundles[i]) : hice_score(bundles[i]);
  });
  return out;
}

}  // namespace hice
