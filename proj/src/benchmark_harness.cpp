#include "hice/benchmark_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "hice/bundle_io.hpp"
#include "hice/errors.hpp"
#include "hice/parallel.hpp"

namespace hice {

namespace {

using json = nlohmann::json;

// ----- record files --------------------------------------------------------

std::string resolve(const std::filesystem::path& record_file, const std::string& p) {
  const std::filesystem::path candidate(p);
  if (candidate.is_absolute()) return candidate.string();
  return (record_file.parent_path() / candidate).lexically_normal().string();
}

// Calls fn(object, location) for every non-blank line of a JSON Lines file,
// after checking that the object has exactly `fields`.
template <class Fn>
void for_each_record(const std::filesystem::path& path, std::initializer_list<std::string_view> fields,
                     Fn&& fn) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) throw SchemaError(where + ": expected one object per line");
    for (const auto& field : fields) {
      if (!obj.contains(field)) throw SchemaError(where + ": missing field \"" + std::string(field) + "\"");
    }
    for (const auto& [key, unused] : obj.items()) {
      if (std::find(fields.begin(), fields.end(), key) == fields.end()) {
        throw SchemaError(where + ": unexpected field \"" + key + "\"");
      }
    }
    fn(obj, where);
  }
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw SchemaError(where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

std::uint64_t count_field(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) throw SchemaError(where + ": \"" + key + "\" must be a non-negative integer");
  return v.get<std::uint64_t>();
}

// ----- Kendall -------------------------------------------------------------

std::int64_t tied_pairs(std::int64_t run) { return run * (run - 1) / 2; }

// Counts i < j with v[i] > v[j], sorting v in the process.
std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo,
                              std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

void check_rank_inputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InvalidArgumentError("rank correlation inputs differ in length: " + std::to_string(x.size()) +
                               " vs " + std::to_string(y.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InvalidArgumentError("rank correlation input contains a non-finite value");
    }
  }
  if (x.size() < 2) throw DegenerateInputError("rank correlation needs at least two points");
}

// ----- RNG streams ---------------------------------------------------------

enum class Stream : std::uint32_t { vote_ties = 1, reference_draws = 2, score_ties = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, Stream purpose, std::uint32_t draw) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), draw};
  return std::mt19937_64(seq);
}

bool coin_flip(std::mt19937_64& rng) { return (rng() >> 63) != 0; }

std::vector<std::size_t> sample_subset(std::size_t available, std::size_t wanted, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(available);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (wanted >= available) return idx;
  for (std::size_t i = 0; i < wanted; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, available - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(wanted);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Maps record paths onto a deduplicated, first-seen-ordered list.
class PathTable {
 public:
  std::size_t add(const std::string& path) {
    const auto [it, inserted] = index_.emplace(path, paths_.size());
    if (inserted) paths_.push_back(path);
    return it->second;
  }
  const std::vector<std::string>& paths() const noexcept { return paths_; }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> paths_;
};

}  // namespace

std::vector<JudgmentRecord> read_judgment_records(const std::filesystem::path& path) {
  std::vector<JudgmentRecord> out;
  for_each_record(path, {"bundle_path", "human_score"}, [&](const json& obj, const std::string& where) {
    const auto& score = obj.at("human_score");
    if (!score.is_number()) throw SchemaError(where + ": \"human_score\" must be a number");
    const double value = score.get<double>();
    if (!std::isfinite(value)) throw ValidationError(where + ": \"human_score\" is not finite");
    out.push_back({resolve(path, string_field(obj, "bundle_path", where)), value});
  });
  return out;
}

std::vector<PairRecord> read_pair_records(const std::filesystem::path& path) {
  std::vector<PairRecord> out;
  for_each_record(path, {"bundle_a", "bundle_b", "votes_a", "votes_b"},
                  [&](const json& obj, const std::string& where) {
                    PairRecord r;
                    r.bundle_a = resolve(path, string_field(obj, "bundle_a", where));
                    r.bundle_b = resolve(path, string_field(obj, "bundle_b", where));
                    r.votes_a = count_field(obj, "votes_a", where);
                    r.votes_b = count_field(obj, "votes_b", where);
                    if (r.votes_a + r.votes_b == 0) throw ValidationError(where + ": pair has no votes");
                    out.push_back(std::move(r));
                  });
  return out;
}

std::vector<FoilRecord> read_foil_records(const std::filesystem::path& path) {
  std::vector<FoilRecord> out;
  for_each_record(path, {"bundle_correct", "bundle_foil"}, [&](const json& obj, const std::string& where) {
    out.push_back({resolve(path, string_field(obj, "bundle_correct", where)),
                   resolve(path, string_field(obj, "bundle_foil", where))});
  });
  return out;
}

std::string_view to_string(CorrelationStat stat) noexcept {
  return stat == CorrelationStat::tau_b ? "tau_b" : "tau_c";
}

std::optional<CorrelationStat> parse_correlation_stat(std::string_view name) noexcept {
  if (name == "tau_b") return CorrelationStat::tau_b;
  if (name == "tau_c") return CorrelationStat::tau_c;
  return std::nullopt;
}

PairCounts count_pairs(std::span<const double> x, std::span<const double> y) {
  check_rank_inputs(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  std::int64_t tied_x = 0;
  std::int64_t tied_xy = 0;
  PairCounts counts;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    tied_x += tied_pairs(static_cast<std::int64_t>(j - i));
    ++counts.distinct_x;
    for (std::size_t k = i; k < j;) {
      std::size_t l = k;
      while (l < j && y[order[l]] == y[order[k]]) ++l;
      tied_xy += tied_pairs(static_cast<std::int64_t>(l - k));
      k = l;
    }
    i = j;
  }

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> scratch(n);
  // In (x, y) order, strict inversions of y are exactly the discordant pairs.
  const std::int64_t discordant = count_inversions(ys, scratch, 0, n);

  std::int64_t tied_y = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && ys[j] == ys[i]) ++j;
    tied_y += tied_pairs(static_cast<std::int64_t>(j - i));
    ++counts.distinct_y;
    i = j;
  }

  const std::int64_t total = tied_pairs(static_cast<std::int64_t>(n));
  counts.discordant = discordant;
  counts.concordant = total - tied_x - tied_y + tied_xy - discordant;
  counts.ties_x_only = tied_x - tied_xy;
  counts.ties_y_only = tied_y - tied_xy;
  counts.ties_both = tied_xy;
  return counts;
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  const PairCounts c = count_pairs(x, y);
  if (c.distinct_x < 2 || c.distinct_y < 2) {
    throw DegenerateInputError("tau-b is undefined when one ranking is constant");
  }
  const std::int64_t untied_x = c.concordant + c.discordant + c.ties_x_only;
  const std::int64_t untied_y = c.concordant + c.discordant + c.ties_y_only;
  return static_cast<double>(c.concordant - c.discordant) /
         std::sqrt(static_cast<double>(untied_x) * static_cast<double>(untied_y));
}

double kendall_tau_c(std::span<const double> x, std::span<const double> y) {
  const PairCounts c = count_pairs(x, y);
  const std::int64_t m = std::min(c.distinct_x, c.distinct_y);
  if (m < 2) throw DegenerateInputError("tau-c is undefined with fewer than two distinct values");
  const auto n = static_cast<double>(x.size());
  return 2.0 * static_cast<double>(m) * static_cast<double>(c.concordant - c.discordant) /
         (n * n * static_cast<double>(m - 1));
}

double correlation(std::span<const double> x, std::span<const double> y, CorrelationStat stat) {
  return stat == CorrelationStat::tau_b ? kendall_tau_b(x, y) : kendall_tau_c(x, y);
}

double pairwise_accuracy(std::span<const EvalBundle> bundles, std::span<const IndexedPair> pairs,
                         Scorer scorer, const PairwiseOptions& options) {
  if (pairs.empty()) throw InvalidArgumentError("pairwise benchmark needs at least one pair");
  if (options.draws < 1) throw InvalidArgumentError("draws must be at least 1");
  if (options.refs_per_draw < 1) throw InvalidArgumentError("refs_per_draw must be at least 1");
  for (const auto& p : pairs) {
    if (p.a >= bundles.size() || p.b >= bundles.size()) {
      throw InvalidArgumentError("pair refers to a bundle index out of range");
    }
  }

  // true = side A preferred
  std::vector<bool> truth(pairs.size());
  auto vote_rng = make_stream(options.seed, Stream::vote_ties, 0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    truth[i] = p.votes_a == p.votes_b ? coin_flip(vote_rng) : p.votes_a > p.votes_b;
  }

  const bool reference_based = uses_references(scorer);
  const int draws = reference_based ? options.draws : 1;
  std::vector<double> score_a(pairs.size());
  std::vector<double> score_b(pairs.size());
  double accuracy_sum = 0.0;

  for (int d = 0; d < draws; ++d) {
    const auto draw = static_cast<std::uint32_t>(d);
    if (reference_based) {
      std::vector<std::vector<std::size_t>> subset_a(pairs.size());
      std::vector<std::vector<std::size_t>> subset_b(pairs.size());
      auto ref_rng = make_stream(options.seed, Stream::reference_draws, draw);
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& a = bundles[pairs[i].a];
        const auto& b = bundles[pairs[i].b];
        subset_a[i] = sample_subset(a.references.size(), options.refs_per_draw, ref_rng);
        subset_b[i] = b.references.size() == a.references.size()
                          ? subset_a[i]
                          : sample_subset(b.references.size(), options.refs_per_draw, ref_rng);
      }
      parallel_for(pairs.size(), options.threads, [&](std::size_t i) {
        score_a[i] = score(bundles[pairs[i].a], scorer, subset_a[i]);
        score_b[i] = score(bundles[pairs[i].b], scorer, subset_b[i]);
      });
    } else {
      parallel_for(pairs.size(), options.threads, [&](std::size_t i) {
        score_a[i] = score(bundles[pairs[i].a], scorer);
        score_b[i] = score(bundles[pairs[i].b], scorer);
      });
    }

    auto tie_rng = make_stream(options.seed, Stream::score_ties, draw);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const bool predicted_a = score_a[i] == score_b[i] ? coin_flip(tie_rng) : score_a[i] > score_b[i];
      if (predicted_a == truth[i]) ++correct;
    }
    accuracy_sum += static_cast<double>(correct) / static_cast<double>(pairs.size());
  }
  return accuracy_sum / static_cast<double>(draws);
}

double foil_accuracy(std::span<const double> correct_scores, std::span<const double> foil_scores) {
  if (correct_scores.size() != foil_scores.size()) {
    throw InvalidArgumentError("correct and foil score lists differ in length");
  }
  if (correct_scores.empty()) throw InvalidArgumentError("foil benchmark needs at least one record");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < correct_scores.size(); ++i) {
    if (correct_scores[i] > foil_scores[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(correct_scores.size());
}

std::vector<EvalBundle> load_bundles(std::span<const std::string> paths, int threads) {
  std::vector<EvalBundle> out(paths.size());
  parallel_for(paths.size(), threads, [&](std::size_t i) { out[i] = read_bundle(paths[i]); });
  return out;
}

BenchmarkResult correlation_benchmark(std::span<const JudgmentRecord> records, Scorer scorer,
                                      CorrelationStat stat, int threads) {
  if (records.size() < 2) throw DegenerateInputError("correlation benchmark needs at least two records");
  std::vector<std::string> paths;
  std::vector<double> human;
  for (const auto& r : records) {
    paths.push_back(r.bundle_path);
    human.push_back(r.human_score);
  }
  const auto bundles = load_bundles(paths, threads);
  const auto scores = score_batch(bundles, scorer, threads);
  return {correlation(scores, human, stat), records.size(), {}};
}

BenchmarkResult pairwise_benchmark(std::span<const PairRecord> pairs, Scorer scorer,
                                   const PairwiseOptions& options) {
  if (pairs.empty()) throw InvalidArgumentError("pairwise benchmark needs at least one pair");
  PathTable table;
  std::vector<IndexedPair> indexed;
  for (const auto& p : pairs) {
    indexed.push_back({table.add(p.bundle_a), table.add(p.bundle_b), p.votes_a, p.votes_b});
  }
  const auto bundles = load_bundles(table.paths(), options.threads);
  BenchmarkResult result;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& a = bundles[indexed[i].a];
    const auto& b = bundles[indexed[i].b];
    if (a.image_id != b.image_id) {
      result.warnings.push_back("pair " + std::to_string(i) + ": image_id mismatch ('" + a.image_id +
                                "' vs '" + b.image_id + "')");
    }
  }
  result.value = pairwise_accuracy(bundles, indexed, scorer, options);
  result.n = pairs.size();
  return result;
}

BenchmarkResult foil_benchmark(std::span<const FoilRecord> records, Scorer scorer, int threads) {
  if (records.empty()) throw InvalidArgumentError("foil benchmark needs at least one record");
  std::vector<std::string> paths;
  for (const auto& r : records) {
    paths.push_back(r.bundle_correct);
    paths.push_back(r.bundle_foil);
  }
  const auto bundles = load_bundles(paths, threads);
  const auto scores = score_batch(bundles, scorer, threads);
  BenchmarkResult result;
  std::vector<double> correct(records.size());
  std::vector<double> foil(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    correct[i] = scores[2 * i];
    foil[i] = scores[2 * i + 1];
    if (bundles[2 * i].image_id != bundles[2 * i + 1].image_id) {
      result.warnings.push_back("record " + std::to_string(i) + ": image_id mismatch ('" +
                                bundles[2 * i].image_id + "' vs '" + bundles[2 * i + 1].image_id + "')");
    }
  }
  result.value = foil_accuracy(correct, foil);
  result.n = records.size();
  return result;
}

std::string to_json(const ProtocolReport& report) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  out["protocol"] = report.protocol;
  out["scorer"] = report.scorer;
  if (report.stat) out["stat"] = *report.stat;
  out["n"] = report.n;
  out["value"] = report.value;
  if (report.seed) out["seed"] = *report.seed;
  return out.dump();
}

}  // namespace hice
