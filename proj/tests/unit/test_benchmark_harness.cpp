#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "hice/benchmark_harness.hpp"
#include "hice/bundle_io.hpp"
#include "hice/errors.hpp"
#include "oracles.hpp"

using namespace hice;
using namespace hice::testing;

namespace {

// Bundle whose HICE score increases strictly with `quality` in (0, 1].
EvalBundle graded_bundle(const std::string& id, double quality, const std::string& image = "img") {
  EvalBundle b;
  b.bundle_id = id;
  b.image_id = image;
  b.dim = 2;
  b.image_global = emb({1.0, 0.0});
  b.regions = {region("r0", emb({1.0, 0.0}))};
  b.candidate = text_side(id, emb({quality, std::sqrt(1.0 - quality * quality)}), {phrase("p", emb({1.0, 0.0}))});
  return b;
}

std::vector<double> tie_heavy(std::mt19937_64& rng, std::size_t n, int levels) {
  std::uniform_int_distribution<int> level(0, levels - 1);
  std::vector<double> v(n);
  for (auto& x : v) x = level(rng);
  return v;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const auto& l : lines) out << l << "\n";
}

}  // namespace

TEST_CASE("Kendall examples") {
  const std::vector<double> up = {1, 2, 3}, scaled = {10, 20, 30}, down = {30, 20, 10};
  CHECK(kendall_tau_b(up, scaled) == 1.0);
  CHECK(kendall_tau_b(up, down) == -1.0);
  CHECK(kendall_tau_c(up, scaled) == 1.0);
  CHECK(kendall_tau_c(up, down) == -1.0);

  const std::vector<double> x = {1, 2, 2, 3}, y = {1, 3, 2, 4};
  const PairCounts c = count_pairs(x, y);
  CHECK(c.concordant == 5);
  CHECK(c.discordant == 0);
  CHECK(c.ties_x_only == 1);
  CHECK(c.ties_y_only == 0);
  CHECK(kendall_tau_b(x, y) == doctest::Approx(0.912870929175277).epsilon(1e-14));
  CHECK(kendall_tau_c(x, y) == doctest::Approx(0.9375).epsilon(1e-14));

  const std::vector<double> a = {0, 0, 1, 1}, b = {5, 5, 9, 9};
  CHECK(kendall_tau_c(a, b) == 1.0);
  CHECK(kendall_tau_b(a, b) == 1.0);
}

TEST_CASE("Kendall degenerate inputs") {
  const std::vector<double> flat = {2, 2, 2}, up = {1, 2, 3}, one = {1};
  CHECK_THROWS_AS(kendall_tau_b(flat, up), DegenerateInputError);
  CHECK_THROWS_AS(kendall_tau_b(up, flat), DegenerateInputError);
  CHECK_THROWS_AS(kendall_tau_c(flat, up), DegenerateInputError);
  CHECK_THROWS_AS(kendall_tau_b(one, one), DegenerateInputError);
  CHECK_THROWS_AS(kendall_tau_b(up, std::vector<double>{1, 2}), InvalidArgumentError);
  CHECK_THROWS_AS(kendall_tau_b(up, std::vector<double>{1, NAN, 2}), InvalidArgumentError);
}

TEST_CASE("pair counts and Kendall statistics match the brute-force oracle") {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<std::size_t> length(2, 200);
  std::uniform_int_distribution<int> levels(2, 8);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = length(rng);
    const auto x = tie_heavy(rng, n, levels(rng));
    const auto y = tie_heavy(rng, n, levels(rng));
    const PairCounts c = count_pairs(x, y);
    const auto t = oracle::tally_pairs(x, y);
    CHECK(c.concordant == t.concordant);
    CHECK(c.discordant == t.discordant);
    CHECK(c.ties_x_only == t.ties_x_only);
    CHECK(c.ties_y_only == t.ties_y_only);
    if (c.distinct_x < 2 || c.distinct_y < 2) continue;
    CHECK(kendall_tau_b(x, y) == oracle::tau_b(x, y));
    CHECK(kendall_tau_c(x, y) == oracle::tau_c(x, y));
    ++compared;
  }
  CHECK(compared > 250);
}

TEST_CASE("Kendall symmetry, negation and monotone transforms") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + trial % 40;
    auto x = tie_heavy(rng, n, 5);
    std::vector<double> y(n);
    for (auto& v : y) v = u(rng);
    if (std::set<double>(x.begin(), x.end()).size() < 2) x[0] = 99.0;

    for (CorrelationStat stat : {CorrelationStat::tau_b, CorrelationStat::tau_c}) {
      const double base = correlation(x, y, stat);
      CHECK(correlation(y, x, stat) == base);
      std::vector<double> neg(n), exp_y(n);
      for (std::size_t i = 0; i < n; ++i) {
        neg[i] = -y[i];
        exp_y[i] = std::exp(y[i]) * 7.0 + 1.0;
      }
      CHECK(correlation(x, neg, stat) == -base);
      CHECK(correlation(x, exp_y, stat) == base);
      CHECK(std::abs(base) <= 1.0);
    }
  }
}

TEST_CASE("statistic names") {
  CHECK(parse_correlation_stat("tau_c") == CorrelationStat::tau_c);
  CHECK(parse_correlation_stat("pearson") == std::nullopt);
  CHECK(to_string(CorrelationStat::tau_b) == "tau_b");
}

TEST_CASE("foil accuracy examples") {
  const std::vector<double> correct = {0.9, 0.5, 0.4}, foil = {0.1, 0.5, 0.6};
  CHECK(foil_accuracy(correct, foil) == doctest::Approx(1.0 / 3.0));
  CHECK(foil_accuracy(foil, correct) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(foil_accuracy(std::vector<double>{}, std::vector<double>{}), InvalidArgumentError);
}

TEST_CASE("pairwise accuracy on constructed preferences") {
  std::vector<EvalBundle> bundles;
  for (int i = 0; i < 20; ++i) bundles.push_back(graded_bundle("g" + std::to_string(i), 0.05 + 0.045 * i));
  std::vector<IndexedPair> agree, disagree;
  for (std::size_t i = 0; i + 1 < bundles.size(); ++i) {
    agree.push_back({i + 1, i, 3, 1});
    disagree.push_back({i + 1, i, 1, 3});
  }
  PairwiseOptions opt;
  CHECK(pairwise_accuracy(bundles, agree, Scorer::hice, opt) == 1.0);
  CHECK(pairwise_accuracy(bundles, disagree, Scorer::hice, opt) == 0.0);
  CHECK(pairwise_accuracy(bundles, agree, Scorer::global_only, opt) == 1.0);

  const std::vector<IndexedPair> bad = {{0, 99, 1, 0}};
  CHECK_THROWS_AS(pairwise_accuracy(bundles, bad, Scorer::hice, opt), InvalidArgumentError);
  CHECK_THROWS_AS(pairwise_accuracy(bundles, std::vector<IndexedPair>{}, Scorer::hice, opt), InvalidArgumentError);
}

TEST_CASE("pairwise ties resolve by seeded coin flips") {
  std::vector<EvalBundle> bundles = {graded_bundle("same", 0.5)};
  std::vector<IndexedPair> pairs(400, IndexedPair{0, 0, 2, 2});
  PairwiseOptions opt;
  const double acc = pairwise_accuracy(bundles, pairs, Scorer::hice, opt);
  CHECK(acc > 0.35);
  CHECK(acc < 0.65);
  CHECK(pairwise_accuracy(bundles, pairs, Scorer::hice, opt) == acc);
  opt.seed = 7;
  CHECK(pairwise_accuracy(bundles, pairs, Scorer::hice, opt) != acc);
}

TEST_CASE("pairwise accuracy is deterministic and thread-independent") {
  std::mt19937_64 rng(71);
  RandomBundleShape shape;
  shape.max_references = 6;
  std::vector<EvalBundle> bundles;
  for (int i = 0; i < 60; ++i) {
    EvalBundle b = random_bundle(rng, "w" + std::to_string(i), shape);
    if (!b.has_references()) b.references.push_back(b.candidate);
    bundles.push_back(std::move(b));
  }
  std::uniform_int_distribution<std::size_t> pick(0, bundles.size() - 1);
  std::uniform_int_distribution<std::uint64_t> votes(0, 3);
  std::vector<IndexedPair> pairs;
  for (int i = 0; i < 120; ++i) pairs.push_back({pick(rng), pick(rng), votes(rng), votes(rng) + 1});

  for (Scorer scorer : {Scorer::hice, Scorer::ref_hice}) {
    PairwiseOptions opt;
    opt.refs_per_draw = 2;
    const double first = pairwise_accuracy(bundles, pairs, scorer, opt);
    for (int run = 0; run < 3; ++run) CHECK(pairwise_accuracy(bundles, pairs, scorer, opt) == first);
    for (int threads : {2, 8}) {
      opt.threads = threads;
      CHECK(pairwise_accuracy(bundles, pairs, scorer, opt) == first);
    }
  }
}

TEST_CASE("reference draws use the requested subset size") {
  // Candidate matches only reference 0; reference 1 is orthogonal in every respect.
  EvalBundle good = graded_bundle("good", 0.9);
  good.references = {text_side("match", good.candidate.global, good.candidate.phrases),
                     text_side("miss", emb({-0.4359, 0.9}), {phrase("x", emb({0.0, 1.0}))})};
  EvalBundle poor = good;
  poor.bundle_id = "poor";
  poor.candidate.global = emb({0.3, std::sqrt(1 - 0.09)});
  poor.references[0].global = poor.candidate.global;

  const std::vector<EvalBundle> bundles = {good, poor};
  const std::vector<IndexedPair> pairs = {{0, 1, 5, 0}};
  PairwiseOptions opt;
  opt.draws = 40;
  opt.refs_per_draw = 2;
  CHECK(pairwise_accuracy(bundles, pairs, Scorer::ref_hice, opt) == 1.0);
  opt.refs_per_draw = 1;
  const double single = pairwise_accuracy(bundles, pairs, Scorer::ref_hice, opt);
  CHECK(single >= 0.0);
  CHECK(single <= 1.0);
}

TEST_CASE("record files") {
  TempDir dir("records");
  write_bundle(graded_bundle("a", 0.3), dir / "a.json", EmbeddingEncoding::decimal);
  write_bundle(graded_bundle("b", 0.8), dir / "b.json", EmbeddingEncoding::decimal);
  write_bundle(graded_bundle("c", 0.6, "other"), dir / "c.json", EmbeddingEncoding::decimal);

  SUBCASE("judgments resolve paths relative to the record file") {
    write_lines(dir / "j.jsonl", {R"({"bundle_path": "a.json", "human_score": 1})", "",
                                  R"({"bundle_path": "b.json", "human_score": 4.5})",
                                  R"({"bundle_path": "c.json", "human_score": 3})"});
    const auto records = read_judgment_records(dir / "j.jsonl");
    REQUIRE(records.size() == 3);
    CHECK(records[0].bundle_path == (dir / "a.json").string());
    const auto r = correlation_benchmark(records, Scorer::hice, CorrelationStat::tau_b, 2);
    CHECK(r.value == 1.0);
    CHECK(r.n == 3);
    CHECK(correlation_benchmark(records, Scorer::hice, CorrelationStat::tau_c, 1).value == 1.0);
  }
  SUBCASE("pairs warn on image mismatch and deduplicate bundles") {
    write_lines(dir / "p.jsonl", {R"({"bundle_a": "a.json", "bundle_b": "b.json", "votes_a": 0, "votes_b": 3})",
                                  R"({"bundle_a": "b.json", "bundle_b": "c.json", "votes_a": 2, "votes_b": 1})"});
    const auto pairs = read_pair_records(dir / "p.jsonl");
    REQUIRE(pairs.size() == 2);
    const auto r = pairwise_benchmark(pairs, Scorer::hice, PairwiseOptions{});
    CHECK(r.value == 1.0);
    CHECK(r.n == 2);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("pair 1") == 0);
  }
  SUBCASE("foil") {
    write_lines(dir / "f.jsonl", {R"({"bundle_correct": "b.json", "bundle_foil": "a.json"})",
                                  R"({"bundle_correct": "a.json", "bundle_foil": "b.json"})"});
    const auto records = read_foil_records(dir / "f.jsonl");
    CHECK(foil_benchmark(records, Scorer::hice, 1).value == 0.5);
  }
  SUBCASE("record errors") {
    write_lines(dir / "zero.jsonl", {R"({"bundle_a": "a.json", "bundle_b": "b.json", "votes_a": 0, "votes_b": 0})"});
    CHECK_THROWS_AS(read_pair_records(dir / "zero.jsonl"), ValidationError);
    write_lines(dir / "neg.jsonl", {R"({"bundle_a": "a.json", "bundle_b": "b.json", "votes_a": -1, "votes_b": 2})"});
    CHECK_THROWS_AS(read_pair_records(dir / "neg.jsonl"), SchemaError);
    write_lines(dir / "extra.jsonl", {R"({"bundle_path": "a.json", "human_score": 1, "note": "x"})"});
    CHECK_THROWS_AS(read_judgment_records(dir / "extra.jsonl"), SchemaError);
    write_lines(dir / "broken.jsonl", {R"({"bundle_correct": "a.json",)"});
    CHECK_THROWS_AS(read_foil_records(dir / "broken.jsonl"), ParseError);
    CHECK_THROWS_AS(read_foil_records(dir / "absent.jsonl"), IoError);
    write_lines(dir / "missing.jsonl", {R"({"bundle_path": "nope.json", "human_score": 1})",
                                        R"({"bundle_path": "a.json", "human_score": 2})"});
    CHECK_THROWS_AS(
        correlation_benchmark(read_judgment_records(dir / "missing.jsonl"), Scorer::hice, CorrelationStat::tau_b, 1),
        IoError);
  }
}

TEST_CASE("foil benchmark over random pairs") {
  TempDir dir("foil");
  std::mt19937_64 rng(73);
  std::vector<std::string> lines;
  std::vector<double> correct_scores, foil_scores;
  for (int i = 0; i < 40; ++i) {
    const EvalBundle c = random_bundle(rng, "c" + std::to_string(i));
    EvalBundle f = c;
    f.bundle_id = "f" + std::to_string(i);
    f.candidate.phrases.back().embedding = random_embedding(rng, c.dim);
    write_bundle(c, dir / (c.bundle_id + ".json"), EmbeddingEncoding::packed);
    write_bundle(f, dir / (f.bundle_id + ".json"), EmbeddingEncoding::packed);
    lines.push_back(R"({"bundle_correct": ")" + c.bundle_id + R"(.json", "bundle_foil": ")" + f.bundle_id +
                    R"(.json"})");
    correct_scores.push_back(hice_score(read_bundle(dir / (c.bundle_id + ".json"))).hice);
    foil_scores.push_back(hice_score(read_bundle(dir / (f.bundle_id + ".json"))).hice);
  }
  write_lines(dir / "f.jsonl", lines);
  auto records = read_foil_records(dir / "f.jsonl");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < correct_scores.size(); ++i) hits += correct_scores[i] > foil_scores[i] ? 1 : 0;
  const double expected = static_cast<double>(hits) / static_cast<double>(correct_scores.size());
  CHECK(foil_benchmark(records, Scorer::hice, 1).value == expected);
  std::shuffle(records.begin(), records.end(), rng);
  CHECK(foil_benchmark(records, Scorer::hice, 4).value == expected);
}

TEST_CASE("protocol report JSON") {
  ProtocolReport r{"pairs", "hice", std::nullopt, 12, 0.75, 42};
  CHECK(to_json(r) == R"({"protocol":"pairs","scorer":"hice","n":12,"value":0.75,"seed":42})");
  ProtocolReport c{"correlation", "ref_hice", "tau_c", 3, -0.5, std::nullopt};
  CHECK(to_json(c) == R"({"protocol":"correlation","scorer":"ref_hice","stat":"tau_c","n":3,"value":-0.5})");
}
