#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "hice/errors.hpp"
#include "hice/similarity.hpp"
#include "oracles.hpp"

using namespace hice;
using namespace hice::testing;

namespace {

oracle::Matrix to_rows(const SimMatrix& s) {
  oracle::Matrix m(s.rows(), std::vector<double>(s.cols()));
  for (std::size_t r = 0; r < s.rows(); ++r) {
    for (std::size_t c = 0; c < s.cols(); ++c) m[r][c] = s.at(r, c);
  }
  return m;
}

SimMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> cells(rows * cols);
  for (auto& c : cells) c = u(rng);
  return SimMatrix(rows, cols, std::move(cells));
}

}  // namespace

TEST_CASE("cosine examples") {
  CHECK(cosine(emb({1, 0}), emb({1, 0})) == 1.0);
  CHECK(cosine(emb({1, 0}), emb({0, 1})) == 0.0);
  CHECK(cosine(emb({1, 1}), emb({1, 0})) == doctest::Approx(0.7071068).epsilon(1e-6));
  CHECK(cosine(emb({-2, 0}), emb({1, 0})) == -1.0);
}

TEST_CASE("cosine errors") {
  CHECK_THROWS_AS(cosine(emb({1, 0}), emb({1, 0, 0})), DimensionError);
  CHECK_THROWS_AS(cosine(emb({0, 0}), emb({1, 0})), DegenerateVectorError);
  CHECK_THROWS_AS(cosine(emb({1, 0}), emb({NAN, 0})), DegenerateVectorError);
}

TEST_CASE("clamp01 examples") {
  CHECK(clamp01(-0.3) == 0.0);
  CHECK(clamp01(0.42) == 0.42);
  CHECK(clamp01(1.0000001) == 1.0);
}

TEST_CASE("sim_matrix examples") {
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<Embedding> one = {emb({1, 0})};
  CHECK(sim_matrix(one, one).at(0, 0) == 1.0);

  std::vector<Embedding> rows = {emb({1, 0}), emb({0, 1})};
  std::vector<Embedding> cols = {emb({1, 0}), emb({r, r})};
  const SimMatrix s = sim_matrix(rows, cols);
  REQUIRE(s.rows() == 2);
  REQUIRE(s.cols() == 2);
  CHECK(s.at(0, 0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(s.at(0, 1) == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(s.at(1, 0) == doctest::Approx(0.0));
  CHECK(s.at(1, 1) == doctest::Approx(0.7071).epsilon(1e-4));

  std::vector<Embedding> neg = {emb({-1, 0})};
  CHECK(sim_matrix(one, neg).at(0, 0) == 0.0);
}

TEST_CASE("sim_matrix rejects empty and mismatched sets") {
  std::vector<Embedding> none;
  std::vector<Embedding> one = {emb({1, 0})};
  std::vector<Embedding> three_d = {emb({1, 0, 0})};
  CHECK_THROWS_AS(sim_matrix(none, one), InvalidArgumentError);
  CHECK_THROWS_AS(sim_matrix(one, three_d), DimensionError);
  std::vector<Embedding> mixed = {emb({1, 0}), emb({1, 0, 0})};
  CHECK_THROWS_AS(sim_matrix(mixed, one), DimensionError);
}

TEST_CASE("set precision and recall examples") {
  const double r = 1.0 / std::sqrt(2.0);
  const SimMatrix single(1, 1, {1.0});
  CHECK(set_precision(single) == 1.0);
  CHECK(set_recall(single) == 1.0);

  const SimMatrix worked(2, 2, {1.0, r, 0.0, r});
  CHECK(set_precision(worked) == doctest::Approx(0.85355).epsilon(1e-4));
  CHECK(set_recall(worked) == doctest::Approx(0.85355).epsilon(1e-4));

  const SimMatrix zeros(2, 2, {0, 0, 0, 0});
  CHECK(set_precision(zeros) == 0.0);
  CHECK(set_recall(zeros) == 0.0);

  const SimMatrix tall(3, 1, {0.9, 0.0, 0.6});
  CHECK(set_recall(tall) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(set_precision(tall) == 0.9);
}

TEST_CASE("harmonic mean examples") {
  CHECK(harmonic_mean({0.5, 0.5}) == 0.5);
  CHECK(harmonic_mean({1.0, 0.0}) == 0.0);
  CHECK(harmonic_mean({0.8, 0.4}) == doctest::Approx(0.53333).epsilon(1e-5));
  CHECK(harmonic_mean({0.8, 0.8, 0.4, 0.4}) == doctest::Approx(0.53333).epsilon(1e-5));
  CHECK_THROWS_AS(harmonic_mean(std::span<const double>{}), InvalidArgumentError);
}

TEST_CASE("harmonic mean properties") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> xs(2 + trial % 5);
    for (auto& x : xs) x = u(rng);
    const double h = harmonic_mean(xs);
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    CHECK(*lo <= h);
    CHECK(h <= *hi);
    CHECK(h <= mean * (1.0 + 1e-12));
    std::vector<double> same(xs.size(), xs[0]);
    CHECK(harmonic_mean(same) == xs[0]);
  }
}

TEST_CASE("precision and recall match the brute-force oracle") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> size(1, 12);
  for (int trial = 0; trial < 300; ++trial) {
    const SimMatrix s = random_matrix(rng, size(rng), size(rng));
    const auto m = to_rows(s);
    CHECK(std::abs(set_precision(s) - oracle::column_max_mean(m)) <= 1e-12);
    CHECK(std::abs(set_recall(s) - oracle::row_max_mean(m)) <= 1e-12);
  }
}

TEST_CASE("set matching properties") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> size(1, 9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t rows = size(rng);
    const std::size_t cols = size(rng);
    const SimMatrix s = random_matrix(rng, rows, cols);

    // transpose duality
    CHECK(set_precision(s) == doctest::Approx(set_recall(s.transposed())).epsilon(1e-15));
    CHECK(set_recall(s) == doctest::Approx(set_precision(s.transposed())).epsilon(1e-15));

    // single column / single row reduce to the maximum
    const SimMatrix column = random_matrix(rng, rows, 1);
    CHECK(set_precision(column) == *std::max_element(column.cells().begin(), column.cells().end()));
    const SimMatrix row = random_matrix(rng, 1, cols);
    CHECK(set_recall(row) == *std::max_element(row.cells().begin(), row.cells().end()));

    // appending a column whose max is below P lowers P
    const double p = set_precision(s);
    std::vector<double> widened;
    for (std::size_t r = 0; r < rows; ++r) {
      widened.insert(widened.end(), s.row(r).begin(), s.row(r).end());
      widened.push_back(p * 0.5);
    }
    CHECK(set_precision(SimMatrix(rows, cols + 1, widened)) < p);

    // appending a row whose max is below R lowers R
    const double rc = set_recall(s);
    std::vector<double> taller(s.cells().begin(), s.cells().end());
    taller.insert(taller.end(), cols, rc * 0.5);
    CHECK(set_recall(SimMatrix(rows + 1, cols, taller)) < rc);
  }
}

TEST_CASE("permuting and scaling the input sets") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 3 + trial % 6;
    std::vector<Embedding> rows, cols;
    for (int i = 0; i < 5; ++i) rows.push_back(random_embedding(rng, dim));
    for (int i = 0; i < 4; ++i) cols.push_back(random_embedding(rng, dim));
    const SimMatrix base = sim_matrix(rows, cols);

    auto shuffled_rows = rows;
    auto shuffled_cols = cols;
    std::shuffle(shuffled_rows.begin(), shuffled_rows.end(), rng);
    std::shuffle(shuffled_cols.begin(), shuffled_cols.end(), rng);
    const SimMatrix permuted = sim_matrix(shuffled_rows, shuffled_cols);
    CHECK(std::abs(set_precision(permuted) - set_precision(base)) <= 1e-12);
    CHECK(std::abs(set_recall(permuted) - set_recall(base)) <= 1e-12);

    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    std::vector<Embedding> scaled;
    for (const auto& e : rows) {
      const double k = scale(rng);
      std::vector<double> v(e.values().begin(), e.values().end());
      for (auto& x : v) x *= k;
      scaled.emplace_back(std::move(v));
    }
    const SimMatrix rescaled = sim_matrix(scaled, cols);
    for (std::size_t i = 0; i < base.cells().size(); ++i) {
      CHECK(std::abs(rescaled.cells()[i] - base.cells()[i]) <= 1e-12);
    }
  }
}

TEST_CASE("cells agree with an independent cosine") {
  std::mt19937_64 rng(23);
  std::vector<Embedding> rows, cols;
  for (int i = 0; i < 7; ++i) rows.push_back(random_embedding(rng, 12));
  for (int i = 0; i < 6; ++i) cols.push_back(random_embedding(rng, 12));
  const SimMatrix s = sim_matrix(rows, cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::vector<double> a(rows[r].values().begin(), rows[r].values().end());
      const std::vector<double> b(cols[c].values().begin(), cols[c].values().end());
      CHECK(std::abs(s.at(r, c) - std::clamp(oracle::cosine(a, b), 0.0, 1.0)) <= 1e-12);
      CHECK(s.at(r, c) == clamp01(cosine(rows[r], cols[c])));
    }
  }
}

TEST_CASE("parallel kernel is bit-identical to the serial reference") {
  std::mt19937_64 rng(29);
  for (std::size_t dim : {8u, 64u, 256u}) {
    std::vector<Embedding> rows, cols;
    for (int i = 0; i < 97; ++i) rows.push_back(random_embedding(rng, dim));
    for (int i = 0; i < 41; ++i) cols.push_back(random_embedding(rng, dim));
    const EmbeddingSet row_set = make_set(rows);
    const EmbeddingSet col_set = make_set(cols);

    std::vector<double> serial(rows.size() * cols.size());
    kernels::sim_matrix_serial(row_set, col_set, serial);
    for (int threads : {1, 2, 8}) {
      std::vector<double> parallel(serial.size(), -1.0);
      kernels::sim_matrix_parallel(row_set, col_set, parallel, threads);
      CHECK(parallel == serial);
    }
    const SimMatrix dispatched = sim_matrix(row_set, col_set);
    CHECK(std::vector<double>(dispatched.cells().begin(), dispatched.cells().end()) == serial);
  }
}

TEST_CASE("SimMatrix rejects bad cells") {
  CHECK_THROWS_AS(SimMatrix(2, 2, {0.1, 0.2, 0.3}), InvalidArgumentError);
  CHECK_THROWS_AS(SimMatrix(1, 2, {0.1, 1.5}), InvalidArgumentError);
  CHECK_THROWS_AS(SimMatrix(1, 2, {-0.1, 0.5}), InvalidArgumentError);
}
