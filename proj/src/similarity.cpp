#include "hice/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hice/errors.hpp"
#include "hice/parallel.hpp"

namespace hice {

namespace {

// Work (cells x dim) above which sim_matrix hands off to the OpenMP kernel.
constexpr std::size_t kParallelWorkThreshold = std::size_t{1} << 18;

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void require_direction(double norm) {
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateVectorError("embedding has zero norm or non-finite values");
  }
}

void check_kernel_args(const EmbeddingSet& rows, const EmbeddingSet& cols, std::span<double> out) {
  if (rows.dim() != cols.dim()) {
    throw DimensionError("set dimensions differ: " + std::to_string(rows.dim()) + " vs " +
                         std::to_string(cols.dim()));
  }
  if (out.size() != rows.size() * cols.size()) {
    throw InvalidArgumentError("output buffer does not match rows x cols");
  }
}

inline void fill_row(const EmbeddingSet& rows, const EmbeddingSet& cols, std::size_t r,
                     std::span<double> out) {
  const auto a = rows.row(r);
  const double na = rows.norm(r);
  double* dst = out.data() + r * cols.size();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    dst[c] = clamp01(dot(a, cols.row(c)) / (na * cols.norm(c)));
  }
}

}  // namespace

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("cosine of vectors with dimensions " + std::to_string(a.dim()) + " and " +
                         std::to_string(b.dim()));
  }
  const double na = a.norm();
  const double nb = b.norm();
  require_direction(na);
  require_direction(nb);
  return dot(a.values(), b.values()) / (na * nb);
}

double clamp01(double s) noexcept { return std::max(0.0, std::min(1.0, s)); }

void EmbeddingSet::add(const Embedding& e) {
  if (e.dim() != dim_) {
    throw DimensionError("embedding of dimension " + std::to_string(e.dim()) +
                         " added to a set of dimension " + std::to_string(dim_));
  }
  const double n = e.norm();
  require_direction(n);
  values_.insert(values_.end(), e.values().begin(), e.values().end());
  norms_.push_back(n);
}

EmbeddingSet make_set(std::span<const Embedding> embeddings) {
  EmbeddingSet set(embeddings.empty() ? 0 : embeddings.front().dim());
  for (const auto& e : embeddings) set.add(e);
  return set;
}

SimMatrix::SimMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), cells_(rows * cols, 0.0) {}

SimMatrix::SimMatrix(std::size_t rows, std::size_t cols, std::vector<double> cells)
    : rows_(rows), cols_(cols), cells_(std::move(cells)) {
  if (cells_.size() != rows_ * cols_) {
    throw InvalidArgumentError("cell count does not match rows x cols");
  }
  for (double v : cells_) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgumentError("similarity cell outside [0, 1]");
  }
}

SimMatrix SimMatrix::transposed() const {
  SimMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t.cells_[c * rows_ + r] = at(r, c);
  }
  return t;
}

std::vector<double> SimMatrix::column_max() const {
  std::vector<double> best(cols_, 0.0);
  for (std::size_t c = 0; c < cols_; ++c) {
    double m = at(0, c);
    for (std::size_t r = 1; r < rows_; ++r) m = std::max(m, at(r, c));
    best[c] = m;
  }
  return best;
}

std::vector<double> SimMatrix::row_max() const {
  std::vector<double> best(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const auto cells = row(r);
    best[r] = *std::max_element(cells.begin(), cells.end());
  }
  return best;
}

namespace kernels {

void sim_matrix_serial(const EmbeddingSet& rows, const EmbeddingSet& cols, std::span<double> out) {
  check_kernel_args(rows, cols, out);
  for (std::size_t r = 0; r < rows.size(); ++r) fill_row(rows, cols, r, out);
}

void sim_matrix_parallel(const EmbeddingSet& rows, const EmbeddingSet& cols, std::span<double> out,
                         int threads) {
  check_kernel_args(rows, cols, out);
  const auto n = static_cast<long long>(rows.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
#else
  (void)threads;
#endif
  for (long long r = 0; r < n; ++r) fill_row(rows, cols, static_cast<std::size_t>(r), out);
}

}  // namespace kernels

SimMatrix sim_matrix(const EmbeddingSet& rows, const EmbeddingSet& cols) {
  if (rows.empty() || cols.empty()) {
    throw InvalidArgumentError("similarity matrix needs two non-empty sets");
  }
  SimMatrix s(rows.size(), cols.size());
  const std::size_t work = rows.size() * cols.size() * rows.dim();
  if (openmp_enabled() && work >= kParallelWorkThreshold && !inside_parallel_region()) {
    kernels::sim_matrix_parallel(rows, cols, s.mutable_cells(), default_thread_count());
  } else {
    kernels::sim_matrix_serial(rows, cols, s.mutable_cells());
  }
  return s;
}

SimMatrix sim_matrix(std::span<const Embedding> rows, std::span<const Embedding> cols) {
  return sim_matrix(make_set(rows), make_set(cols));
}

double set_precision(const SimMatrix& s) {
  const auto best = s.column_max();
  double sum = 0.0;
  for (double v : best) sum += v;
  return sum / static_cast<double>(best.size());
}

double set_recall(const SimMatrix& s) {
  const auto best = s.row_max();
  double sum = 0.0;
  for (double v : best) sum += v;
  return sum / static_cast<double>(best.size());
}

double harmonic_mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgumentError("harmonic mean of an empty sequence");
  double inverse_sum = 0.0;
  double lo = xs.front();
  double hi = xs.front();
  for (double x : xs) {
    if (x <= 0.0) return 0.0;
    inverse_sum += 1.0 / x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (lo == hi) return lo;
  // clamp away rounding spill outside [lo, hi]
  return std::clamp(static_cast<double>(xs.size()) / inverse_sum, lo, hi);
}

double harmonic_mean(std::initializer_list<double> xs) {
  return harmonic_mean(std::span<const double>(xs.begin(), xs.size()));
}

}  // namespace hice
