#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "hice/core_model.hpp"

namespace hice {

/// Cosine similarity in [-1, 1] (up to rounding).
/// Throws DimensionError on mismatched sizes, DegenerateVectorError on a
/// zero-norm or non-finite vector.
double cosine(const Embedding& a, const Embedding& b);

double clamp01(double s) noexcept;

/// A set of same-dimension embeddings packed row-major, with cached norms.
/// This is the layout the similarity kernels stream over.
class EmbeddingSet {
 public:
  explicit EmbeddingSet(std::size_t dim) : dim_(dim) {}

  /// Appends a copy; rejects dimension mismatches and zero/non-finite vectors.
  void add(const Embedding& e);

  std::size_t size() const noexcept { return norms_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return norms_.empty(); }
  std::span<const double> row(std::size_t i) const noexcept {
    return std::span<const double>(values_).subspan(i * dim_, dim_);
  }
  double norm(std::size_t i) const noexcept { return norms_[i]; }

 private:
  std::size_t dim_;
  std::vector<double> values_;
  std::vector<double> norms_;
};

EmbeddingSet make_set(std::span<const Embedding> embeddings);

/// Pairwise clamped cosine similarities, rows x cols, row-major.
class SimMatrix {
 public:
  SimMatrix() = default;
  SimMatrix(std::size_t rows, std::size_t cols);
  /// Takes ownership of row-major cells; throws InvalidArgumentError on a
  /// size mismatch or a cell outside [0, 1].
  SimMatrix(std::size_t rows, std::size_t cols, std::vector<double> cells);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double at(std::size_t r, std::size_t c) const noexcept { return cells_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const noexcept {
    return std::span<const double>(cells_).subspan(r * cols_, cols_);
  }
  std::span<const double> cells() const noexcept { return cells_; }
  std::span<double> mutable_cells() noexcept { return cells_; }

  SimMatrix transposed() const;

  /// Per-column maximum over rows (length cols).
  std::vector<double> column_max() const;
  /// Per-row maximum over columns (length rows).
  std::vector<double> row_max() const;

  friend bool operator==(const SimMatrix&, const SimMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> cells_;
};

namespace kernels {

// Both kernels evaluate every cell with the same arithmetic, so their output
// is bit-identical; the serial one is the reference used by tests and the
// benchmark.
void sim_matrix_serial(const EmbeddingSet& rows, const EmbeddingSet& cols, std::span<double> out);
void sim_matrix_parallel(const EmbeddingSet& rows, const EmbeddingSet& cols, std::span<double> out,
                         int threads);

}  // namespace kernels

/// cells[n][m] = clamp01(cosine(rows[n], cols[m])). Large problems go to the
/// OpenMP kernel when called outside an existing parallel region.
SimMatrix sim_matrix(const EmbeddingSet& rows, const EmbeddingSet& cols);
SimMatrix sim_matrix(std::span<const Embedding> rows, std::span<const Embedding> cols);

/// Mean over columns of the column maximum.
double set_precision(const SimMatrix& s);
/// Mean over rows of the row maximum.
double set_recall(const SimMatrix& s);

/// k / sum(1/x_i), or 0 when any term is <= 0. Terms are expected in [0, 1].
double harmonic_mean(std::span<const double> xs);
double harmonic_mean(std::initializer_list<double> xs);

}  // namespace hice
