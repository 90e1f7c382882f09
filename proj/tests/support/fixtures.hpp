#pragma once

// Bundle builders, random generators and scratch directories shared by the
// unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hice/core_model.hpp"
#include "hice/triplets.hpp"

namespace hice::testing {

inline Embedding emb(std::initializer_list<double> v) { return Embedding(std::vector<double>(v)); }

/// Standard basis vector e_k of dimension dim.
inline Embedding basis(std::size_t dim, std::size_t k, double scale = 1.0) {
  std::vector<double> v(dim, 0.0);
  v[k] = scale;
  return Embedding(std::move(v));
}

inline PhraseEntry phrase(std::string text, Embedding e) {
  PhraseEntry p;
  p.triplet = Triplet{text, "", ""};
  p.text = std::move(text);
  p.embedding = std::move(e);
  return p;
}

inline RegionEntry region(std::string id, Embedding e) {
  RegionEntry r;
  r.region_id = std::move(id);
  r.embedding = std::move(e);
  return r;
}

inline TextSide text_side(std::string text, Embedding global, std::vector<PhraseEntry> phrases) {
  return TextSide{std::move(text), std::move(global), std::move(phrases)};
}

/// The 2-D worked example: regions {e1, e2}, phrases {e1, unit(e1 + e2)},
/// image/caption globals at cosine 0.6.
inline EvalBundle worked_bundle() {
  const double r = 1.0 / std::sqrt(2.0);
  EvalBundle b;
  b.bundle_id = "worked";
  b.image_id = "img-worked";
  b.dim = 2;
  b.image_global = emb({1.0, 0.0});
  b.regions = {region("r0", emb({1.0, 0.0})), region("r1", emb({0.0, 1.0}))};
  b.candidate = text_side("a man with a bike near a tree", emb({0.6, 0.8}),
                          {phrase("man with bike", emb({1.0, 0.0})), phrase("bike near tree", emb({r, r}))});
  return b;
}

/// Gaussian vector; re-drawn in the (practically impossible) all-zero case.
inline Embedding random_embedding(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    Embedding e(std::move(v));
    if (e.norm() > 1e-6) return e;
  }
}

/// `base` plus Gaussian noise of the given scale, so related sets share direction.
inline Embedding near(std::mt19937_64& rng, const Embedding& base, double noise) {
  std::normal_distribution<double> normal(0.0, noise);
  for (;;) {
    std::vector<double> v(base.values().begin(), base.values().end());
    for (auto& x : v) x += normal(rng);
    Embedding e(std::move(v));
    if (e.norm() > 1e-6) return e;
  }
}

struct RandomBundleShape {
  std::size_t min_dim = 2;
  std::size_t max_dim = 16;
  std::size_t max_regions = 8;
  std::size_t max_phrases = 8;
  std::size_t max_references = 3;
};

/// Random valid bundle whose phrases partly echo the regions, so scores
/// spread over (0, 1) instead of clustering near zero.
inline EvalBundle random_bundle(std::mt19937_64& rng, const std::string& id,
                                const RandomBundleShape& shape = {}) {
  std::uniform_int_distribution<std::size_t> dim_dist(shape.min_dim, shape.max_dim);
  std::uniform_int_distribution<std::size_t> region_count(1, shape.max_regions);
  std::uniform_int_distribution<std::size_t> phrase_count(1, shape.max_phrases);
  std::uniform_int_distribution<std::size_t> ref_count(0, shape.max_references);
  std::uniform_real_distribution<double> noise(0.1, 1.5);

  EvalBundle b;
  b.bundle_id = id;
  b.image_id = "img-" + id;
  b.dim = dim_dist(rng);
  b.image_global = random_embedding(rng, b.dim);
  const std::size_t n = region_count(rng);
  for (std::size_t k = 0; k < n; ++k) {
    b.regions.push_back(region("r" + std::to_string(k), random_embedding(rng, b.dim)));
  }
  auto make_side = [&](const std::string& text) {
    TextSide side;
    side.text = text;
    side.global = near(rng, b.image_global, noise(rng));
    const std::size_t m = phrase_count(rng);
    for (std::size_t j = 0; j < m; ++j) {
      std::uniform_int_distribution<std::size_t> pick(0, b.regions.size() - 1);
      const auto& anchor = b.regions[pick(rng)].embedding;
      side.phrases.push_back(phrase(text + " #" + std::to_string(j), near(rng, anchor, noise(rng))));
    }
    return side;
  };
  b.candidate = make_side("candidate " + id);
  const std::size_t refs = ref_count(rng);
  for (std::size_t h = 0; h < refs; ++h) b.references.push_back(make_side("reference " + std::to_string(h)));
  return b;
}

/// Creates a fresh directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("hice-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace hice::testing
