#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "rebel/core.hpp"

namespace rebel {

struct FeatureVector {
  std::vector<double> values;

  std::size_t dimension() const noexcept { return values.size(); }
};

/// Maps question text to a vector for the near-duplicate guard.
class Featurizer {
 public:
  virtual ~Featurizer() = default;
  virtual FeatureVector featurize(std::string_view text) const = 0;
};

/// Character-trigram hashing over lowercased text, L2-normalised.
///
/// Trigrams are taken over code points, so multi-byte characters count
/// once. Text shorter than three code points contributes a single gram
/// made of the whole string. Each gram lands in bucket
/// `fnv1a64(gram bytes) % kDimension`.
class TrigramFeaturizer final : public Featurizer {
 public:
  static constexpr std::size_t kDimension = 4096;

  FeatureVector featurize(std::string_view text) const override;

  static std::size_t bucket(std::string_view gram);
};

std::uint64_t fnv1a64(std::string_view bytes);

/// Calls a remote embedding endpoint. The request body carries the model
/// and the text; the vector is read from `response_pointer`.
class RemoteFeaturizer final : public Featurizer {
 public:
  explicit RemoteFeaturizer(RemoteEmbeddingConfig config);

  FeatureVector featurize(std::string_view text) const override;

 private:
  RemoteEmbeddingConfig config_;
  std::string api_key_;
};

/// dot(a, b) / (|a| |b|). Throws ErrorCode::dimension_mismatch or
/// ErrorCode::zero_vector.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

}  // namespace rebel
