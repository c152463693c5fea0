#include "rebel/featurizer.hpp"

#include <cmath>
#include <cstdlib>

#include "json.hpp"
#include "rebel/http.hpp"
#include "rebel/text.hpp"

namespace rebel {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::size_t TrigramFeaturizer::bucket(std::string_view gram) {
  return static_cast<std::size_t>(fnv1a64(gram) % kDimension);
}

FeatureVector TrigramFeaturizer::featurize(std::string_view input) const {
  if (text::trim(input).empty()) throw Error(ErrorCode::empty_text, "cannot featurize empty text");
  const std::string lowered = text::to_lower(input);

  // Byte offsets of every code point start, plus the end.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < lowered.size(); ++i) {
    if ((static_cast<unsigned char>(lowered[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  starts.push_back(lowered.size());
  const std::size_t n = starts.size() - 1;

  FeatureVector v;
  v.values.assign(kDimension, 0.0);
  const std::string_view view(lowered);
  if (n < 3) {
    v.values[bucket(view)] += 1.0;
  } else {
    for (std::size_t i = 0; i + 3 <= n; ++i) {
      v.values[bucket(view.substr(starts[i], starts[i + 3] - starts[i]))] += 1.0;
    }
  }

  double norm = 0.0;
  for (double x : v.values) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v.values) x /= norm;
  return v;
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
  if (a.dimension() != b.dimension()) {
    throw Error(ErrorCode::dimension_mismatch,
                "vectors of dimension " + std::to_string(a.dimension()) + " and " +
                    std::to_string(b.dimension()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::zero_vector, "zero vector has no direction");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

RemoteFeaturizer::RemoteFeaturizer(RemoteEmbeddingConfig config) : config_(std::move(config)) {
  http::parse_url(config_.endpoint);
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr) {
      throw Error(ErrorCode::config, "environment variable " + config_.api_key_env + " is not set");
    }
    api_key_ = key;
  }
}

FeatureVector RemoteFeaturizer::featurize(std::string_view input) const {
  if (text::trim(input).empty()) throw Error(ErrorCode::empty_text, "cannot featurize empty text");
  nlohmann::ordered_json body;
  if (!config_.model.empty()) body[config_.model_field] = config_.model;
  body[config_.input_field] = std::string(input);

  http::Request request;
  request.method = HttpMethod::post;
  request.url = config_.endpoint;
  request.body = body.dump();
  request.content_type = "application/json";
  if (!api_key_.empty()) request.headers.emplace_back("Authorization", "Bearer " + api_key_);

  const http::Response response = http::send(request, config_.timeout_seconds);
  if (response.status < 200 || response.status >= 300) {
    throw TransportError("embedding endpoint returned HTTP " + std::to_string(response.status),
                         response.status, response.body.substr(0, 200));
  }
  FeatureVector v;
  try {
    const auto parsed = nlohmann::json::parse(response.body);
    v.values = parsed.at(nlohmann::json::json_pointer(config_.response_pointer))
                   .get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unexpected embedding response: ") + e.what(),
                         response.status);
  }
  if (v.values.empty()) throw TransportError("embedding response held an empty vector");
  return v;
}

}  // namespace rebel
