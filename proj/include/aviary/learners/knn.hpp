#pragma once

#include <memory>
#include <string>
#include <vector>

#include "aviary/learners/model.hpp"

namespace aviary {

enum class KnnMetric { Euclidean, Manhattan, Chebyshev };
enum class KnnWeighting { Uniform, Distance };

const char* to_string(KnnMetric m);
const char* to_string(KnnWeighting w);
KnnMetric knn_metric_from_string(const std::string& s);
KnnWeighting knn_weighting_from_string(const std::string& s);

struct KnnConfig {
  int k = 1;
  KnnMetric metric = KnnMetric::Euclidean;
  KnnWeighting weighting = KnnWeighting::Uniform;
};

/// Brute-force k-nearest-neighbors over stored training vectors.
class KnnModel {
 public:
  /// Stores the training set verbatim. Throws on empty or ragged input.
  static KnnModel fit(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                      int n_classes, const KnnConfig& cfg);

  /// Normalized (possibly distance-weighted) neighbor votes. A neighbor at
  /// distance zero takes the whole vote under distance weighting.
  std::vector<double> predict_scores(const std::vector<float>& q) const;
  int predict_label(const std::vector<float>& q) const;

  const KnnConfig& config() const { return cfg_; }
  int n_classes() const { return n_classes_; }
  std::size_t train_size() const { return y_.size(); }

  nlohmann::ordered_json payload_json() const;
  static KnnModel from_payload(const nlohmann::json& j);

 private:
  KnnConfig cfg_;
  int n_classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::vector<float>> x_;
  std::vector<int> y_;
};

double knn_distance(KnnMetric metric, const std::vector<float>& a, const std::vector<float>& b);

/// Image-facing wrapper: resize + optional grayscale + flatten, then KNN.
class KnnImageClassifier : public ImageClassifier {
 public:
  KnnImageClassifier(KnnModel model, std::vector<std::string> classes, int feature_size,
                     bool grayscale);
  const std::vector<std::string>& classes() const override { return classes_; }
  std::vector<double> predict_scores(const Image& img) const override;
  nlohmann::ordered_json to_json() const override;
  static std::unique_ptr<KnnImageClassifier> from_json(const nlohmann::json& j);
  const KnnModel& model() const { return model_; }

 private:
  KnnModel model_;
  std::vector<std::string> classes_;
  int feature_size_;
  bool grayscale_;
};

}  // namespace aviary
