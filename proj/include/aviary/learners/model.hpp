#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "aviary/image.hpp"

namespace aviary {

struct Prediction {
  int label = -1;  // index into classes()
  std::vector<double> scores;
};

/// Uniform predict interface over KNN, random forest and the convnet.
/// Scores are a distribution over classes(): non-negative, summing to 1.
class ImageClassifier {
 public:
  virtual ~ImageClassifier() = default;
  virtual const std::vector<std::string>& classes() const = 0;
  virtual std::vector<double> predict_scores(const Image& img) const = 0;

  /// Row-aware hook for evaluation drivers. Real models ignore the row;
  /// scripted test stubs key on it.
  virtual std::vector<double> predict_scores_at(const Image& img, std::size_t /*row*/) const {
    return predict_scores(img);
  }

  Prediction predict(const Image& img) const;
  Prediction predict_at(const Image& img, std::size_t row) const;

  /// Versioned JSON container: {"format", "version", "kind", ...payload}.
  virtual nlohmann::ordered_json to_json() const = 0;
};

/// Ties resolve to the smallest class index.
int argmax_score(const std::vector<double>& scores);

std::unique_ptr<ImageClassifier> classifier_from_json(const nlohmann::json& j);
void save_model(const ImageClassifier& model, const std::string& path);
std::unique_ptr<ImageClassifier> load_model(const std::string& path);

/// Flattens an image into the feature layout the learners consume: resized
/// to size x size, optional grayscale, channel-major (CHW) floats.
std::vector<float> image_features(const Image& img, int size, bool grayscale);

/// Labeled feature tensors ready for fitting.
struct TensorDataset {
  int input_size = 0;
  int channels = 3;
  std::vector<std::vector<float>> x;  // CHW per sample
  std::vector<int> y;                 // indices into classes
  std::vector<std::string> classes;
};

}  // namespace aviary
