#include "aviary/learners/model.hpp"

#include <fstream>

#include "aviary/errors.hpp"
#include "aviary/image.hpp"
#include "aviary/learners/convnet.hpp"
#include "aviary/learners/forest.hpp"
#include "aviary/learners/knn.hpp"

namespace aviary {

int argmax_score(const std::vector<double>& scores) {
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  }
  return best;
}

Prediction ImageClassifier::predict(const Image& img) const {
  Prediction p;
  p.scores = predict_scores(img);
  p.label = argmax_score(p.scores);
  return p;
}

Prediction ImageClassifier::predict_at(const Image& img, std::size_t row) const {
  Prediction p;
  p.scores = predict_scores_at(img, row);
  p.label = argmax_score(p.scores);
  return p;
}

std::vector<float> image_features(const Image& img, int size, bool grayscale) {
  const Image* src = &img;
  Image gray;
  if (grayscale) {
    gray = to_grayscale3(img);
    src = &gray;
  }
  Image resized;
  if (src->height != size || src->width != size) {
    resized = resize(*src, size, size);
    src = &resized;
  }
  if (src->channels != 3) {
    throw std::invalid_argument("image_features: expected a 3-channel image");
  }
  // HWC doubles -> CHW floats
  std::vector<float> out(static_cast<std::size_t>(3) * size * size);
  const long plane = static_cast<long>(size) * size;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const long p = static_cast<long>(y) * size + x;
      out[0 * plane + p] = static_cast<float>(src->at(y, x, 0));
      out[1 * plane + p] = static_cast<float>(src->at(y, x, 1));
      out[2 * plane + p] = static_cast<float>(src->at(y, x, 2));
    }
  }
  return out;
}

std::unique_ptr<ImageClassifier> classifier_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j.at("format") != "aviary-model") {
    throw ValidationError("model container: missing or wrong 'format' tag");
  }
  if (j.at("version").get<int>() != 1) {
    throw ValidationError("model container: unsupported version");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "knn") return KnnImageClassifier::from_json(j);
  if (kind == "forest") return ForestImageClassifier::from_json(j);
  if (kind == "convnet") return ConvNetClassifier::from_json(j);
  throw ValidationError("model container: unknown kind '" + kind + "'");
}

void save_model(const ImageClassifier& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_model: cannot write '" + path + "'");
  out << model.to_json().dump(1) << '\n';
}

std::unique_ptr<ImageClassifier> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_model: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError("load_model: '" + path + "' is not valid JSON: " + e.what());
  }
  return classifier_from_json(j);
}

}  // namespace aviary
