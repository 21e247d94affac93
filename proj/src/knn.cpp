#include "aviary/learners/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "aviary/errors.hpp"

namespace aviary {

const char* to_string(KnnMetric m) {
  switch (m) {
    case KnnMetric::Euclidean: return "euclidean";
    case KnnMetric::Manhattan: return "manhattan";
    case KnnMetric::Chebyshev: return "chebyshev";
  }
  return "?";
}

const char* to_string(KnnWeighting w) {
  return w == KnnWeighting::Uniform ? "uniform" : "distance";
}

KnnMetric knn_metric_from_string(const std::string& s) {
  if (s == "euclidean") return KnnMetric::Euclidean;
  if (s == "manhattan") return KnnMetric::Manhattan;
  if (s == "chebyshev") return KnnMetric::Chebyshev;
  throw ValidationError("unknown knn metric '" + s + "'");
}

KnnWeighting knn_weighting_from_string(const std::string& s) {
  if (s == "uniform") return KnnWeighting::Uniform;
  if (s == "distance") return KnnWeighting::Distance;
  throw ValidationError("unknown knn weighting '" + s + "'");
}

double knn_distance(KnnMetric metric, const std::vector<float>& a, const std::vector<float>& b) {
  double acc = 0.0;
  switch (metric) {
    case KnnMetric::Euclidean:
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        acc += d * d;
      }
      return std::sqrt(acc);
    case KnnMetric::Manhattan:
      for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::fabs(static_cast<double>(a[i]) - b[i]);
      }
      return acc;
    case KnnMetric::Chebyshev:
      for (std::size_t i = 0; i < a.size(); ++i) {
        acc = std::max(acc, std::fabs(static_cast<double>(a[i]) - b[i]));
      }
      return acc;
  }
  return acc;
}

KnnModel KnnModel::fit(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                       int n_classes, const KnnConfig& cfg) {
  if (x.empty() || x.size() != y.size()) {
    throw std::invalid_argument("knn_fit: need a non-empty, aligned training set");
  }
  if (cfg.k < 1) throw std::invalid_argument("knn_fit: k must be >= 1");
  if (n_classes < 1) throw std::invalid_argument("knn_fit: n_classes must be >= 1");
  const std::size_t dim = x[0].size();
  for (const auto& row : x) {
    if (row.size() != dim) throw std::invalid_argument("knn_fit: ragged feature vectors");
  }
  for (int label : y) {
    if (label < 0 || label >= n_classes) throw std::invalid_argument("knn_fit: label out of range");
  }
  KnnModel m;
  m.cfg_ = cfg;
  m.n_classes_ = n_classes;
  m.dim_ = dim;
  m.x_ = x;
  m.y_ = y;
  return m;
}

std::vector<double> KnnModel::predict_scores(const std::vector<float>& q) const {
  if (q.size() != dim_) {
    throw std::invalid_argument("knn_predict: query dimension mismatch");
  }
  const std::size_t n = x_.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg_.k), n);

  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = {knn_distance(cfg_.metric, q, x_[i]), i};
  }
  // ties resolve by training index, so neighbor choice is deterministic
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  std::vector<double> votes(static_cast<std::size_t>(n_classes_), 0.0);
  if (cfg_.weighting == KnnWeighting::Uniform) {
    for (std::size_t i = 0; i < k; ++i) votes[y_[dist[i].second]] += 1.0;
  } else {
    // zero-distance neighbors take the whole vote (limit of 1/d weighting)
    bool any_exact = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (dist[i].first == 0.0) {
        votes[y_[dist[i].second]] += 1.0;
        any_exact = true;
      }
    }
    if (!any_exact) {
      for (std::size_t i = 0; i < k; ++i) {
        votes[y_[dist[i].second]] += 1.0 / dist[i].first;
      }
    }
  }
  const double total = std::accumulate(votes.begin(), votes.end(), 0.0);
  for (double& v : votes) v /= total;
  return votes;
}

int KnnModel::predict_label(const std::vector<float>& q) const {
  return argmax_score(predict_scores(q));
}

nlohmann::ordered_json KnnModel::payload_json() const {
  nlohmann::ordered_json j;
  j["k"] = cfg_.k;
  j["metric"] = to_string(cfg_.metric);
  j["weighting"] = to_string(cfg_.weighting);
  j["n_classes"] = n_classes_;
  j["labels"] = y_;
  auto& rows = j["train"];
  rows = nlohmann::ordered_json::array();
  for (const auto& row : x_) rows.push_back(row);
  return j;
}

KnnModel KnnModel::from_payload(const nlohmann::json& j) {
  KnnConfig cfg;
  cfg.k = j.at("k").get<int>();
  cfg.metric = knn_metric_from_string(j.at("metric").get<std::string>());
  cfg.weighting = knn_weighting_from_string(j.at("weighting").get<std::string>());
  std::vector<std::vector<float>> x;
  for (const auto& row : j.at("train")) x.push_back(row.get<std::vector<float>>());
  return fit(x, j.at("labels").get<std::vector<int>>(), j.at("n_classes").get<int>(), cfg);
}

KnnImageClassifier::KnnImageClassifier(KnnModel model, std::vector<std::string> classes,
                                       int feature_size, bool grayscale)
    : model_(std::move(model)),
      classes_(std::move(classes)),
      feature_size_(feature_size),
      grayscale_(grayscale) {
  if (static_cast<int>(classes_.size()) != model_.n_classes()) {
    throw std::invalid_argument("KnnImageClassifier: class list does not match the model");
  }
}

std::vector<double> KnnImageClassifier::predict_scores(const Image& img) const {
  return model_.predict_scores(image_features(img, feature_size_, grayscale_));
}

nlohmann::ordered_json KnnImageClassifier::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "aviary-model";
  j["version"] = 1;
  j["kind"] = "knn";
  j["classes"] = classes_;
  j["feature_size"] = feature_size_;
  j["grayscale"] = grayscale_;
  j["payload"] = model_.payload_json();
  return j;
}

std::unique_ptr<KnnImageClassifier> KnnImageClassifier::from_json(const nlohmann::json& j) {
  return std::make_unique<KnnImageClassifier>(
      KnnModel::from_payload(j.at("payload")), j.at("classes").get<std::vector<std::string>>(),
      j.at("feature_size").get<int>(), j.at("grayscale").get<bool>());
}

}  // namespace aviary
