#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "aviary/learners/model.hpp"

namespace aviary {

struct ForestConfig {
  int n_trees = 100;
  int max_depth = -1;  // -1 means unlimited
  int min_split = 2;   // smallest node size eligible for a split
  int min_leaf = 1;    // smallest allowed child size
  bool bootstrap = true;
  int max_features = -1;  // features sampled per split; -1 -> round(sqrt(d))
  std::uint64_t seed = 0;
};

/// Random forest of Gini decision trees: bootstrap per tree (optional),
/// random feature subset per split, majority vote across trees.
/// Per-tree randomness derives from (seed, tree index), so training is
/// deterministic and parallelizable over trees.
class ForestModel {
 public:
  static ForestModel fit(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                         int n_classes, const ForestConfig& cfg);

  /// Tree-vote proportions over the classes.
  std::vector<double> predict_scores(const std::vector<float>& q) const;
  int predict_label(const std::vector<float>& q) const;

  /// Each tree's individual vote; predict_scores is their tally.
  std::vector<int> tree_predictions(const std::vector<float>& q) const;

  const ForestConfig& config() const { return cfg_; }
  int n_classes() const { return n_classes_; }
  int n_trees() const { return static_cast<int>(trees_.size()); }

  nlohmann::ordered_json payload_json() const;
  static ForestModel from_payload(const nlohmann::json& j);

 private:
  struct Node {
    int feature = -1;       // -1 marks a leaf
    float threshold = 0.f;  // go left when value <= threshold
    int left = -1;
    int right = -1;
    int label = -1;  // leaf majority label
  };
  struct Tree {
    std::vector<Node> nodes;
    int walk(const std::vector<float>& q) const;
  };

  static Tree grow_tree(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                        int n_classes, const ForestConfig& cfg, std::uint64_t tree_index);

  ForestConfig cfg_;
  int n_classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<Tree> trees_;
};

/// Image-facing wrapper (resize + optional grayscale + flatten).
class ForestImageClassifier : public ImageClassifier {
 public:
  ForestImageClassifier(ForestModel model, std::vector<std::string> classes, int feature_size,
                        bool grayscale);
  const std::vector<std::string>& classes() const override { return classes_; }
  std::vector<double> predict_scores(const Image& img) const override;
  nlohmann::ordered_json to_json() const override;
  static std::unique_ptr<ForestImageClassifier> from_json(const nlohmann::json& j);
  const ForestModel& model() const { return model_; }

 private:
  ForestModel model_;
  std::vector<std::string> classes_;
  int feature_size_;
  bool grayscale_;
};

}  // namespace aviary
