#include "aviary/learners/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "aviary/parallel.hpp"
#include "aviary/rng.hpp"

namespace aviary {

namespace {

/// Gini impurity of a label count vector.
double gini(const std::vector<long>& counts, long total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (long c : counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

int majority_label(const std::vector<long>& counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = static_cast<int>(c);
  }
  return best;
}

}  // namespace

int ForestModel::Tree::walk(const std::vector<float>& q) const {
  int node = 0;
  while (nodes[node].feature >= 0) {
    node = q[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                           : nodes[node].right;
  }
  return nodes[node].label;
}

ForestModel::Tree ForestModel::grow_tree(const std::vector<std::vector<float>>& x,
                                         const std::vector<int>& y, int n_classes,
                                         const ForestConfig& cfg, std::uint64_t tree_index) {
  const std::size_t n = x.size();
  const std::size_t dim = x[0].size();
  SeededRng rng(cfg.seed, 0xF07E57 + tree_index);

  std::vector<int> sample;
  sample.reserve(n);
  if (cfg.bootstrap) {
    for (std::size_t i = 0; i < n; ++i) {
      sample.push_back(static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)));
    }
  } else {
    sample.resize(n);
    std::iota(sample.begin(), sample.end(), 0);
  }

  const int n_features =
      cfg.max_features > 0
          ? std::min<int>(cfg.max_features, static_cast<int>(dim))
          : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim)))));

  Tree tree;

  // Recursive splitter over index ranges of `sample`.
  struct Frame {
    std::vector<int> idx;
    int depth;
    int node_slot;
  };
  auto make_leaf = [&](const std::vector<int>& idx) {
    std::vector<long> counts(static_cast<std::size_t>(n_classes), 0);
    for (int i : idx) ++counts[y[i]];
    Node leaf;
    leaf.label = majority_label(counts);
    return leaf;
  };

  std::vector<Frame> stack;
  tree.nodes.emplace_back();
  stack.push_back(Frame{sample, 0, 0});

  std::vector<int> feature_pool(dim);
  std::iota(feature_pool.begin(), feature_pool.end(), 0);

  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const auto& idx = frame.idx;

    std::vector<long> counts(static_cast<std::size_t>(n_classes), 0);
    for (int i : idx) ++counts[y[i]];
    const long total = static_cast<long>(idx.size());
    const bool pure = std::count_if(counts.begin(), counts.end(),
                                    [](long c) { return c > 0; }) <= 1;
    const bool depth_capped = cfg.max_depth >= 0 && frame.depth >= cfg.max_depth;
    if (pure || depth_capped || total < cfg.min_split) {
      tree.nodes[frame.node_slot] = make_leaf(idx);
      continue;
    }

    // sample the feature subset for this split (partial Fisher-Yates)
    for (int f = 0; f < n_features; ++f) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(f, static_cast<std::int64_t>(dim) - 1));
      std::swap(feature_pool[f], feature_pool[j]);
    }

    const double parent_gini = gini(counts, total);
    int best_feature = -1;
    float best_threshold = 0.f;
    double best_gain = 1e-12;

    std::vector<std::pair<float, int>> values(idx.size());
    for (int f = 0; f < n_features; ++f) {
      const int feature = feature_pool[f];
      for (std::size_t i = 0; i < idx.size(); ++i) {
        values[i] = {x[idx[i]][feature], y[idx[i]]};
      }
      std::sort(values.begin(), values.end());
      std::vector<long> left(static_cast<std::size_t>(n_classes), 0);
      std::vector<long> right = counts;
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        ++left[values[i].second];
        --right[values[i].second];
        if (values[i].first == values[i + 1].first) continue;  // no boundary here
        const long nl = static_cast<long>(i) + 1;
        const long nr = total - nl;
        if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
        const double child =
            (nl * gini(left, nl) + nr * gini(right, nr)) / static_cast<double>(total);
        const double gain = parent_gini - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = feature;
          best_threshold = 0.5f * (values[i].first + values[i + 1].first);
        }
      }
    }

    if (best_feature < 0) {
      tree.nodes[frame.node_slot] = make_leaf(idx);
      continue;
    }

    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
      (x[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
    }
    Node split;
    split.feature = best_feature;
    split.threshold = best_threshold;
    split.left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    split.right = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[frame.node_slot] = split;
    stack.push_back(Frame{std::move(right_idx), frame.depth + 1, split.right});
    stack.push_back(Frame{std::move(left_idx), frame.depth + 1, split.left});
  }
  return tree;
}

ForestModel ForestModel::fit(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                             int n_classes, const ForestConfig& cfg) {
  if (x.empty() || x.size() != y.size()) {
    throw std::invalid_argument("forest_fit: need a non-empty, aligned training set");
  }
  if (cfg.n_trees < 1) throw std::invalid_argument("forest_fit: n_trees must be >= 1");
  if (cfg.min_split < 2) throw std::invalid_argument("forest_fit: min_split must be >= 2");
  if (cfg.min_leaf < 1) throw std::invalid_argument("forest_fit: min_leaf must be >= 1");
  const std::size_t dim = x[0].size();
  for (const auto& row : x) {
    if (row.size() != dim) throw std::invalid_argument("forest_fit: ragged feature vectors");
  }
  for (int label : y) {
    if (label < 0 || label >= n_classes) {
      throw std::invalid_argument("forest_fit: label out of range");
    }
  }

  ForestModel m;
  m.cfg_ = cfg;
  m.n_classes_ = n_classes;
  m.dim_ = dim;
  m.trees_.resize(static_cast<std::size_t>(cfg.n_trees));
  parallel_for(m.trees_.size(), [&](std::size_t t) {
    m.trees_[t] = grow_tree(x, y, n_classes, cfg, t);
  });
  return m;
}

std::vector<int> ForestModel::tree_predictions(const std::vector<float>& q) const {
  if (q.size() != dim_) {
    throw std::invalid_argument("forest_predict: query dimension mismatch");
  }
  std::vector<int> out(trees_.size());
  for (std::size_t t = 0; t < trees_.size(); ++t) out[t] = trees_[t].walk(q);
  return out;
}

std::vector<double> ForestModel::predict_scores(const std::vector<float>& q) const {
  const auto votes = tree_predictions(q);
  std::vector<double> scores(static_cast<std::size_t>(n_classes_), 0.0);
  for (int v : votes) scores[v] += 1.0;
  for (double& s : scores) s /= static_cast<double>(votes.size());
  return scores;
}

int ForestModel::predict_label(const std::vector<float>& q) const {
  return argmax_score(predict_scores(q));
}

nlohmann::ordered_json ForestModel::payload_json() const {
  nlohmann::ordered_json j;
  j["n_trees"] = cfg_.n_trees;
  j["max_depth"] = cfg_.max_depth;
  j["min_split"] = cfg_.min_split;
  j["min_leaf"] = cfg_.min_leaf;
  j["bootstrap"] = cfg_.bootstrap;
  j["max_features"] = cfg_.max_features;
  j["seed"] = cfg_.seed;
  j["n_classes"] = n_classes_;
  j["dim"] = dim_;
  auto& trees = j["trees"];
  trees = nlohmann::ordered_json::array();
  for (const auto& tree : trees_) {
    nlohmann::ordered_json t;
    auto& nodes = t["nodes"];
    nodes = nlohmann::ordered_json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
    }
    trees.push_back(std::move(t));
  }
  return j;
}

ForestModel ForestModel::from_payload(const nlohmann::json& j) {
  ForestModel m;
  m.cfg_.n_trees = j.at("n_trees").get<int>();
  m.cfg_.max_depth = j.at("max_depth").get<int>();
  m.cfg_.min_split = j.at("min_split").get<int>();
  m.cfg_.min_leaf = j.at("min_leaf").get<int>();
  m.cfg_.bootstrap = j.at("bootstrap").get<bool>();
  m.cfg_.max_features = j.at("max_features").get<int>();
  m.cfg_.seed = j.at("seed").get<std::uint64_t>();
  m.n_classes_ = j.at("n_classes").get<int>();
  m.dim_ = j.at("dim").get<std::size_t>();
  for (const auto& t : j.at("trees")) {
    Tree tree;
    for (const auto& n : t.at("nodes")) {
      Node node;
      node.feature = n.at(0).get<int>();
      node.threshold = n.at(1).get<float>();
      node.left = n.at(2).get<int>();
      node.right = n.at(3).get<int>();
      node.label = n.at(4).get<int>();
      tree.nodes.push_back(node);
    }
    m.trees_.push_back(std::move(tree));
  }
  return m;
}

ForestImageClassifier::ForestImageClassifier(ForestModel model, std::vector<std::string> classes,
                                             int feature_size, bool grayscale)
    : model_(std::move(model)),
      classes_(std::move(classes)),
      feature_size_(feature_size),
      grayscale_(grayscale) {
  if (static_cast<int>(classes_.size()) != model_.n_classes()) {
    throw std::invalid_argument("ForestImageClassifier: class list does not match the model");
  }
}

std::vector<double> ForestImageClassifier::predict_scores(const Image& img) const {
  return model_.predict_scores(image_features(img, feature_size_, grayscale_));
}

nlohmann::ordered_json ForestImageClassifier::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "aviary-model";
  j["version"] = 1;
  j["kind"] = "forest";
  j["classes"] = classes_;
  j["feature_size"] = feature_size_;
  j["grayscale"] = grayscale_;
  j["payload"] = model_.payload_json();
  return j;
}

std::unique_ptr<ForestImageClassifier> ForestImageClassifier::from_json(const nlohmann::json& j) {
  return std::make_unique<ForestImageClassifier>(
      ForestModel::from_payload(j.at("payload")), j.at("classes").get<std::vector<std::string>>(),
      j.at("feature_size").get<int>(), j.at("grayscale").get<bool>());
}

}  // namespace aviary
