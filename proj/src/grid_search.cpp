#include "aviary/learners/grid_search.hpp"

namespace aviary {

std::vector<int> cv_fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SeededRng rng(seed, 0xCF01D);
  rng.shuffle(order);
  std::vector<int> assignment(n);
  for (std::size_t i = 0; i < n; ++i) {
    assignment[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  }
  return assignment;
}

std::vector<KnnConfig> default_knn_grid() {
  std::vector<KnnConfig> grid;
  for (int k = 1; k <= 10; ++k) {
    for (auto metric : {KnnMetric::Euclidean, KnnMetric::Manhattan, KnnMetric::Chebyshev}) {
      for (auto weighting : {KnnWeighting::Uniform, KnnWeighting::Distance}) {
        grid.push_back({k, metric, weighting});
      }
    }
  }
  return grid;
}

std::vector<ForestConfig> default_forest_grid(std::uint64_t seed) {
  std::vector<ForestConfig> grid;
  for (int n_trees : {100, 200, 300}) {
    for (int max_depth : {-1, 10, 20, 30}) {
      for (int min_split : {2, 5, 10}) {
        for (int min_leaf : {1, 2, 4}) {
          for (bool bootstrap : {true, false}) {
            ForestConfig cfg;
            cfg.n_trees = n_trees;
            cfg.max_depth = max_depth;
            cfg.min_split = min_split;
            cfg.min_leaf = min_leaf;
            cfg.bootstrap = bootstrap;
            cfg.seed = seed;
            grid.push_back(cfg);
          }
        }
      }
    }
  }
  return grid;
}

namespace {

template <typename Model, typename Config>
double fold_accuracy(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                     int n_classes, const Config& cfg, const std::vector<int>& train_idx,
                     const std::vector<int>& test_idx) {
  std::vector<std::vector<float>> xt;
  std::vector<int> yt;
  xt.reserve(train_idx.size());
  yt.reserve(train_idx.size());
  for (int i : train_idx) {
    xt.push_back(x[i]);
    yt.push_back(y[i]);
  }
  const Model model = Model::fit(xt, yt, n_classes, cfg);
  long correct = 0;
  for (int i : test_idx) {
    if (model.predict_label(x[i]) == y[i]) ++correct;
  }
  return test_idx.empty() ? 0.0 : static_cast<double>(correct) / test_idx.size();
}

}  // namespace

GridSearchResult<KnnConfig> grid_search_knn(const std::vector<std::vector<float>>& x,
                                            const std::vector<int>& y, int n_classes,
                                            const std::vector<KnnConfig>& grid, int folds,
                                            std::uint64_t seed) {
  return grid_search<KnnConfig>(
      grid, x.size(), folds, seed,
      [&](const KnnConfig& cfg, const std::vector<int>& train_idx,
          const std::vector<int>& test_idx) {
        return fold_accuracy<KnnModel>(x, y, n_classes, cfg, train_idx, test_idx);
      });
}

GridSearchResult<ForestConfig> grid_search_forest(const std::vector<std::vector<float>>& x,
                                                  const std::vector<int>& y, int n_classes,
                                                  const std::vector<ForestConfig>& grid, int folds,
                                                  std::uint64_t seed) {
  return grid_search<ForestConfig>(
      grid, x.size(), folds, seed,
      [&](const ForestConfig& cfg, const std::vector<int>& train_idx,
          const std::vector<int>& test_idx) {
        return fold_accuracy<ForestModel>(x, y, n_classes, cfg, train_idx, test_idx);
      });
}

}  // namespace aviary
