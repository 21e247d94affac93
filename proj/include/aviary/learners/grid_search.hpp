#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "aviary/learners/forest.hpp"
#include "aviary/learners/knn.hpp"
#include "aviary/rng.hpp"

namespace aviary {

template <typename Config>
struct GridSearchResult {
  Config best;
  double best_score = 0.0;                        // mean CV accuracy of the winner
  std::vector<std::pair<Config, double>> table;   // every config with its score
};

/// Deterministic stratum-free k-fold assignment: indices are shuffled by the
/// seed and dealt round-robin into folds.
std::vector<int> cv_fold_assignment(std::size_t n, int folds, std::uint64_t seed);

/// Exhaustive grid search scored by mean k-fold cross-validated accuracy on
/// the given training data. Ties keep the earliest grid entry.
/// `fit_predict(cfg, train_idx, test_idx)` returns the accuracy on test_idx.
template <typename Config>
GridSearchResult<Config> grid_search(
    const std::vector<Config>& grid, std::size_t n_samples, int folds, std::uint64_t seed,
    const std::function<double(const Config&, const std::vector<int>&, const std::vector<int>&)>&
        fit_predict) {
  if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  if (folds < 2) throw std::invalid_argument("grid_search: need at least 2 folds");
  if (n_samples < static_cast<std::size_t>(folds)) {
    throw std::invalid_argument("grid_search: fewer samples than folds");
  }
  const auto assignment = cv_fold_assignment(n_samples, folds, seed);

  GridSearchResult<Config> result;
  result.table.reserve(grid.size());
  bool first = true;
  for (const auto& cfg : grid) {
    double score_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<int> train_idx, test_idx;
      for (std::size_t i = 0; i < n_samples; ++i) {
        (assignment[i] == f ? test_idx : train_idx).push_back(static_cast<int>(i));
      }
      score_sum += fit_predict(cfg, train_idx, test_idx);
    }
    const double score = score_sum / folds;
    result.table.emplace_back(cfg, score);
    if (first || score > result.best_score) {
      result.best = cfg;
      result.best_score = score;
      first = false;
    }
  }
  return result;
}

/// The standard benchmark grids.
std::vector<KnnConfig> default_knn_grid();
std::vector<ForestConfig> default_forest_grid(std::uint64_t seed);

GridSearchResult<KnnConfig> grid_search_knn(const std::vector<std::vector<float>>& x,
                                            const std::vector<int>& y, int n_classes,
                                            const std::vector<KnnConfig>& grid, int folds,
                                            std::uint64_t seed);

GridSearchResult<ForestConfig> grid_search_forest(const std::vector<std::vector<float>>& x,
                                                  const std::vector<int>& y, int n_classes,
                                                  const std::vector<ForestConfig>& grid, int folds,
                                                  std::uint64_t seed);

}  // namespace aviary
