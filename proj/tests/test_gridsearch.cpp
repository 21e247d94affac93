#include <doctest.h>

#include <stdexcept>

#include <algorithm>

#include "aviary/learners/grid_search.hpp"
#include "aviary/rng.hpp"

using namespace aviary;

namespace {

/// Noiseless dataset of exact triplets with alternating classes along a
/// line. 1-NN memorizes it (a held-out point almost surely keeps a twin in
/// training); any wide vote straddles the alternation and fails.
void duplicated_triplets(std::vector<std::vector<float>>& x, std::vector<int>& y) {
  for (int g = 0; g < 14; ++g) {
    for (int rep = 0; rep < 3; ++rep) {
      x.push_back({static_cast<float>(10 * g), 0.f});
      y.push_back(g % 2);
    }
  }
}

}  // namespace

TEST_CASE("a one-config grid returns that config with its CV score") {
  std::vector<std::vector<float>> x;
  std::vector<int> y;
  duplicated_triplets(x, y);
  const std::vector<KnnConfig> grid = {{3, KnnMetric::Euclidean, KnnWeighting::Uniform}};
  const auto result = grid_search_knn(x, y, 2, grid, 3, 7);
  CHECK(result.best.k == 3);
  CHECK(result.table.size() == 1);
  CHECK(result.table[0].second == result.best_score);
  CHECK(result.best_score > 0.5);
}

TEST_CASE("k=1 wins on a noiseless duplicated dataset") {
  std::vector<std::vector<float>> x;
  std::vector<int> y;
  duplicated_triplets(x, y);
  std::vector<KnnConfig> grid = {{9, KnnMetric::Euclidean, KnnWeighting::Uniform},
                                 {1, KnnMetric::Euclidean, KnnWeighting::Uniform}};
  const auto result = grid_search_knn(x, y, 2, grid, 3, 5);
  CHECK(result.best.k == 1);
  // a fold occasionally swallows a whole triplet, costing its twins
  CHECK(result.best_score > 0.85);
  // the wide vote straddles the alternation and loses badly
  CHECK(result.table[0].second < 0.6);
}

TEST_CASE("ties keep the earliest grid entry") {
  std::vector<std::vector<float>> x;
  std::vector<int> y;
  duplicated_triplets(x, y);
  // k=1 ignores the weighting, so both configs score identically -> first wins
  std::vector<KnnConfig> grid = {{1, KnnMetric::Euclidean, KnnWeighting::Distance},
                                 {1, KnnMetric::Euclidean, KnnWeighting::Uniform}};
  const auto result = grid_search_knn(x, y, 2, grid, 3, 5);
  CHECK(result.best.weighting == KnnWeighting::Distance);
  CHECK(result.table[0].second == result.table[1].second);
}

TEST_CASE("the full benchmark grids have the documented extent") {
  const auto knn_grid = default_knn_grid();
  CHECK(knn_grid.size() == 60);  // 10 x 3 x 2
  // the reference winning config for the large-bird task is in the grid
  const bool has_winner =
      std::any_of(knn_grid.begin(), knn_grid.end(), [](const KnnConfig& c) {
        return c.k == 1 && c.metric == KnnMetric::Euclidean &&
               c.weighting == KnnWeighting::Uniform;
      });
  CHECK(has_winner);

  const auto forest_grid = default_forest_grid(0);
  CHECK(forest_grid.size() == 216);  // 3 x 4 x 3 x 3 x 2
}

TEST_CASE("forest grid search runs end to end on a toy problem") {
  std::vector<std::vector<float>> x;
  std::vector<int> y;
  duplicated_triplets(x, y);
  std::vector<ForestConfig> grid;
  for (int trees : {3, 9}) {
    ForestConfig cfg;
    cfg.n_trees = trees;
    cfg.seed = 5;
    cfg.max_features = 2;  // the second feature is constant; always see both
    grid.push_back(cfg);
  }
  const auto result = grid_search_forest(x, y, 2, grid, 3, 5);
  CHECK(result.table.size() == 2);
  CHECK(result.best_score > 0.8);
}

TEST_CASE("empty grid and tiny folds are rejected") {
  std::vector<std::vector<float>> x = {{0.f}, {1.f}, {2.f}};
  std::vector<int> y = {0, 1, 0};
  CHECK_THROWS_AS(grid_search_knn(x, y, 2, {}, 3, 0), std::invalid_argument);
  const std::vector<KnnConfig> grid = {{1, KnnMetric::Euclidean, KnnWeighting::Uniform}};
  CHECK_THROWS_AS(grid_search_knn(x, y, 2, grid, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(grid_search_knn(x, y, 2, grid, 5, 0), std::invalid_argument);
}

TEST_CASE("fold assignment is a seeded partition") {
  const auto a = cv_fold_assignment(30, 3, 9);
  const auto b = cv_fold_assignment(30, 3, 9);
  CHECK(a == b);
  int counts[3] = {0, 0, 0};
  for (int f : a) {
    REQUIRE(f >= 0);
    REQUIRE(f < 3);
    ++counts[f];
  }
  CHECK(counts[0] == 10);
  CHECK(counts[1] == 10);
  CHECK(counts[2] == 10);
  CHECK(cv_fold_assignment(30, 3, 10) != a);
}
