#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "aviary/image.hpp"

namespace testutil {

/// Unique scratch directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      auto candidate = base / (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directories(candidate, ec)) {
        path_ = candidate;
        break;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

/// Number of 8-connected components of pixels differing from the given
/// background color by more than `tol` in any channel.
inline int connected_components(const aviary::Image& img, const double bg[3], double tol = 0.02) {
  const int h = img.height, w = img.width;
  std::vector<char> fg(static_cast<std::size_t>(h) * w, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        if (std::fabs(img.at(y, x, c) - bg[c]) > tol) {
          fg[static_cast<std::size_t>(y) * w + x] = 1;
          break;
        }
      }
    }
  }
  std::vector<char> seen(fg.size(), 0);
  std::vector<std::pair<int, int>> stack;
  int components = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t at = static_cast<std::size_t>(y) * w + x;
      if (!fg[at] || seen[at]) continue;
      ++components;
      stack.push_back({y, x});
      seen[at] = 1;
      while (!stack.empty()) {
        auto [cy, cx] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = cy + dy, nx = cx + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            const std::size_t nat = static_cast<std::size_t>(ny) * w + nx;
            if (fg[nat] && !seen[nat]) {
              seen[nat] = 1;
              stack.push_back({ny, nx});
            }
          }
        }
      }
    }
  }
  return components;
}

/// Centroids of the 8-connected foreground components, in (y, x) pixels.
inline std::vector<std::pair<double, double>> component_centroids(const aviary::Image& img,
                                                                  const double bg[3],
                                                                  double tol = 0.02) {
  const int h = img.height, w = img.width;
  std::vector<int> label(static_cast<std::size_t>(h) * w, -1);
  std::vector<char> fg(label.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        if (std::fabs(img.at(y, x, c) - bg[c]) > tol) {
          fg[static_cast<std::size_t>(y) * w + x] = 1;
          break;
        }
      }
    }
  }
  std::vector<std::pair<double, double>> centroids;
  std::vector<long> counts;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t at = static_cast<std::size_t>(y) * w + x;
      if (!fg[at] || label[at] >= 0) continue;
      const int id = static_cast<int>(centroids.size());
      centroids.push_back({0.0, 0.0});
      counts.push_back(0);
      label[at] = id;
      stack.push_back({y, x});
      while (!stack.empty()) {
        auto [cy, cx] = stack.back();
        stack.pop_back();
        centroids[id].first += cy;
        centroids[id].second += cx;
        ++counts[id];
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = cy + dy, nx = cx + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            const std::size_t nat = static_cast<std::size_t>(ny) * w + nx;
            if (fg[nat] && label[nat] < 0) {
              label[nat] = id;
              stack.push_back({ny, nx});
            }
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    centroids[i].first /= counts[i];
    centroids[i].second /= counts[i];
  }
  return centroids;
}

}  // namespace testutil
