#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "aviary/corpus.hpp"
#include "aviary/errors.hpp"
#include "aviary/parallel.hpp"
#include "aviary/png_io.hpp"
#include "support/test_util.hpp"

using namespace aviary;

namespace {

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

CorpusConfig small_config(CorpusTask task, const std::string& out_dir, int per_class = 10) {
  CorpusConfig cfg = defaults_for(task);
  cfg.per_class = per_class;
  cfg.seed = 7;
  cfg.out_dir = out_dir;
  cfg.canvas = 256;
  cfg.sprite_px = 20;
  cfg.count_min = 5;
  cfg.count_max = 8;
  cfg.spacing_min = 12.0;
  cfg.spacing_max = 16.0;
  return cfg;
}

}  // namespace

TEST_CASE("per-class counts and split arithmetic are exact") {
  testutil::TempDir dir("corpus_counts");
  const auto cfg = small_config(CorpusTask::Formations, dir.str(), 10);
  const auto manifest = generate_corpus(cfg);
  CHECK(manifest.rows.size() == 120);  // 12 classes x 10

  std::map<std::string, std::map<std::string, int>> split_counts;
  for (const auto& row : manifest.rows) {
    CHECK_FALSE(row.formation.empty());
    ++split_counts[row.formation][row.split];
  }
  CHECK(split_counts.size() == 12);
  for (const auto& [cls, counts] : split_counts) {
    CHECK(counts.at("train") == 8);
    CHECK(counts.at("val") == 1);
    CHECK(counts.at("test") == 1);
  }
}

TEST_CASE("identical config and seed give byte-identical corpora") {
  testutil::TempDir dir_a("corpus_det_a");
  testutil::TempDir dir_b("corpus_det_b");
  auto cfg_a = small_config(CorpusTask::Formations, dir_a.str(), 4);
  auto cfg_b = small_config(CorpusTask::Formations, dir_b.str(), 4);
  const auto ma = generate_corpus(cfg_a);
  const auto mb = generate_corpus(cfg_b);
  REQUIRE(ma.rows.size() == mb.rows.size());

  // manifests are byte-identical except for nothing (config echo has no dir)
  CHECK(file_bytes(dir_a.str() + "/manifest.json") == file_bytes(dir_b.str() + "/manifest.json"));
  for (const auto& row : ma.rows) {
    CHECK(file_bytes(dir_a.str() + "/" + row.path) == file_bytes(dir_b.str() + "/" + row.path));
  }
}

TEST_CASE("corpus bytes do not depend on the worker thread count") {
  testutil::TempDir dir_a("corpus_thr_a");
  testutil::TempDir dir_b("corpus_thr_b");
  aviary::set_thread_count(1);
  const auto ma = generate_corpus(small_config(CorpusTask::Alignments, dir_a.str(), 3));
  aviary::set_thread_count(4);
  const auto mb = generate_corpus(small_config(CorpusTask::Alignments, dir_b.str(), 3));
  aviary::set_thread_count(0);
  CHECK(file_bytes(dir_a.str() + "/manifest.json") == file_bytes(dir_b.str() + "/manifest.json"));
  for (const auto& row : ma.rows) {
    CHECK(file_bytes(dir_a.str() + "/" + row.path) == file_bytes(dir_b.str() + "/" + row.path));
  }
}

TEST_CASE("flock-size labels re-derive from the true counts") {
  testutil::TempDir dir("corpus_size");
  auto cfg = defaults_for(CorpusTask::FlockSize);
  cfg.per_class = 6;
  cfg.seed = 11;
  cfg.out_dir = dir.str();
  const auto manifest = generate_corpus(cfg);
  CHECK(manifest.rows.size() == 30);
  for (const auto& row : manifest.rows) {
    CHECK(row.count >= 5);
    CHECK(row.count <= 100);
    CHECK(row.size_bin == to_string(bin_flock_size(row.count)));
  }
}

TEST_CASE("manifest save/load round trip") {
  testutil::TempDir dir("corpus_round");
  const auto cfg = small_config(CorpusTask::Alignments, dir.str(), 4);
  const auto manifest = generate_corpus(cfg);
  const auto loaded = load_manifest(dir.str() + "/manifest.json");
  REQUIRE(loaded.rows.size() == manifest.rows.size());
  CHECK(loaded.seed == manifest.seed);
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    CHECK(loaded.rows[i].path == manifest.rows[i].path);
    CHECK(loaded.rows[i].alignment == manifest.rows[i].alignment);
    CHECK(loaded.rows[i].split == manifest.rows[i].split);
    CHECK(loaded.rows[i].count == manifest.rows[i].count);
  }
  // images load through the manifest root
  const Image img = load_row_image(loaded, loaded.rows[0]);
  CHECK(img.height == cfg.canvas);
  CHECK(img.channels == 3);
}

TEST_CASE("cascade corpus carries stage truth and disjoint species groups") {
  testutil::TempDir dir("corpus_cascade");
  auto cfg = small_config(CorpusTask::Cascade, dir.str(), 4);
  const auto manifest = generate_corpus(cfg);
  CHECK(manifest.rows.size() == 13 * 4);  // 12 formations + aircraft

  std::set<std::string> groups;
  for (const auto& row : manifest.rows) {
    if (row.coarse == "aircraft") {
      CHECK(row.species == "Aircraft");
      CHECK(row.size_label.empty());
    } else {
      CHECK(row.coarse == "bird");
      CHECK_FALSE(row.size_label.empty());
      CHECK(row.species == row.formation);
      groups.insert(row.size_label);
    }
  }
  CHECK(groups == std::set<std::string>{"small", "medium", "large"});

  // group map partitions the twelve formations
  std::set<std::string> all;
  for (const auto& g : {"small", "medium", "large"}) {
    for (const auto& s : cascade_species_of_group(g)) {
      CHECK(all.insert(s).second);
    }
  }
  CHECK(all.size() == 12);
}

TEST_CASE("a user sprite PNG substitutes for the procedural bird") {
  testutil::TempDir dir("corpus_sprite");
  // author a sprite on disk: a plain dark square with soft alpha edges
  Image color(16, 16, 3, 0.2);
  Image alpha(16, 16, 1, 0.0);
  for (int y = 4; y < 12; ++y) {
    for (int x = 4; x < 12; ++x) alpha.at(y, x, 0) = 1.0;
  }
  const auto sprite_path = dir.str() + "/sprite.png";
  save_png_rgba(color, alpha, sprite_path);

  auto cfg = small_config(CorpusTask::Formations, dir.str() + "/out", 2);
  cfg.sprite_png = sprite_path;
  const auto manifest = generate_corpus(cfg);
  CHECK(manifest.rows.size() == 24);
  CHECK(manifest.config_echo.contains("sprite_png"));
  const Image img = load_row_image(manifest, manifest.rows[0]);
  // the sprite's flat 0.2 tone shows up in the render
  bool found = false;
  for (int y = 0; y < img.height && !found; ++y) {
    for (int x = 0; x < img.width && !found; ++x) {
      found = std::abs(img.at(y, x, 0) - 0.2) < 0.02 && std::abs(img.at(y, x, 1) - 0.2) < 0.02;
    }
  }
  CHECK(found);
}

TEST_CASE("config echo round-trips through JSON") {
  auto cfg = defaults_for(CorpusTask::FlockSize);
  cfg.per_class = 42;
  cfg.seed = 1234;
  cfg.spacing_max = 33.0;
  cfg.geometry.arm_angle_deg = 40.0;
  const auto j = corpus_config_to_json(cfg);
  const auto back = corpus_config_from_json(j);
  CHECK(back.task == CorpusTask::FlockSize);
  CHECK(back.per_class == 42);
  CHECK(back.seed == 1234);
  CHECK(back.spacing_max == 33.0);
  CHECK(back.geometry.arm_angle_deg == 40.0);
}

TEST_CASE("invalid configs are rejected") {
  CorpusConfig cfg = defaults_for(CorpusTask::Formations);
  cfg.out_dir = "";
  CHECK_THROWS_AS(generate_corpus(cfg), ValidationError);
  cfg.out_dir = "/tmp/x";
  cfg.per_class = 0;
  CHECK_THROWS_AS(generate_corpus(cfg), ValidationError);
  cfg.per_class = 5;
  cfg.train_frac = 0.9;
  cfg.val_frac = 0.2;
  CHECK_THROWS_AS(generate_corpus(cfg), ValidationError);
}

TEST_CASE("unwritable output directory raises IoError") {
  CorpusConfig cfg = defaults_for(CorpusTask::Formations);
  cfg.per_class = 1;
  cfg.out_dir = "/proc/definitely/not/writable";
  CHECK_THROWS_AS(generate_corpus(cfg), IoError);
}
