#include <doctest.h>

#include "aviary/corpus.hpp"
#include "aviary/errors.hpp"
#include "aviary/experiments.hpp"
#include "support/test_util.hpp"

using namespace aviary;

namespace {

/// Ignores the pixels entirely; the accuracy curve must stay flat.
class ConstantClassifier : public ImageClassifier {
 public:
  ConstantClassifier(std::vector<std::string> classes, int answer)
      : classes_(std::move(classes)), answer_(answer) {}
  const std::vector<std::string>& classes() const override { return classes_; }
  std::vector<double> predict_scores(const Image&) const override {
    std::vector<double> s(classes_.size(), 0.0);
    s[answer_] = 1.0;
    return s;
  }
  nlohmann::ordered_json to_json() const override { return {}; }

 private:
  std::vector<std::string> classes_;
  int answer_;
};

/// Labels by mean image brightness threshold; sensitive to darkness.
class BrightnessClassifier : public ImageClassifier {
 public:
  explicit BrightnessClassifier(std::vector<std::string> classes)
      : classes_(std::move(classes)) {}
  const std::vector<std::string>& classes() const override { return classes_; }
  std::vector<double> predict_scores(const Image& img) const override {
    double mean = 0;
    for (double v : img.data) mean += v;
    mean /= img.data.size();
    std::vector<double> s(classes_.size(), 0.0);
    s[mean > 0.5 ? 0 : 1 % classes_.size()] = 1.0;
    return s;
  }
  nlohmann::ordered_json to_json() const override { return {}; }

 private:
  std::vector<std::string> classes_;
};

Manifest tiny_formations(const std::string& dir, int per_class, std::uint64_t seed) {
  CorpusConfig cfg = defaults_for(CorpusTask::Formations);
  cfg.per_class = per_class;
  cfg.seed = seed;
  cfg.out_dir = dir;
  cfg.canvas = 128;
  cfg.sprite_px = 12;
  cfg.count_min = 5;
  cfg.count_max = 7;
  cfg.spacing_min = 8.0;
  cfg.spacing_max = 11.0;
  return generate_corpus(cfg);
}

}  // namespace

TEST_CASE("eval set extraction respects splits and labels") {
  testutil::TempDir dir("exp_evalset");
  const auto manifest = tiny_formations(dir.str(), 10, 3);
  const auto test = eval_set_from_manifest(manifest, CorpusTask::Formations, "test");
  CHECK(test.paths.size() == 12);  // one test image per class at per_class 10
  const auto all = eval_set_from_manifest(manifest, CorpusTask::Formations, "");
  CHECK(all.paths.size() == 120);
  CHECK_THROWS_AS(eval_set_from_manifest(manifest, CorpusTask::Formations, "nope"),
                  ValidationError);
}

TEST_CASE("the null sweep level equals the clean evaluation bitwise") {
  testutil::TempDir dir("exp_null");
  const auto manifest = tiny_formations(dir.str(), 4, 5);
  const auto set = eval_set_from_manifest(manifest, CorpusTask::Formations, "");
  const BrightnessClassifier model(task_classes(CorpusTask::Formations));

  const auto clean = evaluate_classifier(model, set);
  for (auto kind : {DistortionKind::Rain, DistortionKind::Snow, DistortionKind::Noise}) {
    const auto rows = robustness_sweep(model, set, kind, {0.0, 30.0}, 17);
    CHECK(rows[0].accuracy_percent == clean.accuracy_percent);
    CHECK(rows[0].level == 0.0);
    CHECK(rows[0].n_samples == static_cast<long>(set.paths.size()));
  }
  const auto dark = robustness_sweep(model, set, DistortionKind::Darkness, {1.0, 0.3}, 17);
  CHECK(dark[0].accuracy_percent == clean.accuracy_percent);
}

TEST_CASE("a distortion-blind classifier yields a flat curve") {
  testutil::TempDir dir("exp_flat");
  const auto manifest = tiny_formations(dir.str(), 3, 7);
  const auto set = eval_set_from_manifest(manifest, CorpusTask::Formations, "");
  const ConstantClassifier model(task_classes(CorpusTask::Formations), 0);
  const auto rows =
      robustness_sweep(model, set, DistortionKind::Noise, {0.0, 0.2, 0.4}, 3);
  CHECK(rows[0].accuracy_percent == rows[1].accuracy_percent);
  CHECK(rows[1].accuracy_percent == rows[2].accuracy_percent);
}

TEST_CASE("sweeps reproduce bitwise for a fixed seed") {
  testutil::TempDir dir("exp_seed");
  const auto manifest = tiny_formations(dir.str(), 3, 9);
  const auto set = eval_set_from_manifest(manifest, CorpusTask::Formations, "");
  const BrightnessClassifier model(task_classes(CorpusTask::Formations));
  const auto a = robustness_sweep(model, set, DistortionKind::Snow, {25.0}, 5);
  const auto b = robustness_sweep(model, set, DistortionKind::Snow, {25.0}, 5);
  CHECK(a[0].accuracy_percent == b[0].accuracy_percent);
}

TEST_CASE("unified accuracy equals a hand tally of its prediction list") {
  testutil::TempDir dir("exp_uca");
  const auto manifest = tiny_formations(dir.str(), 4, 21);
  const auto set = eval_set_from_manifest(manifest, CorpusTask::Formations, "");
  const BrightnessClassifier model(task_classes(CorpusTask::Formations));
  const auto result = evaluate_classifier(model, set);
  long correct = 0;
  for (std::size_t i = 0; i < set.labels.size(); ++i) {
    correct += result.predictions[i] == set.labels[i];
  }
  CHECK(result.accuracy_percent ==
        doctest::Approx(100.0 * correct / set.labels.size()).epsilon(1e-12));
}

TEST_CASE("sweep csv has the documented header") {
  const auto csv = sweep_to_csv({{0.0, 95.0, 10}, {0.2, 80.0, 10}});
  CHECK(csv.rfind("level,accuracy_percent,n_samples\n", 0) == 0);
}

TEST_CASE("tensor datasets load with class indices and requested size") {
  testutil::TempDir dir("exp_tensor");
  const auto manifest = tiny_formations(dir.str(), 3, 11);
  const auto ds = tensor_dataset_from_manifest(manifest, CorpusTask::Formations, "", 32, false);
  CHECK(ds.x.size() == 36);
  CHECK(ds.classes.size() == 12);
  for (const auto& x : ds.x) CHECK(x.size() == 3u * 32 * 32);
  for (int y : ds.y) {
    CHECK(y >= 0);
    CHECK(y < 12);
  }
}

TEST_CASE("insight sweeps produce the three tables on a micro corpus") {
  testutil::TempDir dir("exp_insight");
  (void)tiny_formations(dir.str(), 10, 13);

  InsightConfig cfg;
  cfg.manifest_path = dir.str() + "/manifest.json";
  cfg.task = CorpusTask::Formations;
  cfg.train_sizes = {3, 5};
  cfg.input_sizes = {16, 32};
  cfg.seed = 2;
  cfg.out_dir = dir.str() + "/out";
  cfg.cnn.blocks = {{4, 3, 2}, {8, 3, 2}};
  cfg.cnn.fc_neurons = 16;
  cfg.cnn.max_epochs = 2;
  cfg.cnn.patience = 2;
  cfg.cnn.batch_size = 16;

  const auto tables = insight_sweeps(cfg);
  REQUIRE(tables.train_size_rows.size() == 2);
  CHECK(tables.train_size_rows[0][0] == 3.0);
  CHECK(tables.train_size_rows[1][0] == 5.0);
  REQUIRE(tables.colormode_rows.size() == 2);
  REQUIRE(tables.input_size_rows.size() == 2);
  CHECK(tables.input_size_rows[0][2] > 0.0);  // wall time measured

  CHECK(insight_train_size_csv(tables).rfind("train_size,", 0) == 0);
  CHECK(insight_colormode_csv(tables).rfind("input_size,grayscale", 0) == 0);
  CHECK(insight_input_size_csv(tables).rfind("input_size,accuracy", 0) == 0);
}

TEST_CASE("insight tables are repeatable for a fixed seed") {
  testutil::TempDir dir("exp_insight_rep");
  (void)tiny_formations(dir.str(), 10, 17);
  InsightConfig cfg;
  cfg.manifest_path = dir.str() + "/manifest.json";
  cfg.task = CorpusTask::Formations;
  cfg.train_sizes = {4};
  cfg.seed = 5;
  cfg.out_dir = dir.str() + "/out";
  cfg.cnn.blocks = {{4, 3, 2}};
  cfg.cnn.fc_neurons = 8;
  cfg.cnn.input_size = 16;
  cfg.cnn.max_epochs = 2;
  cfg.cnn.patience = 2;
  const auto a = insight_sweeps(cfg);
  const auto b = insight_sweeps(cfg);
  REQUIRE(a.train_size_rows.size() == 1);
  CHECK(a.train_size_rows[0][1] == b.train_size_rows[0][1]);  // accuracy identical
}

TEST_CASE("stage-view label specs slice a cascade corpus") {
  testutil::TempDir dir("exp_labels");
  CorpusConfig cfg = defaults_for(CorpusTask::Cascade);
  cfg.per_class = 5;
  cfg.seed = 23;
  cfg.out_dir = dir.str();
  cfg.canvas = 128;
  cfg.sprite_px = 12;
  cfg.count_min = 4;
  cfg.count_max = 5;
  cfg.spacing_min = 9.0;
  cfg.spacing_max = 11.0;
  cfg.aircraft_sprite_px = 16;
  cfg.aircraft_scale_min = 1.0;
  cfg.aircraft_scale_max = 1.2;
  const auto manifest = generate_corpus(cfg);

  const auto coarse = eval_set_for(manifest, "coarse", "");
  CHECK(coarse.paths.size() == 65);  // 13 classes x 5
  CHECK(coarse.classes == std::vector<std::string>{"bird", "aircraft"});

  const auto size = eval_set_for(manifest, "size", "");
  CHECK(size.paths.size() == 60);  // aircraft rows excluded
  CHECK(size.classes.size() == 3);

  const auto small = eval_set_for(manifest, "species:small", "");
  CHECK(small.paths.size() == 20);  // 4 formations x 5
  CHECK(small.classes.size() == 4);
  CHECK_THROWS_AS(eval_set_for(manifest, "species:tiny", ""), ValidationError);

  const auto ds = tensor_dataset_for(manifest, "size", "train", 16, false);
  CHECK(ds.classes.size() == 3);
  CHECK(ds.x.size() == 48);  // 12 bird classes x 4 train rows
}

TEST_CASE("insight sweeps reject oversized train requests") {
  testutil::TempDir dir("exp_insight_bad");
  (void)tiny_formations(dir.str(), 4, 15);
  InsightConfig cfg;
  cfg.manifest_path = dir.str() + "/manifest.json";
  cfg.train_sizes = {50};  // pool has only ~4 per class
  cfg.out_dir = dir.str() + "/out";
  cfg.cnn.max_epochs = 1;
  cfg.cnn.patience = 1;
  CHECK_THROWS_AS(insight_sweeps(cfg), ValidationError);
}
