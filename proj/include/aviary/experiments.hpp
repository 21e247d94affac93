#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aviary/corpus.hpp"
#include "aviary/distort.hpp"
#include "aviary/learners/convnet.hpp"
#include "aviary/learners/model.hpp"
#include "aviary/metrics.hpp"

namespace aviary {

/// A labeled evaluation slice of a corpus: absolute image paths + labels.
struct EvalSet {
  std::vector<std::string> paths;
  std::vector<std::string> labels;
  std::vector<std::string> classes;
};

EvalSet eval_set_from_manifest(const Manifest& manifest, CorpusTask task,
                               const std::string& split);

/// String label specs cover the per-stage views of a cascade corpus on top
/// of the plain tasks: "formations", "alignments", "flock_size", "unified",
/// "cascade" (species over all rows), "coarse" (bird/aircraft), "size"
/// (bird rows only), "species:small" / "species:medium" / "species:large"
/// (bird rows of one size group).
EvalSet eval_set_for(const Manifest& manifest, const std::string& label_spec,
                     const std::string& split);
TensorDataset tensor_dataset_for(const Manifest& manifest, const std::string& label_spec,
                                 const std::string& split, int input_size, bool grayscale);

struct EvalResult {
  double accuracy_percent = 0.0;
  ClassReport report;
  std::vector<std::string> predictions;
};

/// Evaluates a classifier over an EvalSet, optionally distorting each image
/// first. Images load in parallel; per-image distortion seeds derive from
/// (seed, sample index), so the run is reproducible and order-independent.
EvalResult evaluate_classifier(const ImageClassifier& model, const EvalSet& set);
EvalResult evaluate_classifier_distorted(const ImageClassifier& model, const EvalSet& set,
                                         DistortionKind kind, double level, std::uint64_t seed);

struct SweepRow {
  double level = 0.0;
  double accuracy_percent = 0.0;
  long n_samples = 0;
};

/// Accuracy curve over distortion levels. The null level (rain/snow 0,
/// sigma 0, brightness 1) goes through the identity path, so its entry
/// equals the clean evaluation bit for bit.
std::vector<SweepRow> robustness_sweep(const ImageClassifier& model, const EvalSet& set,
                                       DistortionKind kind, const std::vector<double>& levels,
                                       std::uint64_t seed);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// Configuration of the three insight experiments: training-set-size sweep,
/// grayscale-vs-RGB comparison, and input-size sweep, all against the fixed
/// test split of one corpus.
struct InsightConfig {
  std::string manifest_path;
  CorpusTask task = CorpusTask::Formations;
  std::vector<int> train_sizes;   // per-class training+validation pool sizes
  std::vector<int> input_sizes;   // square input resolutions
  CnnConfig cnn;                  // epochs/batch/patience template
  std::uint64_t seed = 0;
  std::string out_dir;
};

struct InsightTables {
  // (train_size, accuracy_percent, n_test)
  std::vector<std::array<double, 3>> train_size_rows;
  // (input_size, grayscale_accuracy, rgb_accuracy)
  std::vector<std::array<double, 3>> colormode_rows;
  // (input_size, accuracy_percent, wall_seconds)
  std::vector<std::array<double, 3>> input_size_rows;
};

InsightTables insight_sweeps(const InsightConfig& cfg);

std::string insight_train_size_csv(const InsightTables& t);
std::string insight_colormode_csv(const InsightTables& t);
std::string insight_input_size_csv(const InsightTables& t);

/// Loads a manifest split into feature tensors for the learners.
TensorDataset tensor_dataset_from_manifest(const Manifest& manifest, CorpusTask task,
                                           const std::string& split, int input_size,
                                           bool grayscale);

}  // namespace aviary
