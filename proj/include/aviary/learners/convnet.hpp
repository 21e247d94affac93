#pragma once

#include <memory>
#include <string>
#include <vector>

#include "aviary/learners/convnet_core.hpp"
#include "aviary/learners/model.hpp"

namespace aviary {

struct TrainingLogRow {
  int epoch = 0;
  double train_loss = 0.0;
  double val_auc = 0.0;
  double val_accuracy = 0.0;
};

struct TrainingLog {
  std::vector<TrainingLogRow> rows;
  int best_epoch = 0;
  int epochs_run = 0;
};

std::string training_log_to_csv(const TrainingLog& log);

/// Trained convolutional network behind the uniform predict interface.
class ConvNetClassifier : public ImageClassifier {
 public:
  ConvNetClassifier(ConvNetCore<float> core, std::vector<std::string> classes, bool grayscale);
  const std::vector<std::string>& classes() const override { return classes_; }
  std::vector<double> predict_scores(const Image& img) const override;
  std::vector<double> predict_scores_raw(const std::vector<float>& chw) const;
  nlohmann::ordered_json to_json() const override;
  static std::unique_ptr<ConvNetClassifier> from_json(const nlohmann::json& j);
  const ConvNetCore<float>& core() const { return core_; }
  bool grayscale() const { return grayscale_; }

 private:
  ConvNetCore<float> core_;
  std::vector<std::string> classes_;
  bool grayscale_;
};

struct FitResult {
  std::unique_ptr<ConvNetClassifier> model;
  TrainingLog log;
};

/// Trains by mini-batch Adam on categorical cross-entropy. After every epoch
/// the validation macro AUC and accuracy are computed; the best-AUC snapshot
/// (accuracy breaking ties) is kept and returned. Training stops when the
/// best epoch is `patience` epochs old, or at max_epochs. A non-finite loss
/// raises TrainingFailure carrying the epoch.
FitResult fit_convnet(const TensorDataset& train, const TensorDataset& val, const CnnConfig& cfg,
                      bool grayscale = false);

}  // namespace aviary
