#include "aviary/learners/convnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "aviary/errors.hpp"
#include "aviary/metrics.hpp"
#include "base64.hpp"

namespace aviary {

std::string training_log_to_csv(const TrainingLog& log) {
  std::ostringstream out;
  out << "epoch,train_loss,val_auc,val_accuracy\n";
  for (const auto& row : log.rows) {
    out << row.epoch << ',' << row.train_loss << ',' << row.val_auc << ',' << row.val_accuracy
        << '\n';
  }
  return out.str();
}

ConvNetClassifier::ConvNetClassifier(ConvNetCore<float> core, std::vector<std::string> classes,
                                     bool grayscale)
    : core_(std::move(core)), classes_(std::move(classes)), grayscale_(grayscale) {
  if (static_cast<int>(classes_.size()) != core_.n_classes()) {
    throw std::invalid_argument("ConvNetClassifier: class list does not match the network");
  }
}

std::vector<double> ConvNetClassifier::predict_scores(const Image& img) const {
  return core_.predict_scores(image_features(img, core_.config().input_size, grayscale_));
}

std::vector<double> ConvNetClassifier::predict_scores_raw(const std::vector<float>& chw) const {
  return core_.predict_scores(chw);
}

nlohmann::ordered_json ConvNetClassifier::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "aviary-model";
  j["version"] = 1;
  j["kind"] = "convnet";
  j["classes"] = classes_;
  j["grayscale"] = grayscale_;
  const auto& cfg = core_.config();
  nlohmann::ordered_json cj;
  cj["input_size"] = cfg.input_size;
  cj["channels"] = cfg.channels;
  cj["blocks"] = nlohmann::ordered_json::array();
  for (const auto& b : cfg.blocks) cj["blocks"].push_back({b.filters, b.kernel, b.pool});
  cj["fc_neurons"] = cfg.fc_neurons;
  cj["batch_size"] = cfg.batch_size;
  cj["max_epochs"] = cfg.max_epochs;
  cj["patience"] = cfg.patience;
  cj["learning_rate"] = cfg.learning_rate;
  cj["seed"] = cfg.seed;
  j["config"] = std::move(cj);

  auto& weights = j["payload"]["weights"];
  weights = nlohmann::ordered_json::array();
  auto snap = const_cast<ConvNetCore<float>&>(core_).snapshot();
  for (const auto& block : snap) weights.push_back(detail::floats_to_base64(block));
  return j;
}

std::unique_ptr<ConvNetClassifier> ConvNetClassifier::from_json(const nlohmann::json& j) {
  CnnConfig cfg;
  const auto& cj = j.at("config");
  cfg.input_size = cj.at("input_size").get<int>();
  cfg.channels = cj.at("channels").get<int>();
  cfg.blocks.clear();
  for (const auto& b : cj.at("blocks")) {
    cfg.blocks.push_back({b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>()});
  }
  cfg.fc_neurons = cj.at("fc_neurons").get<int>();
  if (cj.contains("batch_size")) cfg.batch_size = cj.at("batch_size").get<int>();
  if (cj.contains("max_epochs")) cfg.max_epochs = cj.at("max_epochs").get<int>();
  if (cj.contains("patience")) cfg.patience = cj.at("patience").get<int>();
  if (cj.contains("learning_rate")) cfg.learning_rate = cj.at("learning_rate").get<double>();
  if (cj.contains("seed")) cfg.seed = cj.at("seed").get<std::uint64_t>();

  const auto classes = j.at("classes").get<std::vector<std::string>>();
  ConvNetCore<float> core(cfg, static_cast<int>(classes.size()));
  std::vector<std::vector<float>> snap;
  for (const auto& blob : j.at("payload").at("weights")) {
    snap.push_back(detail::base64_to_floats(blob.get<std::string>()));
  }
  core.restore(snap);
  return std::make_unique<ConvNetClassifier>(std::move(core), classes,
                                             j.at("grayscale").get<bool>());
}

namespace {

struct ValMetrics {
  double auc = 0.0;
  double accuracy = 0.0;
};

ValMetrics validate(ConvNetCore<float>& core, const TensorDataset& val) {
  const int batch = core.config().batch_size;
  const std::size_t n = val.x.size();
  std::vector<std::vector<double>> scores;
  scores.reserve(n);
  std::vector<float> batch_x;
  for (std::size_t start = 0; start < n; start += batch) {
    const int b = static_cast<int>(std::min<std::size_t>(batch, n - start));
    batch_x.assign(static_cast<std::size_t>(b) * core.sample_values(), 0.f);
    for (int i = 0; i < b; ++i) {
      std::copy(val.x[start + i].begin(), val.x[start + i].end(),
                batch_x.begin() + static_cast<std::size_t>(i) * core.sample_values());
    }
    auto batch_scores = core.predict_scores_batch(batch_x, b);
    for (auto& s : batch_scores) scores.push_back(std::move(s));
  }
  ValMetrics m;
  m.auc = macro_ovr_auc(scores, val.y);
  long correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (argmax_score(scores[i]) == val.y[i]) ++correct;
  }
  m.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
  return m;
}

}  // namespace

FitResult fit_convnet(const TensorDataset& train, const TensorDataset& val, const CnnConfig& cfg,
                      bool grayscale) {
  if (train.x.empty() || train.x.size() != train.y.size()) {
    throw std::invalid_argument("fit_convnet: empty or misaligned training set");
  }
  if (val.x.empty() || val.x.size() != val.y.size()) {
    throw std::invalid_argument("fit_convnet: validation set must be non-empty");
  }
  if (train.classes.empty()) {
    throw std::invalid_argument("fit_convnet: dataset carries no class list");
  }
  if (cfg.batch_size < 1) throw std::invalid_argument("fit_convnet: batch_size must be >= 1");
  if (cfg.patience < 1 || cfg.patience > cfg.max_epochs) {
    throw std::invalid_argument("fit_convnet: need 1 <= patience <= max_epochs");
  }

  const int n_classes = static_cast<int>(train.classes.size());
  ConvNetCore<float> core(cfg, n_classes);
  const std::size_t sample_values = core.sample_values();
  for (const auto& x : train.x) {
    if (x.size() != sample_values) {
      throw std::invalid_argument("fit_convnet: training sample size does not match the config");
    }
  }
  for (const auto& x : val.x) {
    if (x.size() != sample_values) {
      throw std::invalid_argument("fit_convnet: validation sample size does not match the config");
    }
  }
  core.init_weights(cfg.seed);

  TrainingLog log;
  std::vector<std::vector<float>> best_snapshot = core.snapshot();
  double best_auc = -1.0;
  double best_accuracy = -1.0;
  int best_epoch = 0;

  const std::size_t n = train.x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<float> batch_x;
  std::vector<int> batch_y;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    SeededRng shuffle_rng(cfg.seed, 0xE70C00 + static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    long batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const int b = static_cast<int>(std::min<std::size_t>(cfg.batch_size, n - start));
      batch_x.assign(static_cast<std::size_t>(b) * sample_values, 0.f);
      batch_y.resize(static_cast<std::size_t>(b));
      for (int i = 0; i < b; ++i) {
        const std::size_t src = order[start + i];
        std::copy(train.x[src].begin(), train.x[src].end(),
                  batch_x.begin() + static_cast<std::size_t>(i) * sample_values);
        batch_y[i] = train.y[src];
      }
      const double loss = core.forward_backward(batch_x, batch_y);
      if (!std::isfinite(loss)) {
        throw TrainingFailure("fit_convnet: non-finite loss at epoch " + std::to_string(epoch),
                              epoch);
      }
      core.adam_step();
      loss_sum += loss;
      ++batches;
    }

    const ValMetrics vm = validate(core, val);
    log.rows.push_back({epoch, loss_sum / batches, vm.auc, vm.accuracy});

    const bool improved =
        vm.auc > best_auc || (vm.auc == best_auc && vm.accuracy > best_accuracy);
    if (improved) {
      best_auc = vm.auc;
      best_accuracy = vm.accuracy;
      best_epoch = epoch;
      best_snapshot = core.snapshot();
    }
    log.epochs_run = epoch;
    if (epoch - best_epoch >= cfg.patience) break;
  }
  log.best_epoch = best_epoch;

  core.restore(best_snapshot);
  FitResult result;
  result.model =
      std::make_unique<ConvNetClassifier>(std::move(core), train.classes, grayscale);
  result.log = std::move(log);
  return result;
}

}  // namespace aviary
