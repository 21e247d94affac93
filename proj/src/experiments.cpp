#include "aviary/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "aviary/errors.hpp"
#include "aviary/parallel.hpp"
#include "aviary/png_io.hpp"

namespace aviary {

EvalSet eval_set_from_manifest(const Manifest& manifest, CorpusTask task,
                               const std::string& split) {
  EvalSet set;
  set.classes = task_classes(task);
  for (const auto& row : manifest.rows) {
    if (!split.empty() && row.split != split) continue;
    const std::string label = task_label(row, task);
    if (label.empty()) {
      throw ValidationError("eval_set_from_manifest: row '" + row.path +
                            "' carries no label for task " + to_string(task));
    }
    set.paths.push_back(manifest.root_dir.empty() ? row.path
                                                  : manifest.root_dir + "/" + row.path);
    set.labels.push_back(label);
  }
  if (set.paths.empty()) {
    throw ValidationError("eval_set_from_manifest: no rows in split '" + split + "'");
  }
  return set;
}

namespace {

struct LabelView {
  std::vector<std::string> classes;
  std::function<bool(const ManifestRow&)> keep;
  std::function<std::string(const ManifestRow&)> label;
};

LabelView label_view_for(const std::string& spec) {
  LabelView view;
  if (spec == "coarse") {
    view.classes = {"bird", "aircraft"};
    view.keep = [](const ManifestRow& r) { return !r.coarse.empty(); };
    view.label = [](const ManifestRow& r) { return r.coarse; };
    return view;
  }
  if (spec == "size") {
    view.classes = {"small", "medium", "large"};
    view.keep = [](const ManifestRow& r) { return r.coarse == "bird"; };
    view.label = [](const ManifestRow& r) { return r.size_label; };
    return view;
  }
  if (spec.rfind("species:", 0) == 0) {
    const std::string group = spec.substr(8);
    view.classes = cascade_species_of_group(group);
    if (view.classes.empty()) {
      throw ValidationError("unknown species group '" + group + "'");
    }
    view.keep = [group](const ManifestRow& r) { return r.size_label == group; };
    view.label = [](const ManifestRow& r) { return r.species; };
    return view;
  }
  const CorpusTask task = corpus_task_from_string(spec);
  view.classes = task_classes(task);
  view.keep = [](const ManifestRow&) { return true; };
  view.label = [task](const ManifestRow& r) { return task_label(r, task); };
  return view;
}

std::vector<const ManifestRow*> rows_for(const Manifest& manifest, const LabelView& view,
                                         const std::string& split) {
  std::vector<const ManifestRow*> rows;
  for (const auto& row : manifest.rows) {
    if (!split.empty() && row.split != split) continue;
    if (view.keep(row)) rows.push_back(&row);
  }
  if (rows.empty()) {
    throw ValidationError("no manifest rows match split '" + split + "'");
  }
  return rows;
}

EvalResult evaluate_impl(const ImageClassifier& model, const EvalSet& set, bool distorted,
                         DistortionKind kind, double level, std::uint64_t seed) {
  const std::size_t n = set.paths.size();
  std::vector<std::string> predictions(n);
  const auto& classes = model.classes();
  parallel_for(n, [&](std::size_t i) {
    Image img = load_png(set.paths[i]);
    if (distorted) {
      const std::uint64_t per_image_seed = seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
      img = apply_distortion(img, kind, level, per_image_seed);
    }
    predictions[i] = classes[model.predict(img).label];
  });
  EvalResult result;
  result.predictions = std::move(predictions);
  const auto cm = confusion(set.labels, result.predictions, set.classes);
  result.report = class_report(cm);
  result.accuracy_percent = result.report.accuracy_percent;
  return result;
}

}  // namespace

EvalSet eval_set_for(const Manifest& manifest, const std::string& label_spec,
                     const std::string& split) {
  const auto view = label_view_for(label_spec);
  EvalSet set;
  set.classes = view.classes;
  for (const auto* row : rows_for(manifest, view, split)) {
    const std::string label = view.label(*row);
    if (label.empty()) {
      throw ValidationError("row '" + row->path + "' carries no '" + label_spec + "' label");
    }
    set.paths.push_back(manifest.root_dir.empty() ? row->path
                                                  : manifest.root_dir + "/" + row->path);
    set.labels.push_back(label);
  }
  return set;
}

TensorDataset tensor_dataset_for(const Manifest& manifest, const std::string& label_spec,
                                 const std::string& split, int input_size, bool grayscale) {
  const auto view = label_view_for(label_spec);
  const auto rows = rows_for(manifest, view, split);
  TensorDataset ds;
  ds.input_size = input_size;
  ds.channels = 3;
  ds.classes = view.classes;
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < ds.classes.size(); ++i) index[ds.classes[i]] = static_cast<int>(i);
  ds.x.resize(rows.size());
  ds.y.resize(rows.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    ds.x[i] = image_features(load_row_image(manifest, *rows[i]), input_size, grayscale);
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string label = view.label(*rows[i]);
    const auto it = index.find(label);
    if (it == index.end()) {
      throw ValidationError("row '" + rows[i]->path + "' has unexpected label '" + label + "'");
    }
    ds.y[i] = it->second;
  }
  return ds;
}

EvalResult evaluate_classifier(const ImageClassifier& model, const EvalSet& set) {
  return evaluate_impl(model, set, false, DistortionKind::Rain, 0.0, 0);
}

EvalResult evaluate_classifier_distorted(const ImageClassifier& model, const EvalSet& set,
                                         DistortionKind kind, double level, std::uint64_t seed) {
  return evaluate_impl(model, set, true, kind, level, seed);
}

std::vector<SweepRow> robustness_sweep(const ImageClassifier& model, const EvalSet& set,
                                       DistortionKind kind, const std::vector<double>& levels,
                                       std::uint64_t seed) {
  if (levels.empty()) throw std::invalid_argument("robustness_sweep: levels must be non-empty");
  std::vector<SweepRow> rows;
  rows.reserve(levels.size());
  for (double level : levels) {
    const auto r = evaluate_classifier_distorted(model, set, kind, level, seed);
    rows.push_back({level, r.accuracy_percent, static_cast<long>(set.paths.size())});
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "level,accuracy_percent,n_samples\n";
  for (const auto& row : rows) {
    out << row.level << ',' << row.accuracy_percent << ',' << row.n_samples << '\n';
  }
  return out.str();
}

TensorDataset tensor_dataset_from_manifest(const Manifest& manifest, CorpusTask task,
                                           const std::string& split, int input_size,
                                           bool grayscale) {
  const auto rows = rows_of_split(manifest, split);
  if (rows.empty()) {
    throw ValidationError("tensor_dataset_from_manifest: split '" + split + "' is empty");
  }
  TensorDataset ds;
  ds.input_size = input_size;
  ds.channels = 3;
  ds.classes = task_classes(task);
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < ds.classes.size(); ++i) {
    index[ds.classes[i]] = static_cast<int>(i);
  }
  ds.x.resize(rows.size());
  ds.y.resize(rows.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const Image img = load_row_image(manifest, *rows[i]);
    ds.x[i] = image_features(img, input_size, grayscale);
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string label = task_label(*rows[i], task);
    const auto it = index.find(label);
    if (it == index.end()) {
      throw ValidationError("tensor_dataset_from_manifest: unknown label '" + label + "'");
    }
    ds.y[i] = it->second;
  }
  return ds;
}

namespace {

/// Per-class train/val pool of manifest rows, in manifest order.
struct ClassPools {
  std::vector<std::vector<const ManifestRow*>> pool;  // train+val rows per class
  std::vector<std::string> classes;
};

ClassPools class_pools(const Manifest& manifest, CorpusTask task) {
  ClassPools cp;
  cp.classes = task_classes(task);
  cp.pool.resize(cp.classes.size());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < cp.classes.size(); ++i) index[cp.classes[i]] = i;
  for (const auto& row : manifest.rows) {
    if (row.split == "test") continue;
    cp.pool[index.at(task_label(row, task))].push_back(&row);
  }
  return cp;
}

TensorDataset tensors_for_rows(const Manifest& manifest, CorpusTask task,
                               const std::vector<const ManifestRow*>& rows, int input_size,
                               bool grayscale) {
  TensorDataset ds;
  ds.input_size = input_size;
  ds.channels = 3;
  ds.classes = task_classes(task);
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < ds.classes.size(); ++i) index[ds.classes[i]] = static_cast<int>(i);
  ds.x.resize(rows.size());
  ds.y.resize(rows.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    ds.x[i] = image_features(load_row_image(manifest, *rows[i]), input_size, grayscale);
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.y[i] = index.at(task_label(*rows[i], task));
  }
  return ds;
}

double train_and_score(const Manifest& manifest, CorpusTask task,
                       const std::vector<const ManifestRow*>& train_rows,
                       const std::vector<const ManifestRow*>& val_rows, const EvalSet& test,
                       const CnnConfig& cfg, bool grayscale) {
  const auto train = tensors_for_rows(manifest, task, train_rows, cfg.input_size, grayscale);
  const auto val = tensors_for_rows(manifest, task, val_rows, cfg.input_size, grayscale);
  auto fit = fit_convnet(train, val, cfg, grayscale);
  return evaluate_classifier(*fit.model, test).accuracy_percent;
}

}  // namespace

InsightTables insight_sweeps(const InsightConfig& cfg) {
  const Manifest manifest = load_manifest(cfg.manifest_path);
  const EvalSet test = eval_set_from_manifest(manifest, cfg.task, "test");
  const ClassPools pools = class_pools(manifest, cfg.task);

  InsightTables tables;

  // Insight 1: growing per-class training pools against the fixed test set.
  // Each pool is split 90/10 into train/validation; selection is
  // deterministic (manifest order).
  for (int pool_size : cfg.train_sizes) {
    std::vector<const ManifestRow*> train_rows, val_rows;
    for (const auto& class_pool : pools.pool) {
      if (static_cast<int>(class_pool.size()) < pool_size) {
        throw ValidationError(
            "insight_sweeps: train size " + std::to_string(pool_size) +
            " exceeds the available per-class pool (" + std::to_string(class_pool.size()) + ")");
      }
      const int n_val = std::max(1, pool_size / 10);
      const int n_train = pool_size - n_val;
      for (int i = 0; i < n_train; ++i) train_rows.push_back(class_pool[i]);
      for (int i = n_train; i < pool_size; ++i) val_rows.push_back(class_pool[i]);
    }
    CnnConfig run_cfg = cfg.cnn;
    run_cfg.seed = cfg.seed;
    const double acc = train_and_score(manifest, cfg.task, train_rows, val_rows, test, run_cfg,
                                       /*grayscale=*/false);
    tables.train_size_rows.push_back(
        {static_cast<double>(pool_size), acc, static_cast<double>(test.paths.size())});
  }

  // Insights 3 & 4: full train/val splits at each input size, RGB and
  // grayscale; wall time recorded for the RGB runs.
  std::vector<const ManifestRow*> full_train, full_val;
  for (const auto& class_pool : pools.pool) {
    for (const auto* row : class_pool) {
      (row->split == "train" ? full_train : full_val).push_back(row);
    }
  }
  for (int input_size : cfg.input_sizes) {
    CnnConfig run_cfg = cfg.cnn;
    run_cfg.input_size = input_size;
    run_cfg.seed = cfg.seed;

    const auto t0 = std::chrono::steady_clock::now();
    const double rgb_acc = train_and_score(manifest, cfg.task, full_train, full_val, test,
                                           run_cfg, /*grayscale=*/false);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double gray_acc = train_and_score(manifest, cfg.task, full_train, full_val, test,
                                            run_cfg, /*grayscale=*/true);

    tables.colormode_rows.push_back({static_cast<double>(input_size), gray_acc, rgb_acc});
    tables.input_size_rows.push_back({static_cast<double>(input_size), rgb_acc, wall});
  }
  return tables;
}

std::string insight_train_size_csv(const InsightTables& t) {
  std::ostringstream out;
  out << "train_size,accuracy_percent,n_samples\n";
  for (const auto& r : t.train_size_rows) out << r[0] << ',' << r[1] << ',' << r[2] << '\n';
  return out.str();
}

std::string insight_colormode_csv(const InsightTables& t) {
  std::ostringstream out;
  out << "input_size,grayscale_accuracy,rgb_accuracy\n";
  for (const auto& r : t.colormode_rows) out << r[0] << ',' << r[1] << ',' << r[2] << '\n';
  return out.str();
}

std::string insight_input_size_csv(const InsightTables& t) {
  std::ostringstream out;
  out << "input_size,accuracy_percent,wall_seconds\n";
  for (const auto& r : t.input_size_rows) out << r[0] << ',' << r[1] << ',' << r[2] << '\n';
  return out.str();
}

}  // namespace aviary
