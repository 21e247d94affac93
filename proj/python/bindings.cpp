#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aviary/corpus.hpp"
#include "aviary/distort.hpp"
#include "aviary/experiments.hpp"
#include "aviary/flocksynth.hpp"
#include "aviary/image.hpp"
#include "aviary/learners/convnet.hpp"
#include "aviary/learners/forest.hpp"
#include "aviary/learners/grid_search.hpp"
#include "aviary/learners/knn.hpp"
#include "aviary/metrics.hpp"
#include "aviary/pipeline.hpp"
#include "aviary/png_io.hpp"
#include "aviary/taxonomy.hpp"

namespace py = pybind11;
using namespace aviary;

namespace {

// Image <-> numpy (H, W, C) float64 in [0, 1]
Image image_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3) throw std::invalid_argument("expected an (H, W, C) array");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  const int c = static_cast<int>(a.shape(2));
  Image img(h, w, c);
  std::memcpy(img.data.data(), a.data(), img.data.size() * sizeof(double));
  return img;
}

py::array_t<double> image_to_array(const Image& img) {
  py::array_t<double> a({img.height, img.width, img.channels});
  std::memcpy(a.mutable_data(), img.data.data(), img.data.size() * sizeof(double));
  return a;
}

std::vector<std::vector<float>> features_from_array(
    const py::array_t<float, py::array::c_style | py::array::forcecast>& x) {
  if (x.ndim() != 2) throw std::invalid_argument("expected an (N, D) feature array");
  const auto n = static_cast<std::size_t>(x.shape(0));
  const auto d = static_cast<std::size_t>(x.shape(1));
  std::vector<std::vector<float>> out(n, std::vector<float>(d));
  for (std::size_t i = 0; i < n; ++i) {
    std::memcpy(out[i].data(), x.data() + i * d, d * sizeof(float));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_aviary, m) {
  m.doc() = "synthetic bird-strike classification toolkit (C++ core)";

  // ---- imaging -----------------------------------------------------------
  m.def(
      "resize",
      [](const py::array_t<double>& img, int h, int w) {
        return image_to_array(aviary::resize(image_from_array(img), h, w));
      },
      py::arg("image"), py::arg("height"), py::arg("width"),
      "Bilinear resize of an (H, W, C) array of unit-interval intensities.");
  m.def(
      "to_grayscale3",
      [](const py::array_t<double>& img) {
        return image_to_array(aviary::to_grayscale3(image_from_array(img)));
      },
      py::arg("image"), "BT.601 luminance replicated over three channels.");
  m.def(
      "save_png",
      [](const py::array_t<double>& img, const std::string& path) {
        aviary::save_png(image_from_array(img), path);
      },
      py::arg("image"), py::arg("path"));
  m.def(
      "load_png",
      [](const std::string& path) { return image_to_array(aviary::load_png(path)); },
      py::arg("path"));

  // ---- distortions -------------------------------------------------------
  m.def(
      "apply_rain",
      [](const py::array_t<double>& img, double level, std::uint64_t seed) {
        return image_to_array(aviary::apply_rain(image_from_array(img), level, seed));
      },
      py::arg("image"), py::arg("level"), py::arg("seed"));
  m.def(
      "apply_snow",
      [](const py::array_t<double>& img, double level, std::uint64_t seed) {
        return image_to_array(aviary::apply_snow(image_from_array(img), level, seed));
      },
      py::arg("image"), py::arg("level"), py::arg("seed"));
  m.def(
      "apply_noise",
      [](const py::array_t<double>& img, double sigma, std::uint64_t seed) {
        return image_to_array(aviary::apply_noise(image_from_array(img), sigma, seed));
      },
      py::arg("image"), py::arg("sigma"), py::arg("seed"));
  m.def(
      "apply_darkness",
      [](const py::array_t<double>& img, double factor) {
        return image_to_array(aviary::apply_darkness(image_from_array(img), factor));
      },
      py::arg("image"), py::arg("factor"));

  // ---- taxonomy ----------------------------------------------------------
  m.def(
      "size_class_of",
      [](double weight_min, double weight_max) {
        return std::string(to_string(size_class_of(weight_min, weight_max)));
      },
      py::arg("weight_min_g"), py::arg("weight_max_g"),
      "Majority-overlap size class ('small'/'medium'/'large') of a weight range.");
  m.def(
      "load_species_table",
      [](const std::string& path) {
        py::list out;
        for (const auto& rec : aviary::load_species_table(path)) {
          py::dict d;
          d["name"] = rec.name;
          d["weight_min_g"] = rec.weight_min_g;
          d["weight_max_g"] = rec.weight_max_g;
          d["strikes"] = rec.strike_count;
          d["size_class"] = std::string(to_string(rec.assigned_class));
          d["merged_into"] = rec.merged_into;
          d["excluded"] = rec.excluded;
          out.append(d);
        }
        return out;
      },
      py::arg("path"));

  // ---- flock synthesis ---------------------------------------------------
  m.def("formation_names", &formation_names);
  m.def("alignment_names", &alignment_names);
  m.def("size_bin_names", &size_bin_names);
  m.def(
      "bin_flock_size",
      [](int count) { return std::string(to_string(bin_flock_size(count))); },
      py::arg("count"));
  m.def(
      "place_formation",
      [](const std::string& kind, int count, double spacing) {
        const auto pts = place_formation(formation_from_string(kind), count, spacing);
        py::array_t<double> a({static_cast<py::ssize_t>(pts.size()), py::ssize_t(2)});
        auto* data = a.mutable_data();
        for (std::size_t i = 0; i < pts.size(); ++i) {
          data[2 * i] = pts[i].x;
          data[2 * i + 1] = pts[i].y;
        }
        return a;
      },
      py::arg("kind"), py::arg("count"), py::arg("spacing"),
      "Formation layout as an (N, 2) array, travel axis +x, centered.");
  m.def(
      "render_bottom_view",
      [](const std::string& kind, int count, double spacing, double jitter, double heading_deg,
         double sprite_scale, std::uint64_t seed, int canvas) {
        FlockSpec spec;
        spec.kind = formation_from_string(kind);
        spec.count = count;
        spec.spacing = spacing;
        spec.jitter = jitter;
        spec.heading_deg = heading_deg;
        spec.sprite_scale = sprite_scale;
        spec.seed = seed;
        const auto sprite = make_bottom_view_sprite();
        return image_to_array(render_bottom_view(spec, sprite, canvas, canvas).image);
      },
      py::arg("kind"), py::arg("count"), py::arg("spacing"), py::arg("jitter") = 0.0,
      py::arg("heading_deg") = 0.0, py::arg("sprite_scale") = 1.0, py::arg("seed") = 0,
      py::arg("canvas") = 384);
  m.def(
      "render_side_view",
      [](const std::string& alignment, int count, double spacing, double slope, double jitter,
         std::uint64_t seed, int canvas) {
        const auto sprite = make_side_view_sprite();
        return image_to_array(render_side_view(alignment_from_string(alignment), count, spacing,
                                               slope, sprite, canvas, canvas, jitter, seed)
                                  .image);
      },
      py::arg("alignment"), py::arg("count"), py::arg("spacing"), py::arg("slope"),
      py::arg("jitter") = 0.0, py::arg("seed") = 0, py::arg("canvas") = 384);
  m.def(
      "generate_corpus",
      [](const std::string& task, int per_class, std::uint64_t seed, const std::string& out_dir) {
        CorpusConfig cfg = defaults_for(corpus_task_from_string(task));
        cfg.per_class = per_class;
        cfg.seed = seed;
        cfg.out_dir = out_dir;
        const auto manifest = generate_corpus(cfg);
        return manifest.rows.size();
      },
      py::arg("task"), py::arg("per_class"), py::arg("seed"), py::arg("out_dir"),
      "Writes PNGs plus manifest.json; returns the number of rows.");

  // ---- metrics -----------------------------------------------------------
  m.def(
      "class_report",
      [](const std::vector<std::string>& truth, const std::vector<std::string>& pred,
         const std::vector<std::string>& classes) {
        const auto rep = class_report(confusion(truth, pred, classes));
        py::dict d;
        d["accuracy_percent"] = rep.accuracy_percent;
        py::list per_class;
        for (std::size_t c = 0; c < rep.classes.size(); ++c) {
          py::dict e;
          e["name"] = rep.classes[c];
          e["precision"] = rep.precision[c];
          e["recall"] = rep.recall[c];
          e["f1"] = rep.f1[c];
          e["support"] = rep.support[c];
          per_class.append(e);
        }
        d["classes"] = per_class;
        return d;
      },
      py::arg("truth"), py::arg("pred"), py::arg("classes"));
  m.def(
      "macro_ovr_auc",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores,
         const std::vector<int>& truth) {
        if (scores.ndim() != 2) throw std::invalid_argument("scores must be (N, K)");
        std::vector<std::vector<double>> s(static_cast<std::size_t>(scores.shape(0)),
                                           std::vector<double>(scores.shape(1)));
        for (py::ssize_t i = 0; i < scores.shape(0); ++i) {
          std::memcpy(s[i].data(), scores.data() + i * scores.shape(1),
                      scores.shape(1) * sizeof(double));
        }
        return macro_ovr_auc(s, truth);
      },
      py::arg("scores"), py::arg("truth"));

  // ---- pipeline ----------------------------------------------------------
  m.def(
      "analytic_cca_accuracy",
      [](double r1_bird, const std::map<std::string, double>& priors,
         const std::map<std::string, double>& r2, const std::map<std::string, double>& a3) {
        StageStats s;
        s.r1_bird = r1_bird;
        s.priors = priors;
        s.r2 = r2;
        s.a3 = a3;
        return analytic_cca_accuracy(s);
      },
      py::arg("r1_bird"), py::arg("priors"), py::arg("r2"), py::arg("a3"),
      "End-to-end cascade accuracy: r1 * sum_i priors[i] * r2[i] * a3[i].");

  // ---- learners ----------------------------------------------------------
  py::class_<KnnModel>(m, "KnnModel")
      .def_static(
          "fit",
          [](const py::array_t<float>& x, const std::vector<int>& y, int n_classes, int k,
             const std::string& metric, const std::string& weighting) {
            KnnConfig cfg{k, knn_metric_from_string(metric),
                          knn_weighting_from_string(weighting)};
            return KnnModel::fit(features_from_array(x), y, n_classes, cfg);
          },
          py::arg("x"), py::arg("y"), py::arg("n_classes"), py::arg("k") = 1,
          py::arg("metric") = "euclidean", py::arg("weighting") = "uniform")
      .def("predict_scores",
           [](const KnnModel& m_, const std::vector<float>& q) { return m_.predict_scores(q); })
      .def("predict_label",
           [](const KnnModel& m_, const std::vector<float>& q) { return m_.predict_label(q); });

  py::class_<ForestModel>(m, "ForestModel")
      .def_static(
          "fit",
          [](const py::array_t<float>& x, const std::vector<int>& y, int n_classes, int n_trees,
             int max_depth, int min_split, int min_leaf, bool bootstrap, int max_features,
             std::uint64_t seed) {
            ForestConfig cfg;
            cfg.n_trees = n_trees;
            cfg.max_depth = max_depth;
            cfg.min_split = min_split;
            cfg.min_leaf = min_leaf;
            cfg.bootstrap = bootstrap;
            cfg.max_features = max_features;
            cfg.seed = seed;
            return ForestModel::fit(features_from_array(x), y, n_classes, cfg);
          },
          py::arg("x"), py::arg("y"), py::arg("n_classes"), py::arg("n_trees") = 100,
          py::arg("max_depth") = -1, py::arg("min_split") = 2, py::arg("min_leaf") = 1,
          py::arg("bootstrap") = true, py::arg("max_features") = -1, py::arg("seed") = 0)
      .def("predict_scores", [](const ForestModel& m_, const std::vector<float>& q) {
        return m_.predict_scores(q);
      })
      .def("predict_label",
           [](const ForestModel& m_, const std::vector<float>& q) { return m_.predict_label(q); })
      .def("tree_predictions", [](const ForestModel& m_, const std::vector<float>& q) {
        return m_.tree_predictions(q);
      });

  m.def(
      "fit_convnet",
      [](const py::array_t<float>& train_x, const std::vector<int>& train_y,
         const py::array_t<float>& val_x, const std::vector<int>& val_y,
         const std::vector<std::string>& classes, int input_size, int channels, int fc_neurons,
         int batch_size, int max_epochs, int patience, double learning_rate, std::uint64_t seed,
         const std::string& model_out) {
        TensorDataset train, val;
        train.input_size = val.input_size = input_size;
        train.channels = val.channels = channels;
        train.classes = val.classes = classes;
        train.x = features_from_array(train_x);
        train.y = train_y;
        val.x = features_from_array(val_x);
        val.y = val_y;
        CnnConfig cfg;
        cfg.input_size = input_size;
        cfg.channels = channels;
        cfg.fc_neurons = fc_neurons;
        cfg.batch_size = batch_size;
        cfg.max_epochs = max_epochs;
        cfg.patience = patience;
        cfg.learning_rate = learning_rate;
        cfg.seed = seed;
        if (input_size <= 16) cfg.blocks = {{8, 3, 2}, {16, 3, 2}};
        auto fit = fit_convnet(train, val, cfg);
        if (!model_out.empty()) save_model(*fit.model, model_out);
        py::dict d;
        d["best_epoch"] = fit.log.best_epoch;
        d["epochs_run"] = fit.log.epochs_run;
        d["val_auc"] = fit.log.rows[fit.log.best_epoch - 1].val_auc;
        d["val_accuracy"] = fit.log.rows[fit.log.best_epoch - 1].val_accuracy;
        return d;
      },
      py::arg("train_x"), py::arg("train_y"), py::arg("val_x"), py::arg("val_y"),
      py::arg("classes"), py::arg("input_size") = 32, py::arg("channels") = 3,
      py::arg("fc_neurons") = 64, py::arg("batch_size") = 32, py::arg("max_epochs") = 20,
      py::arg("patience") = 20, py::arg("learning_rate") = 1e-3, py::arg("seed") = 0,
      py::arg("model_out") = "",
      "Trains the compact convnet (CHW float rows) and reports the best epoch.");

  m.def(
      "predict_with_model",
      [](const std::string& model_path, const py::array_t<double>& img) {
        const auto model = load_model(model_path);
        const auto pred = model->predict(image_from_array(img));
        py::dict d;
        d["label"] = model->classes()[pred.label];
        d["scores"] = pred.scores;
        return d;
      },
      py::arg("model_path"), py::arg("image"),
      "Loads a saved model container and classifies one image.");
}
