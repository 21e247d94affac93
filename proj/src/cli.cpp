#include "aviary/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "aviary/corpus.hpp"
#include "aviary/distort.hpp"
#include "aviary/errors.hpp"
#include "aviary/experiments.hpp"
#include "aviary/learners/convnet.hpp"
#include "aviary/learners/forest.hpp"
#include "aviary/learners/grid_search.hpp"
#include "aviary/learners/knn.hpp"
#include "aviary/metrics.hpp"
#include "aviary/parallel.hpp"
#include "aviary/pipeline.hpp"
#include "aviary/png_io.hpp"

namespace fs = std::filesystem;

namespace aviary::cli {

namespace {

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

/// Wall-clock stamps stay in the run log so every other artifact is
/// byte-reproducible.
void append_run_log(const fs::path& out_dir, const std::string& line) {
  fs::create_directories(out_dir);
  std::ofstream log(out_dir / "run.log", std::ios::app);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%S", std::gmtime(&now));
  log << stamp << " " << line << '\n';
}

void echo_config(const fs::path& out_dir, const nlohmann::ordered_json& config) {
  write_text(out_dir / "run_config.json", config.dump(2) + "\n");
}

std::vector<double> parse_levels(const std::string& csv) {
  std::vector<double> levels;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) levels.push_back(std::stod(token));
  }
  return levels;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return j;
}

// ---------------------------------------------------------------- gen ----

int cmd_gen(const std::string& task_name, int per_class, std::uint64_t seed,
            const std::string& out_dir, const std::string& config_path,
            const std::string& sprite_png) {
  CorpusConfig cfg;
  if (!config_path.empty()) {
    cfg = corpus_config_from_json(load_json_file(config_path));
  } else {
    cfg = defaults_for(corpus_task_from_string(task_name));
  }
  if (!task_name.empty()) cfg.task = corpus_task_from_string(task_name);
  if (per_class > 0) cfg.per_class = per_class;
  if (!sprite_png.empty()) cfg.sprite_png = sprite_png;
  cfg.seed = seed;
  cfg.out_dir = out_dir;

  const auto manifest = generate_corpus(cfg);
  echo_config(out_dir, corpus_config_to_json(cfg));
  append_run_log(out_dir, "gen: " + std::to_string(manifest.rows.size()) + " images");
  std::cout << "wrote " << manifest.rows.size() << " images under " << out_dir << '\n';
  return 0;
}

// ------------------------------------------------------------- distort ----

int cmd_distort(const std::string& kind_name, const std::string& levels_csv,
                std::uint64_t seed, const std::string& in_path, const std::string& out_path) {
  const auto kind = distortion_from_string(kind_name);
  const auto levels = parse_levels(levels_csv);
  if (levels.empty()) throw ValidationError("distort: no levels given");
  const Image img = load_png(in_path);
  if (levels.size() == 1) {
    save_png(apply_distortion(img, kind, levels[0], seed), out_path);
    std::cout << "wrote " << out_path << '\n';
    return 0;
  }
  fs::create_directories(out_path);
  for (double level : levels) {
    std::ostringstream name;
    name << kind_name << "_" << level << ".png";
    save_png(apply_distortion(img, kind, level, seed), (fs::path(out_path) / name.str()).string());
  }
  std::cout << "wrote " << levels.size() << " images under " << out_path << '\n';
  return 0;
}

// --------------------------------------------------------------- train ----

int cmd_train(const std::string& manifest_path, const std::string& task_name,
              const std::string& learner, int input_size, bool grayscale, std::uint64_t seed,
              int max_epochs, int patience, int batch_size, double learning_rate,
              const std::string& model_out, const std::string& log_out, bool do_grid_search,
              int folds) {
  const auto manifest = load_manifest(manifest_path);

  nlohmann::ordered_json echo;
  echo["command"] = "train";
  echo["manifest"] = manifest_path;
  echo["task"] = task_name;
  echo["learner"] = learner;
  echo["input_size"] = input_size;
  echo["grayscale"] = grayscale;
  echo["seed"] = seed;

  if (learner == "cnn") {
    CnnConfig cfg;
    cfg.input_size = input_size;
    cfg.seed = seed;
    if (max_epochs > 0) cfg.max_epochs = max_epochs;
    if (patience > 0) cfg.patience = patience;
    if (batch_size > 0) cfg.batch_size = batch_size;
    if (learning_rate > 0) cfg.learning_rate = learning_rate;
    const auto train = tensor_dataset_for(manifest, task_name, "train", input_size, grayscale);
    const auto val = tensor_dataset_for(manifest, task_name, "val", input_size, grayscale);
    auto fit = fit_convnet(train, val, cfg, grayscale);
    save_model(*fit.model, model_out);
    if (!log_out.empty()) write_text(log_out, training_log_to_csv(fit.log));
    echo["best_epoch"] = fit.log.best_epoch;
    echo["epochs_run"] = fit.log.epochs_run;
    echo_config(fs::path(model_out).parent_path(), echo);
    std::cout << "trained cnn: best epoch " << fit.log.best_epoch << ", val AUC "
              << fit.log.rows[fit.log.best_epoch - 1].val_auc << ", saved " << model_out << '\n';
    return 0;
  }

  // benchmark learners consume train+val as one training split
  const auto train = tensor_dataset_for(manifest, task_name, "train", input_size, grayscale);
  const auto val = tensor_dataset_for(manifest, task_name, "val", input_size, grayscale);
  std::vector<std::vector<float>> x = train.x;
  std::vector<int> y = train.y;
  x.insert(x.end(), val.x.begin(), val.x.end());
  y.insert(y.end(), val.y.begin(), val.y.end());
  const int n_classes = static_cast<int>(train.classes.size());

  if (learner == "knn") {
    KnnConfig cfg;
    if (do_grid_search) {
      const auto result = grid_search_knn(x, y, n_classes, default_knn_grid(), folds, seed);
      cfg = result.best;
      echo["cv_score"] = result.best_score;
      std::cout << "grid search winner: k=" << cfg.k << " metric=" << to_string(cfg.metric)
                << " weighting=" << to_string(cfg.weighting) << " (cv acc " << result.best_score
                << ")\n";
    }
    const auto model = KnnModel::fit(x, y, n_classes, cfg);
    save_model(KnnImageClassifier(model, train.classes, input_size, grayscale), model_out);
  } else if (learner == "forest") {
    ForestConfig cfg;
    cfg.seed = seed;
    if (do_grid_search) {
      const auto result = grid_search_forest(x, y, n_classes, default_forest_grid(seed), folds, seed);
      cfg = result.best;
      echo["cv_score"] = result.best_score;
      std::cout << "grid search winner: trees=" << cfg.n_trees << " depth=" << cfg.max_depth
                << " (cv acc " << result.best_score << ")\n";
    }
    const auto model = ForestModel::fit(x, y, n_classes, cfg);
    save_model(ForestImageClassifier(model, train.classes, input_size, grayscale), model_out);
  } else {
    throw ValidationError("train: unknown learner '" + learner + "'");
  }
  echo_config(fs::path(model_out).parent_path(), echo);
  std::cout << "saved " << model_out << '\n';
  return 0;
}

// ---------------------------------------------------------------- eval ----

int cmd_eval(const std::string& model_path, const std::string& manifest_path,
             const std::string& task_name, const std::string& split,
             const std::string& report_json, const std::string& report_csv) {
  const auto model = load_model(model_path);
  const auto manifest = load_manifest(manifest_path);
  const auto set = eval_set_for(manifest, task_name, split);
  const auto result = evaluate_classifier(*model, set);
  if (!report_json.empty()) write_text(report_json, report_to_json(result.report) + "\n");
  if (!report_csv.empty()) write_text(report_csv, report_to_csv(result.report));
  std::cout << "accuracy " << result.accuracy_percent << "% over " << set.paths.size()
            << " samples\n";
  return 0;
}

// -------------------------------------------------------- cascade-eval ----

std::vector<CascadeSample> cascade_samples_from_manifest(const Manifest& manifest,
                                                         const std::string& split) {
  std::vector<CascadeSample> samples;
  for (const auto& row : manifest.rows) {
    if (!split.empty() && row.split != split) continue;
    if (row.coarse.empty()) {
      throw ValidationError("cascade-eval: row '" + row.path + "' has no coarse label");
    }
    CascadeSample s;
    s.path = manifest.root_dir.empty() ? row.path : manifest.root_dir + "/" + row.path;
    s.coarse = row.coarse;
    s.size_label = row.size_label;
    s.species = row.species;
    samples.push_back(std::move(s));
  }
  return samples;
}

int cmd_cascade_eval(const std::string& config_path) {
  const auto config = load_json_file(config_path);
  const auto manifest = load_manifest(config.at("manifest").get<std::string>());
  const std::string split = config.value("split", std::string("test"));
  auto samples = cascade_samples_from_manifest(manifest, split);
  const std::string out_dir = config.at("out_dir").get<std::string>();

  CascadeModel model;
  SampleImageProvider provider;
  if (config.contains("stubs")) {
    const auto& stubs = config.at("stubs");
    std::map<std::string, std::vector<std::string>> species_sets;
    for (const auto& size : {"small", "medium", "large"}) {
      species_sets[size] = cascade_species_of_group(size);
    }
    model = make_corruption_stub_cascade(samples, species_sets,
                                         stubs.value("stage1_flip_every", 0),
                                         stubs.value("stage2_misroute_every", 0),
                                         stubs.value("stage3_corrupt_every", 0));
    provider = [](const CascadeSample&, std::size_t) { return Image(1, 1, 1); };
  } else {
    model.stage1 = load_model(config.at("stage1").get<std::string>());
    model.stage2 = load_model(config.at("stage2").get<std::string>());
    for (const auto& [size, path] : config.at("stage3").items()) {
      model.stage3[size] = load_model(path.get<std::string>());
      model.species_sets[size] = model.stage3[size]->classes();
    }
    provider = [](const CascadeSample& s, std::size_t) { return load_png(s.path); };
  }

  auto report = evaluate_cascade(model, samples, provider);
  if (config.value("priors", std::string("measured")) == "uniform") {
    std::cout << "analytic accuracy (uniform priors): "
              << report.analytic_accuracy_uniform_priors << '\n';
  }
  write_text(fs::path(out_dir) / "pipeline_report.json", pipeline_report_to_json(report) + "\n");
  write_text(fs::path(out_dir) / "routing_traces.jsonl",
             routing_traces_to_jsonl(report, samples));
  nlohmann::ordered_json echo;
  echo["command"] = "cascade-eval";
  echo["config"] = config;
  echo_config(out_dir, echo);
  append_run_log(out_dir, "cascade-eval over " + std::to_string(samples.size()) + " samples");
  std::cout << "end-to-end bird accuracy " << report.end_to_end_accuracy_percent
            << "%, analytic " << 100.0 * report.analytic_accuracy << "%\n";
  return 0;
}

// --------------------------------------------------------------- sweep ----

int cmd_sweep(const std::string& kind_name, const std::string& levels_csv,
              const std::string& model_path, const std::string& manifest_path,
              const std::string& task_name, const std::string& split, std::uint64_t seed,
              const std::string& out_csv, const std::string& tag) {
  const auto kind = distortion_from_string(kind_name);
  const auto levels = levels_csv.empty() ? default_sweep_levels(kind) : parse_levels(levels_csv);
  const auto model = load_model(model_path);
  const auto manifest = load_manifest(manifest_path);
  const auto set = eval_set_for(manifest, task_name, split);
  const auto rows = robustness_sweep(*model, set, kind, levels, seed);
  write_text(out_csv, sweep_to_csv(rows));

  nlohmann::ordered_json side;
  side["kind"] = kind_name;
  side["tag"] = tag;
  side["model"] = model_path;
  side["manifest"] = manifest_path;
  side["seed"] = seed;
  write_text(fs::path(out_csv).string() + ".meta.json", side.dump(2) + "\n");
  for (const auto& row : rows) {
    std::cout << kind_name << " " << row.level << " -> " << row.accuracy_percent << "%\n";
  }
  return 0;
}

// ------------------------------------------------------------ insights ----

int cmd_insights(const std::string& config_path) {
  const auto j = load_json_file(config_path);
  InsightConfig cfg;
  cfg.manifest_path = j.at("manifest").get<std::string>();
  cfg.task = corpus_task_from_string(j.value("task", std::string("formations")));
  cfg.train_sizes = j.value("train_sizes", std::vector<int>{});
  cfg.input_sizes = j.value("input_sizes", std::vector<int>{});
  cfg.seed = j.value("seed", 0ULL);
  cfg.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("cnn")) {
    const auto& c = j.at("cnn");
    cfg.cnn.input_size = c.value("input_size", cfg.cnn.input_size);
    cfg.cnn.max_epochs = c.value("max_epochs", cfg.cnn.max_epochs);
    cfg.cnn.patience = c.value("patience", cfg.cnn.patience);
    cfg.cnn.batch_size = c.value("batch_size", cfg.cnn.batch_size);
    cfg.cnn.learning_rate = c.value("learning_rate", cfg.cnn.learning_rate);
    cfg.cnn.fc_neurons = c.value("fc_neurons", cfg.cnn.fc_neurons);
  }
  const auto tables = insight_sweeps(cfg);
  if (!tables.train_size_rows.empty()) {
    write_text(fs::path(cfg.out_dir) / "insight_train_size.csv", insight_train_size_csv(tables));
  }
  if (!tables.colormode_rows.empty()) {
    write_text(fs::path(cfg.out_dir) / "insight_colormode.csv", insight_colormode_csv(tables));
    write_text(fs::path(cfg.out_dir) / "insight_input_size.csv", insight_input_size_csv(tables));
  }
  nlohmann::ordered_json echo;
  echo["command"] = "insights";
  echo["config"] = j;
  echo_config(cfg.out_dir, echo);
  append_run_log(cfg.out_dir, "insights complete");
  std::cout << "insight tables written under " << cfg.out_dir << '\n';
  return 0;
}

// -------------------------------------------------------------- report ----

int cmd_report(const std::string& dir) {
  // Collect sweep CSVs (with sidecar meta) into one pivoted robustness
  // summary, and list any pipeline reports found.
  struct SweepFile {
    std::string kind, tag;
    std::vector<SweepRow> rows;
  };
  std::vector<SweepFile> sweeps;
  std::vector<std::string> pipeline_reports;
  std::vector<std::string> problems;

  if (!fs::exists(dir)) {
    std::cerr << "report: directory '" << dir << "' does not exist\n";
    return 1;
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto path = entry.path();
    if (path.filename() == "pipeline_report.json") {
      pipeline_reports.push_back(path.string());
      continue;
    }
    if (path.extension() != ".csv") continue;
    const fs::path meta_path = path.string() + ".meta.json";
    if (!fs::exists(meta_path)) continue;
    try {
      const auto meta = load_json_file(meta_path.string());
      SweepFile sf;
      sf.kind = meta.value("kind", std::string("?"));
      sf.tag = meta.value("tag", std::string("accuracy"));
      std::ifstream in(path);
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        SweepRow row;
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        row.level = std::stod(field);
        std::getline(ss, field, ',');
        row.accuracy_percent = std::stod(field);
        std::getline(ss, field, ',');
        row.n_samples = std::stol(field);
        sf.rows.push_back(row);
      }
      sweeps.push_back(std::move(sf));
    } catch (const std::exception& e) {
      problems.push_back(path.string() + ": " + e.what());
    }
  }

  // pivot: (kind, level) x tag
  std::vector<std::string> tags;
  for (const auto& sf : sweeps) {
    if (std::find(tags.begin(), tags.end(), sf.tag) == tags.end()) tags.push_back(sf.tag);
  }
  std::sort(tags.begin(), tags.end());
  std::map<std::pair<std::string, double>, std::map<std::string, double>> cells;
  for (const auto& sf : sweeps) {
    for (const auto& row : sf.rows) cells[{sf.kind, row.level}][sf.tag] = row.accuracy_percent;
  }
  std::ostringstream out;
  out << "kind,level";
  for (const auto& t : tags) out << ',' << t << "_acc";
  out << '\n';
  for (const auto& [key, by_tag] : cells) {
    out << key.first << ',' << key.second;
    for (const auto& t : tags) {
      out << ',';
      const auto it = by_tag.find(t);
      if (it != by_tag.end()) out << it->second;
    }
    out << '\n';
  }
  write_text(fs::path(dir) / "summary_robustness.csv", out.str());

  nlohmann::ordered_json summary;
  summary["sweeps_found"] = sweeps.size();
  summary["pipeline_reports"] = pipeline_reports;
  write_text(fs::path(dir) / "summary.json", summary.dump(2) + "\n");

  if (sweeps.empty() && pipeline_reports.empty()) {
    std::cerr << "report: no run outputs found under '" << dir << "'\n";
  }
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "report: skipped " << p << '\n';
    return 1;
  }
  std::cout << "summary written under " << dir << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"aviary: synthetic bird-strike classification toolkit"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "cap worker threads (env AVIARY_THREADS as fallback)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  std::string gen_task = "formations", gen_out = "corpus", gen_config, gen_sprite;
  int gen_per_class = 0;
  std::uint64_t gen_seed = 0;
  bool gen_seed_set = false;
  gen->add_option("--task", gen_task,
                  "formations|alignments|flock_size|cascade|unified");
  gen->add_option("--per-class", gen_per_class, "images per class");
  gen->add_option("--seed", gen_seed, "master seed (required)")->required();
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--config", gen_config, "corpus config JSON (overrides defaults)");
  gen->add_option("--sprite", gen_sprite, "RGBA sprite PNG replacing the built-in bird");
  gen->callback([&] { gen_seed_set = true; });

  // distort
  auto* distort = app.add_subcommand("distort", "apply a distortion to a PNG");
  std::string d_kind, d_levels = "0", d_in, d_out;
  std::uint64_t d_seed = 0;
  distort->add_option("--kind", d_kind, "rain|snow|noise|darkness")->required();
  distort->add_option("--levels", d_levels, "comma list; one level writes one file")->required();
  distort->add_option("--seed", d_seed, "seed")->required();
  distort->add_option("--in", d_in, "input PNG")->required();
  distort->add_option("--out", d_out, "output PNG (or directory for several levels)")->required();

  // train
  auto* train = app.add_subcommand("train", "train a classifier on a corpus");
  std::string t_manifest, t_task = "formations", t_learner = "cnn", t_model_out = "model.json",
              t_log_out;
  int t_input = 64, t_epochs = 0, t_patience = 0, t_batch = 0, t_folds = 3;
  double t_lr = 0.0;
  bool t_gray = false, t_grid = false;
  std::uint64_t t_seed = 0;
  train->add_option("--corpus", t_manifest, "manifest.json path")->required();
  train->add_option("--task", t_task, "label field to learn");
  train->add_option("--learner", t_learner, "cnn|knn|forest");
  train->add_option("--input-size", t_input, "square input resolution");
  train->add_flag("--grayscale", t_gray, "train on triplicated luminance");
  train->add_option("--seed", t_seed, "seed")->required();
  train->add_option("--max-epochs", t_epochs, "cnn epoch cap");
  train->add_option("--patience", t_patience, "cnn early-stopping patience");
  train->add_option("--batch-size", t_batch, "cnn batch size");
  train->add_option("--learning-rate", t_lr, "cnn Adam learning rate");
  train->add_option("--model-out", t_model_out, "where to save the model");
  train->add_option("--log-out", t_log_out, "training log CSV (cnn)");
  train->add_flag("--grid-search", t_grid, "tune knn/forest hyperparameters first");
  train->add_option("--folds", t_folds, "grid-search CV folds");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a saved model");
  std::string e_model, e_manifest, e_task = "formations", e_split = "test", e_json, e_csv;
  eval->add_option("--model", e_model)->required();
  eval->add_option("--corpus", e_manifest)->required();
  eval->add_option("--task", e_task);
  eval->add_option("--split", e_split);
  eval->add_option("--report", e_json, "class report JSON");
  eval->add_option("--csv", e_csv, "class report CSV");

  // cascade-eval
  auto* casc = app.add_subcommand("cascade-eval", "run the three-stage cascade");
  std::string c_config;
  casc->add_option("--config", c_config, "cascade config JSON")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "robustness sweep over distortion levels");
  std::string s_kind, s_levels, s_model, s_manifest, s_task = "formations", s_split = "test",
              s_out = "sweep.csv", s_tag = "accuracy";
  std::uint64_t s_seed = 0;
  sweep->add_option("--kind", s_kind, "rain|snow|noise|darkness")->required();
  sweep->add_option("--levels", s_levels, "comma list (default: the standard grid)");
  sweep->add_option("--model", s_model)->required();
  sweep->add_option("--corpus", s_manifest)->required();
  sweep->add_option("--task", s_task);
  sweep->add_option("--split", s_split);
  sweep->add_option("--seed", s_seed)->required();
  sweep->add_option("--out", s_out, "output CSV");
  sweep->add_option("--tag", s_tag, "column tag used by `report`");

  // insights
  auto* insights = app.add_subcommand("insights", "training-size / colormode / input-size sweeps");
  std::string i_config;
  insights->add_option("--config", i_config)->required();

  // report
  auto* report = app.add_subcommand("report", "consolidate run outputs in a directory");
  std::string r_dir;
  report->add_option("--dir", r_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (threads > 0) set_thread_count(threads);

  try {
    if (*gen) return cmd_gen(gen_task, gen_per_class, gen_seed, gen_out, gen_config, gen_sprite);
    if (*distort) return cmd_distort(d_kind, d_levels, d_seed, d_in, d_out);
    if (*train) {
      return cmd_train(t_manifest, t_task, t_learner, t_input, t_gray, t_seed, t_epochs,
                       t_patience, t_batch, t_lr, t_model_out, t_log_out, t_grid, t_folds);
    }
    if (*eval) return cmd_eval(e_model, e_manifest, e_task, e_split, e_json, e_csv);
    if (*casc) return cmd_cascade_eval(c_config);
    if (*sweep) {
      return cmd_sweep(s_kind, s_levels, s_model, s_manifest, s_task, s_split, s_seed, s_out,
                       s_tag);
    }
    if (*insights) return cmd_insights(i_config);
    if (*report) return cmd_report(r_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace aviary::cli
