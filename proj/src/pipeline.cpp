#include "aviary/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "aviary/errors.hpp"
#include "aviary/parallel.hpp"

namespace aviary {

void CascadeModel::validate() const {
  if (!stage1 || !stage2) throw ValidationError("cascade: stage1 and stage2 are required");
  std::set<std::string> seen;
  for (const auto& [size, species] : species_sets) {
    for (const auto& s : species) {
      if (!seen.insert(s).second) {
        throw ValidationError("cascade: species '" + s + "' appears in two size sets");
      }
    }
  }
  for (const auto& size : stage2->classes()) {
    auto it = stage3.find(size);
    if (it == stage3.end() || !it->second) {
      throw ValidationError("cascade: no stage-3 classifier for size '" + size + "'");
    }
    if (!species_sets.count(size)) {
      throw ValidationError("cascade: no species set for size '" + size + "'");
    }
  }
}

double analytic_cca_accuracy(const StageStats& stats) {
  auto check_ratio = [](double v, const char* what) {
    if (v < 0.0 || v > 1.0) {
      throw std::invalid_argument(std::string("analytic_cca_accuracy: ") + what +
                                  " outside [0, 1]");
    }
  };
  check_ratio(stats.r1_bird, "r1_bird");
  double prior_sum = 0.0;
  for (const auto& [size, p] : stats.priors) {
    check_ratio(p, "prior");
    prior_sum += p;
  }
  if (std::fabs(prior_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("analytic_cca_accuracy: priors must sum to 1");
  }
  double acc = 0.0;
  for (const auto& [size, p] : stats.priors) {
    const auto r2 = stats.r2.find(size);
    const auto a3 = stats.a3.find(size);
    if (r2 == stats.r2.end() || a3 == stats.a3.end()) {
      throw std::invalid_argument("analytic_cca_accuracy: missing r2/a3 entry for '" + size + "'");
    }
    check_ratio(r2->second, "r2");
    check_ratio(a3->second, "a3");
    acc += p * r2->second * a3->second;
  }
  return stats.r1_bird * acc;
}

namespace {

CcaPrediction cca_predict_impl(const CascadeModel& model, const Image& img,
                               std::optional<std::size_t> row) {
  auto predict = [&](const ImageClassifier& m) {
    return row ? m.predict_at(img, *row) : m.predict(img);
  };
  CcaPrediction out;
  const auto p1 = predict(*model.stage1);
  out.trace.stage1 = model.stage1->classes()[p1.label];
  if (out.trace.stage1 == "aircraft") {
    out.label = "Aircraft";
    return out;
  }
  const auto p2 = predict(*model.stage2);
  out.trace.size = model.stage2->classes()[p2.label];
  const auto it = model.stage3.find(out.trace.size);
  if (it == model.stage3.end() || !it->second) {
    throw ValidationError("cca_predict: no stage-3 classifier for size '" + out.trace.size + "'");
  }
  const auto p3 = predict(*it->second);
  out.trace.species = it->second->classes()[p3.label];
  out.label = out.trace.species;
  return out;
}

}  // namespace

CcaPrediction cca_predict(const CascadeModel& model, const Image& img) {
  return cca_predict_impl(model, img, std::nullopt);
}

CcaPrediction cca_predict_at(const CascadeModel& model, const Image& img, std::size_t row) {
  return cca_predict_impl(model, img, row);
}

std::string uca_predict(const UnifiedModel& model, const Image& img) {
  const auto p = model.model->predict(img);
  return model.model->classes()[p.label];
}

PipelineReport evaluate_cascade(const CascadeModel& model,
                                const std::vector<CascadeSample>& corpus,
                                const SampleImageProvider& provider) {
  model.validate();
  if (corpus.empty()) throw ValidationError("evaluate_cascade: empty corpus");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus[i];
    if (s.coarse != "bird" && s.coarse != "aircraft") {
      throw ValidationError("evaluate_cascade: sample " + std::to_string(i) +
                            " has coarse label '" + s.coarse + "'");
    }
    if (s.coarse == "bird" && (s.size_label.empty() || s.species.empty())) {
      throw ValidationError("evaluate_cascade: bird sample " + std::to_string(i) +
                            " is missing stage truth");
    }
  }

  PipelineReport report;
  report.traces.resize(corpus.size());
  report.final_labels.resize(corpus.size());

  // predictions run in parallel; the stat tally below is sequential
  parallel_for(corpus.size(), [&](std::size_t i) {
    const Image img = provider(corpus[i], i);
    auto pred = cca_predict_at(model, img, i);
    report.traces[i] = std::move(pred.trace);
    report.final_labels[i] = std::move(pred.label);
  });

  std::map<std::string, long> birds_by_size;        // truth size -> count
  std::map<std::string, long> s1_correct_by_size;   // stage1 kept the bird
  std::map<std::string, long> routed_by_size;       // ... and stage2 was right
  std::map<std::string, long> species_ok_by_size;   // ... and stage3 was right
  long birds = 0, aircraft = 0, aircraft_correct = 0, bird_correct = 0;

  // conditional (truth, pred) lists behind the per-stage class reports
  std::vector<std::string> s1_truth, s1_pred, s2_truth, s2_pred;
  std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> s3_pairs;

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& sample = corpus[i];
    const auto& pred_label = report.final_labels[i];
    const RoutingTrace& trace = report.traces[i];
    s1_truth.push_back(sample.coarse);
    s1_pred.push_back(trace.stage1);

    if (sample.coarse == "aircraft") {
      ++aircraft;
      if (pred_label == "Aircraft") ++aircraft_correct;
      continue;
    }
    ++birds;
    ++birds_by_size[sample.size_label];
    if (trace.stage1 != "bird") continue;
    ++s1_correct_by_size[sample.size_label];
    s2_truth.push_back(sample.size_label);
    s2_pred.push_back(trace.size);
    if (trace.size != sample.size_label) continue;
    ++routed_by_size[sample.size_label];
    s3_pairs[sample.size_label].first.push_back(sample.species);
    s3_pairs[sample.size_label].second.push_back(trace.species);
    if (trace.species == sample.species) {
      ++species_ok_by_size[sample.size_label];
      ++bird_correct;
    }
  }
  if (birds == 0) throw ValidationError("evaluate_cascade: corpus has no bird samples");

  report.stage1_report =
      class_report(confusion(s1_truth, s1_pred, model.stage1->classes()));
  if (!s2_truth.empty()) {
    report.stage2_report = class_report(confusion(s2_truth, s2_pred, model.stage2->classes()));
  }
  for (const auto& [size, pairs] : s3_pairs) {
    report.stage3_reports[size] =
        class_report(confusion(pairs.first, pairs.second, model.species_sets.at(size)));
  }

  long s1_total = 0;
  for (const auto& [size, n] : birds_by_size) {
    const long s1 = s1_correct_by_size[size];
    const long routed = routed_by_size[size];
    const long ok = species_ok_by_size[size];
    s1_total += s1;
    report.measured.priors[size] = static_cast<double>(n) / birds;
    report.measured.r2[size] = s1 > 0 ? static_cast<double>(routed) / s1 : 0.0;
    report.measured.a3[size] = routed > 0 ? static_cast<double>(ok) / routed : 0.0;
    report.r1_by_size[size] = static_cast<double>(s1) / n;
  }
  report.measured.r1_bird = static_cast<double>(s1_total) / birds;
  report.n_birds = birds;
  report.n_aircraft = aircraft;
  report.end_to_end_accuracy_percent = 100.0 * static_cast<double>(bird_correct) / birds;
  report.aircraft_accuracy_percent =
      aircraft > 0 ? 100.0 * static_cast<double>(aircraft_correct) / aircraft : 0.0;
  report.analytic_accuracy = analytic_cca_accuracy(report.measured);

  StageStats uniform = report.measured;
  const double u = 1.0 / static_cast<double>(uniform.priors.size());
  for (auto& [size, p] : uniform.priors) p = u;
  report.analytic_accuracy_uniform_priors = analytic_cca_accuracy(uniform);

  // Pulling R1 out of the per-size sum is exact only when stage-1 recall is
  // the same for every size; assert the identity whenever that premise holds.
  double max_dev = 0.0;
  for (const auto& [size, r1] : report.r1_by_size) {
    max_dev = std::max(max_dev, std::fabs(r1 - report.measured.r1_bird));
  }
  report.identity_premise = max_dev <= 1e-9;
  if (report.identity_premise) {
    const double gap =
        std::fabs(report.end_to_end_accuracy_percent / 100.0 - report.analytic_accuracy);
    if (gap > 1e-12) {
      throw std::logic_error("evaluate_cascade: cascade identity violated (gap " +
                             std::to_string(gap) + ")");
    }
  }
  return report;
}

std::string pipeline_report_to_json(const PipelineReport& report) {
  nlohmann::ordered_json j;
  j["n_birds"] = report.n_birds;
  j["n_aircraft"] = report.n_aircraft;
  j["end_to_end_accuracy_percent"] = report.end_to_end_accuracy_percent;
  j["aircraft_accuracy_percent"] = report.aircraft_accuracy_percent;
  j["analytic_accuracy"] = report.analytic_accuracy;
  j["analytic_accuracy_uniform_priors"] = report.analytic_accuracy_uniform_priors;
  j["identity_premise"] = report.identity_premise;
  j["stage_stats"]["r1_bird"] = report.measured.r1_bird;
  for (const auto& [size, v] : report.measured.r2) j["stage_stats"]["r2"][size] = v;
  for (const auto& [size, v] : report.measured.a3) j["stage_stats"]["a3"][size] = v;
  for (const auto& [size, v] : report.measured.priors) j["stage_stats"]["priors"][size] = v;
  for (const auto& [size, v] : report.r1_by_size) j["stage_stats"]["r1_by_size"][size] = v;

  auto report_json = [](const ClassReport& rep) {
    return nlohmann::ordered_json::parse(report_to_json(rep));
  };
  if (!report.stage1_report.classes.empty()) {
    j["stage1_report"] = report_json(report.stage1_report);
  }
  if (!report.stage2_report.classes.empty()) {
    j["stage2_report"] = report_json(report.stage2_report);
  }
  for (const auto& [size, rep] : report.stage3_reports) {
    j["stage3_reports"][size] = report_json(rep);
  }
  return j.dump(2);
}

std::string routing_traces_to_jsonl(const PipelineReport& report,
                                    const std::vector<CascadeSample>& corpus) {
  std::ostringstream out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    nlohmann::ordered_json j;
    j["path"] = corpus[i].path;
    j["truth_coarse"] = corpus[i].coarse;
    j["truth_size"] = corpus[i].size_label;
    j["truth_species"] = corpus[i].species;
    j["stage1"] = report.traces[i].stage1;
    j["size"] = report.traces[i].size;
    j["species"] = report.traces[i].species;
    j["label"] = report.final_labels[i];
    out << j.dump() << '\n';
  }
  return out.str();
}

FlockPrediction flock_cascade_predict(const FlockCascade& model, const Image& bottom_img,
                                      const Image* side_img) {
  if (!model.bottom || !model.side) {
    throw ValidationError("flock_cascade_predict: both stages are required");
  }
  FlockPrediction out;
  const auto pb = model.bottom->predict(bottom_img);
  out.formation = model.bottom->classes()[pb.label];
  if (out.formation != "Column") return out;
  if (!side_img) {
    throw std::invalid_argument(
        "flock_cascade_predict: bottom view predicted Column but no side image was given");
  }
  const auto ps = model.side->predict(*side_img);
  out.alignment = model.side->classes()[ps.label];
  return out;
}

FlockCascadeReport evaluate_flock_cascade(const FlockCascade& model,
                                          const std::vector<FlockSample>& corpus) {
  if (!model.bottom || !model.side) {
    throw ValidationError("evaluate_flock_cascade: both stages are required");
  }
  if (corpus.empty()) throw ValidationError("evaluate_flock_cascade: empty corpus");

  long n_column = 0, routed = 0, column_correct = 0;
  long n_other = 0, other_correct = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& sample = corpus[i];
    const bool truth_column = sample.formation == "Column";
    if (truth_column && !sample.side) {
      throw ValidationError("evaluate_flock_cascade: Column sample lacks its side view");
    }
    const auto pb = model.bottom->predict_at(sample.bottom, i);
    const std::string predicted = model.bottom->classes()[pb.label];
    if (truth_column) {
      ++n_column;
      if (predicted == "Column") {
        ++routed;
        const auto ps = model.side->predict_at(*sample.side, i);
        if (model.side->classes()[ps.label] == sample.alignment) ++column_correct;
      }
    } else {
      ++n_other;
      // a spurious Column verdict is just a wrong formation label here
      if (predicted == sample.formation) ++other_correct;
    }
  }
  FlockCascadeReport report;
  report.n_column = n_column;
  report.n_non_column = n_other;
  report.column_recall = n_column > 0 ? static_cast<double>(routed) / n_column : 0.0;
  report.side_accuracy_on_routed =
      routed > 0 ? static_cast<double>(column_correct) / routed : 0.0;
  report.column_end_to_end_percent =
      n_column > 0 ? 100.0 * static_cast<double>(column_correct) / n_column : 0.0;
  report.non_column_accuracy_percent =
      n_other > 0 ? 100.0 * static_cast<double>(other_correct) / n_other : 0.0;
  return report;
}

ScriptedClassifier::ScriptedClassifier(std::vector<std::string> classes,
                                       std::vector<int> scripted)
    : classes_(std::move(classes)), scripted_(std::move(scripted)) {
  for (int v : scripted_) {
    if (v < 0 || v >= static_cast<int>(classes_.size())) {
      throw std::invalid_argument("ScriptedClassifier: scripted label out of range");
    }
  }
}

std::vector<double> ScriptedClassifier::predict_scores(const Image&) const {
  throw std::logic_error("ScriptedClassifier: needs a row index; use predict_scores_at");
}

std::vector<double> ScriptedClassifier::predict_scores_at(const Image&, std::size_t row) const {
  if (row >= scripted_.size()) {
    throw std::out_of_range("ScriptedClassifier: row " + std::to_string(row) +
                            " beyond the scripted corpus");
  }
  std::vector<double> scores(classes_.size(), 0.0);
  scores[scripted_[row]] = 1.0;
  return scores;
}

nlohmann::ordered_json ScriptedClassifier::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "aviary-model";
  j["version"] = 1;
  j["kind"] = "scripted";
  j["classes"] = classes_;
  j["payload"]["labels"] = scripted_;
  return j;
}

CascadeModel make_corruption_stub_cascade(
    const std::vector<CascadeSample>& corpus,
    const std::map<std::string, std::vector<std::string>>& species_sets, int stage1_flip_every,
    int stage2_misroute_every, int stage3_corrupt_every) {
  std::vector<std::string> sizes;
  for (const auto& [size, species] : species_sets) sizes.push_back(size);
  std::sort(sizes.begin(), sizes.end());
  auto size_index = [&](const std::string& s) {
    const auto it = std::find(sizes.begin(), sizes.end(), s);
    if (it == sizes.end()) throw ValidationError("stub cascade: unknown size '" + s + "'");
    return static_cast<int>(it - sizes.begin());
  };
  std::map<std::string, std::map<std::string, int>> species_index;
  for (const auto& [size, species] : species_sets) {
    for (std::size_t i = 0; i < species.size(); ++i) {
      species_index[size][species[i]] = static_cast<int>(i);
    }
  }

  const std::vector<std::string> coarse_classes = {"bird", "aircraft"};
  std::vector<int> s1(corpus.size(), 0);
  std::vector<int> s2(corpus.size(), 0);
  std::map<std::string, std::vector<int>> s3;
  for (const auto& size : sizes) s3[size].assign(corpus.size(), 0);

  std::map<std::string, long> bird_counter_by_size;
  long survivor_counter = 0;
  long routed_counter = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& sample = corpus[i];
    if (sample.coarse == "aircraft") {
      s1[i] = 1;  // aircraft predicted correctly
      continue;
    }
    // stage 1: per-size counter so the flips spread uniformly over sizes
    long& c1 = bird_counter_by_size[sample.size_label];
    ++c1;
    const bool flip1 = stage1_flip_every > 0 && (c1 % stage1_flip_every == 0);
    s1[i] = flip1 ? 1 : 0;
    if (flip1) continue;

    // stage 2: misroute every k-th surviving bird to the next size class
    ++survivor_counter;
    const bool flip2 = stage2_misroute_every > 0 && (survivor_counter % stage2_misroute_every == 0);
    const int truth_size = size_index(sample.size_label);
    const int routed_size = flip2 ? (truth_size + 1) % static_cast<int>(sizes.size()) : truth_size;
    s2[i] = routed_size;
    if (flip2) {
      // the misrouted classifier answers something from its own set
      s3[sizes[routed_size]][i] = 0;
      continue;
    }

    // stage 3: corrupt every k-th correctly routed bird within its set
    ++routed_counter;
    const auto& set = species_sets.at(sample.size_label);
    const int truth_species = species_index.at(sample.size_label).at(sample.species);
    const bool flip3 = stage3_corrupt_every > 0 && (routed_counter % stage3_corrupt_every == 0);
    s3[sample.size_label][i] =
        flip3 ? (truth_species + 1) % static_cast<int>(set.size()) : truth_species;
  }

  CascadeModel model;
  model.stage1 = std::make_shared<ScriptedClassifier>(coarse_classes, std::move(s1));
  std::vector<std::string> size_classes = sizes;
  model.stage2 = std::make_shared<ScriptedClassifier>(size_classes, std::move(s2));
  for (const auto& size : sizes) {
    model.stage3[size] =
        std::make_shared<ScriptedClassifier>(species_sets.at(size), std::move(s3[size]));
  }
  model.species_sets = species_sets;
  return model;
}

}  // namespace aviary
