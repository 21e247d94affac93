#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aviary/learners/model.hpp"
#include "aviary/metrics.hpp"

namespace aviary {

/// Three-stage cascade: bird/aircraft gate, size router, per-size species
/// classifier. The per-size species label sets must be pairwise disjoint and
/// stage3 must cover every size class stage2 can emit.
struct CascadeModel {
  std::shared_ptr<ImageClassifier> stage1;  // classes {"bird","aircraft"}
  std::shared_ptr<ImageClassifier> stage2;  // size classes
  std::map<std::string, std::shared_ptr<ImageClassifier>> stage3;
  std::map<std::string, std::vector<std::string>> species_sets;

  void validate() const;  // throws ValidationError on a broken wiring
};

struct UnifiedModel {
  std::shared_ptr<ImageClassifier> model;  // all species plus "Aircraft"
};

struct RoutingTrace {
  std::string stage1;   // "bird" / "aircraft"
  std::string size;     // empty when stage1 said aircraft
  std::string species;  // empty when stage1 said aircraft
};

struct CcaPrediction {
  std::string label;
  RoutingTrace trace;
};

/// The quantities of the analytic cascade accuracy: stage-1 bird recall,
/// per-size stage-2 recalls, per-size species accuracies on correctly routed
/// samples, and size priors.
struct StageStats {
  double r1_bird = 0.0;
  std::map<std::string, double> r2;
  std::map<std::string, double> a3;
  std::map<std::string, double> priors;
};

/// accuracy = R1_bird * sum_i P(i) * R2_i * A3_i. Throws when the priors do
/// not sum to 1 (1e-9) or any ratio leaves [0, 1].
double analytic_cca_accuracy(const StageStats& stats);

CcaPrediction cca_predict(const CascadeModel& model, const Image& img);
CcaPrediction cca_predict_at(const CascadeModel& model, const Image& img, std::size_t row);

std::string uca_predict(const UnifiedModel& model, const Image& img);

/// One evaluation sample with truth for all three stages.
struct CascadeSample {
  std::string path;        // where the image lives (may be empty for stubs)
  std::string coarse;      // "bird" / "aircraft"
  std::string size_label;  // truth size class (birds)
  std::string species;     // truth species (birds) or "Aircraft"
};

using SampleImageProvider = std::function<Image(const CascadeSample&, std::size_t)>;

struct PipelineReport {
  StageStats measured;
  double end_to_end_accuracy_percent = 0.0;  // over bird samples
  double aircraft_accuracy_percent = 0.0;    // reported separately
  double analytic_accuracy = 0.0;            // formula value from `measured`
  double analytic_accuracy_uniform_priors = 0.0;
  bool identity_premise = false;  // stage-1 recall uniform across sizes
  long n_birds = 0;
  long n_aircraft = 0;
  std::map<std::string, double> r1_by_size;
  ClassReport stage1_report;                         // bird/aircraft, all samples
  ClassReport stage2_report;                         // sizes, stage1-correct birds
  std::map<std::string, ClassReport> stage3_reports; // species, correctly routed
  std::vector<RoutingTrace> traces;  // one per sample, corpus order
  std::vector<std::string> final_labels;
};

/// Runs the cascade over the corpus and measures the conditional stage stats
/// (r2 among stage1-correct birds, a3 among correctly routed ones, priors
/// from the corpus). When stage-1 recall is size-uniform the empirical bird
/// accuracy provably equals the analytic formula; that identity is asserted
/// to 1e-12.
PipelineReport evaluate_cascade(const CascadeModel& model,
                                const std::vector<CascadeSample>& corpus,
                                const SampleImageProvider& provider);

std::string pipeline_report_to_json(const PipelineReport& report);
std::string routing_traces_to_jsonl(const PipelineReport& report,
                                    const std::vector<CascadeSample>& corpus);

/// Conditional two-stage flock-type pipeline: the side-view model runs only
/// when the bottom-view model says Column.
struct FlockCascade {
  std::shared_ptr<ImageClassifier> bottom;  // 12 formations
  std::shared_ptr<ImageClassifier> side;    // 3 vertical alignments
};

struct FlockPrediction {
  std::string formation;
  std::optional<std::string> alignment;  // set only for Column
};

/// side_img may be null for a non-Column prediction; a Column prediction
/// without a side image raises std::invalid_argument.
FlockPrediction flock_cascade_predict(const FlockCascade& model, const Image& bottom_img,
                                      const Image* side_img);

/// One paired flock sample: every sample has a bottom view; true-Column
/// samples also carry a side view and its alignment truth.
struct FlockSample {
  Image bottom;
  std::optional<Image> side;
  std::string formation;
  std::string alignment;  // empty unless formation truth is Column
};

struct FlockCascadeReport {
  double column_recall = 0.0;            // bottom model, Column class
  double side_accuracy_on_routed = 0.0;  // among correctly detected Columns
  double column_end_to_end_percent = 0.0;
  double non_column_accuracy_percent = 0.0;
  long n_column = 0;
  long n_non_column = 0;
};

/// Corpus-level flock cascade evaluation. The Column end-to-end accuracy is
/// by construction the product of the measured Column recall and the side
/// accuracy on correctly routed samples; for non-Column truth it reduces to
/// the bottom model's accuracy on those samples.
FlockCascadeReport evaluate_flock_cascade(const FlockCascade& model,
                                          const std::vector<FlockSample>& corpus);

/// Evaluation stub that answers with a scripted label per corpus row.
/// predict_scores without a row is not meaningful for stubs and throws.
class ScriptedClassifier : public ImageClassifier {
 public:
  ScriptedClassifier(std::vector<std::string> classes, std::vector<int> scripted);
  const std::vector<std::string>& classes() const override { return classes_; }
  std::vector<double> predict_scores(const Image& img) const override;
  std::vector<double> predict_scores_at(const Image& img, std::size_t row) const override;
  nlohmann::ordered_json to_json() const override;

 private:
  std::vector<std::string> classes_;
  std::vector<int> scripted_;
};

/// Deterministic corruption stubs over a labeled corpus: stage 1 flips every
/// `stage1_flip_every`-th bird within each size class (so stage-1 recall is
/// size-uniform when class counts divide evenly), stage 2 misroutes every
/// `stage2_misroute_every`-th surviving bird to the next size class, stage 3
/// corrupts every `stage3_corrupt_every`-th correctly routed bird within its
/// species set. Pass 0 to disable a corruption.
CascadeModel make_corruption_stub_cascade(const std::vector<CascadeSample>& corpus,
                                          const std::map<std::string, std::vector<std::string>>&
                                              species_sets,
                                          int stage1_flip_every, int stage2_misroute_every,
                                          int stage3_corrupt_every);

}  // namespace aviary
