#pragma once

#include <string>
#include <vector>

namespace aviary {

/// K x K confusion counts; rows are truth, columns are prediction.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<long>> counts;

  long total() const;
  long trace() const;
};

/// Per-class one-vs-rest precision/recall/F1 plus overall accuracy in
/// percent. A class whose metric had a zero denominator reports 0 and is
/// flagged in `degenerate`.
struct ClassReport {
  std::vector<std::string> classes;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<long> support;
  std::vector<bool> degenerate;
  double accuracy_percent = 0.0;
};

/// Tallies (truth, pred) pairs given as indices into `classes`.
ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                          const std::vector<std::string>& classes);

/// String-labelled convenience overload.
ConfusionMatrix confusion(const std::vector<std::string>& truth,
                          const std::vector<std::string>& pred,
                          const std::vector<std::string>& classes);

/// precision = TP/(TP+FP), recall = TP/(TP+FN), F1 = 2PR/(P+R),
/// accuracy = trace/total * 100.
ClassReport class_report(const ConfusionMatrix& cm);

/// Macro-averaged one-vs-rest ranking AUC with ties counted as 0.5.
/// `scores[i][c]` is sample i's score for class c; classes absent from the
/// truth are skipped. Truth containing a single class has no defined AUC
/// and raises std::invalid_argument.
double macro_ovr_auc(const std::vector<std::vector<double>>& scores,
                     const std::vector<int>& truth);

/// Rank-based AUC of one score column against binary membership.
double binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive);

std::string report_to_csv(const ClassReport& report);
std::string report_to_json(const ClassReport& report);
std::string confusion_to_csv(const ConfusionMatrix& cm);

}  // namespace aviary
