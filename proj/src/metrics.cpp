#include "aviary/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace aviary {

long ConfusionMatrix::total() const {
  long n = 0;
  for (const auto& row : counts)
    for (long c : row) n += c;
  return n;
}

long ConfusionMatrix::trace() const {
  long n = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) n += counts[i][i];
  return n;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                          const std::vector<std::string>& classes) {
  if (truth.size() != pred.size()) {
    throw std::invalid_argument("confusion: truth and pred lengths differ");
  }
  const int k = static_cast<int>(classes.size());
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(k, std::vector<long>(k, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= k || pred[i] < 0 || pred[i] >= k) {
      throw std::invalid_argument("confusion: label index outside the class list at sample " +
                                  std::to_string(i));
    }
    ++cm.counts[truth[i]][pred[i]];
  }
  return cm;
}

ConfusionMatrix confusion(const std::vector<std::string>& truth,
                          const std::vector<std::string>& pred,
                          const std::vector<std::string>& classes) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = static_cast<int>(i);
  auto to_indices = [&](const std::vector<std::string>& labels) {
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto it = index.find(labels[i]);
      if (it == index.end()) {
        throw std::invalid_argument("confusion: unknown label '" + labels[i] + "'");
      }
      out[i] = it->second;
    }
    return out;
  };
  return confusion(to_indices(truth), to_indices(pred), classes);
}

ClassReport class_report(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes.size();
  if (k == 0 || cm.total() == 0) {
    throw std::invalid_argument("class_report: empty confusion matrix");
  }
  ClassReport rep;
  rep.classes = cm.classes;
  rep.precision.assign(k, 0.0);
  rep.recall.assign(k, 0.0);
  rep.f1.assign(k, 0.0);
  rep.support.assign(k, 0);
  rep.degenerate.assign(k, false);
  for (std::size_t c = 0; c < k; ++c) {
    long tp = cm.counts[c][c];
    long fp = 0, fn = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += cm.counts[o][c];
      fn += cm.counts[c][o];
    }
    rep.support[c] = tp + fn;
    const long pdenom = tp + fp;
    const long rdenom = tp + fn;
    const double p = pdenom > 0 ? static_cast<double>(tp) / pdenom : 0.0;
    const double r = rdenom > 0 ? static_cast<double>(tp) / rdenom : 0.0;
    rep.precision[c] = p;
    rep.recall[c] = r;
    rep.f1[c] = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    if (pdenom == 0 || rdenom == 0 || (p + r) == 0.0) rep.degenerate[c] = true;
  }
  rep.accuracy_percent = 100.0 * static_cast<double>(cm.trace()) / cm.total();
  return rep;
}

double binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  const std::size_t n = scores.size();
  if (n != positive.size()) {
    throw std::invalid_argument("binary_auc: scores and labels lengths differ");
  }
  long n_pos = 0;
  for (bool b : positive) n_pos += b ? 1 : 0;
  const long n_neg = static_cast<long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("binary_auc: need both positive and negative samples");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Midranks over tie groups, then the Mann-Whitney identity.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t) {
      if (positive[order[t]]) pos_rank_sum += midrank;
    }
    i = j + 1;
  }
  const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double macro_ovr_auc(const std::vector<std::vector<double>>& scores,
                     const std::vector<int>& truth) {
  if (scores.size() != truth.size() || scores.empty()) {
    throw std::invalid_argument("macro_ovr_auc: scores and truth must be non-empty and aligned");
  }
  const std::size_t k = scores[0].size();
  std::vector<long> class_count(k, 0);
  for (int t : truth) {
    if (t < 0 || static_cast<std::size_t>(t) >= k) {
      throw std::invalid_argument("macro_ovr_auc: truth label outside score dimensions");
    }
    ++class_count[t];
  }
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (class_count[c] == 0) continue;  // class absent from truth: skipped
    if (class_count[c] == static_cast<long>(truth.size())) {
      throw std::invalid_argument("macro_ovr_auc: truth contains a single class; AUC undefined");
    }
    std::vector<double> col(truth.size());
    std::vector<bool> pos(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
      col[i] = scores[i][c];
      pos[i] = (truth[i] == static_cast<int>(c));
    }
    sum += binary_auc(col, pos);
    ++present;
  }
  if (present == 0) {
    throw std::invalid_argument("macro_ovr_auc: no class present in truth");
  }
  return sum / present;
}

std::string report_to_csv(const ClassReport& report) {
  std::ostringstream out;
  out << "class,precision,recall,f1,support,degenerate\n";
  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    out << report.classes[c] << ',' << report.precision[c] << ',' << report.recall[c] << ','
        << report.f1[c] << ',' << report.support[c] << ',' << (report.degenerate[c] ? 1 : 0)
        << '\n';
  }
  out << "accuracy_percent," << report.accuracy_percent << ",,,,\n";
  return out.str();
}

std::string report_to_json(const ClassReport& report) {
  nlohmann::ordered_json j;
  j["accuracy_percent"] = report.accuracy_percent;
  auto& per_class = j["classes"];
  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    nlohmann::ordered_json e;
    e["name"] = report.classes[c];
    e["precision"] = report.precision[c];
    e["recall"] = report.recall[c];
    e["f1"] = report.f1[c];
    e["support"] = report.support[c];
    e["degenerate"] = static_cast<bool>(report.degenerate[c]);
    per_class.push_back(e);
  }
  return j.dump(2);
}

std::string confusion_to_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "truth\\pred";
  for (const auto& c : cm.classes) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < cm.classes.size(); ++i) {
    out << cm.classes[i];
    for (std::size_t j = 0; j < cm.classes.size(); ++j) out << ',' << cm.counts[i][j];
    out << '\n';
  }
  return out.str();
}

}  // namespace aviary
