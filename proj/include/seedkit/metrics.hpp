#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seedkit/manifest.hpp"
#include "seedkit/softmax_io.hpp"

namespace seedkit {

struct ConfusionMatrix {
  std::vector<std::string> class_list;
  // counts[t][p]: samples of true class t predicted as p.
  std::vector<std::vector<int64_t>> counts;

  int64_t total() const;
};

struct ClassMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  // Set when the corresponding denominator (TP+FP resp. TP+FN) is zero and
  // the value above is reported as 0.
  bool precision_zero_den = false;
  bool recall_zero_den = false;
};

struct MetricsReport {
  std::vector<std::string> class_list;
  std::vector<ClassMetrics> per_class;
  double overall_accuracy = 0.0;
};

// Lowest index among the maxima; the fixed tie-break used everywhere a
// probability vector becomes a class decision.
int argmax_lowest(const std::vector<double>& values);

struct EnsembleResult {
  SoftmaxFile combined;          // weighted sums, deliberately unnormalized
  std::vector<int> predictions;  // argmax per combined record
};

// Sums the members' probability vectors per image (weights default to all 1)
// in the first file's record order. All files must share the class list
// (ClassListMismatch) and the exact image id set (AlignmentError); an empty
// file list raises EmptyInput, a weight count differing from the file count
// ConfigInvalid.
EnsembleResult ensemble_predict(const std::vector<SoftmaxFile>& inputs,
                                const std::vector<double>& weights = {});

// Tallies argmax predictions against the manifest records of the split. The
// class list (and its order) comes from the manifest and must equal the
// prediction file's (ClassListMismatch); a split record without a prediction
// raises AlignmentError.
ConfusionMatrix confusion(const SoftmaxFile& preds, const DatasetManifest& manifest,
                          Split split);

// One-vs-rest counts for class k: TP = counts[k][k], FP = column k minus TP,
// FN = row k minus TP, TN = rest. accuracy = (TP+TN)/total, precision =
// TP/(TP+FP), recall = TP/(TP+FN); zero denominators report 0 with the flag
// set. An empty matrix raises EmptyEvaluation.
ClassMetrics one_vs_rest_metrics(const ConfusionMatrix& cm, int k);

// trace/total; EmptyEvaluation when total is 0.
double overall_accuracy(const ConfusionMatrix& cm);

MetricsReport report(const ConfusionMatrix& cm);

// Text table: one row per class with Accuracy/Precision/Recall to 2 decimals
// and a final Overall row (accuracy only); zero-denominator values are marked
// with '*' and a footnote.
std::string render_report_text(const MetricsReport& report);

// CSV: header class,accuracy,precision,recall; one row per class at full
// round-trip precision; final row "overall,<accuracy>,,".
std::string render_report_csv(const MetricsReport& report);

}  // namespace seedkit
