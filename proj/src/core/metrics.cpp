#include "seedkit/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "seedkit/error.hpp"

namespace seedkit {

int64_t ConfusionMatrix::total() const {
  int64_t n = 0;
  for (const auto& row : counts) {
    for (int64_t c : row) n += c;
  }
  return n;
}

int argmax_lowest(const std::vector<double>& values) {
  int best = 0;
  for (size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[size_t(best)]) best = int(i);
  }
  return best;
}

EnsembleResult ensemble_predict(const std::vector<SoftmaxFile>& inputs,
                                const std::vector<double>& weights) {
  if (inputs.empty()) fail(Status::empty_input, "no model outputs to combine");
  if (!weights.empty() && weights.size() != inputs.size()) {
    fail(Status::config_invalid,
         std::to_string(weights.size()) + " weights for " +
             std::to_string(inputs.size()) + " model outputs");
  }
  const SoftmaxFile& first = inputs.front();
  const size_t K = first.class_list.size();
  for (size_t m = 1; m < inputs.size(); ++m) {
    if (inputs[m].class_list != first.class_list) {
      fail(Status::class_list_mismatch,
           "model output " + std::to_string(m) + " has a different class list");
    }
  }
  // Index every later file by image id; id sets must coincide exactly.
  std::vector<std::unordered_map<std::string, const SoftmaxRecord*>> by_id(inputs.size());
  for (size_t m = 1; m < inputs.size(); ++m) {
    for (const auto& rec : inputs[m].records) by_id[m].emplace(rec.image_id, &rec);
    if (by_id[m].size() != first.records.size()) {
      fail(Status::alignment_error,
           "model output " + std::to_string(m) + " covers " +
               std::to_string(by_id[m].size()) + " images, expected " +
               std::to_string(first.records.size()));
    }
  }

  EnsembleResult result;
  result.combined.class_list = first.class_list;
  result.combined.records.reserve(first.records.size());
  result.predictions.reserve(first.records.size());
  for (const auto& rec : first.records) {
    SoftmaxRecord sum;
    sum.image_id = rec.image_id;
    sum.probs.assign(K, 0.0);
    for (size_t m = 0; m < inputs.size(); ++m) {
      const double w = weights.empty() ? 1.0 : weights[m];
      const SoftmaxRecord* member = &rec;
      if (m > 0) {
        auto it = by_id[m].find(rec.image_id);
        if (it == by_id[m].end()) {
          fail(Status::alignment_error, "image " + rec.image_id +
                                            " missing from model output " +
                                            std::to_string(m));
        }
        member = it->second;
      }
      for (size_t k = 0; k < K; ++k) sum.probs[k] += w * member->probs[k];
    }
    result.predictions.push_back(argmax_lowest(sum.probs));
    result.combined.records.push_back(std::move(sum));
  }
  return result;
}

ConfusionMatrix confusion(const SoftmaxFile& preds, const DatasetManifest& manifest,
                          Split split) {
  if (preds.class_list != manifest.class_list) {
    fail(Status::class_list_mismatch,
         "prediction file and manifest class lists differ");
  }
  std::unordered_map<std::string, int> predicted;
  predicted.reserve(preds.records.size());
  for (const auto& rec : preds.records) {
    predicted[rec.image_id] = argmax_lowest(rec.probs);
  }
  std::unordered_map<std::string, int> class_index;
  for (size_t k = 0; k < manifest.class_list.size(); ++k) {
    class_index[manifest.class_list[k]] = int(k);
  }

  ConfusionMatrix cm;
  cm.class_list = manifest.class_list;
  cm.counts.assign(cm.class_list.size(),
                   std::vector<int64_t>(cm.class_list.size(), 0));
  for (const auto& rec : manifest.records) {
    if (rec.split != split) continue;
    auto it = predicted.find(rec.image_path);
    if (it == predicted.end()) {
      fail(Status::alignment_error, "no prediction for " + rec.image_path);
    }
    ++cm.counts[size_t(class_index.at(rec.class_label))][size_t(it->second)];
  }
  return cm;
}

ClassMetrics one_vs_rest_metrics(const ConfusionMatrix& cm, int k) {
  const int64_t total = cm.total();
  if (total == 0) fail(Status::empty_evaluation, "empty confusion matrix");
  if (k < 0 || size_t(k) >= cm.class_list.size()) {
    fail(Status::label_error, "class index " + std::to_string(k) + " out of range");
  }
  const size_t K = cm.class_list.size();
  const int64_t tp = cm.counts[size_t(k)][size_t(k)];
  int64_t fp = 0, fn = 0;
  for (size_t t = 0; t < K; ++t) {
    if (t != size_t(k)) fp += cm.counts[t][size_t(k)];
  }
  for (size_t p = 0; p < K; ++p) {
    if (p != size_t(k)) fn += cm.counts[size_t(k)][p];
  }
  const int64_t tn = total - tp - fp - fn;

  ClassMetrics m;
  m.accuracy = double(tp + tn) / double(total);
  if (tp + fp == 0) {
    m.precision_zero_den = true;
  } else {
    m.precision = double(tp) / double(tp + fp);
  }
  if (tp + fn == 0) {
    m.recall_zero_den = true;
  } else {
    m.recall = double(tp) / double(tp + fn);
  }
  return m;
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const int64_t total = cm.total();
  if (total == 0) fail(Status::empty_evaluation, "empty confusion matrix");
  int64_t trace = 0;
  for (size_t k = 0; k < cm.counts.size(); ++k) trace += cm.counts[k][k];
  return double(trace) / double(total);
}

MetricsReport report(const ConfusionMatrix& cm) {
  MetricsReport rep;
  rep.class_list = cm.class_list;
  for (size_t k = 0; k < cm.class_list.size(); ++k) {
    rep.per_class.push_back(one_vs_rest_metrics(cm, int(k)));
  }
  rep.overall_accuracy = overall_accuracy(cm);
  return rep;
}

std::string render_report_text(const MetricsReport& report) {
  size_t name_width = 7;  // fits "Overall"
  for (const auto& cls : report.class_list) {
    name_width = std::max(name_width, cls.size());
  }
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-*s  %9s  %9s  %9s\n", int(name_width),
                "Class", "Accuracy", "Precision", "Recall");
  out += buf;
  bool any_flag = false;
  for (size_t k = 0; k < report.class_list.size(); ++k) {
    const ClassMetrics& m = report.per_class[k];
    std::string precision = "0.00", recall = "0.00";
    char num[32];
    std::snprintf(num, sizeof(num), "%.2f", m.precision);
    precision = num;
    if (m.precision_zero_den) precision += "*";
    std::snprintf(num, sizeof(num), "%.2f", m.recall);
    recall = num;
    if (m.recall_zero_den) recall += "*";
    any_flag = any_flag || m.precision_zero_den || m.recall_zero_den;
    std::snprintf(buf, sizeof(buf), "%-*s  %9.2f  %9s  %9s\n", int(name_width),
                  report.class_list[k].c_str(), m.accuracy, precision.c_str(),
                  recall.c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-*s  %9.2f\n", int(name_width), "Overall",
                report.overall_accuracy);
  out += buf;
  if (any_flag) out += "* undefined (zero denominator), reported as 0\n";
  return out;
}

std::string render_report_csv(const MetricsReport& report) {
  std::string out = "class,accuracy,precision,recall\n";
  for (size_t k = 0; k < report.class_list.size(); ++k) {
    const ClassMetrics& m = report.per_class[k];
    out += report.class_list[k] + "," + format_double(m.accuracy) + "," +
           format_double(m.precision) + "," + format_double(m.recall) + "\n";
  }
  out += "overall," + format_double(report.overall_accuracy) + ",,\n";
  return out;
}

}  // namespace seedkit
