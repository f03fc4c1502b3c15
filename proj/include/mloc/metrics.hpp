#pragma once

#include <map>
#include <string>
#include <vector>

#include "mloc/catalog.hpp"

namespace mloc {

// K x K counts, rows = true label, cols = predicted. "Other" (index 0) is a
// valid row/column alongside the catalog classes.
class ConfusionMatrix {
public:
    ConfusionMatrix(const AnatomicalCatalog& catalog, const std::vector<int>& true_labels,
                    const std::vector<int>& predicted_labels);

    const AnatomicalCatalog& catalog() const { return catalog_; }
    const std::vector<int>& labels() const { return labels_; }  // Other first, then catalog
    std::size_t total() const { return total_; }

    std::size_t count(int true_label, int predicted_label) const;
    std::size_t tp(int label) const;
    std::size_t fp(int label) const;
    std::size_t fn(int label) const;
    std::size_t tn(int label) const;
    std::size_t row_sum(int label) const;

private:
    std::size_t pos(int label) const;

    AnatomicalCatalog catalog_;
    std::vector<int> labels_;
    std::vector<std::size_t> cells_;  // row-major over labels_
    std::size_t total_ = 0;
};

struct ClassMetrics {
    int label = 0;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
    double accuracy_tp_over_total = 0.0;  // TP_i / N, the printed-formula variant
    double accuracy_standard = 0.0;       // (TP_i + TN_i) / N
    double balanced_auc = 0.0;            // (recall + specificity) / 2
    bool zero_denominator = false;        // some rate substituted 0
    bool present_in_truth = false;
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;  // one row per catalog class in truth or prediction
    double macro_f1 = 0.0;
    double macro_auc = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_specificity = 0.0;
    double overall_accuracy = 0.0;  // total correct / total
    bool degenerate = false;        // fewer than 2 classes present in truth
};

MetricsReport per_class_metrics(const ConfusionMatrix& cm);

// Per-class ROC from scores (higher score = more likely the class), one-vs-rest
// threshold sweep over all distinct scores, plus the trapezoidal area.
struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    int label = 0;
    std::vector<RocPoint> points;
    double area = 0.0;
    bool defined = true;  // false when truth has no positives or no negatives
};

RocCurve roc_curve(int label, const std::vector<double>& scores,
                   const std::vector<int>& true_labels);

void write_metrics_report(const MetricsReport& report, const AnatomicalCatalog& catalog,
                          const std::string& path);
void write_roc_points(const std::vector<RocCurve>& curves, const AnatomicalCatalog& catalog,
                      const std::string& path);

}  // namespace mloc
