#include "mloc/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>

namespace mloc {

ConfusionMatrix::ConfusionMatrix(const AnatomicalCatalog& catalog,
                                 const std::vector<int>& true_labels,
                                 const std::vector<int>& predicted_labels)
    : catalog_(catalog) {
    if (true_labels.size() != predicted_labels.size()) {
        throw Error("confusion: " + std::to_string(true_labels.size()) + " true labels vs " +
                    std::to_string(predicted_labels.size()) + " predictions");
    }
    if (true_labels.empty()) throw Error("confusion: no items");
    labels_.push_back(kOtherLabel);
    for (const auto& e : catalog_.entries()) labels_.push_back(e.index);
    cells_.assign(labels_.size() * labels_.size(), 0);
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        ++cells_[pos(true_labels[i]) * labels_.size() + pos(predicted_labels[i])];
    }
    total_ = true_labels.size();
}

std::size_t ConfusionMatrix::pos(int label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return i;
    throw Error("confusion: label " + std::to_string(label) + " not in catalog");
}

std::size_t ConfusionMatrix::count(int t, int p) const {
    return cells_[pos(t) * labels_.size() + pos(p)];
}

std::size_t ConfusionMatrix::tp(int label) const { return count(label, label); }

std::size_t ConfusionMatrix::fp(int label) const {
    const std::size_t col = pos(label);
    std::size_t sum = 0;
    for (std::size_t r = 0; r < labels_.size(); ++r) sum += cells_[r * labels_.size() + col];
    return sum - tp(label);
}

std::size_t ConfusionMatrix::fn(int label) const { return row_sum(label) - tp(label); }

std::size_t ConfusionMatrix::tn(int label) const {
    return total_ - tp(label) - fp(label) - fn(label);
}

std::size_t ConfusionMatrix::row_sum(int label) const {
    const std::size_t row = pos(label);
    std::size_t sum = 0;
    for (std::size_t c = 0; c < labels_.size(); ++c) sum += cells_[row * labels_.size() + c];
    return sum;
}

namespace {
double safe_ratio(std::size_t num, std::size_t den, bool& flag) {
    if (den == 0) {
        flag = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

MetricsReport per_class_metrics(const ConfusionMatrix& cm) {
    MetricsReport report;
    const double n = static_cast<double>(cm.total());
    std::size_t total_correct = 0;
    for (int label : cm.labels()) total_correct += cm.tp(label);

    std::size_t present = 0;
    double sum_p = 0.0, sum_r = 0.0, sum_s = 0.0;
    for (const auto& entry : cm.catalog().entries()) {
        const int label = entry.index;
        ClassMetrics m;
        m.label = label;
        m.tp = cm.tp(label);
        m.fp = cm.fp(label);
        m.fn = cm.fn(label);
        m.tn = cm.tn(label);
        m.present_in_truth = cm.row_sum(label) > 0;
        if (!m.present_in_truth && m.tp + m.fp == 0) continue;  // class never seen
        m.precision = safe_ratio(m.tp, m.tp + m.fp, m.zero_denominator);
        m.recall = safe_ratio(m.tp, m.tp + m.fn, m.zero_denominator);
        m.specificity = safe_ratio(m.tn, m.tn + m.fp, m.zero_denominator);
        const double pr = m.precision + m.recall;
        if (pr > 0.0) {
            m.f1 = 2.0 * m.precision * m.recall / pr;
        } else {
            m.f1 = 0.0;
            m.zero_denominator = true;
        }
        m.accuracy_tp_over_total = static_cast<double>(m.tp) / n;
        m.accuracy_standard = static_cast<double>(m.tp + m.tn) / n;
        m.balanced_auc = 0.5 * (m.recall + m.specificity);
        if (m.present_in_truth) {
            ++present;
            sum_p += m.precision;
            sum_r += m.recall;
            sum_s += m.specificity;
        }
        report.per_class.push_back(m);
    }
    report.degenerate = present < 2;
    if (present > 0) {
        report.macro_precision = sum_p / static_cast<double>(present);
        report.macro_recall = sum_r / static_cast<double>(present);
        report.macro_specificity = sum_s / static_cast<double>(present);
        const double pr = report.macro_precision + report.macro_recall;
        report.macro_f1 = pr > 0.0 ? 2.0 * report.macro_precision * report.macro_recall / pr : 0.0;
        report.macro_auc = 0.5 * (report.macro_recall + report.macro_specificity);
    }
    report.overall_accuracy = static_cast<double>(total_correct) / n;
    return report;
}

RocCurve roc_curve(int label, const std::vector<double>& scores,
                   const std::vector<int>& true_labels) {
    if (scores.size() != true_labels.size()) throw Error("roc_curve: length mismatch");
    RocCurve curve;
    curve.label = label;
    std::size_t pos_total = 0;
    for (int t : true_labels) pos_total += t == label ? 1 : 0;
    const std::size_t neg_total = true_labels.size() - pos_total;
    if (pos_total == 0 || neg_total == 0) {
        curve.defined = false;
        return curve;
    }
    // Sweep thresholds over the distinct scores, descending: positive iff
    // score >= threshold.
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double t = scores[order[i]];
        while (i < order.size() && scores[order[i]] == t) {
            if (true_labels[order[i]] == label) ++tp;
            else ++fp;
            ++i;
        }
        curve.points.push_back({t, static_cast<double>(fp) / static_cast<double>(neg_total),
                                static_cast<double>(tp) / static_cast<double>(pos_total)});
    }
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        curve.area += 0.5 * (curve.points[k].fpr - curve.points[k - 1].fpr) *
                      (curve.points[k].tpr + curve.points[k - 1].tpr);
    }
    return curve;
}

void write_metrics_report(const MetricsReport& report, const AnatomicalCatalog& catalog,
                          const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("metrics: cannot write " + path);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "overall_accuracy=%.10f\nmacro_f1=%.10f\nmacro_auc=%.10f\n"
                  "macro_precision=%.10f\nmacro_recall=%.10f\nmacro_specificity=%.10f\n"
                  "degenerate=%d\n",
                  report.overall_accuracy, report.macro_f1, report.macro_auc,
                  report.macro_precision, report.macro_recall, report.macro_specificity,
                  report.degenerate ? 1 : 0);
    os << buf;
    os << "class,tp,fp,fn,tn,precision,recall,specificity,f1,acc_tp_over_total,"
          "acc_standard,balanced_auc,zero_denominator\n";
    for (const auto& m : report.per_class) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%zu,%zu,%zu,%zu,%.10f,%.10f,%.10f,%.10f,%.10f,%.10f,%.10f,%d\n",
                      catalog.name_of(m.label).c_str(), m.tp, m.fp, m.fn, m.tn, m.precision,
                      m.recall, m.specificity, m.f1, m.accuracy_tp_over_total, m.accuracy_standard,
                      m.balanced_auc, m.zero_denominator ? 1 : 0);
        os << buf;
    }
}

void write_roc_points(const std::vector<RocCurve>& curves, const AnatomicalCatalog& catalog,
                      const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("roc: cannot write " + path);
    char buf[160];
    for (const auto& curve : curves) {
        if (!curve.defined) {
            os << "# " << catalog.name_of(curve.label) << ": undefined (single-class truth)\n";
            continue;
        }
        for (const auto& p : curve.points) {
            std::snprintf(buf, sizeof(buf), "%s,%.10g,%.10f,%.10f\n",
                          catalog.name_of(curve.label).c_str(), p.threshold, p.fpr, p.tpr);
            os << buf;
        }
        std::snprintf(buf, sizeof(buf), "# %s area=%.10f\n", catalog.name_of(curve.label).c_str(),
                      curve.area);
        os << buf;
    }
}

}  // namespace mloc
