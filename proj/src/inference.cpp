#include "mloc/inference.hpp"

#include <algorithm>

#include "mloc/siamese.hpp"

namespace mloc {

SupportIndex::SupportIndex(AnatomicalCatalog catalog,
                           std::map<int, std::vector<EmbeddingVector>> members)
    : catalog_(std::move(catalog)), members_(std::move(members)) {
    if (members_.empty()) throw Error("support index: no classes");
    for (const auto& [label, vectors] : members_) {
        if (!catalog_.contains(label)) {
            throw Error("support index: label " + std::to_string(label) + " not in catalog");
        }
        if (vectors.empty()) {
            throw Error("support index: class " + catalog_.name_of(label) + " is empty");
        }
        for (const auto& v : vectors) {
            if (v.values.size() != kEmbeddingDim) {
                throw Error("support index: member of class " + catalog_.name_of(label) +
                            " has dimension " + std::to_string(v.values.size()));
            }
        }
    }
}

std::vector<int> SupportIndex::class_indices() const {
    std::vector<int> out;
    for (const auto& [label, _] : members_) out.push_back(label);
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error("median of empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

FramePrediction classify_frame(const EmbeddingVector& query, const SupportIndex& index,
                               double tau) {
    if (tau <= 0.0 || tau >= 1.0) throw Error("classify_frame: tau must lie in (0,1)");
    if (query.values.size() != kEmbeddingDim) {
        throw Error("classify_frame: query has dimension " + std::to_string(query.values.size()));
    }
    FramePrediction pred;
    int best = -1;
    // std::map iteration is ascending, so the first strict minimum realizes
    // the smaller-anatomical-index tie-break.
    for (const auto& [label, vectors] : index.members()) {
        std::vector<double> distances;
        distances.reserve(vectors.size());
        for (const auto& member : vectors) distances.push_back(mapped_distance(query, member));
        const double med = median(std::move(distances));
        pred.per_class_median[label] = med;
        if (best < 0 || med < pred.winning_median) {
            pred.winning_median = med;
            best = label;
        }
    }
    pred.label = pred.winning_median <= tau ? best : kOtherLabel;
    return pred;
}

std::vector<FramePrediction> batch_classify(const std::vector<EmbeddingVector>& queries,
                                            const SupportIndex& index, double tau) {
    std::vector<FramePrediction> out;
    out.reserve(queries.size());
    for (const auto& q : queries) out.push_back(classify_frame(q, index, tau));
    return out;
}

}  // namespace mloc
