#pragma once

#include <map>
#include <vector>

#include "mloc/catalog.hpp"
#include "mloc/embedding.hpp"

namespace mloc {

// Labeled reference embeddings queries are compared against.
class SupportIndex {
public:
    SupportIndex(AnatomicalCatalog catalog, std::map<int, std::vector<EmbeddingVector>> members);

    const AnatomicalCatalog& catalog() const { return catalog_; }
    const std::map<int, std::vector<EmbeddingVector>>& members() const { return members_; }
    std::vector<int> class_indices() const;

private:
    AnatomicalCatalog catalog_;
    std::map<int, std::vector<EmbeddingVector>> members_;
};

struct FramePrediction {
    int label = kOtherLabel;
    std::map<int, double> per_class_median;  // mapped distance per support class
    double winning_median = 1.0;             // min over per_class_median
};

// Even count -> mean of the two central order statistics.
double median(std::vector<double> values);

// Median mapped distance per class; the argmin class wins unless every median
// exceeds tau, in which case the frame is Other. Ties on the minimum go to
// the smaller anatomical index.
FramePrediction classify_frame(const EmbeddingVector& query, const SupportIndex& index,
                               double tau = 0.5);

std::vector<FramePrediction> batch_classify(const std::vector<EmbeddingVector>& queries,
                                            const SupportIndex& index, double tau = 0.5);

}  // namespace mloc
