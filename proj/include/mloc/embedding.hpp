#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mloc/error.hpp"

namespace mloc {

constexpr std::size_t kEmbeddingDim = 64;

// 64-dimensional unit-norm latent feature of one image.
struct EmbeddingVector {
    std::vector<double> values;

    double norm() const;
    bool unit_norm(double tol = 1e-6) const;
};

struct EmbeddingRecord {
    std::string id;
    int label_index = 0;  // 0 = unlabeled
    EmbeddingVector embedding;
};

struct IngestResult {
    std::vector<EmbeddingRecord> records;  // file order, ids unique
    std::size_t renormalized = 0;          // rows whose norm deviated by > 1e-3

    const EmbeddingRecord* find(const std::string& id) const {
        for (const auto& r : records)
            if (r.id == id) return &r;
        return nullptr;
    }
};

// Embedding exchange file: header "#MLOC-EMB v1 dim=64", then UTF-8 lines
// `id,label_index,v1,...,v64`.
IngestResult ingest_embeddings(const std::string& path);
void export_embeddings(const std::vector<EmbeddingRecord>& records, const std::string& path);

}  // namespace mloc
