#include "mloc/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "mloc/layers.hpp"

namespace mloc {

double EmbeddingVector::norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

bool EmbeddingVector::unit_norm(double tol) const { return std::fabs(norm() - 1.0) <= tol; }

IngestResult ingest_embeddings(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("embeddings: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("#MLOC-EMB v1", 0) != 0) {
        throw Error("embeddings: missing #MLOC-EMB v1 header in " + path);
    }
    const std::string dim_field = "dim=";
    const auto pos = line.find(dim_field);
    if (pos == std::string::npos ||
        std::stoul(line.substr(pos + dim_field.size())) != kEmbeddingDim) {
        throw Error("embeddings: header must declare dim=" + std::to_string(kEmbeddingDim) +
                    " in " + path);
    }

    IngestResult result;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string field;
        EmbeddingRecord rec;
        if (!std::getline(ss, rec.id, ',') || rec.id.empty()) {
            throw Error("embeddings: malformed row at line " + std::to_string(line_no));
        }
        if (!seen.insert(rec.id).second) {
            throw Error("embeddings: duplicate id \"" + rec.id + "\" at line " +
                        std::to_string(line_no));
        }
        if (!std::getline(ss, field, ',')) {
            throw Error("embeddings: malformed row at line " + std::to_string(line_no));
        }
        try {
            rec.label_index = std::stoi(field);
        } catch (...) {
            throw Error("embeddings: bad label index at line " + std::to_string(line_no));
        }
        while (std::getline(ss, field, ',')) {
            try {
                rec.embedding.values.push_back(std::stod(field));
            } catch (...) {
                throw Error("embeddings: bad value at line " + std::to_string(line_no));
            }
        }
        if (rec.embedding.values.size() != kEmbeddingDim) {
            throw Error("embeddings: row at line " + std::to_string(line_no) + " has dimension " +
                        std::to_string(rec.embedding.values.size()) + ", expected " +
                        std::to_string(kEmbeddingDim));
        }
        const double n = rec.embedding.norm();
        if (!std::isfinite(n) || n == 0.0) {
            throw Error("embeddings: non-normalizable row at line " + std::to_string(line_no));
        }
        if (std::fabs(n - 1.0) > 1e-3) {
            for (double& v : rec.embedding.values) v /= n;
            ++result.renormalized;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

void export_embeddings(const std::vector<EmbeddingRecord>& records, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("embeddings: cannot write " + path);
    os << "#MLOC-EMB v1 dim=" << kEmbeddingDim << "\n";
    char buf[32];
    for (const auto& rec : records) {
        if (rec.embedding.values.size() != kEmbeddingDim) {
            throw Error("embeddings: record \"" + rec.id + "\" has dimension " +
                        std::to_string(rec.embedding.values.size()));
        }
        os << rec.id << "," << rec.label_index;
        for (double v : rec.embedding.values) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            os << "," << buf;
        }
        os << "\n";
    }
    if (!os) throw Error("embeddings: write failed for " + path);
}

}  // namespace mloc
