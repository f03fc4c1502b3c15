#include <doctest.h>

#include <algorithm>

#include "mloc/inference.hpp"
#include "mloc/layers.hpp"
#include "mloc/rng.hpp"
#include "mloc/siamese.hpp"

using namespace mloc;

namespace {

EmbeddingVector random_unit(Rng& rng, std::size_t dim = kEmbeddingDim) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    return EmbeddingVector{l2_normalize_vec(v)};
}

EmbeddingVector jitter(const EmbeddingVector& base, Rng& rng, double eps) {
    std::vector<double> v = base.values;
    for (double& x : v) x += eps * rng.normal();
    return EmbeddingVector{l2_normalize_vec(v)};
}

SupportIndex random_index(Rng& rng, int n_classes, int per_class) {
    std::map<int, std::vector<EmbeddingVector>> members;
    for (int k = 1; k <= n_classes; ++k) {
        const EmbeddingVector center = random_unit(rng);
        for (int j = 0; j < per_class; ++j) members[k].push_back(jitter(center, rng, 0.05));
    }
    return SupportIndex(AnatomicalCatalog::standard(), std::move(members));
}

// Independent re-derivation of the decision rule.
int oracle_label(const EmbeddingVector& q, const SupportIndex& index, double tau) {
    int best = kOtherLabel;
    double best_med = 2.0;
    for (const auto& [k, vecs] : index.members()) {
        std::vector<double> ds;
        for (const auto& s : vecs) ds.push_back(mapped_distance(q, s));
        std::sort(ds.begin(), ds.end());
        const std::size_t n = ds.size();
        const double med = (n % 2) ? ds[n / 2] : 0.5 * (ds[n / 2 - 1] + ds[n / 2]);
        if (med < best_med) {  // strict: earlier (smaller) class keeps ties
            best_med = med;
            best = k;
        }
    }
    return best_med > tau ? kOtherLabel : best;
}

}  // namespace

TEST_CASE("median of odd and even counts") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == doctest::Approx(2.5));
    CHECK(median({7.0}) == 7.0);
}

TEST_CASE("median ignores one wild outlier with five supports") {
    CHECK(median({0.1, 0.12, 0.11, 0.09, 0.99}) == doctest::Approx(0.11));
}

TEST_CASE("a query identical to all supports of a class wins with median zero") {
    Rng rng(1);
    const EmbeddingVector q = random_unit(rng);
    std::map<int, std::vector<EmbeddingVector>> members;
    members[3] = {q, q, q};
    members[5] = {random_unit(rng), random_unit(rng), random_unit(rng)};
    const SupportIndex index(AnatomicalCatalog::standard(), std::move(members));
    const FramePrediction p = classify_frame(q, index);
    CHECK(p.label == 3);
    CHECK(p.winning_median == 0.0);
    CHECK(p.per_class_median.at(3) == 0.0);
}

TEST_CASE("all medians above tau yields Other") {
    Rng rng(2);
    const SupportIndex index = random_index(rng, 4, 3);
    // A far-away query: random unit vectors sit near distance sqrt(2), whose
    // mapped distance exceeds 0.5.
    const FramePrediction p = classify_frame(random_unit(rng), index, 0.5);
    CHECK(p.label == kOtherLabel);
    for (const auto& [k, m] : p.per_class_median) CHECK(m > 0.5);
    // Relaxing tau to 1 always accepts something.
    const FramePrediction loose = classify_frame(random_unit(rng), index, 0.999);
    CHECK(loose.label != kOtherLabel);
}

TEST_CASE("classifier agrees with a brute-force oracle on random queries") {
    Rng rng(42);
    const SupportIndex index = random_index(rng, 6, 5);
    for (int i = 0; i < 100; ++i) {
        const EmbeddingVector q =
            (i % 2) ? random_unit(rng) : jitter(index.members().at(1 + i % 6)[0], rng, 0.1);
        for (double tau : {0.3, 0.5, 0.7}) {
            const FramePrediction p = classify_frame(q, index, tau);
            CHECK(p.label == oracle_label(q, index, tau));
            double mn = 2.0;
            for (const auto& [k, m] : p.per_class_median) mn = std::min(mn, m);
            CHECK(p.winning_median == doctest::Approx(mn).epsilon(1e-15));
        }
    }
}

TEST_CASE("prediction is invariant to support order within a class") {
    Rng rng(9);
    const EmbeddingVector q = random_unit(rng);
    std::map<int, std::vector<EmbeddingVector>> m1, m2;
    for (int k = 1; k <= 3; ++k) {
        std::vector<EmbeddingVector> vecs;
        for (int j = 0; j < 5; ++j) vecs.push_back(random_unit(rng));
        m1[k] = vecs;
        std::reverse(vecs.begin(), vecs.end());
        std::swap(vecs[1], vecs[3]);
        m2[k] = vecs;
    }
    const SupportIndex i1(AnatomicalCatalog::standard(), std::move(m1));
    const SupportIndex i2(AnatomicalCatalog::standard(), std::move(m2));
    const FramePrediction p1 = classify_frame(q, i1, 0.6);
    const FramePrediction p2 = classify_frame(q, i2, 0.6);
    CHECK(p1.label == p2.label);
    CHECK(p1.per_class_median == p2.per_class_median);
}

TEST_CASE("exact median ties go to the smaller anatomical index") {
    Rng rng(4);
    const EmbeddingVector q = random_unit(rng);
    const EmbeddingVector s = random_unit(rng);
    std::map<int, std::vector<EmbeddingVector>> members;
    members[2] = {s};  // identical support sets -> identical medians
    members[7] = {s};
    const SupportIndex index(AnatomicalCatalog::standard(), std::move(members));
    const FramePrediction p = classify_frame(q, index, 0.999);
    CHECK(p.label == 2);
}

TEST_CASE("raising tau only moves labels away from Other") {
    Rng rng(12);
    const SupportIndex index = random_index(rng, 5, 4);
    for (int i = 0; i < 50; ++i) {
        const EmbeddingVector q = random_unit(rng);
        int prev = classify_frame(q, index, 0.05).label;
        for (double tau : {0.2, 0.4, 0.6, 0.8}) {
            const int cur = classify_frame(q, index, tau).label;
            if (prev != kOtherLabel) CHECK(cur == prev);  // accepted stays accepted
            prev = cur;
        }
    }
}

TEST_CASE("invalid tau and empty support are rejected") {
    Rng rng(3);
    const SupportIndex index = random_index(rng, 2, 2);
    const EmbeddingVector q = random_unit(rng);
    CHECK_THROWS_AS(classify_frame(q, index, 0.0), Error);
    CHECK_THROWS_AS(classify_frame(q, index, 1.0), Error);
    CHECK_THROWS_AS(SupportIndex(AnatomicalCatalog::standard(), {}), Error);
    std::map<int, std::vector<EmbeddingVector>> bad;
    bad[99] = {q};  // not a catalog class
    CHECK_THROWS_AS(SupportIndex(AnatomicalCatalog::standard(), std::move(bad)), Error);
}

TEST_CASE("batch classification matches per-frame calls") {
    Rng rng(77);
    const SupportIndex index = random_index(rng, 3, 3);
    std::vector<EmbeddingVector> queries;
    for (int i = 0; i < 10; ++i) queries.push_back(random_unit(rng));
    const auto batch = batch_classify(queries, index, 0.5);
    REQUIRE(batch.size() == queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const FramePrediction single = classify_frame(queries[i], index, 0.5);
        CHECK(batch[i].label == single.label);
        CHECK(batch[i].winning_median == single.winning_median);
    }
}
