#include <doctest.h>

#include <cmath>

#include "mloc/gradcheck.hpp"
#include "mloc/siamese.hpp"

using namespace mloc;

namespace {

std::vector<double> unit(std::size_t dim, std::size_t axis, double sign = 1.0) {
    std::vector<double> v(dim, 0.0);
    v[axis] = sign;
    return v;
}

}  // namespace

TEST_CASE("mapped distance is zero for identical embeddings") {
    const auto e = unit(4, 1);
    CHECK(mapped_distance(e, e) == 0.0);
}

TEST_CASE("mapped distance of antipodal unit vectors") {
    // ||e1-e2|| = 2, so D = 2*sigmoid(2) - 1 = tanh(1).
    const double d = mapped_distance(unit(4, 0, 1.0), unit(4, 0, -1.0));
    CHECK(d == doctest::Approx(std::tanh(1.0)).epsilon(1e-12));
}

TEST_CASE("mapped distance is bounded and monotone in the raw distance") {
    double prev = -1.0;
    for (double raw = 0.0; raw <= 8.0; raw += 0.25) {
        const double d = mapped_distance({raw, 0.0}, {0.0, 0.0});
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
        CHECK(d > prev);
        prev = d;
    }
}

TEST_CASE("contrastive loss hand values") {
    CHECK(contrastive_loss(0.5, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(contrastive_loss(0.7, 1.0) == doctest::Approx(0.09).epsilon(1e-12));
    // soft target: (1-0.4)*0.7^2 + 0.4*(1-0.7)^2
    CHECK(contrastive_loss(0.7, 0.4) == doctest::Approx(0.6 * 0.49 + 0.4 * 0.09).epsilon(1e-12));
    CHECK(contrastive_loss(0.0, 0.0) == 0.0);
}

TEST_CASE("contrastive loss is non-negative over a grid") {
    for (double d = 0.0; d <= 1.0; d += 0.05)
        for (double y = 0.0; y <= 1.0; y += 0.25) CHECK(contrastive_loss(d, y) >= 0.0);
}

TEST_CASE("analytic pair-loss gradient matches finite differences") {
    Rng rng(17);
    std::vector<double> e1(6), e2(6);
    for (double& v : e1) v = rng.uniform(-1.0, 1.0);
    for (double& v : e2) v = rng.uniform(-1.0, 1.0);
    for (double target : {0.0, 0.4, 1.0}) {
        const auto g = contrastive_loss_grad_e1(e1, e2, target);
        const double h = 1e-6;
        for (std::size_t i = 0; i < e1.size(); ++i) {
            auto ep = e1, em = e1;
            ep[i] += h;
            em[i] -= h;
            const double num = (contrastive_loss(mapped_distance(ep, e2), target) -
                                contrastive_loss(mapped_distance(em, e2), target)) /
                               (2.0 * h);
            CHECK(g[i] == doctest::Approx(num).epsilon(1e-4));
        }
    }
}

TEST_CASE("pair-loss gradient is finite for coincident embeddings") {
    const auto e = unit(4, 2);
    for (double v : contrastive_loss_grad_e1(e, e, 1.0)) CHECK(std::isfinite(v));
}

TEST_CASE("full pair head passes a finite-difference gradient check") {
    Rng rng(23);
    Network net = build_network(builtin_embedder_specs(), 3, false, rng);
    Tensor a({3, 8, 8}), b({3, 8, 8});
    for (double& v : a.data) v = rng.uniform();
    for (double& v : b.data) v = rng.uniform();
    const auto report = finite_diff_check_siamese(net, a, b, 0.5, 1e-4);
    INFO(report.to_string());
    CHECK(report.passed());
}

TEST_CASE("lambda samples match Beta(2,2) moments") {
    Rng rng(101);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double l = sample_lambda(rng);
        CHECK(l >= 0.0);
        CHECK(l <= 1.0);
        sum += l;
        sumsq += l * l;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("lambda sampling supports other concentration values") {
    Rng rng(7);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double l = sample_lambda(rng, 0.5);
        CHECK(l >= 0.0);
        CHECK(l <= 1.0);
        sum += l;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.05));  // Beta(a,a) is symmetric
}

TEST_CASE("mixup endpoints reproduce the pure pairs") {
    const std::vector<double> x1 = {1.0, 0.0, 0.0};
    const std::vector<double> x2 = {0.0, 1.0, 0.0};
    const auto pairs = mixup_pairs(3, x1, 3, x2, 5, {1.0, 0.0, 0.5});
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0].partner_latent == x1);
    CHECK(pairs[0].target == 0.0);
    CHECK(pairs[1].partner_latent == x2);
    CHECK(pairs[1].target == 1.0);
    CHECK(pairs[2].partner_latent == std::vector<double>{0.5, 0.5, 0.0});
    CHECK(pairs[2].target == 0.5);
}

TEST_CASE("mixed latents stay inside the segment between the parents") {
    Rng rng(3);
    std::vector<double> x1(8), x2(8), lambdas;
    for (double& v : x1) v = rng.uniform(-1.0, 1.0);
    for (double& v : x2) v = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) lambdas.push_back(sample_lambda(rng));
    for (const auto& p : mixup_pairs(1, x1, 1, x2, 2, lambdas)) {
        CHECK(p.target == doctest::Approx(1.0 - p.lambda).epsilon(1e-15));
        for (std::size_t i = 0; i < x1.size(); ++i) {
            const double lo = std::min(x1[i], x2[i]), hi = std::max(x1[i], x2[i]);
            CHECK(p.partner_latent[i] >= lo - 1e-12);
            CHECK(p.partner_latent[i] <= hi + 1e-12);
        }
    }
}

TEST_CASE("mixup refuses mismatched class roles") {
    const std::vector<double> x = {1.0};
    CHECK_THROWS_AS(mixup_pairs(1, x, 2, x, 3, {0.5}), Error);  // partner not anchor's class
    CHECK_THROWS_AS(mixup_pairs(1, x, 1, x, 1, {0.5}), Error);  // foreign item same class
}

TEST_CASE("training requires two classes and a repeated class") {
    Rng rng(1);
    TrainConfig cfg;
    cfg.episodes = 1;
    MixupConfig mix;
    auto make_item = [](const std::string& id, int label) {
        TrainItem it;
        it.id = id;
        it.label = label;
        it.input = Tensor({4}, {1.0, 0.0, 0.0, 0.0});
        return it;
    };
    {
        Network net = build_network({LayerSpec::dense(4), LayerSpec::l2_normalize()}, 4, true, rng);
        std::vector<TrainItem> one_class = {make_item("a", 1), make_item("b", 1)};
        CHECK_THROWS_AS(train(net, one_class, cfg, mix), Error);
    }
    {
        Network net = build_network({LayerSpec::dense(4), LayerSpec::l2_normalize()}, 4, true, rng);
        std::vector<TrainItem> singletons = {make_item("a", 1), make_item("b", 2)};
        CHECK_THROWS_AS(train(net, singletons, cfg, mix), Error);
    }
}

namespace {

std::vector<TrainItem> two_cluster_items(Rng& rng, std::size_t dim, std::size_t per_class) {
    std::vector<TrainItem> items;
    for (int label : {1, 2}) {
        for (std::size_t j = 0; j < per_class; ++j) {
            TrainItem it;
            it.id = std::to_string(label) + "_" + std::to_string(j);
            it.label = label;
            Tensor t({dim});
            for (std::size_t i = 0; i < dim; ++i)
                t.data[i] = (label == 1 ? (i < dim / 2 ? 1.0 : 0.0) : (i < dim / 2 ? 0.0 : 1.0)) +
                            0.05 * rng.normal();
            it.input = std::move(t);
            items.push_back(std::move(it));
        }
    }
    return items;
}

}  // namespace

TEST_CASE("training separates two easy clusters") {
    Rng rng(31);
    const std::size_t dim = 16;
    Network net = build_network({LayerSpec::dense(16), LayerSpec::l2_normalize()}, dim, true, rng);
    const auto items = two_cluster_items(rng, dim, 4);

    TrainConfig cfg;
    cfg.episodes = 60;
    cfg.pairs_per_episode = 8;
    cfg.seed = 5;
    MixupConfig mix;
    mix.mixes_per_pair = 10;
    const TrainResult res = train(net, items, cfg, mix);
    CHECK(res.episodes_run > 0);
    REQUIRE(res.loss_trace.size() == res.episodes_run);
    for (double l : res.loss_trace) CHECK(std::isfinite(l));

    auto embed = [&](const TrainItem& it) { return net.forward_value(it.input).data; };
    double intra = 0.0, inter = 0.0;
    int n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            const double d = mapped_distance(embed(items[i]), embed(items[j]));
            if (items[i].label == items[j].label) {
                intra += d;
                ++n_intra;
            } else {
                inter += d;
                ++n_inter;
            }
        }
    }
    CHECK(intra / n_intra < inter / n_inter);
}

TEST_CASE("training is reproducible from the seed") {
    auto run = [] {
        Rng rng(31);
        Network net = build_network({LayerSpec::dense(8), LayerSpec::l2_normalize()}, 8, true, rng);
        Rng item_rng(2);
        const auto items = two_cluster_items(item_rng, 8, 3);
        TrainConfig cfg;
        cfg.episodes = 10;
        cfg.pairs_per_episode = 4;
        cfg.seed = 77;
        MixupConfig mix;
        mix.mixes_per_pair = 5;
        return train(net, items, cfg, mix).loss_trace;
    };
    CHECK(run() == run());  // bitwise
}
