#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tayfcs/common.hpp"
#include "tayfcs/data.hpp"
#include "tayfcs/eval.hpp"
#include "tayfcs/nn_core.hpp"

using namespace tayfcs;

namespace {

data::Dataset random_dataset(const std::vector<uint32_t>& cards, size_t n, uint64_t seed) {
    data::Dataset ds;
    Rng rng(seed);
    for (size_t f = 0; f < cards.size(); ++f) {
        ds.fields.push_back({static_cast<int>(f), "f" + std::to_string(f), cards[f], false});
        std::vector<uint32_t> col(n);
        for (auto& v : col) v = static_cast<uint32_t>(rng.next_below(cards[f]));
        ds.columns.push_back(std::move(col));
    }
    ds.labels.resize(n);
    for (auto& y : ds.labels) y = rng.next_below(2) != 0 ? 1 : 0;
    ds.split_tag = "train";
    return ds;
}

std::vector<int> identity_fields(size_t count) {
    std::vector<int> fields(count);
    for (size_t i = 0; i < count; ++i) fields[i] = static_cast<int>(i);
    return fields;
}

double batch_loss(const nn::Net& net, const data::Dataset& ds,
                  const std::vector<int>& actives, const std::vector<size_t>& ids) {
    nn::ForwardCache cache;
    nn::forward(net, ds, actives, ids, cache);
    std::vector<uint8_t> labels;
    for (size_t r : ids) labels.push_back(ds.labels[r]);
    return nn::bce_loss(cache.probs, labels);
}

void zero_params(nn::Net& net) {
    for (auto& ref : nn::parameters(net)) std::fill(ref.ptr, ref.ptr + ref.size, 0.0);
}

struct FdCheckStats {
    double max_rel = 0.0;
    size_t checked = 0;
};

// Central finite differences against both parameter gradients (mean batch
// loss) and the per-record tape (each record's own loss term).
FdCheckStats finite_difference_check(uint64_t model_seed) {
    Rng rng(model_seed);
    const size_t F = 2 + rng.next_below(3);   // 2..4
    const size_t d = 1 + rng.next_below(3);   // 1..3
    const size_t hidden = 2 + rng.next_below(7);  // 2..8
    const size_t n = 3 + rng.next_below(4);

    std::vector<uint32_t> cards;
    for (size_t f = 0; f < F; ++f) cards.push_back(2 + static_cast<uint32_t>(rng.next_below(4)));
    data::Dataset ds = random_dataset(cards, n, model_seed ^ 0x9e37);
    nn::Net net = nn::make_net(cards, d, {hidden}, model_seed);
    const auto actives = identity_fields(F);

    std::vector<size_t> ids(n);
    for (size_t i = 0; i < n; ++i) ids[i] = i;

    nn::ForwardCache cache;
    nn::forward(net, ds, actives, ids, cache);
    nn::Gradients grads = nn::make_gradients(net);
    nn::GradientTape tape;
    nn::backward(net, cache, ds.labels, &grads, &tape);

    const double h = 1e-4;
    FdCheckStats stats;
    auto update = [&](double analytic, double numeric) {
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        if (std::abs(analytic - numeric) > 1e-6) {
            stats.max_rel = std::max(stats.max_rel, std::abs(analytic - numeric) / denom);
        }
        stats.checked++;
    };

    // Parameter gradients.
    auto refs = nn::parameters(net);
    for (size_t t = 0; t < refs.size(); ++t) {
        for (size_t i = 0; i < refs[t].size; ++i) {
            const double saved = refs[t].ptr[i];
            refs[t].ptr[i] = saved + h;
            const double up = batch_loss(net, ds, actives, ids);
            refs[t].ptr[i] = saved - h;
            const double down = batch_loss(net, ds, actives, ids);
            refs[t].ptr[i] = saved;
            update(grads.tensors[t][i], (up - down) / (2.0 * h));
        }
    }

    // Tape: per-record loss as a function of the embedding inputs.
    const size_t in_dim = net.input_dim();
    std::vector<double> input(in_dim);
    for (size_t r = 0; r < n; ++r) {
        std::copy(cache.input.begin() + static_cast<ptrdiff_t>(r * in_dim),
                  cache.input.begin() + static_cast<ptrdiff_t>((r + 1) * in_dim),
                  input.begin());
        for (size_t f = 0; f < F; ++f) {
            for (size_t k = 0; k < d; ++k) {
                const size_t idx = f * d + k;
                const double saved = input[idx];
                input[idx] = saved + h;
                const double up = nn::loss_from_logit(nn::mlp_logit(net, input), ds.labels[r]);
                input[idx] = saved - h;
                const double down =
                    nn::loss_from_logit(nn::mlp_logit(net, input), ds.labels[r]);
                input[idx] = saved;
                update(tape.row(r, f)[k], (up - down) / (2.0 * h));
            }
        }
    }
    return stats;
}

}  // namespace

TEST_CASE("forward: all-zero parameters give probability 0.5") {
    nn::Net net = nn::make_net({4, 3}, 2, {5}, 7);
    zero_params(net);
    data::Dataset ds = random_dataset({4, 3}, 6, 1);
    std::vector<size_t> ids = {0, 1, 2, 3, 4, 5};
    nn::ForwardCache cache;
    nn::forward(net, ds, identity_fields(2), ids, cache);
    CHECK(cache.probs.size() == 6);
    for (double p : cache.probs) CHECK(p == doctest::Approx(0.5));
}

TEST_CASE("forward: single linear layer on a scalar embedding") {
    nn::Net net = nn::make_net({2}, 1, {}, 3);
    net.tables[0].w = {0.0, 2.0};  // value 1 embeds to 2.0
    net.layers[0].w = {1.0};
    net.layers[0].b = {0.0};

    data::Dataset ds;
    ds.fields = {{0, "f0", 2, false}};
    ds.columns = {{1}};
    ds.labels = {1};
    std::vector<size_t> ids = {0};
    nn::ForwardCache cache;
    nn::forward(net, ds, {0}, ids, cache);
    CHECK(cache.probs[0] == doctest::Approx(0.8808).epsilon(1e-4));
}

TEST_CASE("forward rejects out-of-range indices") {
    nn::Net net = nn::make_net({2}, 1, {}, 3);
    data::Dataset ds;
    ds.fields = {{0, "f0", 5, false}};
    ds.columns = {{4}};
    ds.labels = {0};
    std::vector<size_t> ids = {0};
    nn::ForwardCache cache;
    CHECK_THROWS_AS(nn::forward(net, ds, {0}, ids, cache), DataError);
}

TEST_CASE("bce_loss hand values") {
    CHECK(nn::bce_loss(std::vector<double>{0.9, 0.1}, std::vector<uint8_t>{1, 0}) ==
          doctest::Approx(0.10536).epsilon(1e-4));
    CHECK(nn::bce_loss(std::vector<double>{0.5}, std::vector<uint8_t>{0}) ==
          doctest::Approx(std::log(2.0)));
    CHECK(nn::bce_loss(std::vector<double>{1.0, 0.0}, std::vector<uint8_t>{1, 0}) <=
          1.1e-7);
    CHECK_THROWS_AS(nn::bce_loss(std::vector<double>{0.5, 0.5}, std::vector<uint8_t>{1}),
                    DataError);
}

TEST_CASE("gradients match central finite differences on random tiny models") {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        const auto stats = finite_difference_check(seed);
        CHECK(stats.checked > 0);
        CHECK(stats.max_rel <= 1e-3);
    }
}

TEST_CASE("clamped prediction with matching label leaves a near-zero tape row") {
    nn::Net net = nn::make_net({2}, 1, {}, 3);
    net.tables[0].w = {0.0, 1.0};
    net.layers[0].w = {30.0};  // logit 30: far past the clamp
    net.layers[0].b = {0.0};
    data::Dataset ds;
    ds.fields = {{0, "f0", 2, false}};
    ds.columns = {{1}};
    ds.labels = {1};
    std::vector<size_t> ids = {0};
    nn::ForwardCache cache;
    nn::forward(net, ds, {0}, ids, cache);
    nn::GradientTape tape;
    nn::backward(net, cache, ds.labels, nullptr, &tape);
    CHECK(std::abs(tape.row(0, 0)[0]) <= 1e-12);
}

TEST_CASE("tape shape is batch x F x d") {
    nn::Net net = nn::make_net({3, 4, 2}, 2, {4}, 5);
    data::Dataset ds = random_dataset({3, 4, 2}, 7, 2);
    std::vector<size_t> ids = {0, 1, 2, 3, 4};
    nn::ForwardCache cache;
    nn::forward(net, ds, identity_fields(3), ids, cache);
    nn::GradientTape tape;
    nn::backward(net, cache, std::vector<uint8_t>{1, 0, 1, 0, 1}, nullptr, &tape);
    CHECK(tape.batch == 5);
    CHECK(tape.num_fields == 3);
    CHECK(tape.dim == 2);
    CHECK(tape.g.size() == 5 * 3 * 2);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    nn::Net net = nn::make_net({3}, 2, {3}, 9);
    nn::Net before = net;
    nn::Gradients grads = nn::make_gradients(net);
    nn::AdamState state = nn::make_adam(net, {});
    nn::adam_step(net, grads, state);
    auto a = nn::parameters(net);
    auto b = nn::parameters(before);
    for (size_t t = 0; t < a.size(); ++t) {
        for (size_t i = 0; i < a[t].size; ++i) CHECK(a[t].ptr[i] == b[t].ptr[i]);
    }
}

TEST_CASE("adam matches an independent scalar trace under constant gradient") {
    // Scalar oracle: textbook recurrence.
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8, g = 0.37;
    double m = 0.0, v = 0.0, x_ref = 1.0;

    nn::Net net = nn::make_net({2}, 1, {}, 1);
    zero_params(net);
    net.layers[0].w = {1.0};  // the parameter under test
    nn::Gradients grads = nn::make_gradients(net);
    nn::AdamState state = nn::make_adam(net, {lr, b1, b2, eps});

    const size_t wt = net.tables.size();  // tensor index of layer weights
    for (int t = 1; t <= 200; ++t) {
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double prev = x_ref;
        x_ref -= lr * (m / (1 - std::pow(b1, t))) /
                 (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
        grads.tensors[wt][0] = g;
        nn::adam_step(net, grads, state);
        CHECK(net.layers[0].w[0] == doctest::Approx(x_ref).epsilon(1e-12));
        // Bounded, sign-consistent steps.
        CHECK(prev - x_ref > 0.0);
        CHECK(prev - x_ref <= lr * 1.1);
    }
}

TEST_CASE("adam rejects shape mismatches") {
    nn::Net net = nn::make_net({3}, 2, {}, 9);
    nn::Gradients grads = nn::make_gradients(net);
    grads.tensors.pop_back();
    nn::AdamState state = nn::make_adam(net, {});
    CHECK_THROWS_AS(nn::adam_step(net, grads, state), ConfigError);
}

TEST_CASE("train: deterministic under a fixed seed") {
    const std::vector<uint32_t> cards = {5, 4};
    data::Dataset train = random_dataset(cards, 64, 10);
    data::Dataset val = random_dataset(cards, 32, 11);
    nn::TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.batch_size = 16;
    cfg.seed = 77;

    nn::Net a = nn::make_net(cards, 2, {4}, 77);
    nn::Net b = nn::make_net(cards, 2, {4}, 77);
    nn::train(a, train, val, identity_fields(2), cfg);
    nn::train(b, train, val, identity_fields(2), cfg);
    auto ra = nn::parameters(a);
    auto rb = nn::parameters(b);
    for (size_t t = 0; t < ra.size(); ++t) {
        for (size_t i = 0; i < ra[t].size; ++i) CHECK(ra[t].ptr[i] == rb[t].ptr[i]);
    }
}

TEST_CASE("train: separable synthetic data reaches near-perfect train AUC") {
    // Label equals a deterministic function of one field value.
    data::Dataset train;
    train.fields = {{0, "f0", 9, false}};
    std::vector<uint32_t> col;
    std::vector<uint8_t> labels;
    Rng rng(4);
    for (size_t i = 0; i < 512; ++i) {
        const uint32_t v = 1 + static_cast<uint32_t>(rng.next_below(8));
        col.push_back(v);
        labels.push_back(v % 2 == 0 ? 1 : 0);
    }
    train.columns = {col};
    train.labels = labels;
    data::Dataset val = train;

    nn::Net net = nn::make_net({9}, 4, {8}, 5);
    nn::TrainConfig cfg;
    cfg.max_epochs = 60;
    cfg.batch_size = 64;
    cfg.adam.lr = 0.02;
    cfg.seed = 5;
    nn::train(net, train, val, {0}, cfg);
    const auto probs = nn::predict(net, train, {0});
    CHECK(eval::auc(train.labels, probs) >= 0.99);
}

TEST_CASE("train: max_epochs 1 gives exactly one epoch of history") {
    data::Dataset train = random_dataset({4, 4}, 40, 1);
    data::Dataset val = random_dataset({4, 4}, 20, 2);
    nn::Net net = nn::make_net({4, 4}, 2, {3}, 3);
    nn::TrainConfig cfg;
    cfg.max_epochs = 1;
    cfg.batch_size = 8;
    const auto result = nn::train(net, train, val, identity_fields(2), cfg);
    CHECK(result.history.size() == 1);
}

TEST_CASE("train: a forced plateau stops at epoch 3") {
    data::Dataset train = random_dataset({4, 4}, 40, 1);
    data::Dataset val = random_dataset({4, 4}, 20, 2);
    nn::Net net = nn::make_net({4, 4}, 2, {3}, 3);
    nn::TrainConfig cfg;
    cfg.max_epochs = 50;
    cfg.batch_size = 8;
    cfg.adam.lr = 0.0;  // metric can never improve after epoch 1
    const auto result = nn::train(net, train, val, identity_fields(2), cfg);
    CHECK(result.history.size() == 3);
    CHECK(result.best_epoch == 1);
}

TEST_CASE("train rejects an empty training set") {
    data::Dataset train;
    train.fields = {{0, "f0", 3, false}};
    train.columns = {{}};
    data::Dataset val = random_dataset({3}, 10, 2);
    nn::Net net = nn::make_net({3}, 2, {}, 3);
    nn::TrainConfig cfg;
    CHECK_THROWS_AS(nn::train(net, train, val, {0}, cfg), DataError);
}

TEST_CASE("loss decreases under repeated full-batch Adam steps") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        const std::vector<uint32_t> cards = {5, 6};
        data::Dataset ds = random_dataset(cards, 48, seed);
        nn::Net net = nn::make_net(cards, 3, {6}, seed + 100);
        const auto actives = identity_fields(2);
        std::vector<size_t> ids(48);
        for (size_t i = 0; i < 48; ++i) ids[i] = i;

        nn::Gradients grads = nn::make_gradients(net);
        nn::AdamState state = nn::make_adam(net, {1e-3, 0.9, 0.999, 1e-8});
        nn::ForwardCache cache;
        double prev = batch_loss(net, ds, actives, ids);
        for (int step = 0; step < 10; ++step) {
            nn::forward(net, ds, actives, ids, cache);
            grads.zero();
            nn::backward(net, cache, ds.labels, &grads, nullptr);
            nn::adam_step(net, grads, state);
            const double cur = batch_loss(net, ds, actives, ids);
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("backward_passes counts one per backward") {
    nn::Net net = nn::make_net({4, 4}, 2, {3}, 3);
    data::Dataset ds = random_dataset({4, 4}, 20, 2);
    std::vector<size_t> ids = {0, 1, 2, 3, 4};
    nn::ForwardCache cache;
    nn::forward(net, ds, identity_fields(2), ids, cache);
    CHECK(net.backward_passes == 0);
    nn::GradientTape tape;
    nn::backward(net, cache, std::vector<uint8_t>{1, 0, 1, 0, 1}, nullptr, &tape);
    CHECK(net.backward_passes == 1);
    std::vector<double> deltas(5, 1.0);
    nn::backward_to_inputs(net, cache, deltas, tape);
    CHECK(net.backward_passes == 2);
}
