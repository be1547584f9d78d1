#include <doctest.h>

#include <cmath>
#include <set>

#include "pmcast/errors.hpp"
#include "pmcast/hyperspace.hpp"

using namespace pmcast;

namespace {

HyperVector hv(std::initializer_list<double> coords) {
    HyperVector v;
    v.coords = coords;
    return v;
}

} // namespace

TEST_CASE("the standard space matches the seven tuned dimensions") {
    SearchSpace s = SearchSpace::standard();
    REQUIRE(s.size() == 7);
    CHECK(s.dims[0].name == "hidden_layers");
    CHECK(s.dims[0].lo == 2);
    CHECK(s.dims[0].hi == 10);
    CHECK(s.dims[1].lo == 1);
    CHECK(s.dims[1].hi == 100);
    CHECK(s.dims[2].options == std::vector<std::string>{"linear", "sigmoid", "relu"});
    CHECK(s.dims[3].options == std::vector<std::string>{"mse", "mae"});
    CHECK(s.dims[4].options == std::vector<std::string>{"adam", "rmsprop"});
    CHECK(s.dims[5].options == std::vector<std::string>{"32", "64", "128"});
    CHECK(s.dims[6].lo == 5);
    CHECK(s.dims[6].hi == 100);
}

TEST_CASE("decode lower and upper corners") {
    SearchSpace s = SearchSpace::standard();
    DecodedConfig lo = decode(hv({0, 0, 0, 0, 0, 0, 0}), s);
    CHECK(lo.hidden_layers == 2);
    CHECK(lo.neurons == 1);
    CHECK(lo.activation == Activation::linear);
    CHECK(lo.loss == Loss::mse);
    CHECK(lo.optimizer == Optimizer::adam);
    CHECK(lo.batch_size == 32);
    CHECK(lo.epochs == 5);

    DecodedConfig hi = decode(hv({1, 1, 1, 1, 1, 1, 1}), s);
    CHECK(hi.hidden_layers == 10);
    CHECK(hi.neurons == 100);
    CHECK(hi.activation == Activation::relu);
    CHECK(hi.loss == Loss::mae);
    CHECK(hi.optimizer == Optimizer::rmsprop);
    CHECK(hi.batch_size == 128);
    CHECK(hi.epochs == 100);
}

TEST_CASE("a coordinate vector decodes to the reported tuned LSTM setup") {
    SearchSpace s = SearchSpace::standard();
    // (HL 3, 24 neurons, sigmoid, mse, adam, batch 32, 46 epochs)
    DecodedConfig c = decode(hv({0.125, 23.0 / 99.0, 0.5, 0.25, 0.25, 0.1, 41.0 / 95.0}), s);
    CHECK(c.hidden_layers == 3);
    CHECK(c.neurons == 24);
    CHECK(c.activation == Activation::sigmoid);
    CHECK(c.loss == Loss::mse);
    CHECK(c.optimizer == Optimizer::adam);
    CHECK(c.batch_size == 32);
    CHECK(c.epochs == 46);
    CHECK(c.to_kv_string() ==
          "hidden_layers=3 neurons=24 activation=sigmoid loss=mse optimizer=adam "
          "batch_size=32 epochs=46");
}

TEST_CASE("integer dims round half-up") {
    SearchSpace s = SearchSpace::standard();
    // hidden_layers raw value = 2 + c*8; c = 0.0625 -> 2.5 -> 3
    CHECK(decode(hv({0.0625, 0, 0, 0, 0, 0, 0}), s).hidden_layers == 3);
    // just below the tie stays at 2
    CHECK(decode(hv({0.0624, 0, 0, 0, 0, 0, 0}), s).hidden_layers == 2);
}

TEST_CASE("decode is monotone in continuous-integer coordinates") {
    SearchSpace s = SearchSpace::standard();
    for (int dim : {0, 1, 6}) {
        int prev = -1;
        for (int g = 0; g <= 1000; ++g) {
            HyperVector v = hv({0, 0, 0, 0, 0, 0, 0});
            v[dim] = g / 1000.0;
            DecodedConfig c = decode(v, s);
            const int value = dim == 0 ? c.hidden_layers : (dim == 1 ? c.neurons : c.epochs);
            CHECK(value >= prev);
            prev = value;
        }
    }
}

TEST_CASE("every categorical option is reachable on a 1000-point grid") {
    SearchSpace s = SearchSpace::standard();
    for (int dim : {2, 3, 4, 5}) {
        std::set<int> seen;
        const int k = static_cast<int>(s.dims[dim].options.size());
        for (int g = 0; g <= 1000; ++g) {
            HyperVector v = hv({0, 0, 0, 0, 0, 0, 0});
            v[dim] = g / 1000.0;
            DecodedConfig c = decode(v, s);
            switch (dim) {
                case 2: seen.insert(static_cast<int>(c.activation)); break;
                case 3: seen.insert(static_cast<int>(c.loss)); break;
                case 4: seen.insert(static_cast<int>(c.optimizer)); break;
                case 5: seen.insert(c.batch_size); break;
            }
        }
        CHECK(static_cast<int>(seen.size()) == k);
    }
}

TEST_CASE("fuzzed clamped vectors always decode into valid configs") {
    SearchSpace s = SearchSpace::standard();
    Rng rng(1729);
    for (int i = 0; i < 10000; ++i) {
        HyperVector v;
        v.coords.resize(7);
        for (double& c : v.coords) c = uniform(rng, -3.0, 4.0);
        DecodedConfig d = decode(clamp(v), s);
        auto [spec, train] = d.materialize(Family::lstm);
        CHECK_NOTHROW(spec.validate());
        CHECK_NOTHROW(train.validate());
    }
}

TEST_CASE("sample_uniform statistics and determinism") {
    SearchSpace s = SearchSpace::standard();
    Rng rng(2024);
    std::vector<double> mean(7, 0.0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        HyperVector v = sample_uniform(s, rng);
        CHECK_NOTHROW(decode(v, s));
        for (int j = 0; j < 7; ++j) {
            CHECK(v[j] >= 0.0);
            CHECK(v[j] < 1.0);
            mean[static_cast<std::size_t>(j)] += v[j];
        }
    }
    for (double m : mean) {
        m /= n;
        CHECK(m > 0.48);
        CHECK(m < 0.52);
    }

    Rng a(5), b(5);
    HyperVector va = sample_uniform(s, a);
    HyperVector vb = sample_uniform(s, b);
    for (int j = 0; j < 7; ++j) CHECK(va[j] == vb[j]);
}

TEST_CASE("clamp projects into the box and rejects non-finite coords") {
    HyperVector v = hv({-0.3, 1.7, 0.5, 0.0, 1.0, 0.2, 0.9});
    HyperVector c = clamp(v);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 1.0);
    CHECK(c[2] == 0.5);
    CHECK(c[6] == 0.9);

    HyperVector in_box = hv({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7});
    HyperVector same = clamp(in_box);
    for (int j = 0; j < 7; ++j) CHECK(same[j] == in_box[j]);

    HyperVector bad = hv({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7});
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(clamp(bad), NumericError);
}

TEST_CASE("decode rejects a dimension-count mismatch") {
    SearchSpace s = SearchSpace::standard();
    CHECK_THROWS_AS(decode(hv({0.5, 0.5}), s), ShapeError);
}
