#include "pmcast/hyperspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmcast/errors.hpp"

namespace pmcast {

SearchSpace SearchSpace::standard() {
    SearchSpace s;
    s.dims = {
        {"hidden_layers", DimKind::continuous_integer, 2, 10, {}},
        {"neurons", DimKind::continuous_integer, 1, 100, {}},
        {"activation", DimKind::categorical, 0, 0, {"linear", "sigmoid", "relu"}},
        {"loss", DimKind::categorical, 0, 0, {"mse", "mae"}},
        {"optimizer", DimKind::categorical, 0, 0, {"adam", "rmsprop"}},
        {"batch_size", DimKind::categorical, 0, 0, {"32", "64", "128"}},
        {"epochs", DimKind::continuous_integer, 5, 100, {}},
    };
    return s;
}

std::string SearchSpace::describe() const {
    std::ostringstream os;
    for (const auto& d : dims) {
        os << d.name << ": ";
        if (d.kind == DimKind::continuous_integer) {
            os << '[' << d.lo << ',' << d.hi << "] integer";
        } else {
            os << '{';
            for (std::size_t i = 0; i < d.options.size(); ++i) {
                if (i) os << ',';
                os << d.options[i];
            }
            os << '}';
        }
        os << '\n';
    }
    return os.str();
}

namespace {

int decode_continuous(const DimensionDef& d, double c) {
    // round half-up after scaling into [lo, hi]
    const double raw = d.lo + c * (d.hi - d.lo);
    const double rounded = std::floor(raw + 0.5);
    return static_cast<int>(std::clamp(rounded, d.lo, d.hi));
}

int decode_categorical(const DimensionDef& d, double c) {
    const int k = static_cast<int>(d.options.size());
    const int idx = static_cast<int>(std::floor(c * k));
    return std::clamp(idx, 0, k - 1);
}

} // namespace

DecodedConfig decode(const HyperVector& v, const SearchSpace& space) {
    if (v.size() != space.size())
        throw ShapeError("hyper vector has " + std::to_string(v.size()) +
                         " coords, space has " + std::to_string(space.size()));
    const auto& d = space.dims;
    DecodedConfig c;
    c.hidden_layers = decode_continuous(d[0], v[0]);
    c.neurons = decode_continuous(d[1], v[1]);
    c.activation = activation_from_string(d[2].options[static_cast<std::size_t>(
        decode_categorical(d[2], v[2]))]);
    c.loss = loss_from_string(d[3].options[static_cast<std::size_t>(
        decode_categorical(d[3], v[3]))]);
    c.optimizer = optimizer_from_string(d[4].options[static_cast<std::size_t>(
        decode_categorical(d[4], v[4]))]);
    c.batch_size = std::stoi(d[5].options[static_cast<std::size_t>(
        decode_categorical(d[5], v[5]))]);
    c.epochs = decode_continuous(d[6], v[6]);
    return c;
}

std::string DecodedConfig::to_kv_string() const {
    std::ostringstream os;
    os << "hidden_layers=" << hidden_layers << " neurons=" << neurons
       << " activation=" << to_string(activation) << " loss=" << to_string(loss)
       << " optimizer=" << to_string(optimizer) << " batch_size=" << batch_size
       << " epochs=" << epochs;
    return os.str();
}

std::pair<ModelSpec, TrainConfig> DecodedConfig::materialize(Family family) const {
    ModelSpec spec;
    spec.family = family;
    spec.hidden_layers = hidden_layers;
    spec.neurons = neurons;
    spec.activation = activation;
    spec.dropout_rate = 0.2;
    TrainConfig train;
    train.loss = loss;
    train.optimizer = optimizer;
    train.batch_size = batch_size;
    train.epochs = epochs;
    spec.validate();
    train.validate();
    return {spec, train};
}

HyperVector sample_uniform(const SearchSpace& space, Rng& rng) {
    HyperVector v;
    v.coords.resize(static_cast<std::size_t>(space.size()));
    for (double& c : v.coords) c = uniform01(rng);
    return v;
}

HyperVector clamp(const HyperVector& v) {
    HyperVector out = v;
    for (int i = 0; i < out.size(); ++i) {
        if (!std::isfinite(out[i]))
            throw NumericError("hyper vector coordinate " + std::to_string(i) +
                               " is not finite");
        out[i] = std::clamp(out[i], 0.0, 1.0);
    }
    return out;
}

} // namespace pmcast
