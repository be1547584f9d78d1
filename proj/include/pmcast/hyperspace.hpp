#pragma once

#include <string>
#include <vector>

#include "pmcast/nn/model.hpp"
#include "pmcast/rng.hpp"

namespace pmcast {

enum class DimKind { continuous_integer, categorical };

struct DimensionDef {
    std::string name;
    DimKind kind = DimKind::continuous_integer;
    double lo = 0.0, hi = 0.0;        // continuous_integer bounds (inclusive)
    std::vector<std::string> options; // categorical, ordered
};

// The seven tuned hyperparameter dimensions, in table order: hidden layers,
// neurons, activation, loss, optimizer, batch size, epochs.
struct SearchSpace {
    std::vector<DimensionDef> dims;

    static SearchSpace standard();
    int size() const { return static_cast<int>(dims.size()); }
    std::string describe() const;
};

// A particle position: one coordinate per dimension, each in the
// normalized box [0,1].
struct HyperVector {
    std::vector<double> coords;

    int size() const { return static_cast<int>(coords.size()); }
    double& operator[](int i) { return coords[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return coords[static_cast<std::size_t>(i)]; }
};

// The concrete hyperparameter values a position decodes to.
struct DecodedConfig {
    int hidden_layers = 2;
    int neurons = 1;
    Activation activation = Activation::linear;
    Loss loss = Loss::mse;
    Optimizer optimizer = Optimizer::adam;
    int batch_size = 32;
    int epochs = 5;

    // Stable `key=value` line in table order, for logs and reports.
    std::string to_kv_string() const;
    std::pair<ModelSpec, TrainConfig> materialize(Family family) const;
};

// Total on the box: continuous-integer dims round half-up after scaling,
// categorical dims index by floor(c * k) capped at k-1.
DecodedConfig decode(const HyperVector& v, const SearchSpace& space);

HyperVector sample_uniform(const SearchSpace& space, Rng& rng);

// Projects every coordinate into [0,1]; non-finite coordinates are a
// numeric error.
HyperVector clamp(const HyperVector& v);

} // namespace pmcast
