#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pmcast/fetch.hpp"
#include "pmcast/hyperspace.hpp"
#include "pmcast/nn/model.hpp"
#include "pmcast/pipeline.hpp"
#include "pmcast/pso.hpp"

namespace pmcast {

// Baseline network preset used for the hidden-layer sweep: 32 neurons,
// dropout 0.2, MSE, Adam, 100 epochs, batch 72. The hidden activation is
// not pinned by that setup; relu for the dense families and tanh for the
// lstm squash are the defaults here and can be overridden.
struct BaselinePreset {
    int neurons = 32;
    double dropout = 0.2;
    Loss loss = Loss::mse;
    Optimizer optimizer = Optimizer::adam;
    int epochs = 100;
    int batch_size = 72;
    Activation dense_activation = Activation::relu;
    Activation lstm_activation = Activation::tanh;
    std::vector<int> hidden_layers = {2, 3, 4, 5, 6, 7, 8, 9, 10};
};

struct RunConfig {
    std::string data_path;                    // raw UCI csv or cleaned 7-column csv
    std::string fetch_url = kUciDatasetUrl;
    std::filesystem::path cache_dir = "data/cache";
    std::vector<Scenario> scenarios = {Scenario::daily, Scenario::weekly, Scenario::monthly};
    std::vector<Family> families = {Family::lstm, Family::cnn, Family::mlp};
    int lookback = 24;
    double learning_rate = 1e-3;
    double validation_fraction = 0.10; // chronological tail used as the tuning objective
    bool cnn_dropout_dense = false;
    bool fast_search = false;          // clamp training to 10 epochs in sweep/search
    int workers = 1;
    std::uint64_t master_seed = 42;
    std::filesystem::path out_dir = "out";
    BaselinePreset baseline;
    PsoConfig pso;

    static RunConfig from_file(const std::filesystem::path& path);
    // Applies one `key = value` setting; throws ConfigError on unknown keys.
    void apply(const std::string& key, const std::string& value);
    void validate() const;
    // Flat key=value dump of every effective setting (run metadata).
    std::string describe() const;
};

} // namespace pmcast
