#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pmcast/nn/layers.hpp"
#include "pmcast/nn/losses.hpp"
#include "pmcast/nn/optimizers.hpp"
#include "pmcast/pipeline.hpp"
#include "pmcast/tensor.hpp"

namespace pmcast {

enum class Family { mlp, lstm, cnn };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

// Architecture of one candidate model. For the lstm family `activation`
// replaces the tanh squash of the cell (the gate sigmoids are fixed); for
// mlp/cnn it is the hidden dense activation.
struct ModelSpec {
    Family family = Family::mlp;
    int hidden_layers = 2;     // [2, 10]
    int neurons = 32;          // [1, 100]
    Activation activation = Activation::relu;
    double dropout_rate = 0.2; // fixed by the experiment setup
    bool cnn_dropout_dense = false; // optional dropout on the CNN dense tail

    void validate() const;
};

// CNN conv stage is fixed: 64 filters of width 2, ReLU, pool size 1,
// dropout 0.2, flatten.
inline constexpr int kCnnFilters = 64;

struct TrainConfig {
    Loss loss = Loss::mse;
    Optimizer optimizer = Optimizer::adam;
    int batch_size = 32;  // {32, 64, 128}; 72 allowed for the baseline preset
    int epochs = 100;     // [5, 100]
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct InputShape {
    int lookback = 24;
    int channels = kFeatureCount;
};

class Model {
public:
    // Builds the network for `spec` and initializes weights (Glorot
    // uniform, zero biases) from `init_seed`.
    static Model build(const ModelSpec& spec, InputShape input, std::uint64_t init_seed);

    const ModelSpec& spec() const { return spec_; }
    InputShape input_shape() const { return input_; }
    std::size_t param_count() const;

    // Mini-batch gradient descent over x [N x L x C], y [N]. Returns the
    // per-epoch mean training loss. Throws DivergenceError when the loss
    // goes non-finite.
    std::vector<double> fit(const Tensor& x, const Tensor& y, const TrainConfig& cfg);

    // Deterministic forward pass, dropout off; x [N x L x C] -> [N].
    Tensor predict(const Tensor& x) const;

    void save(const std::filesystem::path& path) const;
    static Model load(const std::filesystem::path& path);

    // Exposed for gradient tests.
    Tensor forward_train_batch(const Tensor& x, Rng& rng);
    void backward_batch(const Tensor& grad_out);
    void zero_grads();
    void collect_params(std::vector<Tensor*>& params, std::vector<Tensor*>& grads,
                        std::vector<std::string>& names);

private:
    ModelSpec spec_;
    InputShape input_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

Model build_model(const ModelSpec& spec, InputShape input, std::uint64_t init_seed);

// Trains on the scenario's training split.
std::vector<double> train(Model& model, const ScenarioDataset& data, const TrainConfig& cfg);

Tensor predict(const Model& model, const Tensor& windows);

void save_loss_history(const std::vector<double>& history, const std::filesystem::path& path);

} // namespace pmcast
