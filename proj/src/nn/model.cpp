#include "pmcast/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pmcast/errors.hpp"
#include "pmcast/strutil.hpp"

namespace pmcast {

std::string to_string(Family f) {
    switch (f) {
        case Family::mlp: return "mlp";
        case Family::lstm: return "lstm";
        case Family::cnn: return "cnn";
    }
    return "?";
}

Family family_from_string(const std::string& s) {
    if (s == "mlp") return Family::mlp;
    if (s == "lstm") return Family::lstm;
    if (s == "cnn") return Family::cnn;
    throw ConfigError("unknown model family '" + s + "' (expected mlp|lstm|cnn)");
}

void ModelSpec::validate() const {
    if (hidden_layers < 2 || hidden_layers > 10)
        throw ConfigError("hidden_layers must be in [2,10], got " +
                          std::to_string(hidden_layers));
    if (neurons < 1 || neurons > 100)
        throw ConfigError("neurons must be in [1,100], got " + std::to_string(neurons));
    if (dropout_rate != 0.2)
        throw ConfigError("dropout_rate is fixed at 0.2 in this experiment setup");
}

void TrainConfig::validate() const {
    if (batch_size != 32 && batch_size != 64 && batch_size != 128 && batch_size != 72)
        throw ConfigError("batch_size must be one of {32,64,128} (72 for the baseline preset)");
    if (epochs < 5 || epochs > 100)
        throw ConfigError("epochs must be in [5,100], got " + std::to_string(epochs));
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate must be positive and finite");
}

Model Model::build(const ModelSpec& spec, InputShape input, std::uint64_t init_seed) {
    spec.validate();
    if (input.lookback < 1 || input.channels < 1)
        throw ConfigError("input shape must be positive");

    Model m;
    m.spec_ = spec;
    m.input_ = input;

    const int n = spec.neurons;
    switch (spec.family) {
        case Family::mlp: {
            m.layers_.push_back(std::make_unique<FlattenLayer>());
            int width = input.lookback * input.channels;
            for (int i = 0; i < spec.hidden_layers; ++i) {
                m.layers_.push_back(std::make_unique<DenseLayer>(width, n, spec.activation));
                width = n;
            }
            m.layers_.push_back(std::make_unique<DenseLayer>(width, 1, Activation::linear));
            break;
        }
        case Family::lstm: {
            int width = input.channels;
            for (int i = 0; i < spec.hidden_layers; ++i) {
                if (i > 0)
                    m.layers_.push_back(std::make_unique<DropoutLayer>(spec.dropout_rate));
                m.layers_.push_back(std::make_unique<LstmLayer>(width, n, spec.activation));
                width = n;
            }
            m.layers_.push_back(std::make_unique<LastStepLayer>());
            m.layers_.push_back(std::make_unique<DenseLayer>(width, 1, Activation::linear));
            break;
        }
        case Family::cnn: {
            if (input.lookback < Conv1dLayer::kKernelWidth)
                throw ConfigError("cnn needs lookback >= 2");
            m.layers_.push_back(
                std::make_unique<Conv1dLayer>(input.channels, kCnnFilters, Activation::relu));
            m.layers_.push_back(std::make_unique<MaxPool1dLayer>(1));
            m.layers_.push_back(std::make_unique<DropoutLayer>(spec.dropout_rate));
            m.layers_.push_back(std::make_unique<FlattenLayer>());
            int width = (input.lookback - 1) * kCnnFilters;
            for (int i = 0; i < spec.hidden_layers - 1; ++i) {
                m.layers_.push_back(std::make_unique<DenseLayer>(width, n, spec.activation));
                if (spec.cnn_dropout_dense)
                    m.layers_.push_back(std::make_unique<DropoutLayer>(spec.dropout_rate));
                width = n;
            }
            m.layers_.push_back(std::make_unique<DenseLayer>(width, 1, Activation::linear));
            break;
        }
    }

    Rng rng(init_seed);
    for (auto& layer : m.layers_) layer->init_params(rng);
    return m;
}

std::size_t Model::param_count() const {
    std::vector<Tensor*> params, grads;
    std::vector<std::string> names;
    const_cast<Model*>(this)->collect_params(params, grads, names);
    std::size_t total = 0;
    for (const Tensor* p : params) total += p->size();
    return total;
}

void Model::collect_params(std::vector<Tensor*>& params, std::vector<Tensor*>& grads,
                           std::vector<std::string>& names) {
    int idx = 0;
    for (auto& layer : layers_) {
        layer->collect_params(params, grads, names, layer->kind() + std::to_string(idx));
        ++idx;
    }
}

void Model::zero_grads() {
    for (auto& layer : layers_) layer->zero_grad();
}

Tensor Model::forward_train_batch(const Tensor& x, Rng& rng) {
    Tensor cur = x;
    for (auto& layer : layers_) cur = layer->forward_train(cur, rng);
    return cur;
}

void Model::backward_batch(const Tensor& grad_out) {
    Tensor cur = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
}

std::vector<double> Model::fit(const Tensor& x, const Tensor& y, const TrainConfig& cfg) {
    cfg.validate();
    if (x.ndim() != 3)
        throw ShapeError("fit: windows must be [N x L x C], got " + x.shape_str());
    if (y.ndim() != 1 || y.dim(0) != x.dim(0))
        throw ShapeError("fit: targets must be [N] matching the windows");
    const int n = x.dim(0);
    if (n == 0) throw EmptyDatasetError("fit: no training windows");
    if (x.dim(1) != input_.lookback || x.dim(2) != input_.channels)
        throw ShapeError("fit: window shape " + x.shape_str() + " does not match model input");
    if (!x.all_finite() || !y.all_finite())
        throw NumericError("fit: non-finite training data");

    std::vector<Tensor*> params, grads;
    std::vector<std::string> names;
    collect_params(params, grads, names);
    OptimizerState opt;
    opt.init(cfg.optimizer, params);

    Rng rng(cfg.seed);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    const int l = input_.lookback, c = input_.channels;
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(order, rng);
        double epoch_loss = 0.0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int b = std::min(cfg.batch_size, n - start);
            Tensor xb(b, l, c);
            Tensor yb(b, 1);
            for (int i = 0; i < b; ++i) {
                const int src = order[static_cast<std::size_t>(start + i)];
                const double* s = x.data() + static_cast<std::size_t>(src) * l * c;
                std::copy(s, s + static_cast<std::size_t>(l) * c,
                          xb.data() + static_cast<std::size_t>(i) * l * c);
                yb(i, 0) = y(src);
            }
            Tensor out = forward_train_batch(xb, rng);
            LossResult lr = loss(cfg.loss, out, yb);
            if (!std::isfinite(lr.value)) {
                std::ostringstream os;
                os << "training diverged (non-finite " << to_string(cfg.loss) << ") at epoch "
                   << epoch;
                throw DivergenceError(os.str(), epoch);
            }
            zero_grads();
            backward_batch(lr.grad);
            optimizer_step(opt, params, grads, cfg.learning_rate);
            epoch_loss += lr.value * b;
        }
        history.push_back(epoch_loss / n);
    }
    return history;
}

Tensor Model::predict(const Tensor& x) const {
    if (x.ndim() != 3)
        throw ShapeError("predict: windows must be [N x L x C], got " + x.shape_str());
    if (x.dim(1) != input_.lookback || x.dim(2) != input_.channels)
        throw ShapeError("predict: window shape " + x.shape_str() +
                         " does not match model input");
    const int n = x.dim(0);
    const int l = input_.lookback, c = input_.channels;
    Tensor out(n);
    constexpr int kChunk = 256;
    for (int start = 0; start < n; start += kChunk) {
        const int b = std::min(kChunk, n - start);
        Tensor xb(b, l, c);
        std::copy(x.data() + static_cast<std::size_t>(start) * l * c,
                  x.data() + static_cast<std::size_t>(start + b) * l * c, xb.data());
        Tensor cur = xb;
        for (const auto& layer : layers_) cur = layer->infer(cur);
        if (cur.ndim() != 2 || cur.dim(0) != b || cur.dim(1) != 1)
            throw ShapeError("predict: unexpected head output " + cur.shape_str());
        for (int i = 0; i < b; ++i) out(start + i) = cur(i, 0);
    }
    return out;
}

void Model::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "pmcast model v1\n";
    out << "family=" << to_string(spec_.family) << '\n';
    out << "hidden_layers=" << spec_.hidden_layers << '\n';
    out << "neurons=" << spec_.neurons << '\n';
    out << "activation=" << to_string(spec_.activation) << '\n';
    out << "dropout=" << format_double(spec_.dropout_rate) << '\n';
    out << "cnn_dropout_dense=" << (spec_.cnn_dropout_dense ? 1 : 0) << '\n';
    out << "lookback=" << input_.lookback << '\n';
    out << "channels=" << input_.channels << '\n';

    std::vector<Tensor*> params, grads;
    std::vector<std::string> names;
    const_cast<Model*>(this)->collect_params(params, grads, names);
    out << "params=" << params.size() << '\n';
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& t = *params[i];
        out << "param " << names[i] << ' ' << t.ndim();
        for (int d = 0; d < t.ndim(); ++d) out << ' ' << t.dim(d);
        out << '\n';
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (j) out << ' ';
            out << format_double_17(t.data()[j]);
        }
        out << '\n';
    }
    out << "end\n";
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Model Model::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != "pmcast model v1")
        throw FormatError("'" + path.string() + "': not a pmcast model checkpoint");

    ModelSpec spec;
    InputShape shape;
    std::size_t n_params = 0;
    for (int i = 0; i < 9; ++i) {
        if (!std::getline(in, line)) throw FormatError("checkpoint: truncated header");
        auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("checkpoint: bad header line '" + line + "'");
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "family") spec.family = family_from_string(val);
        else if (key == "hidden_layers") spec.hidden_layers = std::stoi(val);
        else if (key == "neurons") spec.neurons = std::stoi(val);
        else if (key == "activation") spec.activation = activation_from_string(val);
        else if (key == "dropout") spec.dropout_rate = std::stod(val);
        else if (key == "cnn_dropout_dense") spec.cnn_dropout_dense = val == "1";
        else if (key == "lookback") shape.lookback = std::stoi(val);
        else if (key == "channels") shape.channels = std::stoi(val);
        else if (key == "params") n_params = static_cast<std::size_t>(std::stoul(val));
        else throw FormatError("checkpoint: unknown header key '" + key + "'");
    }

    Model m = build(spec, shape, /*init_seed=*/0);
    std::vector<Tensor*> params, grads;
    std::vector<std::string> names;
    m.collect_params(params, grads, names);
    if (params.size() != n_params)
        throw FormatError("checkpoint: expected " + std::to_string(params.size()) +
                          " parameter arrays, header says " + std::to_string(n_params));

    for (std::size_t i = 0; i < n_params; ++i) {
        if (!std::getline(in, line)) throw FormatError("checkpoint: truncated parameters");
        std::istringstream hs(line);
        std::string tag, name;
        int ndim = 0;
        hs >> tag >> name >> ndim;
        if (tag != "param" || name != names[i])
            throw FormatError("checkpoint: expected parameter '" + names[i] + "', got '" + line + "'");
        std::vector<int> dims(static_cast<std::size_t>(ndim));
        for (int& d : dims) hs >> d;
        Tensor& t = *params[i];
        if (ndim != t.ndim()) throw FormatError("checkpoint: rank mismatch for " + name);
        for (int d = 0; d < ndim; ++d)
            if (dims[static_cast<std::size_t>(d)] != t.dim(d))
                throw FormatError("checkpoint: shape mismatch for " + name);
        if (!std::getline(in, line)) throw FormatError("checkpoint: missing values for " + name);
        std::istringstream vs(line);
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (!(vs >> t.data()[j]))
                throw FormatError("checkpoint: bad value in " + name);
        }
    }
    return m;
}

Model build_model(const ModelSpec& spec, InputShape input, std::uint64_t init_seed) {
    return Model::build(spec, input, init_seed);
}

std::vector<double> train(Model& model, const ScenarioDataset& data, const TrainConfig& cfg) {
    return model.fit(data.train_x, data.train_y, cfg);
}

Tensor predict(const Model& model, const Tensor& windows) { return model.predict(windows); }

void save_loss_history(const std::vector<double>& history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        out << i << ',' << format_double(history[i]) << '\n';
}

} // namespace pmcast
