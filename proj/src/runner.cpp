#include "pmcast/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "pmcast/errors.hpp"
#include "pmcast/fetch.hpp"
#include "pmcast/strutil.hpp"

namespace pmcast {

namespace {

// Work-stealing loop over [0, n); exceptions are collected and rethrown
// after all workers drain.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    auto body = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int k = std::min(workers, n);
    pool.reserve(static_cast<std::size_t>(k));
    for (int w = 0; w < k; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// Serializes journal rows in task order while cells may finish out of
// order; a row is flushed as soon as every earlier row has been written,
// so a crash loses at most the trailing unfinished cells.
class OrderedJournal {
public:
    OrderedJournal(const std::filesystem::path& path, const std::string& header) {
        out_.open(path);
        if (!out_) throw IoError("cannot write '" + path.string() + "'");
        out_ << header << '\n';
        out_.flush();
    }

    void write(int idx, const std::string& row) {
        std::lock_guard<std::mutex> lock(mu_);
        pending_[idx] = row;
        while (!pending_.empty() && pending_.begin()->first == next_) {
            out_ << pending_.begin()->second << '\n';
            out_.flush();
            pending_.erase(pending_.begin());
            ++next_;
        }
    }

private:
    std::ofstream out_;
    std::mutex mu_;
    std::map<int, std::string> pending_;
    int next_ = 0;
};

Tensor sub_windows(const Tensor& x, int start, int count) {
    const int l = x.dim(1), c = x.dim(2);
    Tensor out(count, l, c);
    std::copy(x.data() + static_cast<std::size_t>(start) * l * c,
              x.data() + static_cast<std::size_t>(start + count) * l * c, out.data());
    return out;
}

Tensor sub_targets(const Tensor& y, int start, int count) {
    Tensor out(count);
    std::copy(y.data() + start, y.data() + start + count, out.data());
    return out;
}

std::string cell_csv_row(const CellResult& c) {
    std::ostringstream os;
    os << c.label << ',' << to_string(c.scenario) << ',' << c.hl << ',';
    if (c.ok) {
        os << format_double(c.report.mape_percent) << ','
           << format_double(c.report.rmse_normalized) << ',' << c.report.n_points << ','
           << c.report.skipped_zero_targets;
    } else {
        os << "-,-,-,-";
    }
    os << ',' << c.seed << ',' << (c.ok ? "ok" : "divergent");
    return os.str();
}

constexpr const char* kCellHeader =
    "model,scenario,hl,mape_percent,rmse_normalized,n_points,skipped_zero_targets,seed,status";

} // namespace

std::string baseline_label(Family f) {
    switch (f) {
        case Family::lstm: return "LSTM";
        case Family::cnn: return "CNN";
        case Family::mlp: return "MLP";
    }
    return "?";
}

std::string tuned_label(Family f) {
    switch (f) {
        case Family::lstm: return "Proposed M-1 (PSO-LSTM)";
        case Family::cnn: return "Proposed M-2 (PSO-CNN)";
        case Family::mlp: return "Proposed M-3 (PSO-MLP)";
    }
    return "?";
}

Runner::Runner(RunConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    ensure_outdir();
}

void Runner::ensure_outdir() const {
    std::error_code ec;
    std::filesystem::create_directories(cfg_.out_dir, ec);
    const auto probe = cfg_.out_dir / ".write_probe";
    std::ofstream test(probe);
    if (!test) throw IoError("output directory '" + cfg_.out_dir.string() + "' is not writable");
    test.close();
    std::filesystem::remove(probe, ec);
}

void Runner::load_data() {
    if (data_loaded_) return;

    std::filesystem::path path = cfg_.data_path;
    if (path.empty()) {
        const auto cached = cfg_.cache_dir / kDatasetFileName;
        FetchResult fr = fetch_dataset(cfg_.fetch_url, cached);
        if (fr.recorded_sha256 && *fr.recorded_sha256 != fr.sha256)
            std::cerr << "warning: checksum drift for " << cached.string() << " (recorded "
                      << *fr.recorded_sha256 << ", actual " << fr.sha256 << ")\n";
        path = fr.path;
    }

    std::ifstream probe(path);
    if (!probe) throw IoError("cannot open dataset '" + path.string() + "'");
    std::string first_line;
    std::getline(probe, first_line);
    probe.close();
    if (!first_line.empty() && first_line.back() == '\r') first_line.pop_back();

    FeatureMatrix cleaned;
    info_.source = path.string();
    if (first_line == kUciHeader) {
        info_.raw = true;
        auto records = load_csv(path.string());
        info_.rows_loaded = static_cast<int>(records.size());
        for (const auto& r : records)
            if (!r.pm25.has_value()) ++info_.missing_pm25;
        cleaned = clean_and_select(records);
        info_.cleaned_rows = cleaned.rows();
        if (info_.rows_loaded != kReportedInstances || info_.missing_pm25 != kReportedMissing)
            std::cerr << "warning: dataset counts " << info_.rows_loaded << "/"
                      << info_.missing_pm25 << " (rows/missing pm2.5) differ from the "
                      << "reported " << kReportedInstances << "/" << kReportedMissing << "\n";
    } else {
        info_.raw = false;
        cleaned = load_feature_csv(path);
        info_.rows_loaded = cleaned.rows();
        info_.cleaned_rows = cleaned.rows();
    }

    for (Scenario s : cfg_.scenarios) datasets_[s] = make_scenario(cleaned, s, cfg_.lookback);
    data_loaded_ = true;
}

const ScenarioDataset& Runner::dataset(Scenario s) const {
    auto it = datasets_.find(s);
    if (it == datasets_.end())
        throw ConfigError(std::string("scenario ") + to_string(s) + " was not prepared");
    return it->second;
}

CellResult Runner::train_one_cell(Family family, Scenario scenario, int hl) const {
    CellResult cell;
    cell.family = family;
    cell.scenario = scenario;
    cell.hl = hl;
    cell.label = baseline_label(family);
    cell.seed = derive_seed(cfg_.master_seed,
                            {"sweep", to_string(family), to_string(scenario),
                             std::to_string(hl)});

    ModelSpec spec;
    spec.family = family;
    spec.hidden_layers = hl;
    spec.neurons = cfg_.baseline.neurons;
    spec.activation = family == Family::lstm ? cfg_.baseline.lstm_activation
                                             : cfg_.baseline.dense_activation;
    spec.dropout_rate = cfg_.baseline.dropout;
    spec.cnn_dropout_dense = cfg_.cnn_dropout_dense;

    TrainConfig train_cfg;
    train_cfg.loss = cfg_.baseline.loss;
    train_cfg.optimizer = cfg_.baseline.optimizer;
    train_cfg.batch_size = cfg_.baseline.batch_size;
    train_cfg.epochs = cfg_.fast_search ? std::min(10, cfg_.baseline.epochs)
                                        : cfg_.baseline.epochs;
    train_cfg.learning_rate = cfg_.learning_rate;
    train_cfg.seed = cell.seed;

    const ScenarioDataset& data = dataset(scenario);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Model model = Model::build(spec, {cfg_.lookback, kFeatureCount},
                                   derive_seed(cell.seed, {"init"}));
        model.fit(data.train_x, data.train_y, train_cfg);
        cell.report = evaluate_model(model, data, cell.label);
    } catch (const DivergenceError& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    cell.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    return cell;
}

const std::vector<CellResult>& Runner::run_baseline_sweep() {
    load_data();

    struct Task {
        Family family;
        Scenario scenario;
        int hl;
    };
    std::vector<Task> tasks;
    for (Family f : cfg_.families)
        for (Scenario s : cfg_.scenarios)
            for (int hl : cfg_.baseline.hidden_layers) tasks.push_back({f, s, hl});

    OrderedJournal journal(cfg_.out_dir / "cells.csv", kCellHeader);
    std::vector<CellResult> cells(tasks.size());
    parallel_for(static_cast<int>(tasks.size()), cfg_.workers, [&](int i) {
        const Task& t = tasks[static_cast<std::size_t>(i)];
        cells[static_cast<std::size_t>(i)] = train_one_cell(t.family, t.scenario, t.hl);
        journal.write(i, cell_csv_row(cells[static_cast<std::size_t>(i)]));
    });

    result_.sweep_cells = std::move(cells);
    return result_.sweep_cells;
}

double Runner::particle_objective(Family family, const ScenarioDataset& tune_data, int n_sub,
                                  const HyperVector& position,
                                  std::uint64_t tune_seed) const {
    const DecodedConfig decoded = decode(position, space_);
    auto [spec, train_cfg] = decoded.materialize(family);
    spec.cnn_dropout_dense = cfg_.cnn_dropout_dense;
    if (cfg_.fast_search) train_cfg.epochs = std::min(10, train_cfg.epochs);
    train_cfg.learning_rate = cfg_.learning_rate;

    // Seed from the position itself: identical positions evaluate
    // identically no matter which worker or generation touches them.
    std::string pos_key;
    for (double c : position.coords) pos_key += format_double_17(c) + ",";
    train_cfg.seed = derive_seed(tune_seed, {"particle", pos_key});

    const int n_total = tune_data.train_count();
    const int n_val = n_total - n_sub;
    try {
        Model model = Model::build(spec, {cfg_.lookback, kFeatureCount},
                                   derive_seed(train_cfg.seed, {"init"}));
        Tensor tx = sub_windows(tune_data.train_x, 0, n_sub);
        Tensor ty = sub_targets(tune_data.train_y, 0, n_sub);
        model.fit(tx, ty, train_cfg);
        Tensor vx = sub_windows(tune_data.train_x, n_sub, n_val);
        Tensor vy = sub_targets(tune_data.train_y, n_sub, n_val);
        Tensor pred = model.predict(vx);
        return rmse(vy.flat(), pred.flat());
    } catch (const DivergenceError&) {
        return std::numeric_limits<double>::infinity(); // penalty, swarm continues
    }
}

const TunedResult& Runner::run_tuning(Family family) {
    load_data();

    const Scenario tune_scenario = cfg_.scenarios.front();
    const ScenarioDataset& tune_data = dataset(tune_scenario);
    const std::uint64_t tune_seed =
        derive_seed(cfg_.master_seed, {"tune", to_string(family), to_string(tune_scenario)});

    const int n_total = tune_data.train_count();
    int n_val = static_cast<int>(std::floor(n_total * cfg_.validation_fraction + 0.5));
    n_val = std::max(1, std::min(n_val, n_total - 1));
    const int n_sub = n_total - n_val;

    PsoConfig pso_cfg = cfg_.pso;
    pso_cfg.seed = tune_seed;

    Objective objective = [&](const HyperVector& v) {
        return particle_objective(family, tune_data, n_sub, v, tune_seed);
    };
    BatchEvaluator batch_eval = [&](const std::vector<HyperVector>& positions) {
        std::vector<double> scores(positions.size());
        parallel_for(static_cast<int>(positions.size()), cfg_.workers, [&](int i) {
            scores[static_cast<std::size_t>(i)] =
                objective(positions[static_cast<std::size_t>(i)]);
        });
        return scores;
    };

    PsoResult pso_res = optimize(space_, pso_cfg, objective, &batch_eval);

    TunedResult tuned;
    tuned.family = family;
    tuned.tuned_on = tune_scenario;
    tuned.config = decode(pso_res.best, space_);
    tuned.trace = pso_res.trace;
    tuned.evaluations = pso_res.evaluations;

    // trace journal: generation, gbest score, that generation's gbest decoded
    {
        std::ofstream out(cfg_.out_dir / ("pso_trace_" + to_string(family) + ".csv"));
        if (!out) throw IoError("cannot write the PSO trace");
        out << "generation,gbest_score,gbest_config\n";
        for (std::size_t g = 0; g < tuned.trace.size(); ++g)
            out << g << ',' << format_double(tuned.trace[g]) << ','
                << decode(pso_res.trace_best[g], space_).to_kv_string() << '\n';
    }

    // winner retrained per scenario on the full training split, full epochs
    for (Scenario s : cfg_.scenarios) {
        CellResult cell;
        cell.family = family;
        cell.scenario = s;
        cell.hl = tuned.config.hidden_layers;
        cell.label = tuned_label(family);
        cell.tuned = true;
        cell.seed = derive_seed(cfg_.master_seed,
                                {"tune-retrain", to_string(family), to_string(s)});
        auto [spec, train_cfg] = tuned.config.materialize(family);
        spec.cnn_dropout_dense = cfg_.cnn_dropout_dense;
        train_cfg.learning_rate = cfg_.learning_rate;
        train_cfg.seed = cell.seed;
        const ScenarioDataset& data = dataset(s);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            Model model = Model::build(spec, {cfg_.lookback, kFeatureCount},
                                       derive_seed(cell.seed, {"init"}));
            auto history = model.fit(data.train_x, data.train_y, train_cfg);
            cell.report = evaluate_model(model, data, cell.label);

            std::filesystem::create_directories(cfg_.out_dir / "models");
            const std::string stem = "pso_" + to_string(family) + "_" + to_string(s);
            model.save(cfg_.out_dir / "models" / (stem + ".ckpt"));
            save_loss_history(history, cfg_.out_dir / "models" / (stem + "_loss.csv"));
        } catch (const DivergenceError& e) {
            cell.ok = false;
            cell.error = e.what();
        }
        cell.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
        tuned.cells.push_back(std::move(cell));
    }

    result_.tuned.push_back(std::move(tuned));

    // journal every tuned cell so `report` can run without recomputing
    {
        std::ofstream out(cfg_.out_dir / "tuned_cells.csv", std::ios::trunc);
        if (!out) throw IoError("cannot write tuned_cells.csv");
        out << kCellHeader << '\n';
        for (const auto& t : result_.tuned)
            for (const auto& c : t.cells) out << cell_csv_row(c) << '\n';
    }
    {
        std::ofstream out(cfg_.out_dir / "tuned_journal.csv", std::ios::trunc);
        if (!out) throw IoError("cannot write tuned_journal.csv");
        out << "family,hidden_layers,neurons,activation,loss,optimizer,batch_size,epochs,"
               "tuned_on,evaluations,initial_gbest,final_gbest\n";
        for (const auto& t : result_.tuned) {
            out << to_string(t.family) << ',' << t.config.hidden_layers << ','
                << t.config.neurons << ',' << to_string(t.config.activation) << ','
                << to_string(t.config.loss) << ',' << to_string(t.config.optimizer) << ','
                << t.config.batch_size << ',' << t.config.epochs << ','
                << to_string(t.tuned_on) << ',' << t.evaluations << ','
                << format_double(t.trace.front()) << ',' << format_double(t.trace.back())
                << '\n';
        }
    }

    return result_.tuned.back();
}

ExperimentResult load_journals(const std::filesystem::path& dir) {
    ExperimentResult res;

    auto parse_cells = [](const std::filesystem::path& path, bool tuned) {
        std::vector<CellResult> cells;
        std::ifstream in(path);
        if (!in) return cells;
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto f = split(line, ',');
            if (f.size() != 9) throw FormatError("journal row has unexpected shape: " + line);
            CellResult c;
            c.label = f[0];
            c.scenario = scenario_from_string(f[1]);
            c.hl = std::stoi(f[2]);
            c.tuned = tuned;
            c.ok = f[8] == "ok";
            if (c.ok) {
                c.report.model_label = c.label;
                c.report.scenario = c.scenario;
                c.report.mape_percent = std::stod(f[3]);
                c.report.rmse_normalized = std::stod(f[4]);
                c.report.n_points = std::stoi(f[5]);
                c.report.skipped_zero_targets = std::stoi(f[6]);
            }
            c.seed = std::stoull(f[7]);
            if (c.label == "LSTM" || c.label.find("LSTM") != std::string::npos)
                c.family = Family::lstm;
            if (c.label == "CNN" || c.label.find("CNN") != std::string::npos)
                c.family = Family::cnn;
            if (c.label == "MLP" || c.label.find("MLP") != std::string::npos)
                c.family = Family::mlp;
            cells.push_back(std::move(c));
        }
        return cells;
    };

    res.sweep_cells = parse_cells(dir / "cells.csv", false);
    auto tuned_cells = parse_cells(dir / "tuned_cells.csv", true);

    std::ifstream in(dir / "tuned_journal.csv");
    if (in) {
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto f = split(line, ',');
            if (f.size() != 12) throw FormatError("tuned_configs row has unexpected shape");
            TunedResult t;
            t.family = family_from_string(f[0]);
            t.config.hidden_layers = std::stoi(f[1]);
            t.config.neurons = std::stoi(f[2]);
            t.config.activation = activation_from_string(f[3]);
            t.config.loss = loss_from_string(f[4]);
            t.config.optimizer = optimizer_from_string(f[5]);
            t.config.batch_size = std::stoi(f[6]);
            t.config.epochs = std::stoi(f[7]);
            t.tuned_on = scenario_from_string(f[8]);
            t.evaluations = std::stoull(f[9]);
            t.trace = {std::stod(f[10]), std::stod(f[11])};
            for (const auto& c : tuned_cells)
                if (c.family == t.family) t.cells.push_back(c);
            res.tuned.push_back(std::move(t));
        }
    }
    return res;
}

} // namespace pmcast
