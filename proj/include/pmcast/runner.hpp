#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmcast/metrics.hpp"
#include "pmcast/runconfig.hpp"

namespace pmcast {

// One trained-and-scored grid entry (baseline sweep cell or tuned retrain).
struct CellResult {
    Family family = Family::mlp;
    Scenario scenario = Scenario::daily;
    int hl = 0;
    std::string label;
    bool tuned = false;
    bool ok = true;
    std::string error; // divergence note when !ok
    MetricsReport report;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
};

struct TunedResult {
    Family family = Family::mlp;
    Scenario tuned_on = Scenario::daily;
    DecodedConfig config;
    std::vector<double> trace; // gbest validation RMSE after init + per generation
    std::uint64_t evaluations = 0;
    std::vector<CellResult> cells; // winner retrained + scored per scenario
};

struct ExperimentResult {
    std::vector<CellResult> sweep_cells;
    std::vector<TunedResult> tuned;
};

struct DatasetInfo {
    std::string source;
    bool raw = false;
    int rows_loaded = 0;
    int missing_pm25 = 0;
    int cleaned_rows = 0;
};

// Counts reported in the source dataset's description; the published file
// differs by one (43,824 rows / 2,067 missing), which is surfaced as a
// warning rather than an error.
inline constexpr int kReportedInstances = 43825;
inline constexpr int kReportedMissing = 2068;

std::string baseline_label(Family f);
std::string tuned_label(Family f); // "Proposed M-1 (PSO-LSTM)" etc.

class Runner {
public:
    explicit Runner(RunConfig cfg);

    // Resolves cfg.data (fetching into the cache when absent), cleans raw
    // input, and builds one fixed ScenarioDataset per requested scenario.
    void load_data();

    // 3 families x 9 hidden-layer counts x scenarios with the baseline
    // preset; each cell gets its own derived seed and is flushed to the
    // journal as soon as it finishes. Divergent cells are recorded and the
    // sweep continues.
    const std::vector<CellResult>& run_baseline_sweep();

    // PSO over the hyperparameter box; objective = validation RMSE on the
    // chronological last `validation_fraction` of the tuning scenario's
    // training windows. The winner is retrained on each scenario's full
    // training split and scored on its test split.
    const TunedResult& run_tuning(Family family);

    // Tables, tuned-config sheet, comparison SVGs and run metadata.
    void emit_report() const;

    const ExperimentResult& result() const { return result_; }
    ExperimentResult& mutable_result() { return result_; }
    const RunConfig& config() const { return cfg_; }
    const DatasetInfo& dataset_info() const { return info_; }
    const ScenarioDataset& dataset(Scenario s) const;

private:
    void ensure_outdir() const;
    CellResult train_one_cell(Family family, Scenario scenario, int hl) const;
    double particle_objective(Family family, const ScenarioDataset& tune_data, int n_sub,
                              const HyperVector& position, std::uint64_t tune_seed) const;

    RunConfig cfg_;
    SearchSpace space_ = SearchSpace::standard();
    DatasetInfo info_;
    std::map<Scenario, ScenarioDataset> datasets_;
    ExperimentResult result_;
    bool data_loaded_ = false;
};

// Rebuilds an ExperimentResult from the journals in `dir` (cells.csv,
// tuned_cells.csv, tuned_configs.csv) so `report` can run standalone.
ExperimentResult load_journals(const std::filesystem::path& dir);

} // namespace pmcast
