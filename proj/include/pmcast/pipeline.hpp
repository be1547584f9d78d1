#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pmcast/csv.hpp"
#include "pmcast/tensor.hpp"

namespace pmcast {

inline constexpr int kFeatureCount = 7;
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "pm25", "dewp", "temp", "pres", "iws", "is_snow", "ir_rain"};

// Cleaned numeric matrix plus per-row timestamps. The pipeline always
// produces kFeatureCount columns; the width stays a runtime value so small
// single-column fixtures can exercise the same code.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& at(int r, int c) { return values_[static_cast<std::size_t>(r) * cols_ + c]; }
    double at(int r, int c) const { return values_[static_cast<std::size_t>(r) * cols_ + c]; }
    const std::vector<double>& values() const { return values_; }

    std::vector<Timestamp> timestamps; // size rows(), strictly increasing

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> values_;
};

// Drops rows with missing pm2.5 and projects onto the seven feature columns
// (pm25, dewp, temp, pres, iws, is_snow, ir_rain). cbwd and the calendar
// columns are discarded.
FeatureMatrix clean_and_select(const std::vector<RawRecord>& records);

// Per-column min/max scaler: x -> (x - min)/(max - min).
struct Normalizer {
    std::vector<double> mins;
    std::vector<double> maxs;

    static Normalizer fit(const FeatureMatrix& m);

    int cols() const { return static_cast<int>(mins.size()); }
    double transform_value(double x, int col) const {
        return (x - mins[static_cast<std::size_t>(col)]) /
               (maxs[static_cast<std::size_t>(col)] - mins[static_cast<std::size_t>(col)]);
    }
    double invert_value(double y, int col) const {
        return mins[static_cast<std::size_t>(col)] +
               y * (maxs[static_cast<std::size_t>(col)] - mins[static_cast<std::size_t>(col)]);
    }
};

// clamp01 = true additionally projects results into [0,1]; used when the
// normalizer was fitted on training rows only and the input may exceed the
// fitted range.
FeatureMatrix normalize(const FeatureMatrix& m, const Normalizer& n, bool clamp01 = false);
FeatureMatrix denormalize(const FeatureMatrix& m, const Normalizer& n);

void save_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path);
// Loads a cleaned 7-column CSV; timestamps are synthesized as consecutive
// hours (only ordering matters downstream).
FeatureMatrix load_feature_csv(const std::filesystem::path& path);

void save_normalizer(const Normalizer& n, const std::filesystem::path& path);
Normalizer load_normalizer(const std::filesystem::path& path);

enum class Scenario { daily, weekly, monthly };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);
// Held-out chronological tail per scenario: 24 / 168 / 720 hourly targets.
int scenario_test_len(Scenario s);

// Windowed, normalized train/test arrays for one scenario. Immutable after
// construction and safe to share read-only across concurrent trainers.
struct ScenarioDataset {
    Scenario scenario = Scenario::daily;
    int lookback = 0;
    Tensor train_x; // [N_train x L x 7]
    Tensor train_y; // [N_train], normalized pm25 at t+1
    Tensor test_x;  // [N_test x L x 7]
    Tensor test_y;  // [N_test]
    Normalizer normalizer; // fitted on training rows only
    std::vector<std::int64_t> train_target_time; // hour keys of the targets
    std::vector<std::int64_t> test_target_time;

    int train_count() const { return train_x.ndim() ? train_x.dim(0) : 0; }
    int test_count() const { return test_x.ndim() ? test_x.dim(0) : 0; }
};

// Builds stride-1 windows of `lookback` consecutive rows; the target is the
// pm25 value of the row immediately after the window. The last
// scenario_test_len(s) targets form the test split; the normalizer is
// fitted on the rows before them and out-of-range test values are clamped
// into [0,1].
ScenarioDataset make_scenario(const FeatureMatrix& m, Scenario s, int lookback);

} // namespace pmcast
