#pragma once

#include <span>
#include <string>

#include "pmcast/nn/model.hpp"
#include "pmcast/pipeline.hpp"

namespace pmcast {

struct MapeResult {
    double percent = 0.0;
    int n_used = 0;              // points retained after the zero-target skip
    int skipped_zero_targets = 0;
};

// Mean absolute percentage error: (100/n) * sum |a_t - p_t| / a_t over the
// points with a_t != 0. Zero-valued targets are skipped and counted; an
// all-zero target vector is an undefined-metric error.
MapeResult mape(std::span<const double> actual, std::span<const double> predicted);

// Root mean square error, sqrt(mean((a_t - p_t)^2)).
double rmse(std::span<const double> actual, std::span<const double> predicted);

struct MetricsReport {
    std::string model_label;
    Scenario scenario = Scenario::daily;
    double mape_percent = 0.0;     // on the denormalized ug/m3 scale
    double rmse_normalized = 0.0;  // on the [0,1] normalized scale
    int n_points = 0;
    int skipped_zero_targets = 0;
    // opposite-scale values for verbose reports
    double mape_normalized = 0.0;
    double rmse_denormalized = 0.0;
};

// Predicts the test split and scores it: RMSE on the normalized values,
// MAPE after inverting the pm25 normalization.
MetricsReport evaluate_model(const Model& model, const ScenarioDataset& data,
                             const std::string& label);

} // namespace pmcast
