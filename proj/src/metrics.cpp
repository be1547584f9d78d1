#include "pmcast/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "pmcast/errors.hpp"

namespace pmcast {

MapeResult mape(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw ShapeError("mape: vectors differ in length");
    if (actual.empty()) throw ShapeError("mape: empty vectors");

    MapeResult r;
    double acc = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0) {
            ++r.skipped_zero_targets;
            continue;
        }
        acc += std::fabs(actual[i] - predicted[i]) / actual[i];
        ++r.n_used;
    }
    if (r.n_used == 0)
        throw DataError("mape undefined: every target value is zero");
    r.percent = 100.0 * acc / r.n_used;
    return r;
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw ShapeError("rmse: vectors differ in length");
    if (actual.empty()) throw ShapeError("rmse: empty vectors");
    double acc = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(actual.size()));
}

MetricsReport evaluate_model(const Model& model, const ScenarioDataset& data,
                             const std::string& label) {
    const Tensor pred = model.predict(data.test_x);
    const int n = data.test_count();

    MetricsReport rep;
    rep.model_label = label;
    rep.scenario = data.scenario;
    rep.n_points = n;

    std::span<const double> y = data.test_y.flat();
    std::span<const double> p = pred.flat();
    rep.rmse_normalized = rmse(y, p);

    // invert the pm25 (column 0) scaling for the percentage metric
    std::vector<double> y_raw(y.size()), p_raw(p.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y_raw[i] = data.normalizer.invert_value(y[i], 0);
        p_raw[i] = data.normalizer.invert_value(p[i], 0);
    }
    MapeResult mr = mape(y_raw, p_raw);
    rep.mape_percent = mr.percent;
    rep.skipped_zero_targets = mr.skipped_zero_targets;
    rep.rmse_denormalized = rmse(y_raw, p_raw);

    // normalized-scale MAPE applies its own skip rule (a normalized target
    // is 0 wherever the raw value equals the fitted minimum)
    try {
        rep.mape_normalized = mape(y, p).percent;
    } catch (const DataError&) {
        rep.mape_normalized = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

} // namespace pmcast
