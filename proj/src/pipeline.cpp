#include "pmcast/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pmcast/errors.hpp"
#include "pmcast/strutil.hpp"

namespace pmcast {

FeatureMatrix::FeatureMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    values_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    timestamps.resize(static_cast<std::size_t>(rows));
}

FeatureMatrix clean_and_select(const std::vector<RawRecord>& records) {
    int kept = 0;
    for (const auto& r : records)
        if (r.pm25.has_value()) ++kept;
    if (kept == 0) throw EmptyDatasetError("no rows left after dropping missing pm2.5");

    FeatureMatrix m(kept, kFeatureCount);
    int row = 0;
    for (const auto& r : records) {
        if (!r.pm25.has_value()) continue;
        m.at(row, 0) = *r.pm25;
        m.at(row, 1) = r.dewp;
        m.at(row, 2) = r.temp;
        m.at(row, 3) = r.pres;
        m.at(row, 4) = r.iws;
        m.at(row, 5) = r.is_snow;
        m.at(row, 6) = r.ir_rain;
        m.timestamps[static_cast<std::size_t>(row)] = r.when;
        ++row;
    }
    return m;
}

Normalizer Normalizer::fit(const FeatureMatrix& m) {
    if (m.rows() < 2) throw SizeError("normalizer needs at least 2 rows");
    Normalizer n;
    n.mins.resize(static_cast<std::size_t>(m.cols()));
    n.maxs.resize(static_cast<std::size_t>(m.cols()));
    for (int c = 0; c < m.cols(); ++c) {
        double lo = m.at(0, c), hi = m.at(0, c);
        for (int r = 1; r < m.rows(); ++r) {
            lo = std::min(lo, m.at(r, c));
            hi = std::max(hi, m.at(r, c));
        }
        if (!(hi > lo)) {
            const char* name = (m.cols() == kFeatureCount)
                                   ? kFeatureNames[static_cast<std::size_t>(c)]
                                   : "";
            std::ostringstream os;
            os << "degenerate column " << c;
            if (*name) os << " (" << name << ")";
            os << ": min == max == " << lo;
            throw DataError(os.str());
        }
        n.mins[static_cast<std::size_t>(c)] = lo;
        n.maxs[static_cast<std::size_t>(c)] = hi;
    }
    return n;
}

FeatureMatrix normalize(const FeatureMatrix& m, const Normalizer& n, bool clamp01) {
    if (m.cols() != n.cols()) {
        std::ostringstream os;
        os << "normalizer has " << n.cols() << " columns, matrix has " << m.cols();
        throw ShapeError(os.str());
    }
    FeatureMatrix out(m.rows(), m.cols());
    out.timestamps = m.timestamps;
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            double v = n.transform_value(m.at(r, c), c);
            if (clamp01) v = std::clamp(v, 0.0, 1.0);
            out.at(r, c) = v;
        }
    }
    return out;
}

FeatureMatrix denormalize(const FeatureMatrix& m, const Normalizer& n) {
    if (m.cols() != n.cols()) {
        std::ostringstream os;
        os << "normalizer has " << n.cols() << " columns, matrix has " << m.cols();
        throw ShapeError(os.str());
    }
    FeatureMatrix out(m.rows(), m.cols());
    out.timestamps = m.timestamps;
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            out.at(r, c) = n.invert_value(m.at(r, c), c);
    return out;
}

void save_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    if (m.cols() != kFeatureCount)
        throw ShapeError("feature CSV expects the 7 selected columns");
    for (int c = 0; c < kFeatureCount; ++c) {
        if (c) out << ',';
        out << kFeatureNames[static_cast<std::size_t>(c)];
    }
    out << '\n';
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << format_double(m.at(r, c));
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

FeatureMatrix load_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw FormatError("'" + path.string() + "': empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string expected;
    for (int c = 0; c < kFeatureCount; ++c) {
        if (c) expected += ',';
        expected += kFeatureNames[static_cast<std::size_t>(c)];
    }
    if (line != expected)
        throw FormatError("'" + path.string() + "': expected header '" + expected + "'");

    std::vector<double> values;
    int rows = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t pos = 0;
        for (int c = 0; c < kFeatureCount; ++c) {
            std::size_t next = line.find(',', pos);
            std::string tok = line.substr(pos, next == std::string::npos ? next : next - pos);
            double v = 0.0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || p != tok.data() + tok.size()) {
                std::ostringstream os;
                os << "line " << line_no << ": cannot parse '" << tok << "'";
                throw ParseError(os.str());
            }
            values.push_back(v);
            if (next == std::string::npos) {
                if (c != kFeatureCount - 1) {
                    std::ostringstream os;
                    os << "line " << line_no << ": expected " << kFeatureCount << " columns";
                    throw ParseError(os.str());
                }
                pos = line.size();
            } else {
                pos = next + 1;
            }
        }
        ++rows;
    }
    if (rows == 0) throw EmptyDatasetError("'" + path.string() + "': no data rows");

    FeatureMatrix m(rows, kFeatureCount);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < kFeatureCount; ++c)
            m.at(r, c) = values[static_cast<std::size_t>(r) * kFeatureCount + c];
        // Synthetic hourly stamps; the cleaned format only preserves order.
        m.timestamps[static_cast<std::size_t>(r)] =
            Timestamp{2010, 1, 1 + r / 24, r % 24};
    }
    return m;
}

void save_normalizer(const Normalizer& n, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (int c = 0; c < n.cols(); ++c) {
        const char* name = (n.cols() == kFeatureCount)
                               ? kFeatureNames[static_cast<std::size_t>(c)]
                               : nullptr;
        std::string key = name ? name : ("col" + std::to_string(c));
        out << key << ".min=" << format_double_17(n.mins[static_cast<std::size_t>(c)]) << '\n';
        out << key << ".max=" << format_double_17(n.maxs[static_cast<std::size_t>(c)]) << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Normalizer load_normalizer(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    Normalizer n;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("normalizer file: missing '=' in '" + line + "'");
        std::string key = line.substr(0, eq);
        double v = std::stod(line.substr(eq + 1));
        if (key.ends_with(".min"))
            n.mins.push_back(v);
        else if (key.ends_with(".max"))
            n.maxs.push_back(v);
        else
            throw FormatError("normalizer file: unexpected key '" + key + "'");
    }
    if (n.mins.size() != n.maxs.size() || n.mins.empty())
        throw FormatError("normalizer file: unbalanced min/max entries");
    return n;
}

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::daily: return "daily";
        case Scenario::weekly: return "weekly";
        case Scenario::monthly: return "monthly";
    }
    return "?";
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "daily") return Scenario::daily;
    if (s == "weekly") return Scenario::weekly;
    if (s == "monthly") return Scenario::monthly;
    throw ConfigError("unknown scenario '" + s + "' (expected daily|weekly|monthly)");
}

int scenario_test_len(Scenario s) {
    switch (s) {
        case Scenario::daily: return 24;
        case Scenario::weekly: return 168;
        case Scenario::monthly: return 720;
    }
    return 0;
}

ScenarioDataset make_scenario(const FeatureMatrix& m, Scenario s, int lookback) {
    const int rows = m.rows();
    const int test_len = scenario_test_len(s);
    if (lookback < 1) throw ConfigError("lookback must be >= 1");
    if (rows < lookback + test_len + 1) {
        std::ostringstream os;
        os << "need at least " << (lookback + test_len + 1) << " rows for the " << to_string(s)
           << " scenario with lookback " << lookback << ", got " << rows;
        throw SizeError(os.str());
    }

    // Train region = everything before the test-tail targets; the
    // normalizer never sees the held-out rows.
    const int first_test_target = rows - test_len;
    FeatureMatrix train_region(first_test_target, m.cols());
    for (int r = 0; r < first_test_target; ++r) {
        for (int c = 0; c < m.cols(); ++c) train_region.at(r, c) = m.at(r, c);
        train_region.timestamps[static_cast<std::size_t>(r)] =
            m.timestamps[static_cast<std::size_t>(r)];
    }
    Normalizer norm = Normalizer::fit(train_region);
    const FeatureMatrix nm = normalize(m, norm, /*clamp01=*/true);

    ScenarioDataset d;
    d.scenario = s;
    d.lookback = lookback;
    d.normalizer = norm;

    const int n_train = rows - lookback - test_len;
    const int cols = m.cols();
    d.train_x = Tensor(n_train, lookback, cols);
    d.train_y = Tensor(n_train);
    d.test_x = Tensor(test_len, lookback, cols);
    d.test_y = Tensor(test_len);

    for (int t = lookback; t < rows; ++t) {
        const bool is_test = t >= first_test_target;
        const int idx = is_test ? t - first_test_target : t - lookback;
        Tensor& x = is_test ? d.test_x : d.train_x;
        Tensor& y = is_test ? d.test_y : d.train_y;
        for (int k = 0; k < lookback; ++k)
            for (int c = 0; c < cols; ++c) x(idx, k, c) = nm.at(t - lookback + k, c);
        y(idx) = nm.at(t, 0);
        auto key = m.timestamps[static_cast<std::size_t>(t)].hour_key();
        (is_test ? d.test_target_time : d.train_target_time).push_back(key);
    }
    return d;
}

} // namespace pmcast
