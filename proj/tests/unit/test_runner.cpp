#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "pmcast/errors.hpp"
#include "pmcast/runner.hpp"
#include "pmcast/strutil.hpp"
#include "testutil.hpp"

using namespace pmcast;

namespace {

// small synthetic cleaned CSV with enough signal to train on
std::filesystem::path write_synthetic_csv(const std::filesystem::path& dir, int rows = 400) {
    auto m = testutil::make_matrix(rows, kFeatureCount, [](int r, int c) {
        const double t = 0.13 * r;
        return 30.0 + 10.0 * std::sin(t * (0.2 + 0.1 * c)) + 2.0 * c + 0.01 * r +
               ((r * 7 + c) % 5) * 0.3;
    });
    const auto path = dir / "synthetic.csv";
    save_feature_csv(m, path);
    return path;
}

RunConfig small_config(const std::filesystem::path& data,
                       const std::filesystem::path& out) {
    RunConfig cfg;
    cfg.data_path = data.string();
    cfg.out_dir = out;
    cfg.scenarios = {Scenario::daily};
    cfg.families = {Family::lstm};
    cfg.lookback = 6;
    cfg.baseline.hidden_layers = {2, 3};
    cfg.baseline.epochs = 5;
    cfg.baseline.neurons = 4;
    cfg.master_seed = 7;
    return cfg;
}

std::set<std::string> csv_files(const std::filesystem::path& dir) {
    std::set<std::string> names;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".csv") names.insert(e.path().filename().string());
    return names;
}

} // namespace

TEST_CASE("restricted sweep trains exactly the requested cells") {
    testutil::TempDir dir;
    auto data = write_synthetic_csv(dir.path());
    RunConfig cfg = small_config(data, dir.path() / "out");
    Runner runner(cfg);
    const auto& cells = runner.run_baseline_sweep();
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].hl == 2);
    CHECK(cells[1].hl == 3);
    CHECK(cells[0].ok);
    CHECK(cells[1].ok);
    CHECK(cells[0].report.n_points == 24);
    CHECK(cells[0].seed != cells[1].seed);

    runner.emit_report();
    auto files = csv_files(dir.path() / "out");
    CHECK(files.count("cells.csv") == 1);
    CHECK(files.count("daily_mape_table.csv") == 1);
    CHECK(files.count("daily_rmse_table.csv") == 1);

    // journal: header + one row per cell
    auto journal = testutil::read_file(dir.path() / "out" / "cells.csv");
    CHECK(std::count(journal.begin(), journal.end(), '\n') == 3);
}

TEST_CASE("rerunning with the same master seed is byte-identical") {
    testutil::TempDir dir;
    auto data = write_synthetic_csv(dir.path());

    auto run = [&](const std::filesystem::path& out, int workers) {
        RunConfig cfg = small_config(data, out);
        cfg.workers = workers;
        cfg.families = {Family::lstm, Family::mlp};
        Runner runner(cfg);
        runner.run_baseline_sweep();
        runner.emit_report();
    };
    run(dir.path() / "out1", 1);
    run(dir.path() / "out2", 1);
    run(dir.path() / "out3", 2); // scheduling independence

    for (const auto& name : csv_files(dir.path() / "out1")) {
        const auto a = testutil::read_file(dir.path() / "out1" / name);
        const auto b = testutil::read_file(dir.path() / "out2" / name);
        const auto c = testutil::read_file(dir.path() / "out3" / name);
        CHECK(a == b);
        CHECK(a == c);
    }
}

TEST_CASE("a divergent cell is recorded and the sweep continues") {
    testutil::TempDir dir;
    auto data = write_synthetic_csv(dir.path());
    RunConfig cfg = small_config(data, dir.path() / "out");
    cfg.families = {Family::mlp};
    cfg.learning_rate = 1e200;
    Runner runner(cfg);
    const auto& cells = runner.run_baseline_sweep();
    REQUIRE(cells.size() == 2);
    int divergent = 0;
    for (const auto& c : cells)
        if (!c.ok) ++divergent;
    CHECK(divergent == 2);
    runner.emit_report();
    auto table = testutil::read_file(dir.path() / "out" / "daily_mape_table.csv");
    CHECK(table.find("MLP,-,-") != std::string::npos);
}

TEST_CASE("unwritable output directory fails before any computation") {
    testutil::TempDir dir;
    auto data = write_synthetic_csv(dir.path());
    RunConfig cfg = small_config(data, "/proc/definitely/not/writable");
    CHECK_THROWS_AS(Runner{cfg}, IoError);
}

TEST_CASE("degenerate tuning equals one decoded random sample") {
    testutil::TempDir dir;
    auto data = write_synthetic_csv(dir.path());
    RunConfig cfg = small_config(data, dir.path() / "out");
    cfg.pso.n_particles = 1;
    cfg.pso.generations = 0;
    cfg.fast_search = true;
    Runner runner(cfg);
    const TunedResult& t = runner.run_tuning(Family::lstm);
    CHECK(t.trace.size() == 1);
    CHECK(t.evaluations == 1);
    REQUIRE(t.cells.size() == 1);
    CHECK(t.cells[0].hl == t.config.hidden_layers);

    runner.emit_report();
    auto sheet = testutil::read_file(dir.path() / "out" / "tuned_configs.csv");
    CHECK(sheet.find("Proposed M-1 (PSO-LSTM)") != std::string::npos);
    CHECK(sheet.find("hidden_layers," + std::to_string(t.config.hidden_layers)) !=
          std::string::npos);
    auto trace_csv = testutil::read_file(dir.path() / "out" / "pso_trace_lstm.csv");
    CHECK(trace_csv.find("generation,gbest_score,gbest_config") == 0);
}

TEST_CASE("report regenerates identically from the journals") {
    testutil::TempDir dir;
    auto data = write_synthetic_csv(dir.path());
    RunConfig cfg = small_config(data, dir.path() / "out");
    Runner runner(cfg);
    runner.run_baseline_sweep();
    runner.emit_report();
    const auto table_before = testutil::read_file(dir.path() / "out" / "daily_mape_table.csv");

    RunConfig cfg2 = small_config(data, dir.path() / "out");
    Runner reporter(cfg2);
    reporter.mutable_result() = load_journals(dir.path() / "out");
    reporter.emit_report();
    const auto table_after = testutil::read_file(dir.path() / "out" / "daily_mape_table.csv");
    CHECK(table_before == table_after);
}

TEST_CASE("reporting with no results is an error") {
    testutil::TempDir dir;
    auto data = write_synthetic_csv(dir.path());
    RunConfig cfg = small_config(data, dir.path() / "out");
    Runner runner(cfg);
    CHECK_THROWS_AS(runner.emit_report(), ConfigError);
}

TEST_CASE("raw UCI input is cleaned on load and counts are tracked") {
    testutil::TempDir dir;
    std::string csv = std::string(kUciHeader) + "\n";
    for (int i = 0; i < 200; ++i) {
        const bool missing = i % 50 == 3;
        csv += std::to_string(i + 1) + ",2010,1," + std::to_string(1 + i / 24) + "," +
               std::to_string(i % 24) + "," + (missing ? "NA" : std::to_string(20 + i % 90)) +
               "," + std::to_string(-5 + (i % 11)) + "," + std::to_string(i % 13) + "," +
               std::to_string(1010 + i % 9) + ",NW," + std::to_string(1 + (i % 7) * 0.5) + "," +
               std::to_string(i % 3) + "," + std::to_string(i % 4) + "\n";
    }
    auto path = testutil::write_file(dir.path() / "raw.csv", csv);

    RunConfig cfg = small_config(path, dir.path() / "out");
    cfg.scenarios = {Scenario::daily};
    Runner runner(cfg);
    runner.load_data();
    CHECK(runner.dataset_info().raw);
    CHECK(runner.dataset_info().rows_loaded == 200);
    CHECK(runner.dataset_info().missing_pm25 == 4);
    CHECK(runner.dataset_info().cleaned_rows == 196);
    CHECK(runner.dataset(Scenario::daily).test_count() == 24);
}

TEST_CASE("config file parsing and validation") {
    testutil::TempDir dir;
    auto path = testutil::write_file(dir.path() / "run.conf",
                                     "# comment\n"
                                     "scenarios = daily, weekly\n"
                                     "families = mlp\n"
                                     "lookback = 12\n"
                                     "seed = 99\n"
                                     "pso.generations = 3\n"
                                     "baseline.epochs = 20\n"
                                     "fast_search = true\n");
    RunConfig cfg = RunConfig::from_file(path);
    CHECK(cfg.scenarios.size() == 2);
    CHECK(cfg.families.size() == 1);
    CHECK(cfg.lookback == 12);
    CHECK(cfg.master_seed == 99);
    CHECK(cfg.pso.generations == 3);
    CHECK(cfg.baseline.epochs == 20);
    CHECK(cfg.fast_search);

    auto bad = testutil::write_file(dir.path() / "bad.conf", "no_such_key = 1\n");
    CHECK_THROWS_AS(RunConfig::from_file(bad), ConfigError);

    RunConfig invalid;
    invalid.scenarios.clear();
    CHECK_THROWS_AS(invalid.validate(), ConfigError);
}
