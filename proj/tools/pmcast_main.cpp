#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "pmcast/errors.hpp"
#include "pmcast/fetch.hpp"
#include "pmcast/runner.hpp"
#include "pmcast/strutil.hpp"

namespace {

using namespace pmcast;

struct CliOptions {
    std::string config_file;
    std::string data;
    std::string url;
    std::string out;
    std::vector<std::string> scenarios;
    std::vector<std::string> families;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> lookback;
    bool fast_search = false;
};

RunConfig make_config(const CliOptions& opt) {
    RunConfig cfg;
    if (!opt.config_file.empty()) cfg = RunConfig::from_file(opt.config_file);
    if (!opt.data.empty()) cfg.data_path = opt.data;
    if (!opt.url.empty()) cfg.fetch_url = opt.url;
    if (!opt.out.empty()) cfg.out_dir = opt.out;
    if (!opt.scenarios.empty()) {
        cfg.scenarios.clear();
        for (const auto& s : opt.scenarios) cfg.scenarios.push_back(scenario_from_string(s));
    }
    if (!opt.families.empty()) {
        cfg.families.clear();
        for (const auto& f : opt.families) cfg.families.push_back(family_from_string(f));
    }
    if (opt.seed) cfg.master_seed = *opt.seed;
    if (opt.workers) cfg.workers = *opt.workers;
    if (opt.lookback) cfg.lookback = *opt.lookback;
    if (opt.fast_search) cfg.fast_search = true;
    cfg.validate();
    return cfg;
}

int cmd_fetch(const RunConfig& cfg) {
    const auto dest = cfg.cache_dir / kDatasetFileName;
    FetchResult fr = fetch_dataset(cfg.fetch_url, dest);
    std::cout << (fr.from_cache ? "cache hit: " : "fetched: ") << fr.path.string() << '\n';
    std::cout << "sha256: " << fr.sha256 << '\n';
    if (fr.recorded_sha256 && *fr.recorded_sha256 != fr.sha256)
        std::cerr << "warning: checksum drift (recorded " << *fr.recorded_sha256 << ")\n";

    auto records = load_csv(fr.path.string());
    std::cout << "rows: " << records.size() << " (reported in the source description: "
              << kReportedInstances << ")\n";
    return 0;
}

int cmd_preprocess(const RunConfig& cfg) {
    std::filesystem::path input = cfg.data_path;
    if (input.empty()) input = cfg.cache_dir / kDatasetFileName;
    auto records = load_csv(input.string());
    int missing = 0;
    for (const auto& r : records)
        if (!r.pm25.has_value()) ++missing;
    FeatureMatrix cleaned = clean_and_select(records);
    Normalizer norm = Normalizer::fit(cleaned);

    std::filesystem::create_directories(cfg.out_dir);
    save_feature_csv(cleaned, cfg.out_dir / "cleaned.csv");
    save_normalizer(norm, cfg.out_dir / "normalizer.txt");

    std::cout << "rows loaded: " << records.size() << ", missing pm2.5: " << missing
              << ", cleaned rows: " << cleaned.rows() << '\n';
    if (static_cast<int>(records.size()) != kReportedInstances || missing != kReportedMissing)
        std::cerr << "warning: counts differ from the reported " << kReportedInstances << "/"
                  << kReportedMissing << " (rows/missing)\n";
    std::cout << "wrote " << (cfg.out_dir / "cleaned.csv").string() << " and "
              << (cfg.out_dir / "normalizer.txt").string() << '\n';
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    Runner runner(cfg);
    runner.run_baseline_sweep();
    runner.emit_report();
    int divergent = 0;
    for (const auto& c : runner.result().sweep_cells)
        if (!c.ok) ++divergent;
    std::cout << "sweep complete: " << runner.result().sweep_cells.size() << " cells ("
              << divergent << " divergent), reports in " << cfg.out_dir.string() << '\n';
    return 0;
}

int cmd_tune(const RunConfig& cfg) {
    Runner runner(cfg);
    for (Family f : cfg.families) {
        const TunedResult& t = runner.run_tuning(f);
        std::cout << tuned_label(f) << ": " << t.config.to_kv_string()
                  << "  (val rmse " << format_double(t.trace.back()) << " after "
                  << t.evaluations << " evaluations)\n";
    }
    runner.emit_report();
    std::cout << "tuning reports in " << cfg.out_dir.string() << '\n';
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    Runner runner(cfg);
    runner.mutable_result() = load_journals(cfg.out_dir);
    runner.emit_report();
    std::cout << "reports regenerated in " << cfg.out_dir.string() << '\n';
    return 0;
}

int cmd_all(const RunConfig& cfg) {
    Runner runner(cfg);
    runner.run_baseline_sweep();
    for (Family f : cfg.families) {
        const TunedResult& t = runner.run_tuning(f);
        std::cout << tuned_label(f) << ": " << t.config.to_kv_string() << '\n';
    }
    runner.emit_report();
    std::cout << "full experiment written to " << cfg.out_dir.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PSO-tuned deep forecasting models on the Beijing PM2.5 series"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_file, "key = value config file");
    app.add_option("--data", opt.data, "dataset path (raw UCI csv or cleaned 7-column csv)");
    app.add_option("--url", opt.url, "download URL used by fetch");
    app.add_option("--out", opt.out, "output directory");
    app.add_option("--scenario", opt.scenarios, "daily|weekly|monthly (repeatable)");
    app.add_option("--family", opt.families, "mlp|lstm|cnn (repeatable)");
    app.add_option("--seed", opt.seed, "master seed");
    app.add_option("--workers", opt.workers, "concurrent trainers");
    app.add_option("--lookback", opt.lookback, "window length in hours");
    app.add_flag("--fast-search", opt.fast_search,
                 "cap sweep/search training at 10 epochs (retrains stay full)");

    auto* fetch = app.add_subcommand("fetch", "download and cache the dataset");
    auto* preprocess = app.add_subcommand("preprocess", "clean the raw csv, write cleaned.csv");
    auto* sweep = app.add_subcommand("sweep", "baseline hidden-layer sweep");
    auto* tune = app.add_subcommand("tune", "PSO hyperparameter search per family");
    auto* report = app.add_subcommand("report", "regenerate reports from journals");
    auto* all = app.add_subcommand("all", "sweep + tune + report");
    for (auto* sub : {fetch, preprocess, sweep, tune, report, all}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const RunConfig cfg = make_config(opt);
        if (fetch->parsed()) return cmd_fetch(cfg);
        if (preprocess->parsed()) return cmd_preprocess(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
        if (tune->parsed()) return cmd_tune(cfg);
        if (report->parsed()) return cmd_report(cfg);
        if (all->parsed()) return cmd_all(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
