#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "pmcast/errors.hpp"
#include "pmcast/runner.hpp"
#include "pmcast/strutil.hpp"

namespace pmcast {

namespace {

constexpr const char* kVersion = "pmcast 1.0.0";

// Published reference values for the tuned LSTM (reported results; the
// training here is stochastic and the original splits are not public, so
// these are context lines, not reproduction targets).
struct Reference {
    Scenario scenario;
    double mape;
    double rmse;
};
constexpr Reference kReferences[] = {
    {Scenario::daily, 5.4676, 0.0023},
    {Scenario::weekly, 8.6379, 0.0232},
    {Scenario::monthly, 8.4576, 0.0250},
};

std::optional<Reference> reference_for(Scenario s) {
    for (const auto& r : kReferences)
        if (r.scenario == s) return r;
    return std::nullopt;
}

// Fixed display order regardless of the requested family order.
const Family kFamilyOrder[] = {Family::lstm, Family::cnn, Family::mlp};

struct TableData {
    std::vector<std::string> lines; // full csv text
    std::string data_hash_input;    // the numbers that went into the chart
};

std::string format_cell(bool present, bool ok, double value) {
    if (!present || !ok) return "-";
    return format_fixed(value, 4);
}

} // namespace

void Runner::emit_report() const {
    const auto& res = result_;
    if (res.sweep_cells.empty() && res.tuned.empty())
        throw ConfigError("nothing to report: run sweep and/or tune first");
    ensure_outdir();

    // completeness: each requested grid cell exactly once
    std::map<std::string, int> seen;
    for (const auto& c : res.sweep_cells) {
        std::string key = to_string(c.family) + std::string("/") + to_string(c.scenario) +
                          "/" + std::to_string(c.hl);
        ++seen[key];
    }
    if (!res.sweep_cells.empty()) {
        for (Family f : cfg_.families)
            for (Scenario s : cfg_.scenarios)
                for (int hl : cfg_.baseline.hidden_layers) {
                    std::string key = to_string(f) + std::string("/") + to_string(s) + "/" +
                                      std::to_string(hl);
                    auto it = seen.find(key);
                    if (it == seen.end())
                        throw DataError("report incomplete: missing grid cell " + key);
                    if (it->second != 1)
                        throw DataError("report inconsistent: duplicate grid cell " + key);
                }
    }

    auto find_sweep = [&](Family f, Scenario s, int hl) -> const CellResult* {
        for (const auto& c : res.sweep_cells)
            if (c.family == f && c.scenario == s && c.hl == hl) return &c;
        return nullptr;
    };
    auto find_tuned = [&](Family f) -> const TunedResult* {
        for (const auto& t : res.tuned)
            if (t.family == f) return &t;
        return nullptr;
    };
    auto find_tuned_cell = [&](Family f, Scenario s) -> const CellResult* {
        const TunedResult* t = find_tuned(f);
        if (!t) return nullptr;
        for (const auto& c : t->cells)
            if (c.scenario == s) return &c;
        return nullptr;
    };
    auto family_requested = [&](Family f) {
        return std::find(cfg_.families.begin(), cfg_.families.end(), f) != cfg_.families.end();
    };

    std::vector<std::string> svg_hashes;

    for (Scenario scenario : cfg_.scenarios) {
        for (bool mape_table : {true, false}) {
            std::ostringstream out;
            out << "# " << (mape_table ? "MAPE (percent, denormalized ug/m3 scale)"
                                       : "RMSE (normalized [0,1] scale)")
                << "; rows x HL columns, '-' = not applicable or diverged\n";
            if (auto ref = reference_for(scenario))
                out << "# published reference for this scenario (tuned LSTM): MAPE "
                    << format_fixed(ref->mape, 4) << ", RMSE " << format_fixed(ref->rmse, 4)
                    << " (context only, not a reproduction target)\n";
            out << "model";
            for (int hl : cfg_.baseline.hidden_layers) out << ",HL-" << hl;
            out << '\n';

            for (Family f : kFamilyOrder) {
                if (!family_requested(f)) continue;
                if (!res.sweep_cells.empty()) {
                    out << baseline_label(f);
                    for (int hl : cfg_.baseline.hidden_layers) {
                        const CellResult* c = find_sweep(f, scenario, hl);
                        double v = 0.0;
                        if (c && c->ok)
                            v = mape_table ? c->report.mape_percent : c->report.rmse_normalized;
                        out << ',' << format_cell(c != nullptr, c && c->ok, v);
                    }
                    out << '\n';
                }
            }
            for (Family f : kFamilyOrder) {
                if (!family_requested(f)) continue;
                const TunedResult* t = find_tuned(f);
                if (!t) continue;
                out << tuned_label(f);
                const CellResult* c = find_tuned_cell(f, scenario);
                for (int hl : cfg_.baseline.hidden_layers) {
                    if (c && hl == c->hl) {
                        double v = mape_table ? c->report.mape_percent
                                              : c->report.rmse_normalized;
                        out << ',' << format_cell(true, c->ok, v);
                    } else {
                        out << ",-";
                    }
                }
                out << '\n';
            }

            const std::string name = std::string(to_string(scenario)) +
                                     (mape_table ? "_mape_table.csv" : "_rmse_table.csv");
            std::ofstream file(cfg_.out_dir / name);
            if (!file) throw IoError("cannot write " + name);
            file << out.str();
        }

        // grouped-bar comparison: best baseline vs tuned, per family
        std::ostringstream data_key;
        std::ostringstream svg;
        const int panel_w = 360, panel_h = 260, margin = 48;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (2 * panel_w + 60)
            << "\" height=\"" << (panel_h + 80) << "\">\n";
        svg << "<text x=\"16\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
            << to_string(scenario) << " scenario: best baseline vs PSO-tuned</text>\n";

        for (int panel = 0; panel < 2; ++panel) {
            const bool mape_panel = panel == 0;
            const int x0 = 16 + panel * (panel_w + 40);
            const int y0 = 48;
            svg << "<text x=\"" << x0 << "\" y=\"" << (y0 - 6)
                << "\" font-family=\"sans-serif\" font-size=\"12\">"
                << (mape_panel ? "MAPE (%)" : "RMSE (normalized)") << "</text>\n";

            struct Bar {
                std::string label;
                double baseline;
                double tuned;
                bool has_tuned;
            };
            std::vector<Bar> bars;
            for (Family f : kFamilyOrder) {
                if (!family_requested(f)) continue;
                double best = 0.0;
                bool have = false;
                for (int hl : cfg_.baseline.hidden_layers) {
                    const CellResult* c = find_sweep(f, scenario, hl);
                    if (!c || !c->ok) continue;
                    const double v = mape_panel ? c->report.mape_percent
                                                : c->report.rmse_normalized;
                    if (!have || v < best) best = v, have = true;
                }
                const CellResult* tc = find_tuned_cell(f, scenario);
                Bar b{baseline_label(f), have ? best : 0.0,
                      (tc && tc->ok)
                          ? (mape_panel ? tc->report.mape_percent : tc->report.rmse_normalized)
                          : 0.0,
                      tc != nullptr && tc->ok};
                if (have || b.has_tuned) bars.push_back(b);
            }
            double vmax = 1e-12;
            for (const auto& b : bars) vmax = std::max({vmax, b.baseline, b.tuned});

            const int plot_h = panel_h - margin;
            const int group_w = bars.empty() ? panel_w : panel_w / static_cast<int>(bars.size());
            for (std::size_t i = 0; i < bars.size(); ++i) {
                const Bar& b = bars[i];
                const int gx = x0 + static_cast<int>(i) * group_w;
                auto bar = [&](int offset, double v, const char* color) {
                    const int h = static_cast<int>(plot_h * v / vmax);
                    svg << "<rect x=\"" << (gx + offset) << "\" y=\"" << (y0 + plot_h - h)
                        << "\" width=\"28\" height=\"" << h << "\" fill=\"" << color
                        << "\"/>\n";
                    svg << "<text x=\"" << (gx + offset) << "\" y=\""
                        << (y0 + plot_h - h - 4)
                        << "\" font-family=\"sans-serif\" font-size=\"9\">"
                        << format_fixed(v, 4) << "</text>\n";
                };
                bar(8, b.baseline, "#4878a8");
                data_key << (mape_panel ? "mape" : "rmse") << ':' << b.label << ":base="
                         << format_fixed(b.baseline, 6) << ';';
                if (b.has_tuned) {
                    bar(40, b.tuned, "#d1495b");
                    data_key << (mape_panel ? "mape" : "rmse") << ':' << b.label
                             << ":tuned=" << format_fixed(b.tuned, 6) << ';';
                }
                svg << "<text x=\"" << (gx + 8) << "\" y=\"" << (y0 + plot_h + 16)
                    << "\" font-family=\"sans-serif\" font-size=\"11\">" << b.label
                    << "</text>\n";
            }
        }
        svg << "<rect x=\"16\" y=\"" << (panel_h + 52)
            << "\" width=\"12\" height=\"12\" fill=\"#4878a8\"/>"
            << "<text x=\"32\" y=\"" << (panel_h + 62)
            << "\" font-family=\"sans-serif\" font-size=\"11\">best baseline over HL</text>\n";
        svg << "<rect x=\"176\" y=\"" << (panel_h + 52)
            << "\" width=\"12\" height=\"12\" fill=\"#d1495b\"/>"
            << "<text x=\"192\" y=\"" << (panel_h + 62)
            << "\" font-family=\"sans-serif\" font-size=\"11\">PSO-tuned</text>\n";
        svg << "</svg>\n";

        const std::string svg_name = std::string(to_string(scenario)) + "_comparison.svg";
        std::ofstream svg_file(cfg_.out_dir / svg_name);
        if (!svg_file) throw IoError("cannot write " + svg_name);
        svg_file << svg.str();

        std::ostringstream hash;
        hash << svg_name << " data fnv64=" << std::hex << fnv1a64(data_key.str());
        svg_hashes.push_back(hash.str());
    }

    // tuned hyperparameter sheet, one column per tuned family
    if (!res.tuned.empty()) {
        std::ofstream out(cfg_.out_dir / "tuned_configs.csv");
        if (!out) throw IoError("cannot write tuned_configs.csv");
        std::vector<const TunedResult*> cols;
        for (Family f : kFamilyOrder)
            if (const TunedResult* t = find_tuned(f)) cols.push_back(t);
        out << "hyperparameter";
        for (const auto* t : cols) out << ',' << tuned_label(t->family);
        out << '\n';
        auto row = [&](const char* name, auto getter) {
            out << name;
            for (const auto* t : cols) out << ',' << getter(*t);
            out << '\n';
        };
        row("hidden_layers", [](const TunedResult& t) { return std::to_string(t.config.hidden_layers); });
        row("neurons", [](const TunedResult& t) { return std::to_string(t.config.neurons); });
        row("activation", [](const TunedResult& t) { return to_string(t.config.activation); });
        row("loss", [](const TunedResult& t) { return to_string(t.config.loss); });
        row("optimizer", [](const TunedResult& t) { return to_string(t.config.optimizer); });
        row("batch_size", [](const TunedResult& t) { return std::to_string(t.config.batch_size); });
        row("epochs", [](const TunedResult& t) { return std::to_string(t.config.epochs); });
    }

    // run metadata: everything needed to reproduce or audit the run
    {
        std::ofstream out(cfg_.out_dir / "run_metadata.txt");
        if (!out) throw IoError("cannot write run_metadata.txt");
        out << kVersion << "\n\n";
        out << "[config]\n" << cfg_.describe() << '\n';
        out << "[search_space]\n" << space_.describe() << '\n';
        out << "[dataset]\n";
        out << "source=" << info_.source << '\n';
        out << "format=" << (info_.raw ? "raw" : "cleaned") << '\n';
        out << "rows_loaded=" << info_.rows_loaded << '\n';
        out << "missing_pm25=" << info_.missing_pm25 << '\n';
        out << "cleaned_rows=" << info_.cleaned_rows << '\n';
        if (info_.raw &&
            (info_.rows_loaded != kReportedInstances || info_.missing_pm25 != kReportedMissing))
            out << "count_warning=rows/missing differ from the reported "
                << kReportedInstances << "/" << kReportedMissing << '\n';
        out << '\n';
        out << "[policies]\n";
        out << "metric_scales=mape on denormalized ug/m3, rmse on normalized [0,1]; "
               "opposite scales in the journals\n";
        out << "mape_zero_targets=skipped and counted (division by zero otherwise)\n";
        out << "test_tails=daily 24h, weekly 168h, monthly 720h; one fixed chronological "
               "split per scenario\n";
        out << "normalizer=min-max fitted on training rows only; out-of-range test values "
               "clamped into [0,1]\n";
        out << "window_rule=stride-1 windows over consecutive cleaned rows, target is the "
               "next row's pm25\n";
        out << "integer_dims=rounded half-up when decoding\n";
        out << "velocity_clamp=|v| <= " << format_double(cfg_.pso.v_clamp)
            << " per component (magnitude clamp)\n";
        out << "pso_constants=phi1 " << format_double(cfg_.pso.phi1)
            << " on the personal term, phi2 " << format_double(cfg_.pso.phi2)
            << " on the global term, inertia " << format_double(cfg_.pso.inertia) << '\n';
        out << "eval_schedule=n*(1+generations) evaluations"
            << (cfg_.pso.eval_budget
                    ? " capped at " + std::to_string(*cfg_.pso.eval_budget)
                    : std::string(" (no cap)"))
            << '\n';
        out << "gbest_ties=first particle (lowest index) wins exact ties\n";
        out << "tuning_objective=validation RMSE (normalized) on the chronological last "
            << format_double(cfg_.validation_fraction * 100.0)
            << "% of the tuning scenario's training windows\n";
        out << "tuning_scenario=" << to_string(cfg_.scenarios.front()) << '\n';
        out << "fast_search=" << (cfg_.fast_search ? "on (training capped at 10 epochs in "
                                                     "sweep cells and particle evaluations; "
                                                     "final retrains use full epochs)"
                                                   : "off")
            << '\n';
        out << "seed_scheme=per-cell seeds derived by hashing (master, phase, family, "
               "scenario, hl); adding cells never perturbs existing ones\n";
        out << '\n';
        out << "[reference_values]\n";
        for (const auto& r : kReferences)
            out << to_string(r.scenario) << "_tuned_lstm: mape " << format_fixed(r.mape, 4)
                << ", rmse " << format_fixed(r.rmse, 4) << '\n';
        out << "note=reported values from the source experiment; stochastic training and "
               "unpublished splits make them context, not targets\n";
        out << '\n';
        if (!svg_hashes.empty()) {
            out << "[charts]\n";
            for (const auto& h : svg_hashes) out << h << '\n';
            out << '\n';
        }
        bool any_div = false;
        for (const auto& c : res.sweep_cells)
            if (!c.ok) any_div = true;
        for (const auto& t : res.tuned)
            for (const auto& c : t.cells)
                if (!c.ok) any_div = true;
        if (any_div) {
            out << "[divergent_cells]\n";
            for (const auto& c : res.sweep_cells)
                if (!c.ok)
                    out << c.label << '/' << to_string(c.scenario) << "/HL-" << c.hl << ": "
                        << c.error << '\n';
            for (const auto& t : res.tuned)
                for (const auto& c : t.cells)
                    if (!c.ok)
                        out << c.label << '/' << to_string(c.scenario) << ": " << c.error
                            << '\n';
        }
    }

    // timings are deliberately separate: every file above is byte-stable
    // for a fixed config and seed
    {
        std::ofstream out(cfg_.out_dir / "timings.txt");
        for (const auto& c : res.sweep_cells)
            out << c.label << '/' << to_string(c.scenario) << "/HL-" << c.hl << ": "
                << format_fixed(c.wall_ms, 1) << " ms\n";
        for (const auto& t : res.tuned)
            for (const auto& c : t.cells)
                out << c.label << '/' << to_string(c.scenario) << ": "
                    << format_fixed(c.wall_ms, 1) << " ms\n";
    }
}

} // namespace pmcast
