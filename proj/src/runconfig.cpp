#include "pmcast/runconfig.hpp"

#include <fstream>
#include <sstream>

#include "pmcast/errors.hpp"
#include "pmcast/strutil.hpp"

namespace pmcast {

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

long parse_long(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

double parse_real(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

} // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto eq = s.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "config line " << line_no << ": expected 'key = value', got '" << s << "'";
            throw ConfigError(os.str());
        }
        cfg.apply(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return cfg;
}

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "data") {
        data_path = value;
    } else if (key == "url") {
        fetch_url = value;
    } else if (key == "cache_dir") {
        cache_dir = value;
    } else if (key == "out") {
        out_dir = value;
    } else if (key == "scenarios") {
        scenarios.clear();
        for (const auto& tok : split(value, ','))
            scenarios.push_back(scenario_from_string(trim(tok)));
    } else if (key == "families") {
        families.clear();
        for (const auto& tok : split(value, ','))
            families.push_back(family_from_string(trim(tok)));
    } else if (key == "lookback") {
        lookback = static_cast<int>(parse_long(value, key));
    } else if (key == "learning_rate") {
        learning_rate = parse_real(value, key);
    } else if (key == "validation_fraction") {
        validation_fraction = parse_real(value, key);
    } else if (key == "cnn_dropout_dense") {
        cnn_dropout_dense = parse_bool(value, key);
    } else if (key == "fast_search") {
        fast_search = parse_bool(value, key);
    } else if (key == "workers") {
        workers = static_cast<int>(parse_long(value, key));
    } else if (key == "seed") {
        master_seed = static_cast<std::uint64_t>(parse_long(value, key));
    } else if (key == "baseline.neurons") {
        baseline.neurons = static_cast<int>(parse_long(value, key));
    } else if (key == "baseline.epochs") {
        baseline.epochs = static_cast<int>(parse_long(value, key));
    } else if (key == "baseline.batch_size") {
        baseline.batch_size = static_cast<int>(parse_long(value, key));
    } else if (key == "baseline.loss") {
        baseline.loss = loss_from_string(value);
    } else if (key == "baseline.optimizer") {
        baseline.optimizer = optimizer_from_string(value);
    } else if (key == "baseline.dense_activation") {
        baseline.dense_activation = activation_from_string(value);
    } else if (key == "baseline.lstm_activation") {
        baseline.lstm_activation = activation_from_string(value);
    } else if (key == "baseline.hidden_layers") {
        baseline.hidden_layers.clear();
        for (const auto& tok : split(value, ','))
            baseline.hidden_layers.push_back(static_cast<int>(parse_long(trim(tok), key)));
    } else if (key == "pso.particles") {
        pso.n_particles = static_cast<int>(parse_long(value, key));
    } else if (key == "pso.generations") {
        pso.generations = static_cast<int>(parse_long(value, key));
    } else if (key == "pso.phi1") {
        pso.phi1 = parse_real(value, key);
    } else if (key == "pso.phi2") {
        pso.phi2 = parse_real(value, key);
    } else if (key == "pso.inertia") {
        pso.inertia = parse_real(value, key);
    } else if (key == "pso.v_clamp") {
        pso.v_clamp = parse_real(value, key);
    } else if (key == "pso.eval_budget") {
        long b = parse_long(value, key);
        if (b <= 0)
            pso.eval_budget.reset();
        else
            pso.eval_budget = static_cast<std::uint64_t>(b);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void RunConfig::validate() const {
    if (scenarios.empty()) throw ConfigError("at least one scenario is required");
    if (families.empty()) throw ConfigError("at least one model family is required");
    if (lookback < 2) throw ConfigError("lookback must be >= 2 (the CNN kernel spans 2 steps)");
    if (!(validation_fraction > 0.0 && validation_fraction < 0.5))
        throw ConfigError("validation_fraction must be in (0, 0.5)");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (baseline.neurons < 1 || baseline.neurons > 100)
        throw ConfigError("baseline.neurons must be in [1,100]");
    for (int hl : baseline.hidden_layers)
        if (hl < 2 || hl > 10) throw ConfigError("baseline hidden layers must be in [2,10]");
    pso.validate();
}

std::string RunConfig::describe() const {
    std::ostringstream os;
    os << "data=" << data_path << '\n';
    os << "url=" << fetch_url << '\n';
    os << "cache_dir=" << cache_dir.string() << '\n';
    os << "out=" << out_dir.string() << '\n';
    os << "scenarios=";
    for (std::size_t i = 0; i < scenarios.size(); ++i)
        os << (i ? "," : "") << to_string(scenarios[i]);
    os << '\n';
    os << "families=";
    for (std::size_t i = 0; i < families.size(); ++i)
        os << (i ? "," : "") << to_string(families[i]);
    os << '\n';
    os << "lookback=" << lookback << '\n';
    os << "learning_rate=" << format_double(learning_rate) << '\n';
    os << "validation_fraction=" << format_double(validation_fraction) << '\n';
    os << "cnn_dropout_dense=" << (cnn_dropout_dense ? "true" : "false") << '\n';
    os << "fast_search=" << (fast_search ? "true" : "false") << '\n';
    os << "workers=" << workers << '\n';
    os << "seed=" << master_seed << '\n';
    os << "baseline.neurons=" << baseline.neurons << '\n';
    os << "baseline.epochs=" << baseline.epochs << '\n';
    os << "baseline.batch_size=" << baseline.batch_size << '\n';
    os << "baseline.loss=" << to_string(baseline.loss) << '\n';
    os << "baseline.optimizer=" << to_string(baseline.optimizer) << '\n';
    os << "baseline.dense_activation=" << to_string(baseline.dense_activation) << '\n';
    os << "baseline.lstm_activation=" << to_string(baseline.lstm_activation) << '\n';
    os << "baseline.hidden_layers=";
    for (std::size_t i = 0; i < baseline.hidden_layers.size(); ++i)
        os << (i ? "," : "") << baseline.hidden_layers[i];
    os << '\n';
    os << "pso.particles=" << pso.n_particles << '\n';
    os << "pso.generations=" << pso.generations << '\n';
    os << "pso.phi1=" << format_double(pso.phi1) << '\n';
    os << "pso.phi2=" << format_double(pso.phi2) << '\n';
    os << "pso.inertia=" << format_double(pso.inertia) << '\n';
    os << "pso.v_clamp=" << format_double(pso.v_clamp) << '\n';
    os << "pso.eval_budget=" << (pso.eval_budget ? std::to_string(*pso.eval_budget) : "none")
       << '\n';
    return os.str();
}

} // namespace pmcast
