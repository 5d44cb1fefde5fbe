#include "ccagate/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ccagate {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + value + "'");
    return v;
}

const std::map<std::string, std::set<std::string>> kSchema = {
    {"run", {"mode"}},
    {"params",
     {"g", "nu", "omega_drive", "omega_mw", "fiber_phase", "cutoff_c", "cutoff_pm", "td_steps",
      "leak_threshold"}},
    {"protocol", {"tau_cycles"}},
    {"grid", {"g_values"}},
    {"ensemble", {"states"}},
    {"output", {"dir"}},
};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            if (!kSchema.count(section))
                throw ConfigError("config: unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": key outside a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!kSchema.at(section).count(key))
            throw ConfigError("config: unknown key '" + key + "' in section [" + section + "]");
        if (sections[section].count(key))
            throw ConfigError("config: duplicate key '" + key + "' in section [" + section + "]");
        sections[section][key] = value;
    }

    RunConfig cfg;
    auto take = [&](const std::string& sec, const std::string& key) -> std::string* {
        auto s = sections.find(sec);
        if (s == sections.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    };

    if (auto* v = take("run", "mode")) {
        try {
            cfg.mode = sim_mode_from_string(*v);
        } catch (const SimulationError& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        cfg.has_mode = true;
    }

    auto require_param = [&](const std::string& key) -> std::string {
        auto* v = take("params", key);
        if (!v)
            throw ConfigError("config: physical parameter '" + key +
                              "' is required (no silent defaults)");
        return *v;
    };
    cfg.params.delta = 1.0;  // the rate unit
    cfg.params.g = parse_double("g", require_param("g"));
    cfg.params.nu = parse_double("nu", require_param("nu"));
    cfg.params.omega_drive = parse_double("omega_drive", require_param("omega_drive"));
    cfg.params.omega_mw = parse_double("omega_mw", require_param("omega_mw"));
    if (auto* v = take("params", "fiber_phase")) cfg.params.fiber_phase = parse_double("fiber_phase", *v);
    if (auto* v = take("params", "cutoff_c")) cfg.params.cutoff_c = parse_int("cutoff_c", *v);
    if (auto* v = take("params", "cutoff_pm")) cfg.params.cutoff_pm = parse_int("cutoff_pm", *v);
    if (auto* v = take("params", "td_steps")) cfg.params.td_steps = parse_int("td_steps", *v);
    if (auto* v = take("params", "leak_threshold"))
        cfg.params.leak_threshold = parse_double("leak_threshold", *v);

    if (auto* v = take("protocol", "tau_cycles")) cfg.tau_cycles = parse_int("tau_cycles", *v);
    if (cfg.tau_cycles < 1) throw ConfigError("config: tau_cycles must be >= 1");

    if (sections.count("grid")) {
        auto* v = take("grid", "g_values");
        if (!v) throw ConfigError("config: [grid] requires g_values");
        for (const auto& item : split_list(*v)) cfg.g_grid.push_back(parse_double("g_values", item));
        if (cfg.g_grid.empty()) throw ConfigError("config: g_values is empty");
        cfg.has_grid = true;
    }
    if (sections.count("ensemble")) {
        auto* v = take("ensemble", "states");
        if (!v) throw ConfigError("config: [ensemble] requires states");
        cfg.ensemble = split_list(*v);
        if (cfg.ensemble.empty()) throw ConfigError("config: states is empty");
        cfg.has_ensemble = true;
    }
    if (auto* v = take("output", "dir")) cfg.out_dir = *v;

    try {
        cfg.params.validate();
    } catch (const SimulationError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["mode"] = to_string(cfg.mode);
    j["params"] = {{"g", cfg.params.g},
                   {"delta", cfg.params.delta},
                   {"nu", cfg.params.nu},
                   {"omega_drive", cfg.params.omega_drive},
                   {"omega_mw", cfg.params.omega_mw},
                   {"fiber_phase", cfg.params.fiber_phase},
                   {"cutoff_c", cfg.params.cutoff_c},
                   {"cutoff_pm", cfg.params.cutoff_pm},
                   {"td_steps", cfg.params.td_steps},
                   {"leak_threshold", cfg.params.leak_threshold}};
    j["tau_cycles"] = cfg.tau_cycles;
    if (cfg.has_grid) j["grid"] = cfg.g_grid;
    if (cfg.has_ensemble) j["ensemble"] = cfg.ensemble;
    if (!cfg.out_dir.empty()) j["out_dir"] = cfg.out_dir;
    return j;
}

std::string config_to_text(const RunConfig& cfg) {
    std::ostringstream os;
    os << "[run]\nmode = " << to_string(cfg.mode) << "\n\n[params]\n";
    os << "g = " << format_double(cfg.params.g) << "\n";
    os << "nu = " << format_double(cfg.params.nu) << "\n";
    os << "omega_drive = " << format_double(cfg.params.omega_drive) << "\n";
    os << "omega_mw = " << format_double(cfg.params.omega_mw) << "\n";
    os << "fiber_phase = " << format_double(cfg.params.fiber_phase) << "\n";
    os << "cutoff_c = " << cfg.params.cutoff_c << "\n";
    os << "cutoff_pm = " << cfg.params.cutoff_pm << "\n";
    os << "td_steps = " << cfg.params.td_steps << "\n";
    os << "leak_threshold = " << format_double(cfg.params.leak_threshold) << "\n";
    os << "\n[protocol]\ntau_cycles = " << cfg.tau_cycles << "\n";
    if (cfg.has_grid) {
        os << "\n[grid]\ng_values = ";
        for (size_t i = 0; i < cfg.g_grid.size(); ++i)
            os << (i ? ", " : "") << format_double(cfg.g_grid[i]);
        os << "\n";
    }
    if (cfg.has_ensemble) {
        os << "\n[ensemble]\nstates = ";
        for (size_t i = 0; i < cfg.ensemble.size(); ++i) os << (i ? ", " : "") << cfg.ensemble[i];
        os << "\n";
    }
    if (!cfg.out_dir.empty()) os << "\n[output]\ndir = " << cfg.out_dir << "\n";
    return os.str();
}

FieldEnsemble ensemble_from_labels(const std::vector<std::string>& labels, int cutoff_c) {
    FieldEnsemble ensemble;
    for (const auto& label : labels) {
        if (label == "vacuum") {
            ensemble.states.push_back(FieldEnsemble::vacuum());
        } else if (label.rfind("fock:", 0) == 0) {
            ensemble.states.push_back(FieldEnsemble::fock(parse_int("fock", label.substr(5))));
        } else if (label.rfind("thermal:", 0) == 0) {
            const double nbar = parse_double("thermal", label.substr(8));
            // leave headroom below the cutoff: the displacement loop from the
            // highest thermal component must stay clear of the truncation edge
            ensemble.states.push_back(FieldEnsemble::thermal(nbar, std::max(0, cutoff_c - 6)));
        } else {
            throw ConfigError("config: unknown ensemble state '" + label + "'");
        }
    }
    return ensemble;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) os_ << ",";
        os_ << csv_escape(fields[i]);
    }
    os_ << "\n";
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

nlohmann::ordered_json RunRecord::to_json() const {
    nlohmann::ordered_json j;
    j["artifact"] = {{"name", kArtifactName}, {"version", kArtifactVersion}};
    j["command"] = command;
    j["config"] = config_to_json(config);
    j["results"] = results;
    j["diagnostics"] = diagnostics;
    j["timing"] = {{"wall_ms", wall_ms}};
    return j;
}

void RunRecord::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw SimulationError("RunRecord: cannot write '" + path.string() + "'");
    out << to_json().dump(2) << "\n";
}

}  // namespace ccagate
