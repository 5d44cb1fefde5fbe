#ifndef CCAGATE_CONFIG_HPP
#define CCAGATE_CONFIG_HPP

#include "ccagate/analysis.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>

// Run configuration: flat key = value text with [sections], strict schema.
// Physical parameters must be explicit; numerical controls may default.
// All rates are in units of delta, all angles in radians.
//
//   [run]
//   mode = analytic | effective | full
//
//   [params]
//   g = 0.5                  # required
//   nu = 10.0                # required
//   omega_drive = 50.0       # required
//   omega_mw = 10.0          # required
//   fiber_phase = 0.0        # optional
//   cutoff_c = 10            # optional
//   cutoff_pm = 4            # optional
//   td_steps = 0             # optional, 0 = per-mode default
//   leak_threshold = 1e-6    # optional
//
//   [protocol]
//   tau_cycles = 1           # optional
//
//   [grid]                   # sweep only
//   g_values = 0.1, 0.2, 0.5
//
//   [ensemble]               # robustness only
//   states = vacuum, fock:1, fock:2, thermal:0.5
//
//   [output]
//   dir = out                # optional, --out overrides

namespace ccagate {

inline constexpr const char* kArtifactName = "ccagate";
inline constexpr const char* kArtifactVersion = "0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    SystemParams params;
    SimMode mode = SimMode::analytic;
    int tau_cycles = 1;
    std::vector<double> g_grid;          // [grid]
    std::vector<std::string> ensemble;   // [ensemble] raw labels
    std::string out_dir;                 // [output] dir

    bool has_grid = false;
    bool has_ensemble = false;
    bool has_mode = false;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Resolved-config echo with every default filled in; parse_config_text of the
// round-trip text reproduces the struct exactly.
nlohmann::ordered_json config_to_json(const RunConfig& cfg);
std::string config_to_text(const RunConfig& cfg);

FieldEnsemble ensemble_from_labels(const std::vector<std::string>& labels, int cutoff_c);

// RFC-4180-style CSV: fields holding comma, quote or newline get quoted,
// embedded quotes doubled.  Numbers print with %.17g so identical runs give
// identical bytes.
std::string csv_escape(const std::string& field);
std::string format_double(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& os_;
};

// One structured record per run: config echo, diagnostics, result tables.
// Every field except `timing` is bit-reproducible for identical configs.
struct RunRecord {
    std::string command;
    RunConfig config;
    nlohmann::ordered_json results;
    nlohmann::ordered_json diagnostics;
    double wall_ms = 0.0;

    nlohmann::ordered_json to_json() const;
    void write(const std::filesystem::path& path) const;
};

}  // namespace ccagate

#endif
