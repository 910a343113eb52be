#pragma once

// Batch front end: named scenarios, flat key=value configuration, and the
// reports written for each run (profile.csv, summary.json, summary.csv).

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semilab/eventual_positivity.hpp"
#include "semilab/form_assembly.hpp"
#include "semilab/semigroup_engine.hpp"

namespace semilab {

struct ScenarioInfo {
    std::string name;
    std::string citation;
    std::string description;
};

/// The eight registered scenarios in catalogue order.
const std::vector<ScenarioInfo>& scenario_registry();
const ScenarioInfo* find_scenario(const std::string& name);

/// One line per scenario, or a JSON array of descriptors.
std::string list_scenarios(bool json = false);

/// Thrown for configuration problems (exit code 1).
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// A pipeline failure tagged with the stage that raised it. Failures in the
/// build stage caused by invalid parameters count as configuration errors.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what, bool config);
    const std::string& stage() const { return stage_; }
    bool config_error() const { return config_; }

private:
    std::string stage_;
    bool config_;
};

struct ScenarioConfig {
    std::string scenario;
    std::optional<double> L;           // half width, interval length or domain size
    std::optional<int> n;              // grid size (interior nodes, cells or nodes)
    std::optional<int> N;              // block size (ex9_2 only)
    std::optional<double> t_max;       // last profile time
    std::optional<int> points;         // profile points
    std::optional<int> grid_points;    // positivity grid points
    std::optional<double> eps;         // positivity tolerance
    std::optional<double> kernel_tol;  // classification tolerance
    std::optional<double> absorption;  // constant absorption (ex4_2a)
    std::filesystem::path output_dir;  // empty: no files written

    /// Sets one key. Throws ConfigError for unknown keys or malformed values.
    void set(const std::string& key, const std::string& value);
    /// Parses "key=value".
    void set_assignment(const std::string& assignment);
    /// Reads a flat key=value file; blank lines and '#' comments are skipped.
    void load_file(const std::filesystem::path& file);
    /// Registry membership and documented ranges (n <= 4000, N n <= 5000).
    void validate() const;
};

struct Verdict {
    std::string name;
    bool value = false;
    double tolerance = 0.0;
    std::string detail;
};

struct ScenarioReport {
    std::string scenario;
    std::string citation;
    std::string generator_label;
    std::map<std::string, double> parameters;  // resolved numeric settings
    int unknowns = 0;

    SpectralSummary spectrum;
    MetzlerReport metzler;
    std::optional<bool> irreducible;
    std::optional<PositivityCertificate> positivity;

    double projection_lambda0 = 0.0;
    std::vector<ProfilePoint> profile;
    std::vector<double> profile_min_entry;
    std::optional<RateFit> fit;
    double final_distance = 0.0;
    std::optional<AsymptoticClassification> classification;

    std::map<std::string, double> measurements;  // scenario-specific numbers
    std::vector<Verdict> verdicts;
    std::vector<std::filesystem::path> files;

    bool all_verdicts_true() const;
};

/// Builds the scenario generator and runs positivity, irreducibility or
/// eventual positivity, projection, profile, rate fit and classification.
/// Writes profile.csv, summary.json and summary.csv when an output directory
/// is set; on failure those files are removed and a StageError is thrown.
ScenarioReport run_scenario(const ScenarioConfig& cfg);

struct SweepReport {
    std::string parameter;
    std::vector<double> values;
    std::vector<std::optional<ScenarioReport>> reports;  // empty on failure
    SweepTable table;
    std::vector<std::optional<double>> t1;
    std::filesystem::path csv;
};

/// Runs the scenario for each value of L or n (at least two values). Each run
/// writes into output_dir/<param>_<index>; sweep.csv collects value, lambda0,
/// gap, delta_fit and t1 per row. Failed rows are marked and the sweep goes on.
SweepReport run_sweep(const ScenarioConfig& cfg, const std::string& parameter, const std::vector<double>& values);

/// 17 significant digits, '.' decimal point.
std::string format_number(double v);

}  // namespace semilab
