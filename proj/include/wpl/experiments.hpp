#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "wpl/extremizers.hpp"
#include "wpl/field.hpp"
#include "wpl/propagator.hpp"

namespace wpl {

// smallest torus side the auto-scaled families may use
inline constexpr double kMinTorusSide = 8.0;
// Nyquist radius over the annulus edge for the auto-scaled families
inline constexpr double kNyquistMargin = 1.05;
// unit-family grids grow with k; this caps their size
inline constexpr int kMaxUnitN = 4096;

struct ExperimentConfig {
    std::string experiment = "sharpness";  // sharpness, squarefunction, decoupling, localsmoothing, equivalence
    int n = 2;
    std::vector<double> p{12};
    std::string phase = "euclidean";
    int k_min = 3, k_max = 7;
    int N = 1024;
    double L = 0;       // 0: family default
    double gamma = 2;
    int time_intervals = 0;  // 0: max(64, 8 * 2^k) on [0, 1]
    std::string input = "full";  // full, unit, random, zero
    double c = 0;                // 0: automatic
    unsigned seed = 1;
    double s = 0;                // Sobolev offset added to the rhs order
    int khintchine_trials = 4;
    int khintchine_intervals = 64;
    int drop_sector = -1;        // mutation: this chi_nu forced to 0

    nlohmann::json to_json() const;
    // ConfigError names the offending field path
    static ExperimentConfig from_json(const nlohmann::json& j);
    void validate() const;
    // grid used for input family `input` at scale k
    GridSpec grid_for(int k) const;
};

nlohmann::json default_config_json();
// "a.b=value"; value parsed as JSON when it parses, else kept as a string
void apply_override(nlohmann::json& j, const std::string& assignment);
// markdown table of every key with its default and meaning
std::string config_reference();

struct ScalingRecord {
    int k = 0;
    double p = 0;
    double lhs = 0, rhs = 0;
    nlohmann::json diagnostics;
    double log2_ratio() const;
    nlohmann::json to_json() const;
};

struct FitResult {
    double slope = 0;
    double intercept = 0;
    double max_residual = 0;
    int k_min = 0, k_max = 0;
    std::size_t points = 0;
    // largest slope change over 3-point windows, for comparison with max_residual
    double subrange_spread = 0;
    nlohmann::json to_json() const;
};

// least squares of log2(lhs / rhs) against k; needs 3 distinct k
FitResult fit_power_law(const std::vector<ScalingRecord>& records);
FitResult fit_line(const std::vector<double>& k, const std::vector<double>& y);

struct Check {
    std::string name;
    double value = 0;
    double bound = 0;
    std::string relation;  // ">=", "<=", "in"
    bool pass = false;
    bool skipped = false;
    nlohmann::json detail;
    nlohmann::json to_json() const;
};

struct PFit {
    double p = 0;
    FitResult fit;
    double reference_slope = 0;  // predicted slope for the plot
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<ScalingRecord> records;
    std::vector<PFit> fits;
    std::vector<Check> checks;
    nlohmann::json extras;
    bool passed() const;
};

// the input family at scale k; exposed for the CLI and tests
Extremizer make_input(const ExperimentConfig& cfg, int k, const SectorPartition& part);
// c used for every k of a sweep (resolved at k_max when automatic)
double resolve_c(const ExperimentConfig& cfg);

ExperimentResult run_sharpness_experiment(const ExperimentConfig& cfg);
ExperimentResult run_squarefunction_experiment(const ExperimentConfig& cfg);
ExperimentResult run_decoupling_experiment(const ExperimentConfig& cfg);
ExperimentResult run_localsmoothing_experiment(const ExperimentConfig& cfg);
// dispatch on cfg.experiment (not the suite)
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct SuiteReport {
    ExperimentConfig config;
    std::vector<Check> tests;
    bool passed() const;
    nlohmann::json to_json() const;
};

SuiteReport run_equivalence_suite(const ExperimentConfig& cfg);

// space-time norms are the dominant cost and get shared across experiments in one process
void clear_spacetime_cache();

}  // namespace wpl
