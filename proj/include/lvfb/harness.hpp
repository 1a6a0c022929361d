#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lvfb/config.hpp"
#include "lvfb/fbsolver.hpp"
#include "lvfb/model.hpp"
#include "lvfb/semiwave.hpp"
#include "lvfb/speed.hpp"

namespace lvfb {

enum class Scenario { SemiWaveTable, SpeedSelection, SpreadingVerification, MuSweep, ConvergenceStudy };

std::string to_string(Scenario scenario);
/// Accepts the enum name or the CLI alias (semiwave, speed, simulate, sweep, converge).
std::optional<Scenario> scenario_from_string(const std::string& name);

struct ExperimentSpec {
    ModelParams model;
    Scenario scenario = Scenario::SpeedSelection;

    XiGrid grid;
    double tol_s = 1e-4;

    // SemiWaveTable
    std::vector<double> s_list;

    // MuSweep; empty means {0.1, 1, 10, 100}
    std::vector<double> mu_list;

    // ConvergenceStudy
    double s_probe = 0.5;
    int refinements = 2;          ///< grid halvings beyond `grid`
    bool dt_study = false;        ///< also halve dt twice on a short free-boundary run
    double dt_study_t_end = 10.0;

    // SpreadingVerification
    double h0 = 5.0;
    double t_end = 200.0;
    double dt = 0.01;
    int Ny = 400;
    double dr = 0.1;
    double u_amplitude = 1.0;
    double v_const = 1.0;
    std::optional<double> R_max;  ///< default: h0 + s0_upper t_end + travel margin
    double sample_interval = 0.5;
    double window_fraction = 0.5;
    std::vector<double> snapshot_times;
    ClassifyThresholds thresholds;

    std::filesystem::path out_dir;  ///< empty: no files written
    bool quiet = true;

    /// Throws DomainError on missing or inconsistent knobs.
    void validate() const;

    /// Parameters plus grid, stable across runs; keys the frozen store.
    std::string fingerprint() const;
};

/// Every key understood by spec_from_config (model keys included).
const std::vector<std::string>& known_config_keys();

/// Reads the model and scenario knobs; rejects unknown keys with ConfigError.
ExperimentSpec spec_from_config(const KeyValueConfig& cfg, Scenario scenario);

struct Report {
    Scenario scenario = Scenario::SpeedSelection;
    std::string fingerprint;
    std::string status = "ok";  ///< outcome label for SpreadingVerification
    bool undetermined = false;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::filesystem::path> files;

    std::optional<double> metric(const std::string& key) const;
    /// `RESULT <scenario> status=<status> key=value ...`
    std::string summary_line() const;
};

/// Runs one scenario. Module errors are rethrown with the scenario and
/// fingerprint prefixed to the message; the error type is kept.
Report run(const ExperimentSpec& spec);

/// Runs the specs concurrently (one task each) and returns reports in order.
std::vector<Report> run_batch(const std::vector<ExperimentSpec>& specs);

// ---------------------------------------------------------------------------
// Frozen references

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FrozenReference {
    std::string fingerprint;
    double value = 0.0;
    double tolerance = 0.0;
    std::string note;
};

/// Plain CSV `fingerprint,value,tolerance,note`.
class FrozenStore {
public:
    static FrozenStore load(const std::filesystem::path& path);
    /// Missing file -> empty store; corrupted file -> StoreError.
    static FrozenStore load_or_empty(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    const FrozenReference* find(const std::string& fingerprint) const;
    void upsert(FrozenReference ref);
    const std::vector<FrozenReference>& entries() const { return entries_; }

private:
    std::vector<FrozenReference> entries_;
};

struct FrozenResult {
    std::string fingerprint;
    double value = 0.0;
};

/// One result per metric, keyed `<report fingerprint>#<metric>`.
std::vector<FrozenResult> frozen_results(const Report& report);

enum class CheckStatus { Pass, Fail, New };

std::string to_string(CheckStatus status);

struct CheckEntry {
    std::string fingerprint;
    double value = 0.0;
    std::optional<double> frozen;
    double tolerance = 0.0;
    CheckStatus status = CheckStatus::New;
};

struct CheckReport {
    std::vector<CheckEntry> entries;

    bool passed() const;
    long count(CheckStatus status) const;
    std::string to_text() const;
};

/// Unknown fingerprints are reported New, never Fail.
CheckReport check_frozen(const FrozenStore& store, const std::vector<FrozenResult>& results);

/// Upserts every result with tolerance max(abs_tol, rel_tol |value|).
void freeze(FrozenStore& store, const std::vector<FrozenResult>& results, double rel_tol, double abs_tol,
            const std::string& note);

}  // namespace lvfb
